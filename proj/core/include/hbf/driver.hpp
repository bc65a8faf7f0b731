#pragma once

// Alternating transmit/receive optimization, initialization, MMSE/WMMSE
// criteria and final phase quantization.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hbf/channel.hpp"
#include "hbf/manifold.hpp"
#include "hbf/mmse.hpp"
#include "hbf/spectral.hpp"
#include "hbf/types.hpp"

namespace hbf::driver {

enum class Algorithm { MO, GEVD, EVD_LB, EVD_UB, OMP, FULL_DIGITAL };
enum class Criterion { MMSE, WMMSE };
enum class InitMode { VFD, RANDOM };

std::string to_string(Algorithm a);
std::string to_string(Criterion c);
std::string to_string(InitMode m);
/// Case-insensitive; accepts "evd-lb" and "evd_lb" spellings. Throws
/// InvalidArgument on unknown names.
Algorithm parse_algorithm(const std::string& s);
Criterion parse_criterion(const std::string& s);
InitMode parse_init_mode(const std::string& s);

struct SolverOptions {
  Algorithm algorithm = Algorithm::MO;
  Criterion criterion = Criterion::MMSE;
  InitMode init = InitMode::VFD;
  double outer_tol = 1e-5;
  int outer_cap = 50;
  manifold::MoOptions mo;
  int power_iters = 10;
  std::uint64_t seed = 0;
  std::optional<int> quant_bits;
  /// WMMSE only: keep every Lambda_k at I. Used to check the reduction to
  /// the MMSE path.
  bool freeze_weights = false;

  /// Throws InvalidArgument for an inconsistent combination (GEVD with
  /// several subcarriers, EVD_UB under WMMSE, bad tolerances).
  void validate(const SystemDims& dims) const;
};

/// Transmit and receive array-response dictionaries for OMP.
struct Dictionaries {
  spectral::Dictionary tx;
  spectral::Dictionary rx;
};

Dictionaries make_dictionaries(const channel::ChannelRealization& ch);

struct OuterRecord {
  int outer_iter = 0;
  double objective = 0.0;
  double spectral_efficiency = 0.0;
};

struct RunTrace {
  std::vector<OuterRecord> records;
  bool returned_best = false;  // best-so-far iterate differs from the last one
  int stalled_line_searches = 0;
  int clamped_weights = 0;
  /// Inner MO traces (precoder then combiner, per outer iteration) when the
  /// caller asked for them.
  std::vector<std::vector<manifold::MoIterate>> inner;

  int iterations() const { return static_cast<int>(records.size()); }
};

/// outer_iter,objective,spectral_efficiency
void write_run_trace_csv(std::ostream& os, const RunTrace& trace);

/// Full-digital MMSE combiners, one per subcarrier.
std::vector<CMat> vfd_init(const std::vector<CMat>& h, const SystemDims& dims);

struct SolveResult {
  HybridBeamformer beamformer;
  WeightMatrices weights;  // WMMSE only; identity matrices otherwise
  RunTrace trace;
};

struct RunControl {
  bool keep_inner_traces = false;
};

SolveResult alternate_mmse(const std::vector<CMat>& h, const SystemDims& dims,
                           const SolverOptions& opts,
                           const Dictionaries* dicts = nullptr,
                           const RunControl& ctl = {});

SolveResult alternate_wmmse(const std::vector<CMat>& h, const SystemDims& dims,
                            const SolverOptions& opts,
                            const Dictionaries* dicts = nullptr,
                            const RunControl& ctl = {});

/// Rounds every analog phase to the nearest multiple of 2 pi / 2^bits (ties
/// toward zero), then recomputes V_U (from the previous W_B with the
/// quantized W_RF), beta and W_B once. When rounding makes an analog matrix
/// rank-deficient, the digital part of each dropped column is zero.
HybridBeamformer quantize_phases(const HybridBeamformer& bf, int bits,
                                 const std::vector<CMat>& h, double noise_var);

/// Phase rounding on its own.
CMat quantize_matrix(const CMat& m, int bits);

/// Any algorithm/criterion; FULL_DIGITAL returns the oracle with no hybrid
/// part. Applies quantization when opts.quant_bits is set.
struct LinkSolution {
  LinkBeamformer link;
  std::optional<SolveResult> hybrid;
};

LinkSolution solve(const std::vector<CMat>& h, const SystemDims& dims,
                   const SolverOptions& opts, const Dictionaries* dicts = nullptr,
                   const RunControl& ctl = {});

}  // namespace hbf::driver
