#pragma once

// Clustered geometric mmWave channel with half-wavelength ULAs at both ends.
// The broadband variant maps cluster i to delay tap i, giving
//
//   H_k = sqrt(Nt Nr / (Nc Nr_rays)) sum_ij alpha_ij a_r(aoa_ij) a_t(aod_ij)^H
//         * exp(-j 2 pi i k / N),   i = 0..Nc-1, k = 0..N-1.

#include <vector>

#include "hbf/rng.hpp"
#include "hbf/types.hpp"

namespace hbf::channel {

struct ArrayGeometry {
  int num_elements = 1;
};

struct RayParams {
  int num_clusters = 0;
  int rays_per_cluster = 0;
  CMat gains;  // num_clusters x rays_per_cluster
  RMat aod;    // radians, same shape as gains
  RMat aoa;
  RVec mean_cluster_aod;  // radians, one per cluster
  RVec mean_cluster_aoa;
  double angular_spread_deg = 0.0;

  void validate() const;
};

struct ChannelRealization {
  std::vector<CMat> per_subcarrier;  // each n_rx x n_tx
  RayParams rays;

  int num_subcarriers() const { return static_cast<int>(per_subcarrier.size()); }
  int n_rx() const { return static_cast<int>(per_subcarrier.front().rows()); }
  int n_tx() const { return static_cast<int>(per_subcarrier.front().cols()); }
};

/// (1/sqrt(M)) [1, e^{j pi sin(angle)}, ..., e^{j pi (M-1) sin(angle)}]^T.
CVec array_response(ArrayGeometry geom, double angle);

/// Cluster means uniform on [0, 2pi); per-ray angles add a Laplacian deviate
/// whose standard deviation equals the angular spread; gains are CN(0, 1).
RayParams draw_rays(Rng& rng, int num_clusters, int rays_per_cluster,
                    double angular_spread_deg);

ChannelRealization gen_channel(const RayParams& rays, ArrayGeometry tx,
                               ArrayGeometry rx, int num_subcarriers);

/// Convenience: draw rays from a fresh engine seeded with `seed` and build the
/// channel.
ChannelRealization random_channel(std::uint64_t seed, int n_tx, int n_rx,
                                  int num_subcarriers, int num_clusters = 5,
                                  int rays_per_cluster = 10,
                                  double angular_spread_deg = 10.0);

/// Columns are the array responses at the given angles, cluster-major order
/// (ray j of cluster i sits at column i * rays_per_cluster + j).
CMat response_matrix(ArrayGeometry geom, const RMat& angles);

}  // namespace hbf::channel
