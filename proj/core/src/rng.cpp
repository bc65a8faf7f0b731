#include "hbf/rng.hpp"

#include <cmath>
#include <numbers>

namespace hbf {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index,
                         std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ index) ^
                    (stream * 0xd1b54a32d192ed03ULL));
}

cd complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

double laplacian(Rng& rng, double scale) {
  if (scale <= 0.0) return 0.0;
  std::exponential_distribution<double> e(1.0 / scale);
  const double a = e(rng);
  const double b = e(rng);
  return a - b;
}

double uniform_angle(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  return u(rng);
}

CMat random_unit_modulus(Rng& rng, int rows, int cols) {
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = std::polar(1.0, uniform_angle(rng));
  }
  return m;
}

CMat random_gaussian(Rng& rng, int rows, int cols) {
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = complex_gaussian(rng);
  }
  return m;
}

}  // namespace hbf
