#include "hbf/channel.hpp"

#include <cmath>
#include <numbers>

namespace hbf::channel {

void RayParams::validate() const {
  if (num_clusters < 1 || rays_per_cluster < 1) {
    throw InvalidArgument("RayParams: cluster and ray counts must be positive");
  }
  if (gains.rows() != num_clusters || gains.cols() != rays_per_cluster ||
      aod.rows() != num_clusters || aod.cols() != rays_per_cluster ||
      aoa.rows() != num_clusters || aoa.cols() != rays_per_cluster) {
    throw DimensionError("RayParams: gain/angle arrays must be Nc x Nr");
  }
  if (!aod.allFinite() || !aoa.allFinite() || !gains.allFinite()) {
    throw InvalidArgument("RayParams: non-finite gain or angle");
  }
  if (angular_spread_deg < 0.0) {
    throw InvalidArgument("RayParams: negative angular spread");
  }
}

CVec array_response(ArrayGeometry geom, double angle) {
  const int m = geom.num_elements;
  if (m < 1) throw InvalidArgument("array_response: num_elements must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  const double phase_step = std::numbers::pi * std::sin(angle);
  CVec a(m);
  for (int n = 0; n < m; ++n) a(n) = std::polar(scale, phase_step * n);
  return a;
}

RayParams draw_rays(Rng& rng, int num_clusters, int rays_per_cluster,
                    double angular_spread_deg) {
  if (num_clusters < 1 || rays_per_cluster < 1) {
    throw InvalidArgument("draw_rays: cluster and ray counts must be positive");
  }
  if (angular_spread_deg < 0.0) {
    throw InvalidArgument("draw_rays: negative angular spread");
  }
  RayParams r;
  r.num_clusters = num_clusters;
  r.rays_per_cluster = rays_per_cluster;
  r.angular_spread_deg = angular_spread_deg;
  r.gains.resize(num_clusters, rays_per_cluster);
  r.aod.resize(num_clusters, rays_per_cluster);
  r.aoa.resize(num_clusters, rays_per_cluster);
  r.mean_cluster_aod.resize(num_clusters);
  r.mean_cluster_aoa.resize(num_clusters);

  // Laplacian scale b gives standard deviation b*sqrt(2).
  const double scale = angular_spread_deg * std::numbers::pi / 180.0 / std::sqrt(2.0);
  for (int i = 0; i < num_clusters; ++i) {
    r.mean_cluster_aod(i) = uniform_angle(rng);
    r.mean_cluster_aoa(i) = uniform_angle(rng);
    for (int j = 0; j < rays_per_cluster; ++j) {
      r.gains(i, j) = complex_gaussian(rng);
      r.aod(i, j) = r.mean_cluster_aod(i) + laplacian(rng, scale);
      r.aoa(i, j) = r.mean_cluster_aoa(i) + laplacian(rng, scale);
    }
  }
  return r;
}

ChannelRealization gen_channel(const RayParams& rays, ArrayGeometry tx,
                               ArrayGeometry rx, int num_subcarriers) {
  rays.validate();
  if (num_subcarriers < 1) {
    throw InvalidArgument("gen_channel: num_subcarriers must be >= 1");
  }
  const int nt = tx.num_elements;
  const int nr = rx.num_elements;
  const double norm = std::sqrt(static_cast<double>(nt) * nr /
                                (static_cast<double>(rays.num_clusters) *
                                 rays.rays_per_cluster));

  // Per-cluster narrowband contribution; the delay phase only depends on the
  // cluster index.
  std::vector<CMat> cluster_terms;
  cluster_terms.reserve(static_cast<std::size_t>(rays.num_clusters));
  for (int i = 0; i < rays.num_clusters; ++i) {
    CMat acc = CMat::Zero(nr, nt);
    for (int j = 0; j < rays.rays_per_cluster; ++j) {
      const CVec ar = array_response(rx, rays.aoa(i, j));
      const CVec at = array_response(tx, rays.aod(i, j));
      acc.noalias() += rays.gains(i, j) * ar * at.adjoint();
    }
    cluster_terms.push_back(norm * acc);
  }

  ChannelRealization out;
  out.rays = rays;
  out.per_subcarrier.reserve(static_cast<std::size_t>(num_subcarriers));
  for (int k = 0; k < num_subcarriers; ++k) {
    CMat h = CMat::Zero(nr, nt);
    for (int i = 0; i < rays.num_clusters; ++i) {
      if (num_subcarriers == 1 || i * k == 0) {
        h += cluster_terms[static_cast<std::size_t>(i)];
      } else {
        const double phase = -2.0 * std::numbers::pi * i * k / num_subcarriers;
        h += std::polar(1.0, phase) * cluster_terms[static_cast<std::size_t>(i)];
      }
    }
    out.per_subcarrier.push_back(std::move(h));
  }
  return out;
}

ChannelRealization random_channel(std::uint64_t seed, int n_tx, int n_rx,
                                  int num_subcarriers, int num_clusters,
                                  int rays_per_cluster, double angular_spread_deg) {
  Rng rng(seed);
  const RayParams rays =
      draw_rays(rng, num_clusters, rays_per_cluster, angular_spread_deg);
  return gen_channel(rays, ArrayGeometry{n_tx}, ArrayGeometry{n_rx},
                     num_subcarriers);
}

CMat response_matrix(ArrayGeometry geom, const RMat& angles) {
  const auto rows = angles.rows();
  const auto cols = angles.cols();
  CMat out(geom.num_elements, rows * cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out.col(i * cols + j) = array_response(geom, angles(i, j));
    }
  }
  return out;
}

}  // namespace hbf::channel
