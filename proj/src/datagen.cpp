#include "sen/datagen.hpp"

#include "sen/errors.hpp"
#include "sen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sen {

PointCloud gen_circle_clusters(const CircleClusterOptions& o) {
  if (!(o.delta > 0.0 && o.delta < 1.0) || o.n < 2 || o.k_clusters < 1) {
    throw Error(Errc::BadFraction, "need 0 < delta < 1, n >= 2 and K >= 1");
  }
  const Index n_c = Index(std::llround(o.delta * double(o.n)));
  if (n_c < o.k_clusters || n_c >= o.n) {
    throw Error(Errc::BadFraction, "round(delta n) = " + std::to_string(n_c) +
                                       " leaves an empty block or cluster");
  }
  const Index n_b = o.n - n_c;
  Rng rng(o.seed);
  PointCloud cloud;
  cloud.points.resize(o.n, 2);
  cloud.truth = Mask::Constant(o.n, false);
  cloud.cluster_id.assign(std::size_t(o.n), 0);

  for (Index i = 0; i < n_b; ++i) {
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    cloud.points(i, 0) = std::cos(a) + o.eps_b * rng.normal();
    cloud.points(i, 1) = std::sin(a) + o.eps_b * rng.normal();
  }
  const Index base = n_c / o.k_clusters;
  const Index extra = n_c % o.k_clusters;
  Index row = n_b;
  for (int j = 1; j <= o.k_clusters; ++j) {
    const Index count = base + (j <= extra ? 1 : 0);
    const double a = 2.0 * std::numbers::pi * double(j) / double(o.k_clusters);
    const double mx = o.center_radius * std::cos(a);
    const double my = o.center_radius * std::sin(a);
    for (Index i = 0; i < count; ++i, ++row) {
      cloud.points(row, 0) = mx + o.eps_c * rng.normal();
      cloud.points(row, 1) = my + o.eps_c * rng.normal();
      cloud.truth(row) = true;
      cloud.cluster_id[std::size_t(row)] = j;
    }
  }
  return cloud;
}

SyntheticImage gen_stripe_image(Index resolution) {
  if (resolution < 32) {
    throw Error(Errc::OutOfRange, "resolution must be at least 32");
  }
  SyntheticImage img;
  img.pixels.resize(resolution, resolution);
  img.bump.resize(resolution, resolution);
  const double h = 2.0 / double(resolution - 1);
  const double two_var = 2.0 * 0.05 * 0.05;
  for (Index r = 0; r < resolution; ++r) {
    const double y = -1.0 + h * double(r);
    for (Index c = 0; c < resolution; ++c) {
      const double x = -1.0 + h * double(c);
      const double phase = 0.05 * x + y + 1.5;
      const double stripes = 1.0 + 0.5 * std::cos(phase * phase * 2.0 * std::numbers::pi);
      const double bump = 0.6 * std::exp(-(x * x + y * y) / two_var);
      img.bump(r, c) = bump;
      img.pixels(r, c) = stripes + bump;
    }
  }
  return img;
}

PatchSet extract_patches(const Matrix<double>& pixels, Index patch, Index stride) {
  if (patch < 1 || stride < 1) {
    throw Error(Errc::OutOfRange, "patch and stride must be positive");
  }
  if (patch > pixels.rows() || patch > pixels.cols()) {
    throw Error(Errc::PatchTooLarge, "patch " + std::to_string(patch) + " exceeds the " +
                                         std::to_string(pixels.rows()) + "x" +
                                         std::to_string(pixels.cols()) + " image");
  }
  PatchSet set;
  set.grid_rows = (pixels.rows() - patch) / stride + 1;
  set.grid_cols = (pixels.cols() - patch) / stride + 1;
  const Index count = set.grid_rows * set.grid_cols;
  set.cloud.points.resize(count, patch * patch);
  set.centers.reserve(std::size_t(count));
  Index row = 0;
  for (Index gr = 0; gr < set.grid_rows; ++gr) {
    for (Index gc = 0; gc < set.grid_cols; ++gc, ++row) {
      const Index r0 = gr * stride;
      const Index c0 = gc * stride;
      for (Index i = 0; i < patch; ++i) {
        for (Index j = 0; j < patch; ++j) {
          set.cloud.points(row, i * patch + j) = pixels(r0 + i, c0 + j);
        }
      }
      set.centers.push_back({r0 + patch / 2, c0 + patch / 2});
    }
  }
  return set;
}

Mask label_patches(const SyntheticImage& img, const std::vector<PixelCoord>& centers,
                   double delta_target) {
  Mask labels = Mask::Constant(Index(centers.size()), false);
  if (centers.empty()) return labels;
  Vector<double> values(Index(centers.size()));
  for (std::size_t i = 0; i < centers.size(); ++i) {
    values(Index(i)) = img.bump(centers[i].row, centers[i].col);
  }
  const double q = std::clamp(1.0 - delta_target, 0.0, 1.0);
  const double tau = empirical_quantile<double>(values, q);
  for (Index i = 0; i < values.size(); ++i) {
    labels(i) = values(i) > tau;
  }
  return labels;
}

std::vector<Index> subsample_indices(Index n, Index count, Rng& rng) {
  if (count < 0 || count > n) {
    throw Error(Errc::OutOfRange, "cannot draw " + std::to_string(count) + " of " +
                                      std::to_string(n) + " indices");
  }
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[std::size_t(i)] = i;
  // Partial Fisher-Yates.
  for (Index i = 0; i < count; ++i) {
    const Index j = i + rng.below(n - i);
    std::swap(pool[std::size_t(i)], pool[std::size_t(j)]);
  }
  pool.resize(std::size_t(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

PointCloud select_rows(const PointCloud& cloud, const std::vector<Index>& rows) {
  PointCloud out;
  out.points.resize(Index(rows.size()), cloud.points.cols());
  const bool labeled = cloud.labeled();
  if (labeled) out.truth.resize(Index(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.points.row(Index(i)) = cloud.points.row(rows[i]);
    if (labeled) out.truth(Index(i)) = cloud.truth(rows[i]);
    if (!cloud.cluster_id.empty()) out.cluster_id.push_back(cloud.cluster_id[std::size_t(rows[i])]);
  }
  return out;
}

}  // namespace sen
