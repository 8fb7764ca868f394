#pragma once

#include "sen/random.hpp"
#include "sen/types.hpp"

#include <cstdint>
#include <vector>

namespace sen {

/// One point per row. `truth` and `cluster_id` are empty when unlabeled;
/// cluster_id is 0 for background and j = 1..K for cluster j.
struct PointCloud {
  Matrix<double> points;
  Mask truth;
  std::vector<int> cluster_id;

  Index size() const { return points.rows(); }
  bool labeled() const { return truth.size() == points.rows(); }
};

struct SyntheticImage {
  Matrix<double> pixels;  // rows index y, columns index x
  Matrix<double> bump;
};

struct PixelCoord {
  Index row = 0;
  Index col = 0;
};

struct PatchSet {
  PointCloud cloud;
  std::vector<PixelCoord> centers;
  Index grid_rows = 0;
  Index grid_cols = 0;
};

struct CircleClusterOptions {
  Index n = 5000;
  int k_clusters = 10;
  double delta = 0.1;
  double eps_b = 0.01;
  double eps_c = 0.02;
  // Distance of the cluster centres from the origin.
  double center_radius = 1.12;
  std::uint64_t seed = 1;
};

/// round((1 - delta) n) background points y + eta, y uniform on the unit
/// circle and eta ~ N(0, eps_b^2 I), followed by round(delta n) cluster
/// points split over K Gaussians N(mu_j, eps_c^2 I) with mu_j at angle
/// 2 pi j / K and radius center_radius. Leftover points go to the first
/// clusters. Throws BadFraction when a block or a cluster would be empty.
PointCloud gen_circle_clusters(const CircleClusterOptions& options);

/// I(x, y) = 1 + cos((0.05 x + y + 1.5)^2 2 pi) / 2 + 0.6 exp(-(x^2 + y^2) / (2 0.05^2))
/// sampled on a resolution x resolution grid over [-1, 1]^2.
SyntheticImage gen_stripe_image(Index resolution);

/// Every patch x patch window at offsets 0, stride, 2 stride, ... lying
/// fully inside the image, flattened row-major. Centres are offset +
/// patch / 2. Throws PatchTooLarge when the patch exceeds the image.
PatchSet extract_patches(const Matrix<double>& pixels, Index patch, Index stride);

/// True where the bump value at the patch centre exceeds the
/// (1 - delta_target)-quantile of those values.
Mask label_patches(const SyntheticImage& img, const std::vector<PixelCoord>& centers,
                   double delta_target);

/// `count` distinct indices drawn uniformly from 0..n-1, sorted.
std::vector<Index> subsample_indices(Index n, Index count, Rng& rng);

PointCloud select_rows(const PointCloud& cloud, const std::vector<Index>& rows);

}  // namespace sen
