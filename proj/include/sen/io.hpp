#pragma once

#include "sen/datagen.hpp"
#include "sen/diagnostics.hpp"
#include "sen/eval.hpp"
#include "sen/graph.hpp"
#include "sen/norm.hpp"
#include "sen/spectral.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace sen {

/// Point-cloud CSV: one row per point. A header row is optional; columns
/// named `truth` and `cluster_id` (or a final `label`, cluster id with 0 as
/// background) carry ground truth, every other column is a coordinate.
PointCloud read_point_cloud_csv(const std::string& path);
void write_point_cloud_csv(const std::string& path, const PointCloud& cloud);

/// Plain numeric CSV without header.
Matrix<double> read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix<double>& values);

/// Triplet file: `n nnz` then `i j w` with i <= j, 0-indexed.
template <typename Scalar>
void write_graph_triplets(const std::string& path, const AffinityGraph<Scalar>& graph);
AffinityGraph<double> read_graph_triplets(const std::string& path);

/// `n m`, a line of eigenvalues, then n rows of m eigenvector entries.
template <typename Scalar>
void write_eigensystem_csv(const std::string& path, const EigenSystem<Scalar>& es);
/// Degrees are not stored and come back empty.
EigenSystem<double> read_eigensystem_csv(const std::string& path);

/// Columns node, s, predicted.
template <typename Scalar>
void write_norm_csv(const std::string& path, const NormResult<Scalar>& nr);

/// Binary PGM of min-max scaled values; max_value 255 or 65535.
void write_pgm(const std::string& path, const Matrix<double>& image, int max_value = 255);

/// rows x cols image holding values(i) over the stride x stride cell
/// centred on centers[i]; uncovered pixels take the minimum value.
Matrix<double> render_patch_values(const Vector<double>& values,
                                   const std::vector<PixelCoord>& centers, Index rows, Index cols,
                                   Index stride);

/// eigenvalues.csv, eigenvalues_sorted.csv, norm_series.csv and gaps.csv.
void write_trace_csvs(const std::string& dir, const DynamicsTrace& trace);

nlohmann::json to_json(const TheoryReport& report);
nlohmann::json to_json(const Metrics& metrics);
nlohmann::json to_json(const AssumptionEstimate& est);
nlohmann::json to_json(const DynamicsTrace& trace);  // summary flags only

std::string format_double(double value);

}  // namespace sen
