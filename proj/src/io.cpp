#include "sen/io.hpp"

#include "sen/errors.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sen {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(Errc::Io, "write to '" + path + "' failed");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& text, double& value) {
  if (text.empty()) return false;
  const char* first = text.data();
  if (*first == '+') ++first;
  const auto [end, ec] = std::from_chars(first, text.data() + text.size(), value);
  return ec == std::errc() && end == text.data() + text.size();
}

double to_double(const std::string& text, const std::string& path, std::size_t line) {
  double v = 0.0;
  if (!parse_double(text, v)) {
    throw Error(Errc::Parse, path + ":" + std::to_string(line) + ": bad number '" + text + "'");
  }
  return v;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

PointCloud read_point_cloud_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto fields = split(line, ',');
    if (rows.empty() && header.empty()) {
      double probe = 0.0;
      if (!parse_double(fields.front(), probe)) {
        header = std::move(fields);
        continue;
      }
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(to_double(f, path, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(Errc::DimensionMismatch, path + ":" + std::to_string(line_no) + ": expected " +
                                               std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::Empty, "'" + path + "' holds no points");
  const std::size_t cols = rows.front().size();
  if (!header.empty() && header.size() != cols) {
    throw Error(Errc::DimensionMismatch, path + ": header has " + std::to_string(header.size()) +
                                             " columns, rows have " + std::to_string(cols));
  }
  int truth_col = -1;
  int id_col = -1;
  int label_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "truth") truth_col = int(c);
    if (header[c] == "cluster_id") id_col = int(c);
    if (header[c] == "label" && c + 1 == header.size()) label_col = int(c);
  }
  std::vector<std::size_t> coord_cols;
  for (std::size_t c = 0; c < cols; ++c) {
    if (int(c) != truth_col && int(c) != id_col && int(c) != label_col) coord_cols.push_back(c);
  }
  PointCloud cloud;
  const Index n = Index(rows.size());
  cloud.points.resize(n, Index(coord_cols.size()));
  for (Index i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < coord_cols.size(); ++c) {
      cloud.points(i, Index(c)) = rows[std::size_t(i)][coord_cols[c]];
    }
  }
  const int id_source = id_col >= 0 ? id_col : label_col;
  if (id_source >= 0) {
    cloud.cluster_id.resize(std::size_t(n));
    for (Index i = 0; i < n; ++i) cloud.cluster_id[std::size_t(i)] = int(rows[std::size_t(i)][std::size_t(id_source)]);
  }
  if (truth_col >= 0 || id_source >= 0) {
    cloud.truth.resize(n);
    for (Index i = 0; i < n; ++i) {
      cloud.truth(i) = truth_col >= 0 ? rows[std::size_t(i)][std::size_t(truth_col)] != 0.0
                                      : cloud.cluster_id[std::size_t(i)] != 0;
    }
  }
  return cloud;
}

void write_point_cloud_csv(const std::string& path, const PointCloud& cloud) {
  std::ofstream out = open_out(path);
  const bool labeled = cloud.labeled();
  const bool ids = cloud.cluster_id.size() == std::size_t(cloud.size());
  for (Index c = 0; c < cloud.points.cols(); ++c) out << (c ? "," : "") << "x" << c;
  if (labeled) out << ",truth";
  if (ids) out << ",cluster_id";
  out << '\n';
  for (Index i = 0; i < cloud.size(); ++i) {
    for (Index c = 0; c < cloud.points.cols(); ++c) {
      out << (c ? "," : "") << format_double(cloud.points(i, c));
    }
    if (labeled) out << ',' << (cloud.truth(i) ? 1 : 0);
    if (ids) out << ',' << cloud.cluster_id[std::size_t(i)];
    out << '\n';
  }
  finish(out, path);
}

Matrix<double> read_matrix_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::vector<double> row;
    for (const auto& f : split(line, ',')) row.push_back(to_double(f, path, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(Errc::DimensionMismatch, path + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::Empty, "'" + path + "' is empty");
  Matrix<double> m(Index(rows.size()), Index(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[std::size_t(i)][std::size_t(j)];
  }
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix<double>& values) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      out << (j ? "," : "") << format_double(values(i, j));
    }
    out << '\n';
  }
  finish(out, path);
}

template <typename Scalar>
void write_graph_triplets(const std::string& path, const AffinityGraph<Scalar>& graph) {
  const SparseMatrix<Scalar>& w = graph.weights();
  Index stored = 0;
  for (Index col = 0; col < w.outerSize(); ++col) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(w, col); it; ++it) {
      if (it.row() <= col) ++stored;
    }
  }
  std::ofstream out = open_out(path);
  out << graph.size() << ' ' << stored << '\n';
  for (Index col = 0; col < w.outerSize(); ++col) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(w, col); it; ++it) {
      if (it.row() <= col) {
        out << it.row() << ' ' << col << ' ' << format_double(double(it.value())) << '\n';
      }
    }
  }
  finish(out, path);
}

AffinityGraph<double> read_graph_triplets(const std::string& path) {
  std::ifstream in = open_in(path);
  Index n = 0;
  Index nnz = 0;
  if (!(in >> n >> nnz) || n < 1 || nnz < 0) {
    throw Error(Errc::Parse, path + ": bad header, expected 'n nnz'");
  }
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(std::size_t(2 * nnz));
  for (Index k = 0; k < nnz; ++k) {
    Index i = 0;
    Index j = 0;
    std::string wtext;
    if (!(in >> i >> j >> wtext)) {
      throw Error(Errc::Parse, path + ": expected " + std::to_string(nnz) + " triplets");
    }
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw Error(Errc::IndexOutOfRange, path + ": node index outside 0.." + std::to_string(n - 1));
    }
    const double w = to_double(wtext, path, std::size_t(k + 2));
    triplets.emplace_back(i, j, w);
    if (i != j) triplets.emplace_back(j, i, w);
  }
  SparseMatrix<double> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return AffinityGraph<double>::from_weights(std::move(m));
}

template <typename Scalar>
void write_eigensystem_csv(const std::string& path, const EigenSystem<Scalar>& es) {
  std::ofstream out = open_out(path);
  out << es.size() << ' ' << es.count() << '\n';
  for (Index k = 0; k < es.count(); ++k) {
    out << (k ? "," : "") << format_double(double(es.eigenvalues(k)));
  }
  out << '\n';
  for (Index x = 0; x < es.size(); ++x) {
    for (Index k = 0; k < es.count(); ++k) {
      out << (k ? "," : "") << format_double(double(es.eigenvectors(x, k)));
    }
    out << '\n';
  }
  finish(out, path);
}

EigenSystem<double> read_eigensystem_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  Index n = 0;
  Index m = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> n >> m) || n < 1 || m < 1) {
    throw Error(Errc::Parse, path + ": bad header, expected 'n m'");
  }
  const auto read_row = [&](Index expected, std::size_t line_no) {
    if (!std::getline(in, line)) throw Error(Errc::Parse, path + ": truncated file");
    const auto fields = split(line, ',');
    if (Index(fields.size()) != expected) {
      throw Error(Errc::DimensionMismatch, path + ":" + std::to_string(line_no) + ": expected " +
                                               std::to_string(expected) + " values");
    }
    Vector<double> row(expected);
    for (Index k = 0; k < expected; ++k) row(k) = to_double(fields[std::size_t(k)], path, line_no);
    return row;
  };
  EigenSystem<double> es;
  es.eigenvalues = read_row(m, 2);
  es.eigenvectors.resize(n, m);
  for (Index x = 0; x < n; ++x) es.eigenvectors.row(x) = read_row(m, std::size_t(x + 3)).transpose();
  return es;
}

template <typename Scalar>
void write_norm_csv(const std::string& path, const NormResult<Scalar>& nr) {
  std::ofstream out = open_out(path);
  out << "node,s,predicted\n";
  for (Index x = 0; x < nr.s.size(); ++x) {
    out << x << ',' << format_double(double(nr.s(x))) << ',';
    if (nr.predicted) out << ((*nr.predicted)(x) ? 1 : 0);
    out << '\n';
  }
  finish(out, path);
}

void write_pgm(const std::string& path, const Matrix<double>& image, int max_value) {
  if (max_value != 255 && max_value != 65535) {
    throw Error(Errc::OutOfRange, "PGM depth must be 255 or 65535");
  }
  const double lo = image.minCoeff();
  const double hi = image.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  std::ofstream out = open_out(path, true);
  out << "P5\n" << image.cols() << ' ' << image.rows() << '\n' << max_value << '\n';
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index c = 0; c < image.cols(); ++c) {
      const auto level = unsigned(std::lround((image(r, c) - lo) / span * max_value));
      if (max_value == 255) {
        out.put(char(level));
      } else {
        out.put(char(level >> 8));
        out.put(char(level & 0xff));
      }
    }
  }
  finish(out, path);
}

Matrix<double> render_patch_values(const Vector<double>& values,
                                   const std::vector<PixelCoord>& centers, Index rows, Index cols,
                                   Index stride) {
  if (values.size() != Index(centers.size())) {
    throw Error(Errc::SizeMismatch, "one value per patch centre expected");
  }
  Matrix<double> image = Matrix<double>::Constant(rows, cols, values.size() ? values.minCoeff() : 0.0);
  const Index before = (stride - 1) / 2;
  const Index after = stride - 1 - before;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Index r0 = std::max<Index>(0, centers[i].row - before);
    const Index r1 = std::min(rows - 1, centers[i].row + after);
    const Index c0 = std::max<Index>(0, centers[i].col - before);
    const Index c1 = std::min(cols - 1, centers[i].col + after);
    for (Index r = r0; r <= r1; ++r) {
      for (Index c = c0; c <= c1; ++c) image(r, c) = values(Index(i));
    }
  }
  return image;
}

void write_trace_csvs(const std::string& dir, const DynamicsTrace& trace) {
  std::filesystem::create_directories(dir);
  const auto with_t = [&](const std::string& name, const Matrix<double>& by_column) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out = open_out(path);
    out << 't';
    for (Index k = 0; k < by_column.rows(); ++k) out << ",c" << k + 1;
    out << '\n';
    for (Index s = 0; s < by_column.cols(); ++s) {
      out << format_double(trace.t_grid(s));
      for (Index k = 0; k < by_column.rows(); ++k) out << ',' << format_double(by_column(k, s));
      out << '\n';
    }
    finish(out, path);
  };
  with_t("eigenvalues.csv", trace.eigenvalue_branches);
  with_t("eigenvalues_sorted.csv", trace.sorted_eigenvalues);
  with_t("norm_series.csv", trace.s_series);
  const std::string gaps = (std::filesystem::path(dir) / "gaps.csv").string();
  std::ofstream out = open_out(gaps);
  out << "t,gap\n";
  for (Index s = 0; s < trace.gap_series.size(); ++s) {
    out << format_double(trace.t_grid(s)) << ',' << format_double(trace.gap_series(s)) << '\n';
  }
  finish(out, gaps);
}

nlohmann::json to_json(const TheoryReport& r) {
  return {
      {"n", r.n},
      {"k_clusters", r.k_clusters},
      {"i_size", r.i_size},
      {"delta", r.delta},
      {"eps1", r.eps1},
      {"eps2", r.eps2},
      {"k_in_i", r.k_in_i},
      {"d_under", r.d_under},
      {"d_over", r.d_over},
      {"c_strength", r.c_strength},
      {"delta0_gap", r.delta0_gap},
      {"delta_cap", r.delta_cap},
      {"pound", r.pound},
      {"g0", r.g0},
      {"s_upper0", r.s_upper0},
      {"a2_ok", r.a2_ok},
      {"a2_literal_ok", r.a2_literal_ok},
      {"cond_i_ok", r.cond_i_ok},
      {"cond_ii_ok", r.cond_ii_ok},
      {"cond_ii_lhs", r.cond_ii_lhs},
      {"cond_ii_rhs", r.cond_ii_rhs},
      {"c_tilde", r.c_tilde},
      {"per_cluster_g", r.per_cluster_g},
      {"g_min0", r.g_min0},
      {"s_bar0", r.s_bar0},
      {"eq20_ok", r.eq20_ok},
  };
}

nlohmann::json to_json(const Metrics& m) {
  return {{"tp", m.tp},           {"fp", m.fp},
          {"fn", m.fn},           {"tn", m.tn},
          {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},           {"degenerate", m.degenerate}};
}

nlohmann::json to_json(const AssumptionEstimate& est) {
  std::vector<std::string> tags;
  for (const Support s : est.classification) {
    tags.push_back(s == Support::Cluster ? "C" : "B");
  }
  return {{"eps1", est.eps1},
          {"eps2", est.eps2},
          {"k_in_i", est.k_in_i},
          {"classification", tags},
          {"assigned_cluster", est.assigned_cluster},
          {"assignment_ambiguous", est.assignment_ambiguous}};
}

nlohmann::json to_json(const DynamicsTrace& tr) {
  return {{"t_steps", tr.t_grid.size()},
          {"c_strength", tr.c_strength},
          {"d_under", tr.d_under},
          {"delta0", tr.delta0},
          {"min_gap", tr.gap_series.size() ? tr.gap_series.minCoeff() : 0.0},
          {"min_overlap", tr.min_overlap},
          {"max_drift_ratio", tr.max_drift_ratio},
          {"drift_ok", tr.drift_ok},
          {"gap_premise", tr.gap_premise},
          {"gap_preserved", tr.gap_preserved}};
}

#define SEN_INSTANTIATE_IO(Scalar)                                                            \
  template void write_graph_triplets<Scalar>(const std::string&, const AffinityGraph<Scalar>&); \
  template void write_eigensystem_csv<Scalar>(const std::string&, const EigenSystem<Scalar>&); \
  template void write_norm_csv<Scalar>(const std::string&, const NormResult<Scalar>&);

SEN_INSTANTIATE_IO(float)
SEN_INSTANTIATE_IO(double)

}  // namespace sen
