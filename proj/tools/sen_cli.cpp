#include "sen/datagen.hpp"
#include "sen/diagnostics.hpp"
#include "sen/errors.hpp"
#include "sen/eval.hpp"
#include "sen/graph.hpp"
#include "sen/io.hpp"
#include "sen/norm.hpp"
#include "sen/random.hpp"
#include "sen/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kIo = 1, kInvalid = 2, kNumeric = 3 };

// config file handling

std::optional<std::string> find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return std::nullopt;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sen::Error(sen::Errc::Io, "cannot open '" + path + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw sen::Error(sen::Errc::Parse, path + ": " + e.what());
  }
}

std::string scalar_text(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number()) return value.dump();
  throw sen::Error(sen::Errc::Parse, "config values must be scalars, got " + value.dump());
}

CLI::Option* option_for_key(CLI::App* sub, std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return sub->get_option_no_throw("--" + key);
}

// Config values become option defaults so explicit flags still win. Flat
// keys apply wherever a matching option exists; a section named after the
// subcommand must only hold known keys.
void apply_config(CLI::App* sub, const json& config) {
  for (const auto& [key, value] : config.items()) {
    if (value.is_object()) continue;
    if (auto* opt = option_for_key(sub, key)) {
      opt->default_val(scalar_text(value));
      opt->required(false);
    }
  }
  std::vector<std::string> path;
  for (CLI::App* a = sub; a != nullptr && a->get_parent() != nullptr; a = a->get_parent()) {
    path.insert(path.begin(), a->get_name());
  }
  const json* section = &config;
  for (const auto& name : path) {
    if (!section->is_object() || !section->contains(name)) return;
    section = &(*section)[name];
  }
  if (!section->is_object()) return;
  for (const auto& [key, value] : section->items()) {
    if (value.is_object()) continue;
    auto* opt = option_for_key(sub, key);
    if (opt == nullptr) {
      throw sen::Error(sen::Errc::Parse, "unknown config key '" + key + "' for " + sub->get_name());
    }
    opt->default_val(scalar_text(value));
    opt->required(false);
  }
}

json typed(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  long long i = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
  if (ec == std::errc() && p == text.data() + text.size()) return i;
  double d = 0.0;
  auto [q, ec2] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ec2 == std::errc() && q == text.data() + text.size()) return d;
  return text;
}

json effective_config(const CLI::App* sub) {
  json out = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      out[name] = res.size() == 1 ? typed(res.front()) : json(res);
      if (opt->get_expected_min() == 0 && res.size() == 1 && res.front() != "false") out[name] = true;
    } else if (opt->get_expected_min() == 0 && opt->get_default_str().empty()) {
      out[name] = false;
    } else {
      out[name] = typed(opt->get_default_str());
    }
  }
  return out;
}

void write_json(const std::string& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw sen::Error(sen::Errc::Io, "cannot open '" + path + "' for writing");
  out << value.dump(2) << '\n';
  if (!out) throw sen::Error(sen::Errc::Io, "write to '" + path + "' failed");
}

std::string stem_of(const std::string& path) {
  fs::path p(path);
  if (p.extension() == ".csv") p.replace_extension();
  return p.string();
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// datasets

struct ImageLayout {
  sen::Index rows = 0;
  sen::Index cols = 0;
  sen::Index stride = 1;
  std::vector<sen::PixelCoord> centers;
};

struct Dataset {
  sen::PointCloud cloud;
  std::optional<ImageLayout> image;
};

struct DataOptions {
  std::string path;
  std::string kind = "auto";  // auto | points | image
  sen::Index patch = 9;
  sen::Index stride = 3;
  double delta_target = 0.01;
};

Dataset load_dataset(const DataOptions& o) {
  std::string kind = o.kind;
  const std::string stem = stem_of(o.path);
  if (kind == "auto") {
    kind = "points";
    if (fs::exists(stem + ".json")) {
      const json side = load_json(stem + ".json");
      if (side.value("kind", "") == "image") kind = "image";
    }
  }
  Dataset ds;
  if (kind == "points") {
    ds.cloud = sen::read_point_cloud_csv(o.path);
    return ds;
  }
  if (kind != "image") throw sen::Error(sen::Errc::Parse, "unknown data kind '" + kind + "'");
  sen::SyntheticImage img;
  img.pixels = sen::read_matrix_csv(o.path);
  sen::PatchSet ps = sen::extract_patches(img.pixels, o.patch, o.stride);
  const std::string bump_path = stem + ".bump.csv";
  if (fs::exists(bump_path)) {
    img.bump = sen::read_matrix_csv(bump_path);
    if (img.bump.rows() != img.pixels.rows() || img.bump.cols() != img.pixels.cols()) {
      throw sen::Error(sen::Errc::DimensionMismatch, bump_path + " does not match the image size");
    }
    ps.cloud.truth = sen::label_patches(img, ps.centers, o.delta_target);
    ps.cloud.cluster_id.assign(std::size_t(ps.cloud.truth.size()), 0);
    for (sen::Index i = 0; i < ps.cloud.truth.size(); ++i) {
      ps.cloud.cluster_id[std::size_t(i)] = ps.cloud.truth(i) ? 1 : 0;
    }
  }
  ds.cloud = std::move(ps.cloud);
  ds.image = ImageLayout{img.pixels.rows(), img.pixels.cols(), o.stride, std::move(ps.centers)};
  return ds;
}

void add_data_options(CLI::App* sub, DataOptions& o) {
  sub->add_option("--data", o.path, "input CSV (point cloud, or image pixels)")->required();
  sub->add_option("--kind", o.kind, "data kind; auto reads the sidecar written by gen")
      ->check(CLI::IsMember({"auto", "points", "image"}));
  sub->add_option("--patch", o.patch, "patch side for image data")->check(CLI::PositiveNumber);
  sub->add_option("--stride", o.stride, "patch stride for image data")->check(CLI::PositiveNumber);
  sub->add_option("--delta-target", o.delta_target, "fraction of patches labeled outliers")
      ->check(CLI::Range(0.0, 1.0));
}

struct GraphOptions {
  sen::Index k_nn = 0;
  sen::Index k_st = 0;
  bool dense = false;
  std::string solver = "auto";

  sen::AffinityOptions resolve(bool image) const {
    sen::AffinityOptions a;
    a.k_nn = k_nn > 0 ? k_nn : (image ? 64 : 32);
    a.k_st = k_st > 0 ? k_st : (image ? 32 : 8);
    a.dense = dense;
    return a;
  }
  sen::SpectrumOptions<double> spectrum() const {
    sen::SpectrumOptions<double> s;
    if (solver == "dense") s.method = sen::SpectrumMethod::Dense;
    if (solver == "krylov") s.method = sen::SpectrumMethod::Krylov;
    return s;
  }
};

void add_graph_options(CLI::App* sub, GraphOptions& g) {
  sub->add_option("--k-nn", g.k_nn, "neighbours per node; 0 = 32 for points, 64 for images");
  sub->add_option("--k-st", g.k_st, "self-tuning neighbour rank; 0 = 8 for points, 32 for images");
  sub->add_flag("--dense,!--no-dense", g.dense, "keep all pairs instead of the kNN union");
  sub->add_option("--solver", g.solver, "eigensolver")
      ->check(CLI::IsMember({"auto", "dense", "krylov"}));
}

void log_line(const std::string& text) { std::fprintf(stderr, "%s\n", text.c_str()); }

void write_image_pgm(const std::string& path, const ImageLayout& layout,
                     const sen::Vector<double>& values) {
  sen::write_pgm(path, sen::render_patch_values(values, layout.centers, layout.rows, layout.cols,
                                                layout.stride),
                 255);
}

// gen

struct ToyArgs {
  sen::CircleClusterOptions opt;
  std::string out = "toy.csv";
};

int run_gen_toy(const ToyArgs& a, const json& config) {
  const sen::PointCloud cloud = sen::gen_circle_clusters(a.opt);
  ensure_parent(a.out);
  sen::write_point_cloud_csv(a.out, cloud);
  json side = config;
  side["kind"] = "toy";
  side["points"] = cloud.size();
  side["positives"] = cloud.truth.count();
  write_json(stem_of(a.out) + ".json", side);
  log_line("wrote " + a.out + " (" + std::to_string(cloud.size()) + " points, " +
           std::to_string(cloud.truth.count()) + " in clusters)");
  return kOk;
}

struct ImageArgs {
  sen::Index resolution = 200;
  std::string out = "image.csv";
};

int run_gen_image(const ImageArgs& a, const json& config) {
  const sen::SyntheticImage img = sen::gen_stripe_image(a.resolution);
  ensure_parent(a.out);
  const std::string stem = stem_of(a.out);
  sen::write_matrix_csv(a.out, img.pixels);
  sen::write_matrix_csv(stem + ".bump.csv", img.bump);
  sen::write_pgm(stem + ".pgm", img.pixels, 65535);
  json side = config;
  side["kind"] = "image";
  write_json(stem + ".json", side);
  log_line("wrote " + a.out + ", " + stem + ".bump.csv and " + stem + ".pgm");
  return kOk;
}

// detect

struct DetectArgs {
  DataOptions data;
  GraphOptions graph;
  sen::Index i_size = 0;
  sen::Index m = 0;
  std::string weight = "constant";
  double quantile = 0.99;
  std::string out = "norm.csv";
};

int run_detect(const DetectArgs& a, const json& config) {
  const sen::WeightSpec weight = sen::WeightSpec::parse(a.weight);
  const Dataset ds = load_dataset(a.data);
  const auto g = sen::build_affinity<double>(ds.cloud.points, a.graph.resolve(ds.image.has_value()));
  const sen::Index m = a.m > 0 ? a.m : a.i_size;
  if (m < a.i_size) throw sen::Error(sen::Errc::OutOfRange, "--m must be at least --i-size");
  const auto es = sen::markov_spectrum(g, m, a.graph.spectrum());
  auto nr = sen::detect(sen::embedding_norm(es, a.i_size, weight), a.quantile);
  ensure_parent(a.out);
  sen::write_norm_csv(a.out, nr);
  const std::string stem = stem_of(a.out);
  if (ds.image) write_image_pgm(stem + ".pgm", *ds.image, nr.s);
  json side = config;
  side["threshold"] = *nr.threshold;
  write_json(stem + ".config.json", side);
  if (ds.cloud.labeled()) {
    json metrics = sen::to_json(sen::f1_score(*nr.predicted, ds.cloud.truth));
    std::cout << metrics.dump() << '\n';
  }
  return kOk;
}

// sweep

struct SweepArgs {
  DataOptions data;
  GraphOptions graph;
  sen::Index i_min = 2;
  sen::Index i_max = 100;
  std::string weight = "constant";
  double quantile = 0.9;
  sen::Index trials = 1;
  sen::Index subsample = 0;
  std::uint64_t seed = 1;
  std::string out = "sweep.csv";
};

int run_sweep(const SweepArgs& a, const json& config) {
  const sen::WeightSpec weight = sen::WeightSpec::parse(a.weight);
  const Dataset ds = load_dataset(a.data);
  if (!ds.cloud.labeled()) {
    throw sen::Error(sen::Errc::Parse, "sweep needs ground truth in the data");
  }
  if (a.i_min < 1 || a.i_max < a.i_min) {
    throw sen::Error(sen::Errc::OutOfRange, "need 1 <= i-min <= i-max");
  }
  const sen::Index rows = a.i_max - a.i_min + 1;
  sen::Matrix<double> f1(rows, a.trials);
  std::vector<double> trial_best;
  const auto aff = a.graph.resolve(ds.image.has_value());
  for (sen::Index trial = 0; trial < a.trials; ++trial) {
    sen::PointCloud cloud;
    const sen::PointCloud* use = &ds.cloud;
    if (a.subsample > 0) {
      sen::Rng rng(a.seed, std::uint64_t(trial));
      cloud = sen::select_rows(ds.cloud, sen::subsample_indices(ds.cloud.size(), a.subsample, rng));
      use = &cloud;
    }
    const auto g = sen::build_affinity<double>(use->points, aff);
    const auto es = sen::markov_spectrum(g, a.i_max, a.graph.spectrum());
    const auto sweep = sen::sweep_i(es, a.i_min, a.i_max, weight, a.quantile, use->truth);
    double best = 0.0;
    for (sen::Index r = 0; r < rows; ++r) {
      f1(r, trial) = sweep[std::size_t(r)].f1;
      best = std::max(best, sweep[std::size_t(r)].f1);
    }
    trial_best.push_back(best);
    if (a.trials > 1) {
      log_line("trial " + std::to_string(trial + 1) + "/" + std::to_string(a.trials) +
               " best F1 " + sen::format_double(best));
    }
  }

  ensure_parent(a.out);
  std::ofstream out(a.out);
  if (!out) throw sen::Error(sen::Errc::Io, "cannot open '" + a.out + "' for writing");
  out << "i_size,mean_f1,std_f1\n";
  sen::Index best_row = 0;
  sen::Vector<double> mean = f1.rowwise().mean();
  for (sen::Index r = 0; r < rows; ++r) {
    double sd = 0.0;
    if (a.trials > 1) {
      sd = std::sqrt((f1.row(r).array() - mean(r)).square().sum() / double(a.trials - 1));
    }
    out << a.i_min + r << ',' << sen::format_double(mean(r)) << ',' << sen::format_double(sd) << '\n';
    if (mean(r) > mean(best_row)) best_row = r;
  }
  if (!out) throw sen::Error(sen::Errc::Io, "write to '" + a.out + "' failed");
  write_json(stem_of(a.out) + ".config.json", config);

  double mean_trial_best = 0.0;
  for (double b : trial_best) mean_trial_best += b;
  mean_trial_best /= double(trial_best.size());
  json best = {{"i_size", a.i_min + best_row},
               {"mean_f1", mean(best_row)},
               {"mean_of_trial_best", mean_trial_best},
               {"trials", a.trials}};
  std::cout << best.dump() << '\n';
  return kOk;
}

// dynamics

struct DynamicsArgs {
  DataOptions data;
  GraphOptions graph;
  sen::Index t_steps = 21;
  sen::Index m = 8;
  sen::Index i_size = 40;
  double delta_cap = std::numeric_limits<double>::quiet_NaN();
  std::string out_dir = "dynamics";
};

int run_dynamics(const DynamicsArgs& a, const json& config) {
  const Dataset ds = load_dataset(a.data);
  if (!ds.cloud.labeled()) {
    throw sen::Error(sen::Errc::Parse, "dynamics needs truth / cluster_id columns");
  }
  const sen::Partition part = sen::Partition::from_labels(ds.cloud.cluster_id);
  const auto g = sen::build_affinity<double>(ds.cloud.points, a.graph.resolve(ds.image.has_value()));
  const auto pair = sen::split_blocks(g, part);
  const auto opts = a.graph.spectrum();

  const auto trace = sen::trace_dynamics(pair, part, a.t_steps, a.m, a.i_size, opts);
  const auto es0 = sen::markov_spectrum(pair.w0, std::min(g.size(), a.i_size + 1), opts);
  const auto est = sen::estimate_eps(pair.w0, es0, part, a.i_size);
  const auto report = sen::theory_report(g, part, es0, est, a.i_size, a.delta_cap);
  const auto prop31 = sen::verify_prop31(es0, part, report, a.i_size);

  fs::create_directories(a.out_dir);
  sen::DynamicsTrace exported = trace;
  const sen::Index shown = std::min(a.m, trace.eigenvalue_branches.rows());
  exported.eigenvalue_branches = trace.eigenvalue_branches.topRows(shown);
  exported.sorted_eigenvalues = trace.sorted_eigenvalues.topRows(shown);
  sen::write_trace_csvs(a.out_dir, exported);
  write_json(a.out_dir + "/theory_report.json", sen::to_json(report));

  const auto last = trace.s_series.col(trace.s_series.cols() - 1);
  double min_c = std::numeric_limits<double>::infinity();
  double max_b = -std::numeric_limits<double>::infinity();
  for (sen::Index x = 0; x < part.size(); ++x) {
    if (part.in_cluster(x)) min_c = std::min(min_c, last(x));
    else max_b = std::max(max_b, last(x));
  }
  json summary = sen::to_json(trace);
  summary["assumptions"] = sen::to_json(est);
  summary["initial_bounds_ok"] = prop31.ok;
  summary["initial_bound_violations"] = prop31.violations;
  summary["separation_margin_t1"] = min_c - max_b;
  write_json(a.out_dir + "/summary.json", summary);
  write_json(a.out_dir + "/config.json", config);
  std::cout << summary.dump() << '\n';
  return kOk;
}

// select

struct SelectArgs {
  DataOptions data;
  GraphOptions graph;
  sen::Index i_size = 0;
  sen::Index count = 1;
  sen::Index m = 0;
  std::string weight = "constant";
  std::string out_dir = "select";
};

int run_select(const SelectArgs& a, const json& config) {
  const sen::WeightSpec weight = sen::WeightSpec::parse(a.weight);
  const Dataset ds = load_dataset(a.data);
  const auto g = sen::build_affinity<double>(ds.cloud.points, a.graph.resolve(ds.image.has_value()));
  const sen::Index m = a.m > 0 ? a.m : std::max(a.i_size, a.count);
  if (m < a.i_size) throw sen::Error(sen::Errc::OutOfRange, "--m must be at least --i-size");
  const auto es = sen::markov_spectrum(g, m, a.graph.spectrum());
  const auto nr = sen::embedding_norm(es, a.i_size, weight);
  const auto picked = sen::select_eigvecs(es, nr, a.count);

  sen::Index x_max = 0;
  nr.s.maxCoeff(&x_max);
  json out;
  out["x_max"] = x_max;
  out["indices"] = json::array();
  out["eigenvalues"] = json::array();
  out["magnitudes"] = json::array();
  fs::create_directories(a.out_dir);
  for (sen::Index k : picked) {
    out["indices"].push_back(k + 1);
    out["eigenvalues"].push_back(es.eigenvalues(k));
    out["magnitudes"].push_back(std::abs(es.eigenvectors(x_max, k)));
    if (ds.image) {
      const sen::Vector<double> psi = es.eigenvectors.col(k);
      write_image_pgm(a.out_dir + "/eigvec_" + std::to_string(k + 1) + ".pgm", *ds.image, psi);
    }
  }
  if (ds.image) write_image_pgm(a.out_dir + "/norm.pgm", *ds.image, nr.s);
  write_json(a.out_dir + "/selection.json", out);
  write_json(a.out_dir + "/config.json", config);
  std::cout << out.dump() << '\n';
  return kOk;
}

int exit_code_for(const sen::Error& e) {
  if (e.code() == sen::Errc::Io) return kIo;
  if (sen::is_numeric_failure(e.code())) return kNumeric;
  return kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral embedding norm: outlier detection and diagnostics"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::string config_path;
  app.add_option("--config", config_path, "JSON config; flags override its values");

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->require_subcommand(1);

  ToyArgs toy;
  auto* gen_toy = gen->add_subcommand("toy", "noisy circle with Gaussian clusters");
  gen_toy->add_option("--n", toy.opt.n, "number of points")->check(CLI::PositiveNumber);
  gen_toy->add_option("--k", toy.opt.k_clusters, "number of clusters")->check(CLI::PositiveNumber);
  gen_toy->add_option("--delta", toy.opt.delta, "cluster fraction")->check(CLI::Range(0.0, 1.0));
  gen_toy->add_option("--eps-b", toy.opt.eps_b, "background noise level")->check(CLI::NonNegativeNumber);
  gen_toy->add_option("--eps-c", toy.opt.eps_c, "cluster spread")->check(CLI::NonNegativeNumber);
  gen_toy->add_option("--center-radius", toy.opt.center_radius, "radius of the cluster centres");
  gen_toy->add_option("--seed", toy.opt.seed, "random seed");
  gen_toy->add_option("--out", toy.out, "output CSV");

  ImageArgs image;
  auto* gen_image = gen->add_subcommand("image", "striped image with a Gaussian bump");
  gen_image->add_option("--resolution", image.resolution, "pixels per side")
      ->check(CLI::Range(32, 1 << 16));
  gen_image->add_option("--out", image.out, "output pixel CSV");

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "embedding norm and thresholded detection");
  add_data_options(detect, det.data);
  add_graph_options(detect, det.graph);
  detect->add_option("--i-size", det.i_size, "number of leading eigenvectors")
      ->required()
      ->check(CLI::PositiveNumber);
  detect->add_option("--m", det.m, "eigenpairs to compute; 0 = i-size");
  detect->add_option("--weight", det.weight, "constant | power:P | heat:S");
  detect->add_option("--quantile", det.quantile, "threshold quantile")->check(CLI::Range(0.0, 1.0));
  detect->add_option("--out", det.out, "norm CSV");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "F1 over a range of |I|, averaged over trials");
  add_data_options(sweep, sw.data);
  add_graph_options(sweep, sw.graph);
  sweep->add_option("--i-min", sw.i_min, "smallest |I|")->check(CLI::PositiveNumber);
  sweep->add_option("--i-max", sw.i_max, "largest |I|")->check(CLI::PositiveNumber);
  sweep->add_option("--weight", sw.weight, "constant | power:P | heat:S");
  sweep->add_option("--quantile", sw.quantile, "threshold quantile")->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--trials", sw.trials, "number of trials")->check(CLI::PositiveNumber);
  sweep->add_option("--subsample", sw.subsample, "points drawn per trial; 0 = all");
  sweep->add_option("--seed", sw.seed, "master seed for subsampling");
  sweep->add_option("--out", sw.out, "CSV of i_size, mean_f1, std_f1");

  DynamicsArgs dyn;
  auto* dynamics = app.add_subcommand("dynamics", "spectrum and norm along W0 + tE");
  add_data_options(dynamics, dyn.data);
  add_graph_options(dynamics, dyn.graph);
  dynamics->add_option("--t-steps", dyn.t_steps, "grid points in [0, 1]")->check(CLI::Range(2, 100000));
  dynamics->add_option("--m", dyn.m, "eigenvalue branches to plot (at least i-size + 1 are computed)")
      ->check(CLI::PositiveNumber);
  dynamics->add_option("--i-size", dyn.i_size, "|I|")->check(CLI::PositiveNumber);
  dynamics->add_option("--delta-cap", dyn.delta_cap, "gap constant; default half the initial gap");
  dynamics->add_option("--out-dir", dyn.out_dir, "output directory");

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "eigenvectors ranked at the maximal-norm node");
  add_data_options(select, sel.data);
  add_graph_options(select, sel.graph);
  select->add_option("--i-size", sel.i_size, "|I| for the embedding norm")
      ->required()
      ->check(CLI::PositiveNumber);
  select->add_option("--count", sel.count, "eigenvectors to report")->check(CLI::PositiveNumber);
  select->add_option("--m", sel.m, "eigenpairs to rank; 0 = max(i-size, count)");
  select->add_option("--weight", sel.weight, "constant | power:P | heat:S");
  select->add_option("--out-dir", sel.out_dir, "output directory");

  for (CLI::App* sub : {gen_toy, gen_image, detect, sweep, dynamics, select}) {
    sub->add_option("--config", config_path, "JSON config; flags override its values");
  }

  try {
    if (auto path = find_config_path(argc, argv)) {
      const json config = load_json(*path);
      if (!config.is_object()) throw sen::Error(sen::Errc::Parse, *path + ": expected an object");
      for (CLI::App* sub : {gen_toy, gen_image, detect, sweep, dynamics, select}) {
        apply_config(sub, config);
      }
    }
    app.parse(argc, argv);

    if (gen_toy->parsed()) return run_gen_toy(toy, effective_config(gen_toy));
    if (gen_image->parsed()) return run_gen_image(image, effective_config(gen_image));
    if (detect->parsed()) return run_detect(det, effective_config(detect));
    if (sweep->parsed()) return run_sweep(sw, effective_config(sweep));
    if (dynamics->parsed()) return run_dynamics(dyn, effective_config(dynamics));
    if (select->parsed()) return run_select(sel, effective_config(select));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  } catch (const sen::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kInvalid;
}
