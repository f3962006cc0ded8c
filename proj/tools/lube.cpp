// Command-line front end: train, predict, evaluate, cwc-surface, synth-data,
// check-gradients. One JSON config document drives a run; every flag
// overrides one config path, and the fully resolved config is echoed into the
// artifact directory so a run can be replayed from its artifacts alone.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "lube/dataio.hpp"
#include "lube/metrics.hpp"
#include "lube/network.hpp"
#include "lube/serialize.hpp"
#include "lube/training.hpp"

namespace fs = std::filesystem;
using lube::Index;
using lube::Json;
using lube::Real;

namespace {

// ---------------------------------------------------------------------------
// Run configuration: one JSON document, flat sections, defaults baked in
// ---------------------------------------------------------------------------

struct DataConfig {
  std::string path;
  std::variant<Index, std::string> value_column{Index{1}}; // synth CSV: t,value
  std::optional<std::variant<Index, std::string>> time_column;
  lube::NormMode normalization = lube::NormMode::MinMax;
  Real train_fraction = 5.0 / 7.0; // five train days of a seven-day week
  std::optional<Index> split_boundary;  // raw-series index; overrides the fraction
};

struct TrainingSection {
  Index batch_size = 32;
  Index epochs = 200;
  bool shuffle = true;
  Real clip_threshold = 0.0;
};

struct MetricsSection {
  std::optional<Real> span; // defaults to max(y) - min(y) at evaluation time
  bool normalized_scale = false;
};

struct RunConfig {
  DataConfig data;
  lube::NetworkDims network;
  lube::LossConfig loss;
  lube::OptimizerConfig optimizer;
  TrainingSection training;
  lube::CwcConfig cwc;
  MetricsSection metrics;
  std::uint64_t seed = 42;
  std::string out_dir;
};

template <typename T>
void get_if_present(const Json& j, const char* section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const std::exception& e) {
    lube::fail("config field ", section, ".", key, ": ", e.what());
  }
}

std::variant<Index, std::string> parse_column(const Json& v, const char* where) {
  if (v.is_number_integer()) return v.get<Index>();
  if (v.is_string()) return v.get<std::string>();
  lube::fail("config field ", where, " must be a column index or name");
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig cfg;
  if (j.contains("data")) {
    const Json& d = j.at("data");
    get_if_present(d, "data", "path", cfg.data.path);
    if (d.contains("value_column")) {
      cfg.data.value_column = parse_column(d.at("value_column"), "data.value_column");
    }
    if (d.contains("time_column") && !d.at("time_column").is_null()) {
      cfg.data.time_column = parse_column(d.at("time_column"), "data.time_column");
    }
    if (d.contains("normalization")) {
      cfg.data.normalization = lube::norm_mode_from_string(d.at("normalization").get<std::string>());
    }
    get_if_present(d, "data", "train_fraction", cfg.data.train_fraction);
    if (d.contains("split_boundary") && !d.at("split_boundary").is_null()) {
      cfg.data.split_boundary = d.at("split_boundary").get<Index>();
    }
  }
  if (j.contains("network")) cfg.network = lube::dims_from_json(j.at("network"));
  if (j.contains("loss")) {
    const Json& s = j.at("loss");
    get_if_present(s, "loss", "k1", cfg.loss.k1);
    get_if_present(s, "loss", "k2", cfg.loss.k2);
    get_if_present(s, "loss", "lambda", cfg.loss.lambda);
  }
  if (j.contains("optimizer")) {
    const Json& s = j.at("optimizer");
    get_if_present(s, "optimizer", "rho", cfg.optimizer.rho);
    get_if_present(s, "optimizer", "eps", cfg.optimizer.eps);
    get_if_present(s, "optimizer", "delta", cfg.optimizer.delta);
  }
  if (j.contains("training")) {
    const Json& s = j.at("training");
    get_if_present(s, "training", "batch_size", cfg.training.batch_size);
    get_if_present(s, "training", "epochs", cfg.training.epochs);
    get_if_present(s, "training", "shuffle", cfg.training.shuffle);
    get_if_present(s, "training", "clip_threshold", cfg.training.clip_threshold);
  }
  if (j.contains("cwc")) {
    const Json& s = j.at("cwc");
    get_if_present(s, "cwc", "mu", cfg.cwc.mu);
    get_if_present(s, "cwc", "eta", cfg.cwc.eta);
    get_if_present(s, "cwc", "alpha", cfg.cwc.alpha);
    get_if_present(s, "cwc", "beta", cfg.cwc.beta);
  }
  if (j.contains("metrics")) {
    const Json& s = j.at("metrics");
    if (s.contains("span") && !s.at("span").is_null()) cfg.metrics.span = s.at("span").get<Real>();
    get_if_present(s, "metrics", "normalized_scale", cfg.metrics.normalized_scale);
  }
  get_if_present(j, "<root>", "seed", cfg.seed);
  get_if_present(j, "<root>", "out_dir", cfg.out_dir);
  return cfg;
}

Json column_to_json(const std::variant<Index, std::string>& v) {
  if (std::holds_alternative<Index>(v)) return std::get<Index>(v);
  return std::get<std::string>(v);
}

Json run_config_to_json(const RunConfig& cfg) {
  Json data{{"path", cfg.data.path},
            {"value_column", column_to_json(cfg.data.value_column)},
            {"time_column", cfg.data.time_column ? column_to_json(*cfg.data.time_column)
                                                 : Json(nullptr)},
            {"normalization", lube::to_string(cfg.data.normalization)},
            {"train_fraction", cfg.data.train_fraction},
            {"split_boundary",
             cfg.data.split_boundary ? Json(*cfg.data.split_boundary) : Json(nullptr)}};
  Json j{{"data", std::move(data)},
         {"network", lube::dims_to_json(cfg.network)},
         {"loss", {{"k1", cfg.loss.k1}, {"k2", cfg.loss.k2}, {"lambda", cfg.loss.lambda}}},
         {"optimizer",
          {{"rho", cfg.optimizer.rho},
           {"eps", cfg.optimizer.eps},
           {"delta", cfg.optimizer.delta}}},
         {"training",
          {{"batch_size", cfg.training.batch_size},
           {"epochs", cfg.training.epochs},
           {"shuffle", cfg.training.shuffle},
           {"clip_threshold", cfg.training.clip_threshold}}},
         {"cwc",
          {{"mu", cfg.cwc.mu},
           {"eta", cfg.cwc.eta},
           {"alpha", cfg.cwc.alpha},
           {"beta", cfg.cwc.beta}}},
         {"metrics",
          {{"span", cfg.metrics.span ? Json(*cfg.metrics.span) : Json(nullptr)},
           {"normalized_scale", cfg.metrics.normalized_scale}}},
         {"seed", cfg.seed},
         {"out_dir", cfg.out_dir}};
  return j;
}

// Collects every section's complaint before failing, so a broken config is
// reported in one pass.
void validate_run_config(const RunConfig& cfg) {
  std::vector<std::string> problems;
  auto check = [&](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const lube::Error& e) {
      problems.push_back(lube::detail::concat(section, ": ", e.what()));
    }
  };
  check("data", [&] {
    lube::require(!cfg.data.path.empty(), "path is required (set data.path or pass --data)");
    lube::require(cfg.data.train_fraction > 0.0 && cfg.data.train_fraction < 1.0,
                  "train_fraction must lie in (0, 1), got ", cfg.data.train_fraction);
  });
  check("network", [&] { cfg.network.validate(); });
  check("loss", [&] { cfg.loss.validate(); });
  check("optimizer", [&] { cfg.optimizer.validate(); });
  check("training", [&] {
    lube::require(cfg.training.batch_size >= 1, "batch_size must be >= 1, got ",
                  cfg.training.batch_size);
    lube::require(cfg.training.epochs >= 1, "epochs must be >= 1, got ", cfg.training.epochs);
    lube::require(cfg.training.clip_threshold >= 0.0, "clip_threshold must be >= 0, got ",
                  cfg.training.clip_threshold);
  });
  check("cwc", [&] { cfg.cwc.validate(); });
  check("metrics", [&] {
    if (cfg.metrics.span) lube::require(*cfg.metrics.span > 0.0, "span must be > 0");
  });
  if (!problems.empty()) {
    std::string all = "invalid config:";
    for (const std::string& p : problems) all += "\n  " + p;
    throw lube::Error(all);
  }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

std::string default_out_root() {
  if (const char* env = std::getenv("LUBE_OUT_ROOT"); env && *env) return env;
  return "lube-out";
}

std::string resolve_out_dir(const std::string& flag_value, const std::string& config_value) {
  if (!flag_value.empty()) return flag_value;
  if (!config_value.empty()) return config_value;
  return default_out_root();
}

lube::ColumnSelector selector_of(const DataConfig& d) {
  lube::ColumnSelector sel;
  sel.value_column = d.value_column;
  sel.time_column = d.time_column;
  return sel;
}

Index resolve_raw_boundary(const RunConfig& cfg, Index series_length) {
  Index raw = cfg.data.split_boundary
                  ? *cfg.data.split_boundary
                  : lube::raw_boundary_from_fraction(series_length, cfg.data.train_fraction);
  lube::require(raw > cfg.network.cell_count,
                "split boundary ", raw, " leaves no training sample (need > ",
                cfg.network.cell_count, " leading points)");
  lube::require(raw < series_length, "split boundary ", raw, " leaves no test data (series length ",
                series_length, ")");
  return raw;
}

struct PredictionVectors {
  lube::PredictionTable table;      // denormalized, ready for CSV
  lube::Vector y_norm, lo_norm, hi_norm; // normalized-scale copies
};

PredictionVectors predict_over(const lube::ParameterSet& params, const lube::NetworkDims& dims,
                               const lube::WindowedDataset& ds, Index index_offset) {
  PredictionVectors out;
  Index n = ds.count();
  out.y_norm.resize(n);
  out.lo_norm.resize(n);
  out.hi_norm.resize(n);
  out.table.index.reserve(static_cast<std::size_t>(n));
  out.table.y.resize(n);
  out.table.lower.resize(n);
  out.table.upper.resize(n);
  for (Index i = 0; i < n; ++i) {
    lube::PredictionInterval pi =
        lube::predict(params, dims, lube::sample_from_row(ds.inputs.row(i)));
    out.y_norm[i] = ds.targets[i];
    out.lo_norm[i] = pi.lower;
    out.hi_norm[i] = pi.upper;
    out.table.index.push_back(index_offset + i);
    out.table.y[i] = ds.norm.invert(ds.targets[i]);
    // invert() is increasing (max > min), so the bound order survives it
    out.table.lower[i] = ds.norm.invert(pi.lower);
    out.table.upper[i] = ds.norm.invert(pi.upper);
  }
  return out;
}

lube::MetricReport report_for(const PredictionVectors& pv, const RunConfig& cfg) {
  lube::EvaluationSet eval =
      cfg.metrics.normalized_scale
          ? lube::EvaluationSet::from(pv.y_norm, pv.lo_norm, pv.hi_norm, cfg.metrics.span)
          : lube::EvaluationSet::from(pv.table.y, pv.table.lower, pv.table.upper,
                                      cfg.metrics.span);
  return lube::evaluate_intervals(eval, cfg.cwc, cfg.metrics.normalized_scale);
}

void print_report(const lube::MetricReport& r, std::ostream& os) {
  os << "samples:       " << r.count << "\n"
     << "target span:   " << lube::format_real(r.span) << "\n"
     << "PICP:          " << lube::format_real(r.picp * 100.0) << " %\n"
     << "PINAW:         " << lube::format_real(r.pinaw) << "\n"
     << "PINRW:         " << lube::format_real(r.pinrw) << "\n"
     << "NAD:           "
     << (std::isfinite(r.nad.value) ? lube::format_real(r.nad.value) : std::string("inf")) << "\n"
     << "CWC original:  " << lube::format_real(r.cwc_original) << "\n"
     << "CWC proposed:  " << lube::format_real(r.cwc_proposed) << "\n";
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config_path, data_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<Index> epochs;
};

void cmd_train(const TrainArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = run_config_from_json(lube::load_json(args.config_path));
  if (!args.data_path.empty()) cfg.data.path = args.data_path;
  if (args.seed) cfg.seed = *args.seed;
  if (args.epochs) cfg.training.epochs = *args.epochs;
  cfg.out_dir = resolve_out_dir(args.out_dir, cfg.out_dir);
  validate_run_config(cfg);

  // Everything that can fail is loaded and validated before the artifact
  // directory is touched, so a bad run leaves nothing half-written.
  lube::RawSeries series = lube::load_series(cfg.data.path, selector_of(cfg.data));
  Index raw_boundary = resolve_raw_boundary(cfg, series.size());
  lube::NormalizationSpec norm =
      lube::fit_normalization(series.values.head(raw_boundary), cfg.data.normalization);
  lube::RawSeries scaled;
  scaled.timestamps = series.timestamps;
  scaled.values = lube::apply_normalization(series.values, norm);
  lube::WindowedDataset all = lube::window(scaled, cfg.network.cell_count, norm);
  Index boundary = lube::sample_boundary_from_raw(raw_boundary, cfg.network.cell_count);
  auto [train_set, test_set] = lube::split(all, boundary);

  lube::ParameterSet params = lube::init_params(cfg.network, cfg.seed);
  lube::TrainConfig tc;
  tc.batch_size = cfg.training.batch_size;
  tc.epochs = cfg.training.epochs;
  tc.seed = cfg.seed;
  tc.shuffle = cfg.training.shuffle;
  tc.clip_threshold = cfg.training.clip_threshold;
  tc.loss = cfg.loss;
  tc.optimizer = cfg.optimizer;

  auto t0 = std::chrono::steady_clock::now();
  lube::TrainHistory history = lube::train(params, cfg.network, train_set, tc);
  auto t1 = std::chrono::steady_clock::now();
  Real train_seconds =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0;

  PredictionVectors pv = predict_over(params, cfg.network, test_set, boundary);
  lube::MetricReport report = report_for(pv, cfg);

  fs::create_directories(cfg.out_dir);
  fs::path out(cfg.out_dir);
  lube::save_json(run_config_to_json(cfg), (out / "config.json").string());
  lube::save_model({cfg.network, params, norm}, (out / "params.json").string());
  lube::write_predictions_csv(pv.table, (out / "predictions.csv").string());
  lube::save_json(lube::report_to_json(report), (out / "metrics.json").string());
  lube::write_loss_history_csv(history, (out / "loss_history.csv").string());
  // Wall-clock time lives in its own artifact: metrics.json must stay
  // byte-identical across reruns of the same config and seed.
  lube::save_json(Json{{"train_time_seconds", train_seconds}}, (out / "timing.json").string());

  std::cout << "trained on " << train_set.count() << " samples, tested on " << test_set.count()
            << " (" << cfg.training.epochs << " epochs, seed " << cfg.seed << ")\n";
  if (!history.empty()) {
    std::cout << "loss: epoch 1 total " << lube::format_real(history.front().mean_total())
              << " -> final " << lube::format_real(history.back().mean_total()) << "\n";
  }
  print_report(report, std::cout);
  std::cout << "train time:    " << lube::format_real(train_seconds) << " s\n"
            << "artifacts in " << fs::absolute(out).string() << "\n";
}

struct PredictArgs {
  std::string params_path, data_path, config_path, out_dir, portion = "test";
};

void cmd_predict(const PredictArgs& args) {
  lube::ModelFile model = lube::load_model(args.params_path);
  RunConfig cfg;
  if (!args.config_path.empty()) {
    cfg = run_config_from_json(lube::load_json(args.config_path));
    lube::Json saved = lube::dims_to_json(model.dims);
    lube::Json wanted = lube::dims_to_json(cfg.network);
    lube::require(saved == wanted, "network dims in ", args.params_path,
                  " do not match the config: saved ", saved.dump(), " vs config ", wanted.dump());
  }
  std::string data_path = !args.data_path.empty() ? args.data_path : cfg.data.path;
  lube::require(!data_path.empty(), "no data file given (pass --data or set data.path)");
  cfg.data.path = data_path;
  cfg.network = model.dims;

  lube::RawSeries series = lube::load_series(data_path, selector_of(cfg.data));
  lube::RawSeries scaled;
  scaled.timestamps = series.timestamps;
  // The scaling fitted at training time travels with the model; refitting
  // here would shift the inputs the parameters were trained against.
  scaled.values = lube::apply_normalization(series.values, model.norm);
  lube::WindowedDataset all = lube::window(scaled, model.dims.cell_count, model.norm);

  lube::WindowedDataset subject = all;
  Index offset = 0;
  if (args.portion != "all") {
    Index raw_boundary = resolve_raw_boundary(cfg, series.size());
    Index boundary = lube::sample_boundary_from_raw(raw_boundary, model.dims.cell_count);
    auto [train_set, test_set] = lube::split(all, boundary);
    if (args.portion == "train") {
      subject = std::move(train_set);
    } else {
      subject = std::move(test_set);
      offset = boundary;
    }
  }

  PredictionVectors pv = predict_over(model.params, model.dims, subject, offset);
  std::string out_dir = resolve_out_dir(args.out_dir, cfg.out_dir);
  fs::create_directories(out_dir);
  fs::path out(out_dir);
  lube::write_predictions_csv(pv.table, (out / "predictions.csv").string());
  std::cout << "wrote " << pv.table.y.size() << " predictions (" << args.portion << " portion) to "
            << (out / "predictions.csv").string() << "\n";
}

struct EvaluateArgs {
  std::string predictions_path, config_path, out_dir;
  std::optional<Real> span;
};

void cmd_evaluate(const EvaluateArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = run_config_from_json(lube::load_json(args.config_path));
  if (args.span) cfg.metrics.span = *args.span;

  lube::PredictionTable table = lube::read_predictions_csv(args.predictions_path);
  lube::EvaluationSet eval =
      lube::EvaluationSet::from(table.y, table.lower, table.upper, cfg.metrics.span);
  lube::MetricReport report = lube::evaluate_intervals(eval, cfg.cwc, false);

  std::string out_dir = resolve_out_dir(args.out_dir, cfg.out_dir);
  fs::create_directories(out_dir);
  fs::path out(out_dir);
  lube::save_json(lube::report_to_json(report), (out / "metrics.json").string());
  std::cout << lube::report_to_json(report).dump(2) << "\n";
}

struct SurfaceArgs {
  std::string variant = "proposed";
  std::string config_path, out_dir;
  lube::SurfaceConfig surface;
};

void cmd_cwc_surface(const SurfaceArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = run_config_from_json(lube::load_json(args.config_path));
  lube::SurfaceConfig sc = args.surface;
  sc.variant = lube::cwc_variant_from_string(args.variant);
  sc.cwc = cfg.cwc;
  auto grid = lube::cwc_surface(sc);

  std::string out_dir = resolve_out_dir(args.out_dir, cfg.out_dir);
  fs::create_directories(out_dir);
  fs::path out(out_dir);
  lube::write_surface_csv(grid, (out / "surface.csv").string());
  std::cout << "wrote " << grid.size() << " grid points to " << (out / "surface.csv").string()
            << "\n";
}

struct SynthArgs {
  std::string kind = "sine-uniform";
  Index length = 1008;
  Real noise = 0.1;
  std::uint64_t seed = 42;
  std::string out_dir, file;
};

void cmd_synth(const SynthArgs& args) {
  lube::RawSeries series =
      lube::synth_series(lube::synth_kind_from_string(args.kind), args.length, args.noise,
                         args.seed);
  std::string path = args.file;
  if (path.empty()) {
    std::string out_dir = resolve_out_dir(args.out_dir, "");
    fs::create_directories(out_dir);
    path = (fs::path(out_dir) / "synth.csv").string();
  } else if (fs::path(path).has_parent_path()) {
    fs::create_directories(fs::path(path).parent_path());
  }
  lube::write_series_csv(series, path);
  std::cout << "wrote " << series.size() << " points to " << path << "\n";
}

struct GradCheckArgs {
  lube::GradCheckConfig cfg;
  std::vector<Index> fc = {4};
};

void cmd_check_gradients(const GradCheckArgs& args) {
  lube::GradCheckConfig cfg = args.cfg;
  cfg.dims.fc_hidden = args.fc;
  lube::GradCheckReport report = lube::check_gradients(cfg);
  std::cout << "trials:                  " << report.trials_run << " (" << report.resamples
            << " kink resamples)\n"
            << "coverage-loss gradient:  max relative error "
            << lube::format_real(report.max_error_coverage_loss) << "\n"
            << "width-loss gradient:     max relative error "
            << lube::format_real(report.max_error_width_loss) << "\n"
            << "worst parameter array:   " << report.worst_param << "\n"
            << (report.passed ? "PASS" : "FAIL") << " at tolerance "
            << lube::format_real(cfg.tolerance) << "\n";
  lube::require(report.passed, "gradient check failed: max relative error ",
                lube::format_real(report.max_rel_error()), " exceeds tolerance ",
                lube::format_real(cfg.tolerance));
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interval forecaster: recurrent network trained to emit prediction bounds"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a model and write run artifacts");
  train->add_option("--config", train_args.config_path, "JSON run config");
  train->add_option("--data", train_args.data_path, "input series CSV (overrides config)");
  train->add_option("--out", train_args.out_dir, "artifact directory (overrides config)");
  train->add_option("--seed", train_args.seed, "run seed (overrides config)");
  train->add_option("--epochs", train_args.epochs, "epoch count (overrides config)");
  train->callback([&] { cmd_train(train_args); });

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Emit ranked intervals from a trained model");
  predict->add_option("--params", predict_args.params_path, "trained model JSON")->required();
  predict->add_option("--data", predict_args.data_path, "input series CSV");
  predict->add_option("--config", predict_args.config_path, "JSON run config (dims must match)");
  predict->add_option("--out", predict_args.out_dir, "output directory");
  predict->add_option("--portion", predict_args.portion, "test | train | all (default test)")
      ->check(CLI::IsMember({"test", "train", "all"}));
  predict->callback([&] { cmd_predict(predict_args); });

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Score a predictions file");
  evaluate->add_option("--predictions", eval_args.predictions_path, "predictions CSV")->required();
  evaluate->add_option("--config", eval_args.config_path, "JSON run config (cwc section)");
  evaluate->add_option("--span", eval_args.span, "target span A (default: max(y) - min(y))");
  evaluate->add_option("--out", eval_args.out_dir, "output directory");
  evaluate->callback([&] { cmd_evaluate(eval_args); });

  SurfaceArgs surface_args;
  auto* surface = app.add_subcommand("cwc-surface", "Tabulate a composite-score surface");
  surface->add_option("--variant", surface_args.variant, "original | proposed")
      ->check(CLI::IsMember({"original", "proposed"}));
  surface->add_option("--config", surface_args.config_path, "JSON run config (cwc section)");
  surface->add_option("--out", surface_args.out_dir, "output directory");
  surface->add_option("--picp-min", surface_args.surface.picp_min, "grid lower coverage bound");
  surface->add_option("--picp-max", surface_args.surface.picp_max, "grid upper coverage bound");
  surface->add_option("--picp-count", surface_args.surface.picp_count, "grid points on coverage");
  surface->add_option("--pinaw-min", surface_args.surface.pinaw_min, "grid lower width bound");
  surface->add_option("--pinaw-max", surface_args.surface.pinaw_max, "grid upper width bound");
  surface->add_option("--pinaw-count", surface_args.surface.pinaw_count, "grid points on width");
  surface->callback([&] { cmd_cwc_surface(surface_args); });

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth-data", "Generate a seeded synthetic series CSV");
  synth->add_option("--kind", synth_args.kind, "sine-uniform | sine-gaussian")
      ->check(CLI::IsMember({"sine-uniform", "sine-gaussian"}));
  synth->add_option("--length", synth_args.length, "number of points (default 1008)");
  synth->add_option("--noise", synth_args.noise, "noise amplitude (default 0.1)");
  synth->add_option("--seed", synth_args.seed, "generator seed");
  synth->add_option("--out", synth_args.out_dir, "output directory (file named synth.csv)");
  synth->add_option("--file", synth_args.file, "explicit output file path");
  synth->callback([&] { cmd_synth(synth_args); });

  GradCheckArgs gc_args;
  auto* gc = app.add_subcommand("check-gradients",
                                "Verify analytic gradients against finite differences");
  gc->add_option("--hidden", gc_args.cfg.dims.hidden_dim, "hidden width (default 3)");
  gc->add_option("--cells", gc_args.cfg.dims.cell_count, "recurrent steps (default 3)");
  gc->add_option("--fc", gc_args.fc, "hidden fc widths (default 4)");
  gc->add_option("--trials", gc_args.cfg.trials, "random draws (default 100)");
  gc->add_option("--fd-step", gc_args.cfg.fd_step, "finite-difference step (default 1e-5)");
  gc->add_option("--tolerance", gc_args.cfg.tolerance, "max relative error (default 1e-4)");
  gc->add_option("--seed", gc_args.cfg.seed, "draw seed");
  gc->callback([&] { cmd_check_gradients(gc_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
