#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lube/dataio.hpp"
#include "lube/error.hpp"
#include "lube/types.hpp"

namespace lube {

// ---------------------------------------------------------------------------
// Evaluation inputs
// ---------------------------------------------------------------------------

// Targets with ranked interval bounds and the target span A that normalizes
// the width measures.
struct EvaluationSet {
  Vector y;
  Vector lower;
  Vector upper;
  Real span = 0.0;

  Index count() const { return y.size(); }

  static EvaluationSet from(Vector y, Vector lower, Vector upper,
                            std::optional<Real> span = std::nullopt) {
    EvaluationSet s;
    require(y.size() > 0, "evaluation set is empty");
    require(lower.size() == y.size() && upper.size() == y.size(),
            "bound lengths (", lower.size(), ", ", upper.size(), ") != target length ", y.size());
    for (Index i = 0; i < y.size(); ++i) {
      require(lower[i] <= upper[i], "lower bound exceeds upper bound at index ", i, " (",
              lower[i], " > ", upper[i], ")");
    }
    s.y = std::move(y);
    s.lower = std::move(lower);
    s.upper = std::move(upper);
    if (span) {
      require(*span > 0.0, "target span must be > 0, got ", *span);
      s.span = *span;
    } else {
      s.span = s.y.maxCoeff() - s.y.minCoeff();
      require(s.span > 0.0,
              "targets are constant, so the default span is zero; pass an explicit span");
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Interval quality measures
// ---------------------------------------------------------------------------

// Fraction of targets covered by their interval, boundaries inclusive.
inline Real picp(const EvaluationSet& s) {
  Index hits = 0;
  for (Index i = 0; i < s.count(); ++i) {
    if (s.lower[i] <= s.y[i] && s.y[i] <= s.upper[i]) ++hits;
  }
  return static_cast<Real>(hits) / static_cast<Real>(s.count());
}

// Mean interval width over the target span.
inline Real pinaw(const EvaluationSet& s) {
  return (s.upper - s.lower).sum() / (static_cast<Real>(s.count()) * s.span);
}

// Root-mean-square interval width over the target span; widens faster than
// the mean when widths are uneven.
inline Real pinrw(const EvaluationSet& s) {
  Real ms = (s.upper - s.lower).squaredNorm() / static_cast<Real>(s.count());
  return std::sqrt(ms) / s.span;
}

struct NadResult {
  Real value = 0.0;
  bool degenerate = false; // uncovered points against zero mean width
};

// Mean escape distance of uncovered targets, normalized by the mean interval
// width. Zero mean width with every point covered is 0; with any point
// uncovered the measure diverges and is reported as infinity.
inline NadResult nad(const EvaluationSet& s) {
  Real mean_width = (s.upper - s.lower).sum() / static_cast<Real>(s.count());
  Real total_deviation = 0.0;
  for (Index i = 0; i < s.count(); ++i) {
    if (s.y[i] < s.lower[i]) total_deviation += s.lower[i] - s.y[i];
    else if (s.y[i] > s.upper[i]) total_deviation += s.y[i] - s.upper[i];
  }
  if (mean_width <= 0.0) {
    if (total_deviation == 0.0) return {0.0, false};
    return {std::numeric_limits<Real>::infinity(), true};
  }
  return {total_deviation / (static_cast<Real>(s.count()) * mean_width), false};
}

// ---------------------------------------------------------------------------
// Coverage-width composites
// ---------------------------------------------------------------------------

struct CwcConfig {
  Real mu = 0.9;    // nominal coverage
  Real eta = 15.0;  // penalty steepness below nominal coverage
  Real alpha = 0.1; // proposed variant: offset inside the penalty product
  Real beta = 6.0;  // proposed variant: width multiplier

  void validate() const {
    require(mu > 0.0 && mu <= 1.0, "mu must lie in (0, 1], got ", mu);
    require(eta > 0.0, "eta must be > 0, got ", eta);
    require(alpha >= 0.0, "alpha must be >= 0, got ", alpha);
    require(beta > 0.0, "beta must be > 0, got ", beta);
  }
};

// Additive form: the width term, plus an exponential penalty only when
// coverage falls short of nominal.
inline Real cwc_original(Real picp_value, Real pinaw_value, const CwcConfig& cfg = {}) {
  if (picp_value >= cfg.mu) return pinaw_value;
  return pinaw_value + std::exp(-cfg.eta * (picp_value - cfg.mu));
}

// Multiplicative form: scaled width when coverage holds; otherwise the offset
// width is amplified by one plus the exponential penalty, so the width factor
// never vanishes from the product.
inline Real cwc_proposed(Real picp_value, Real pinaw_value, const CwcConfig& cfg = {}) {
  if (picp_value >= cfg.mu) return cfg.beta * pinaw_value;
  return (cfg.alpha + cfg.beta * pinaw_value) *
         (1.0 + std::exp(-cfg.eta * (picp_value - cfg.mu)));
}

enum class CwcVariant { Original, Proposed };

inline Real cwc(CwcVariant variant, Real picp_value, Real pinaw_value, const CwcConfig& cfg = {}) {
  return variant == CwcVariant::Original ? cwc_original(picp_value, pinaw_value, cfg)
                                         : cwc_proposed(picp_value, pinaw_value, cfg);
}

inline CwcVariant cwc_variant_from_string(const std::string& s) {
  if (s == "original") return CwcVariant::Original;
  if (s == "proposed") return CwcVariant::Proposed;
  fail("unknown cwc variant '", s, "' (expected original or proposed)");
}

// Percentage improvement of value B over baseline A, positive when B is
// smaller: (A - B) / A * 100.
inline Real improvement_ratio(Real baseline, Real other) {
  require(baseline != 0.0, "improvement ratio undefined for a zero baseline");
  return (baseline - other) / baseline * 100.0;
}

// ---------------------------------------------------------------------------
// Composite surface sweep
// ---------------------------------------------------------------------------

struct SurfaceConfig {
  CwcVariant variant = CwcVariant::Proposed;
  CwcConfig cwc;
  Real picp_min = 0.5, picp_max = 1.0;
  Real pinaw_min = 0.0, pinaw_max = 0.5;
  Index picp_count = 101;
  Index pinaw_count = 101;

  void validate() const {
    cwc.validate();
    require(picp_count >= 2 && pinaw_count >= 2, "surface grid needs at least 2 points per axis");
    require(picp_max > picp_min, "picp range is empty");
    require(pinaw_max > pinaw_min, "pinaw range is empty");
  }
};

struct SurfacePoint {
  Real picp;
  Real pinaw;
  Real cwc;
};

inline std::vector<SurfacePoint> cwc_surface(const SurfaceConfig& cfg) {
  cfg.validate();
  std::vector<SurfacePoint> grid;
  grid.reserve(static_cast<std::size_t>(cfg.picp_count * cfg.pinaw_count));
  for (Index i = 0; i < cfg.picp_count; ++i) {
    Real p = cfg.picp_min +
             (cfg.picp_max - cfg.picp_min) * static_cast<Real>(i) /
                 static_cast<Real>(cfg.picp_count - 1);
    for (Index j = 0; j < cfg.pinaw_count; ++j) {
      Real w = cfg.pinaw_min +
               (cfg.pinaw_max - cfg.pinaw_min) * static_cast<Real>(j) /
                   static_cast<Real>(cfg.pinaw_count - 1);
      grid.push_back({p, w, cwc(cfg.variant, p, w, cfg.cwc)});
    }
  }
  return grid;
}

inline void write_surface_csv(const std::vector<SurfacePoint>& grid, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open output file: ", path);
  out << "picp,pinaw,cwc\n";
  for (const SurfacePoint& p : grid) {
    out << format_real(p.picp) << ',' << format_real(p.pinaw) << ',' << format_real(p.cwc)
        << '\n';
  }
  require(out.good(), "failed writing: ", path);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct MetricReport {
  Index count = 0;
  Real span = 0.0;
  Real picp = 0.0;
  Real pinaw = 0.0;
  Real pinrw = 0.0;
  NadResult nad;
  Real cwc_original = 0.0;
  Real cwc_proposed = 0.0;
  CwcConfig cwc_config;
  bool normalized_scale = false; // metrics taken on the normalized values
};

inline MetricReport evaluate_intervals(const EvaluationSet& s, const CwcConfig& cfg = {},
                                       bool normalized_scale = false) {
  cfg.validate();
  MetricReport r;
  r.count = s.count();
  r.span = s.span;
  r.picp = picp(s);
  r.pinaw = pinaw(s);
  r.pinrw = pinrw(s);
  r.nad = nad(s);
  r.cwc_original = cwc_original(r.picp, r.pinaw, cfg);
  r.cwc_proposed = cwc_proposed(r.picp, r.pinaw, cfg);
  r.cwc_config = cfg;
  r.normalized_scale = normalized_scale;
  return r;
}

// train_time_seconds is reported as null: wall-clock timing varies run to
// run, and the report must not.
inline nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json j{
      {"count", r.count},
      {"target_span", r.span},
      {"picp", r.picp},
      {"picp_percent", r.picp * 100.0},
      {"pinaw", r.pinaw},
      {"pinrw", r.pinrw},
      {"nad", nullptr},
      {"nad_degenerate", r.nad.degenerate},
      {"cwc_original", r.cwc_original},
      {"cwc_proposed", r.cwc_proposed},
      {"cwc_config",
       {{"mu", r.cwc_config.mu},
        {"eta", r.cwc_config.eta},
        {"alpha", r.cwc_config.alpha},
        {"beta", r.cwc_config.beta}}},
      {"normalized_scale", r.normalized_scale},
      {"train_time_seconds", nullptr},
  };
  if (std::isfinite(r.nad.value)) j["nad"] = r.nad.value;
  else j["nad"] = "inf";
  return j;
}

// ---------------------------------------------------------------------------
// Prediction tables
// ---------------------------------------------------------------------------

struct PredictionTable {
  std::vector<Index> index;
  Vector y;
  Vector lower;
  Vector upper;
};

inline void write_predictions_csv(const PredictionTable& t, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open output file: ", path);
  require(t.y.size() == t.lower.size() && t.y.size() == t.upper.size() &&
              static_cast<Index>(t.index.size()) == t.y.size(),
          "prediction table columns disagree in length");
  out << "index,y,lower,upper\n";
  for (Index i = 0; i < t.y.size(); ++i) {
    out << t.index[static_cast<std::size_t>(i)] << ',' << format_real(t.y[i]) << ','
        << format_real(t.lower[i]) << ',' << format_real(t.upper[i]) << '\n';
  }
  require(out.good(), "failed writing: ", path);
}

inline PredictionTable read_predictions_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open predictions file: ", path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "predictions file is empty: ", path);

  std::vector<Real> idx, y, lo, hi;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = detail::split_csv_line(line);
    require(cells.size() >= 4, "row ", row, ": expected 4 columns, got ", cells.size());
    Real vals[4];
    for (int c = 0; c < 4; ++c) {
      require(detail::parse_real(cells[static_cast<std::size_t>(c)], vals[c]), "row ", row,
              ": cannot parse '", cells[static_cast<std::size_t>(c)], "'");
    }
    idx.push_back(vals[0]);
    y.push_back(vals[1]);
    lo.push_back(vals[2]);
    hi.push_back(vals[3]);
  }
  require(!y.empty(), "predictions file holds no data rows: ", path);

  PredictionTable t;
  t.index.reserve(idx.size());
  for (Real v : idx) t.index.push_back(static_cast<Index>(v));
  auto n = static_cast<Index>(y.size());
  t.y = Eigen::Map<const Vector>(y.data(), n);
  t.lower = Eigen::Map<const Vector>(lo.data(), n);
  t.upper = Eigen::Map<const Vector>(hi.data(), n);
  return t;
}

} // namespace lube
