#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lube/error.hpp"
#include "lube/random.hpp"
#include "lube/types.hpp"

namespace lube {

// ---------------------------------------------------------------------------
// Core data types
// ---------------------------------------------------------------------------

struct RawSeries {
  std::vector<Real> timestamps; // carried through, never validated for gaps
  Vector values;

  Index size() const { return values.size(); }

  void validate() const {
    require(values.size() >= 2, "series must hold at least 2 values, got ", values.size());
    require(static_cast<Index>(timestamps.size()) == values.size(),
            "timestamp count ", timestamps.size(), " != value count ", values.size());
    for (Index i = 0; i < values.size(); ++i) {
      require(std::isfinite(values[i]), "non-finite value at position ", i);
    }
  }
};

enum class NormMode { MinMax, None };

inline const char* to_string(NormMode m) { return m == NormMode::MinMax ? "minmax" : "none"; }

inline NormMode norm_mode_from_string(const std::string& s) {
  if (s == "minmax") return NormMode::MinMax;
  if (s == "none") return NormMode::None;
  fail("unknown normalization mode '", s, "' (expected minmax or none)");
}

struct NormalizationSpec {
  Real min = 0.0;
  Real max = 1.0;
  NormMode mode = NormMode::None;

  Real apply(Real v) const {
    return mode == NormMode::MinMax ? (v - min) / (max - min) : v;
  }
  Real invert(Real v) const {
    return mode == NormMode::MinMax ? v * (max - min) + min : v;
  }
};

struct WindowedDataset {
  Matrix inputs;  // one row per sample, lag_count columns, oldest lag first
  Vector targets; // targets[i] is the value following inputs.row(i)
  Index lag_count = 0;
  NormalizationSpec norm;

  Index count() const { return targets.size(); }
};

// ---------------------------------------------------------------------------
// CSV loading
// ---------------------------------------------------------------------------

// Selects the value column by zero-based index or by header name.
struct ColumnSelector {
  std::variant<Index, std::string> value_column{Index{0}};
  std::optional<std::variant<Index, std::string>> time_column;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    std::string cell = line.substr(start, pos == std::string::npos ? pos : pos - start);
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t lead = cell.find_first_not_of(' ');
    cells.push_back(lead == std::string::npos ? std::string{} : cell.substr(lead));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

inline bool parse_real(const std::string& cell, Real& out) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !cell.empty();
}

inline Index resolve_column(const std::variant<Index, std::string>& sel,
                            const std::vector<std::string>& header, bool has_header,
                            const char* what) {
  if (std::holds_alternative<Index>(sel)) return std::get<Index>(sel);
  const std::string& name = std::get<std::string>(sel);
  require(has_header, "cannot select ", what, " column by name '", name, "': file has no header row");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return static_cast<Index>(c);
  }
  fail("no column named '", name, "' in header");
}

} // namespace detail

// Reads a comma-separated file with an optional header row (detected by a
// non-numeric first row). Errors name the offending 1-based row.
inline RawSeries load_series(const std::string& path, const ColumnSelector& columns = {}) {
  std::ifstream in(path);
  require(in.good(), "cannot open data file: ", path);

  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  require(!lines.empty(), "data file is empty: ", path);

  auto first_cells = detail::split_csv_line(lines[0]);
  Real probe;
  bool has_header = false;
  for (const auto& cell : first_cells) {
    if (!detail::parse_real(cell, probe)) { has_header = true; break; }
  }

  Index value_col = detail::resolve_column(columns.value_column, first_cells, has_header, "value");
  std::optional<Index> time_col;
  if (columns.time_column) {
    time_col = detail::resolve_column(*columns.time_column, first_cells, has_header, "time");
  }

  std::size_t begin = has_header ? 1 : 0;
  RawSeries series;
  std::vector<Real> values;
  values.reserve(lines.size());
  for (std::size_t k = begin; k < lines.size(); ++k) {
    auto cells = detail::split_csv_line(lines[k]);
    std::size_t row = k + 1; // 1-based, as it appears in the file
    require(value_col < static_cast<Index>(cells.size()),
            "row ", row, ": expected at least ", value_col + 1, " columns, got ", cells.size());
    Real v;
    require(detail::parse_real(cells[value_col], v),
            "row ", row, ": cannot parse value '", cells[value_col], "'");
    require(std::isfinite(v), "row ", row, ": non-finite value");
    values.push_back(v);

    Real t = static_cast<Real>(values.size() - 1);
    if (time_col) {
      require(*time_col < static_cast<Index>(cells.size()),
              "row ", row, ": missing time column");
      require(detail::parse_real(cells[*time_col], t),
              "row ", row, ": cannot parse time '", cells[*time_col], "'");
    }
    series.timestamps.push_back(t);
  }
  series.values = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
  series.validate();
  return series;
}

// 17 significant digits: lossless text round-trip for binary64.
inline std::string format_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_series_csv(const RawSeries& series, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open output file: ", path);
  out << "t,value\n";
  for (Index i = 0; i < series.size(); ++i) {
    out << format_real(series.timestamps[static_cast<std::size_t>(i)]) << ','
        << format_real(series.values[i]) << '\n';
  }
  require(out.good(), "failed writing: ", path);
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

inline NormalizationSpec fit_normalization(const Eigen::Ref<const Vector>& values, NormMode mode) {
  require(values.size() > 0, "cannot fit normalization on an empty range");
  if (mode == NormMode::None) return {0.0, 1.0, NormMode::None};
  Real lo = values.minCoeff();
  Real hi = values.maxCoeff();
  require(hi > lo, "min-max normalization undefined for a constant series (min == max == ", lo, ")");
  return {lo, hi, NormMode::MinMax};
}

inline Vector apply_normalization(const Eigen::Ref<const Vector>& values,
                                  const NormalizationSpec& spec) {
  if (spec.mode == NormMode::None) return values;
  return (values.array() - spec.min) / (spec.max - spec.min);
}

inline std::pair<RawSeries, NormalizationSpec> normalize(const RawSeries& series, NormMode mode) {
  NormalizationSpec spec = fit_normalization(series.values, mode);
  RawSeries out;
  out.timestamps = series.timestamps;
  out.values = apply_normalization(series.values, spec);
  return {std::move(out), spec};
}

// ---------------------------------------------------------------------------
// Windowing and chronological split
// ---------------------------------------------------------------------------

// Sample i: inputs = values[i .. i+R-1], target = values[i+R]. Stride 1.
inline WindowedDataset window(const RawSeries& series, Index lag_count,
                              const NormalizationSpec& norm = {}) {
  require(lag_count >= 1, "lag count must be >= 1, got ", lag_count);
  require(series.size() > lag_count,
          "series of length ", series.size(), " is too short for lag count ", lag_count);
  Index n = series.size() - lag_count;
  WindowedDataset ds;
  ds.lag_count = lag_count;
  ds.norm = norm;
  ds.inputs.resize(n, lag_count);
  ds.targets.resize(n);
  for (Index i = 0; i < n; ++i) {
    ds.inputs.row(i) = series.values.segment(i, lag_count).transpose();
    ds.targets[i] = series.values[i + lag_count];
  }
  return ds;
}

// Chronological partition at a sample index: [0, boundary) trains,
// [boundary, count) tests. No shuffling.
inline std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& ds,
                                                         Index boundary) {
  require(boundary > 0 && boundary < ds.count(),
          "split boundary ", boundary, " must lie strictly inside (0, ", ds.count(), ")");
  WindowedDataset train, test;
  train.lag_count = test.lag_count = ds.lag_count;
  train.norm = test.norm = ds.norm;
  train.inputs = ds.inputs.topRows(boundary);
  train.targets = ds.targets.head(boundary);
  test.inputs = ds.inputs.bottomRows(ds.count() - boundary);
  test.targets = ds.targets.tail(ds.count() - boundary);
  return {std::move(train), std::move(test)};
}

// Raw-series boundary (e.g. 720 = five days of 10-min points) expressed as a
// sample boundary: the first test sample is the one whose target sits at the
// raw boundary.
inline Index sample_boundary_from_raw(Index raw_boundary, Index lag_count) {
  return raw_boundary - lag_count;
}

inline Index raw_boundary_from_fraction(Index series_length, Real train_fraction) {
  require(train_fraction > 0.0 && train_fraction < 1.0,
          "train fraction must lie in (0, 1), got ", train_fraction);
  return static_cast<Index>(std::llround(static_cast<Real>(series_length) * train_fraction));
}

// ---------------------------------------------------------------------------
// Synthetic fixtures
// ---------------------------------------------------------------------------

enum class SynthKind { SineUniform, SineGaussian };

inline SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "sine-uniform") return SynthKind::SineUniform;
  if (s == "sine-gaussian") return SynthKind::SineGaussian;
  fail("unknown synthetic kind '", s, "' (expected sine-uniform or sine-gaussian)");
}

// Daily-period sinusoid in [0.1, 0.9] sampled at 10-min resolution
// (period 144), plus seeded noise: uniform in [-amplitude, amplitude] or
// Gaussian with standard deviation = amplitude.
inline RawSeries synth_series(SynthKind kind, Index length, Real noise_amplitude,
                              std::uint64_t seed) {
  require(length > 0, "synthetic series length must be positive, got ", length);
  require(noise_amplitude >= 0.0, "noise amplitude must be >= 0, got ", noise_amplitude);
  constexpr Real period = 144.0;
  Rng rng(seed);
  RawSeries series;
  series.timestamps.resize(static_cast<std::size_t>(length));
  series.values.resize(length);
  for (Index t = 0; t < length; ++t) {
    Real clean = 0.5 + 0.4 * std::sin(2.0 * M_PI * static_cast<Real>(t) / period);
    Real noise = 0.0;
    if (noise_amplitude > 0.0) {
      noise = kind == SynthKind::SineUniform
                  ? rng.uniform(-noise_amplitude, noise_amplitude)
                  : noise_amplitude * rng.normal();
    }
    series.timestamps[static_cast<std::size_t>(t)] = static_cast<Real>(t);
    series.values[t] = clean + noise;
  }
  return series;
}

// Clean signal value used by synth_series, for noise-band assertions.
inline Real synth_clean_value(Index t) {
  return 0.5 + 0.4 * std::sin(2.0 * M_PI * static_cast<Real>(t) / 144.0);
}

} // namespace lube
