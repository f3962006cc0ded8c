#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "lube/dataio.hpp"
#include "lube/error.hpp"
#include "lube/network.hpp"
#include "lube/types.hpp"

namespace lube {

using Json = nlohmann::json;

// Matrices are stored as flat row-major arrays beside their shape. nlohmann
// serializes doubles at round-trip precision, so save/load is bit-exact.

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
  Json values = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(values)}};
}

inline Matrix matrix_from_json(const Json& j, const std::string& name) {
  require(j.contains("rows") && j.contains("cols") && j.contains("values"),
          "parameter '", name, "' is missing rows/cols/values");
  Index rows = j.at("rows").get<Index>();
  Index cols = j.at("cols").get<Index>();
  const Json& values = j.at("values");
  require(static_cast<Index>(values.size()) == rows * cols,
          "parameter '", name, "' holds ", values.size(), " values, expected ", rows * cols);
  Matrix m(rows, cols);
  Index k = 0;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = values.at(static_cast<std::size_t>(k++)).get<Real>();
  }
  return m;
}

inline Json vector_to_json(const Vector& v) {
  Json values = Json::array();
  for (Index i = 0; i < v.size(); ++i) values.push_back(v[i]);
  return Json{{"rows", v.size()}, {"cols", 1}, {"values", std::move(values)}};
}

inline Vector vector_from_json(const Json& j, const std::string& name) {
  Matrix m = matrix_from_json(j, name);
  require(m.cols() == 1, "parameter '", name, "' must be a column vector");
  return m.col(0);
}

template <typename T> struct is_vector : std::false_type {};
template <> struct is_vector<Vector> : std::true_type {};

} // namespace detail

inline Json dims_to_json(const NetworkDims& dims) {
  return Json{{"input_dim", dims.input_dim},
              {"hidden_dim", dims.hidden_dim},
              {"cell_count", dims.cell_count},
              {"fc_hidden", dims.fc_hidden},
              {"output_dim", dims.output_dim}};
}

inline NetworkDims dims_from_json(const Json& j) {
  NetworkDims dims;
  dims.input_dim = j.at("input_dim").get<Index>();
  dims.hidden_dim = j.at("hidden_dim").get<Index>();
  dims.cell_count = j.at("cell_count").get<Index>();
  dims.fc_hidden = j.at("fc_hidden").get<std::vector<Index>>();
  dims.output_dim = j.at("output_dim").get<Index>();
  dims.validate();
  return dims;
}

inline Json norm_to_json(const NormalizationSpec& spec) {
  return Json{{"mode", to_string(spec.mode)}, {"min", spec.min}, {"max", spec.max}};
}

inline NormalizationSpec norm_from_json(const Json& j) {
  NormalizationSpec spec;
  spec.mode = norm_mode_from_string(j.at("mode").get<std::string>());
  spec.min = j.at("min").get<Real>();
  spec.max = j.at("max").get<Real>();
  if (spec.mode == NormMode::MinMax) {
    require(spec.max > spec.min, "normalization max must exceed min");
  }
  return spec;
}

inline Json params_to_json(const ParameterSet& params) {
  Json arrays = Json::object();
  zip_params(
      [&](const std::string& name, const auto& a) {
        if constexpr (detail::is_vector<std::decay_t<decltype(a)>>::value) {
          arrays[name] = detail::vector_to_json(a);
        } else {
          arrays[name] = detail::matrix_to_json(a);
        }
      },
      params);
  return arrays;
}

inline ParameterSet params_from_json(const Json& j, const NetworkDims& dims) {
  // Allocate at the right shapes first, then overwrite from the file so any
  // missing or misshapen entry is reported by name.
  ParameterSet params = init_params(dims, 0);
  zip_params(
      [&](const std::string& name, auto& a) {
        require(j.contains(name), "missing parameter '", name, "'");
        using A = std::decay_t<decltype(a)>;
        if constexpr (detail::is_vector<A>::value) {
          Vector v = detail::vector_from_json(j.at(name), name);
          require(v.size() == a.size(), "parameter '", name, "' length ", v.size(),
                  " != expected ", a.size());
          a = v;
        } else {
          Matrix m = detail::matrix_from_json(j.at(name), name);
          require(m.rows() == a.rows() && m.cols() == a.cols(), "parameter '", name, "' shape ",
                  m.rows(), "x", m.cols(), " != expected ", a.rows(), "x", a.cols());
          a = m;
        }
      },
      params);
  return params;
}

// ---------------------------------------------------------------------------
// Model files: dims + parameters + the normalization fitted at training time
// ---------------------------------------------------------------------------

struct ModelFile {
  NetworkDims dims;
  ParameterSet params;
  NormalizationSpec norm;
};

inline Json model_to_json(const ModelFile& model) {
  return Json{{"dims", dims_to_json(model.dims)},
              {"normalization", norm_to_json(model.norm)},
              {"parameters", params_to_json(model.params)}};
}

inline ModelFile model_from_json(const Json& j) {
  ModelFile model;
  model.dims = dims_from_json(j.at("dims"));
  model.params = params_from_json(j.at("parameters"), model.dims);
  model.norm = norm_from_json(j.at("normalization"));
  return model;
}

inline void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open output file: ", path);
  out << j.dump(2) << '\n';
  require(out.good(), "failed writing: ", path);
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open file: ", path);
  Json j = Json::parse(in, nullptr, false);
  require(!j.is_discarded(), "invalid JSON in ", path);
  return j;
}

inline void save_model(const ModelFile& model, const std::string& path) {
  save_json(model_to_json(model), path);
}

inline ModelFile load_model(const std::string& path) {
  return model_from_json(load_json(path));
}

} // namespace lube
