#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lube/activations.hpp"
#include "lube/error.hpp"
#include "lube/random.hpp"
#include "lube/types.hpp"

namespace lube {

// ---------------------------------------------------------------------------
// Architecture description
// ---------------------------------------------------------------------------

struct NetworkDims {
  Index input_dim = 1;
  Index hidden_dim = 64;
  Index cell_count = 9;               // unrolled recurrent steps per sample
  std::vector<Index> fc_hidden = {32, 16, 8};
  Index output_dim = 2;               // upper and lower interval bounds

  void validate() const {
    require(input_dim >= 1, "input_dim must be >= 1, got ", input_dim);
    require(hidden_dim >= 1, "hidden_dim must be >= 1, got ", hidden_dim);
    require(cell_count >= 1, "cell_count must be >= 1, got ", cell_count);
    require(output_dim == 2, "output_dim must be 2, got ", output_dim);
    for (std::size_t i = 0; i < fc_hidden.size(); ++i) {
      require(fc_hidden[i] >= 1, "fc_hidden[", i, "] must be >= 1, got ", fc_hidden[i]);
    }
  }

  // Layer widths of the fully-connected tail, input first, output last.
  std::vector<Index> fc_widths() const {
    std::vector<Index> w;
    w.push_back(hidden_dim);
    w.insert(w.end(), fc_hidden.begin(), fc_hidden.end());
    w.push_back(output_dim);
    return w;
  }
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct FcLayer {
  Matrix W; // out x in
  Vector b; // subtracted in the affine map: z = W v - b
};

// Recurrent weights (hidden x hidden), input weights (hidden x input), and
// gate biases (added). Same memory layout doubles as the gradient container.
struct ParameterSet {
  Matrix W_fh, W_ih, W_oh, W_ch;
  Matrix W_fx, W_ix, W_ox, W_cx;
  Vector b_f, b_i, b_o, b_c;
  std::vector<FcLayer> fc;
};

using GradientSet = ParameterSet;

// Applies f(name, arrays...) to every parameter array, in a fixed order that
// doubles as the initialization draw order and the serialization order.
template <typename F, typename... PS>
void zip_params(F&& f, PS&&... ps) {
  f(std::string("W_fh"), ps.W_fh...);
  f(std::string("W_ih"), ps.W_ih...);
  f(std::string("W_oh"), ps.W_oh...);
  f(std::string("W_ch"), ps.W_ch...);
  f(std::string("W_fx"), ps.W_fx...);
  f(std::string("W_ix"), ps.W_ix...);
  f(std::string("W_ox"), ps.W_ox...);
  f(std::string("W_cx"), ps.W_cx...);
  f(std::string("b_f"), ps.b_f...);
  f(std::string("b_i"), ps.b_i...);
  f(std::string("b_o"), ps.b_o...);
  f(std::string("b_c"), ps.b_c...);
  // All ParameterSet-shaped arguments hold the same fc layer count.
  auto layers = std::get<0>(std::tie(ps...)).fc.size();
  for (std::size_t k = 0; k < layers; ++k) {
    std::string tag = "fc[" + std::to_string(k) + "]";
    f(tag + ".W", ps.fc[k].W...);
    f(tag + ".b", ps.fc[k].b...);
  }
}

inline GradientSet zeros_like(const ParameterSet& params) {
  GradientSet g = params;
  zip_params([](const std::string&, auto& a) { a.setZero(); }, g);
  return g;
}

// Symmetric uniform draws with scale sqrt(6 / (fan_in + fan_out)) per matrix,
// filled row-major; biases start at zero except the forget gate's, which
// starts at one so early training does not flush cell state. The Rng overload
// consumes exactly size() draws per matrix, so callers can chain draws.
inline ParameterSet init_params(const NetworkDims& dims, Rng& rng) {
  dims.validate();
  ParameterSet p;
  const Index H = dims.hidden_dim;
  const Index D = dims.input_dim;
  for (Matrix* m : {&p.W_fh, &p.W_ih, &p.W_oh, &p.W_ch}) m->resize(H, H);
  for (Matrix* m : {&p.W_fx, &p.W_ix, &p.W_ox, &p.W_cx}) m->resize(H, D);
  for (Vector* v : {&p.b_f, &p.b_i, &p.b_o, &p.b_c}) v->setZero(H);
  p.b_f.setOnes();

  auto widths = dims.fc_widths();
  p.fc.resize(widths.size() - 1);
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    p.fc[k].W.resize(widths[k + 1], widths[k]);
    p.fc[k].b.setZero(widths[k + 1]);
  }

  auto fill = [&](Matrix& m) {
    Real scale = std::sqrt(6.0 / static_cast<Real>(m.rows() + m.cols()));
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-scale, scale);
    }
  };
  for (Matrix* m : {&p.W_fh, &p.W_ih, &p.W_oh, &p.W_ch, &p.W_fx, &p.W_ix, &p.W_ox, &p.W_cx}) {
    fill(*m);
  }
  for (auto& layer : p.fc) fill(layer.W);
  return p;
}

inline ParameterSet init_params(const NetworkDims& dims, std::uint64_t seed) {
  Rng rng(seed);
  return init_params(dims, rng);
}

inline void check_params_match(const ParameterSet& p, const NetworkDims& dims) {
  dims.validate();
  const Index H = dims.hidden_dim;
  const Index D = dims.input_dim;
  require(p.W_fh.rows() == H && p.W_fh.cols() == H, "W_fh shape mismatch for hidden_dim ", H);
  require(p.W_fx.rows() == H && p.W_fx.cols() == D, "W_fx shape mismatch for input_dim ", D);
  require(p.b_f.size() == H, "b_f length mismatch for hidden_dim ", H);
  auto widths = dims.fc_widths();
  require(p.fc.size() == widths.size() - 1,
          "expected ", widths.size() - 1, " fc layers, got ", p.fc.size());
  for (std::size_t k = 0; k < p.fc.size(); ++k) {
    require(p.fc[k].W.rows() == widths[k + 1] && p.fc[k].W.cols() == widths[k],
            "fc[", k, "].W shape mismatch");
    require(p.fc[k].b.size() == widths[k + 1], "fc[", k, "].b length mismatch");
  }
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

struct CellState {
  Vector C;
  Vector H;
};

// Post-activation values kept per cell; backpropagation re-derives every
// derivative from these without re-running the forward pass.
struct CellTrace {
  Vector f, i, o, ctilde;
  Vector C, H, tanhC;
};

struct ForwardTrace {
  Matrix inputs; // cell_count x input_dim, one recurrent step per row
  CellState initial;
  std::vector<CellTrace> cells;
  std::vector<Vector> fc_pre; // affine outputs, before activation
  std::vector<Vector> fc_act; // activated outputs; back() is the output pair
  Real u = 0.0;               // raw first output, unranked
  Real l = 0.0;               // raw second output, unranked
};

inline CellTrace lstm_step(const ParameterSet& p, const Eigen::Ref<const Vector>& x,
                           const CellState& prev) {
  CellTrace t;
  t.f = sigmoid(p.W_fh * prev.H + p.W_fx * x + p.b_f);
  t.i = sigmoid(p.W_ih * prev.H + p.W_ix * x + p.b_i);
  t.o = sigmoid(p.W_oh * prev.H + p.W_ox * x + p.b_o);
  t.ctilde = tanh(p.W_ch * prev.H + p.W_cx * x + p.b_c);
  t.C = t.f.cwiseProduct(prev.C) + t.i.cwiseProduct(t.ctilde);
  t.tanhC = tanh(t.C);
  t.H = t.o.cwiseProduct(t.tanhC);
  return t;
}

// Hidden layers apply relu(W v - b); the final layer is affine only.
inline void fc_forward(const ParameterSet& p, const Vector& input, ForwardTrace& trace) {
  trace.fc_pre.clear();
  trace.fc_act.clear();
  Vector v = input;
  for (std::size_t k = 0; k < p.fc.size(); ++k) {
    Vector z = p.fc[k].W * v - p.fc[k].b;
    trace.fc_pre.push_back(z);
    v = (k + 1 < p.fc.size()) ? Vector(relu(z)) : z;
    trace.fc_act.push_back(v);
  }
}

// Runs the unrolled recurrent chain over one sample (rows of `sample` are the
// lagged inputs, oldest first), then the fully-connected tail. State starts
// at zero. Outputs stay unranked; training differentiates through them as-is.
inline ForwardTrace forward(const ParameterSet& p, const NetworkDims& dims,
                            const Eigen::Ref<const Matrix>& sample) {
  require(sample.rows() == dims.cell_count && sample.cols() == dims.input_dim,
          "sample shape ", sample.rows(), "x", sample.cols(), " != cells ", dims.cell_count,
          " x input_dim ", dims.input_dim);
  ForwardTrace trace;
  trace.inputs = sample;
  trace.initial.C = Vector::Zero(dims.hidden_dim);
  trace.initial.H = Vector::Zero(dims.hidden_dim);
  trace.cells.reserve(static_cast<std::size_t>(dims.cell_count));
  CellState state = trace.initial;
  for (Index r = 0; r < dims.cell_count; ++r) {
    CellTrace cell = lstm_step(p, sample.row(r).transpose(), state);
    state.C = cell.C;
    state.H = cell.H;
    trace.cells.push_back(std::move(cell));
  }
  fc_forward(p, state.H, trace);
  const Vector& out = trace.fc_act.back();
  trace.u = out[0];
  trace.l = out[1];
  return trace;
}

// ---------------------------------------------------------------------------
// Prediction-time ranking
// ---------------------------------------------------------------------------

struct PredictionInterval {
  Real upper;
  Real lower;
};

// The two raw outputs carry no fixed order; ranking happens only here, at
// prediction time, never inside the training loss.
inline PredictionInterval rank(Real u, Real l) {
  return {std::max(u, l), std::min(u, l)};
}

inline PredictionInterval predict(const ParameterSet& p, const NetworkDims& dims,
                                  const Eigen::Ref<const Matrix>& sample) {
  ForwardTrace t = forward(p, dims, sample);
  return rank(t.u, t.l);
}

// Lagged row -> cell_count x input_dim sample matrix (input_dim 1 case).
inline Matrix sample_from_row(const Eigen::Ref<const Vector>& row) {
  Matrix m(row.size(), 1);
  m.col(0) = row;
  return m;
}

} // namespace lube
