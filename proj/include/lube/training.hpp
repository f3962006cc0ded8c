#pragma once

#include <cmath>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lube/activations.hpp"
#include "lube/dataio.hpp"
#include "lube/error.hpp"
#include "lube/loss.hpp"
#include "lube/network.hpp"
#include "lube/random.hpp"
#include "lube/types.hpp"

namespace lube {

// ---------------------------------------------------------------------------
// Backpropagation through the unrolled chain
// ---------------------------------------------------------------------------

// Seeds the fully-connected tail with d(loss)/d(u, l) and walks the chain
// backwards, accumulating into `grads` (caller owns zeroing). Every local
// derivative is recovered from the post-activation values in the trace.
inline void backward_from_output(const ParameterSet& p, const NetworkDims& dims,
                                 const ForwardTrace& trace, Real du, Real dl,
                                 GradientSet& grads) {
  const std::size_t layers = p.fc.size();
  Vector delta(2);
  delta << du, dl;

  // Fully-connected tail. Hidden layers activate with relu; the last layer is
  // affine, so its delta passes through unchanged. The bias enters negated
  // (z = W v - b), so its gradient is the negated delta.
  for (std::size_t k = layers; k-- > 0;) {
    if (k + 1 < layers) {
      delta = delta.cwiseProduct(trace.fc_pre[k].unaryExpr([](Real z) { return relu_deriv(z); }));
    }
    const Vector& in = k == 0 ? trace.cells.back().H : trace.fc_act[k - 1];
    grads.fc[k].W += delta * in.transpose();
    grads.fc[k].b -= delta;
    delta = p.fc[k].W.transpose() * delta;
  }

  // Recurrent chain, newest cell first. dH and dC carry the running
  // derivatives with respect to each cell's outputs.
  Vector dH = delta;
  Vector dC = Vector::Zero(dims.hidden_dim);
  for (Index r = dims.cell_count; r-- > 0;) {
    const CellTrace& cell = trace.cells[static_cast<std::size_t>(r)];
    const Vector& H_prev = r == 0 ? trace.initial.H : trace.cells[static_cast<std::size_t>(r - 1)].H;
    const Vector& C_prev = r == 0 ? trace.initial.C : trace.cells[static_cast<std::size_t>(r - 1)].C;
    Vector x = trace.inputs.row(r).transpose();

    Vector dO = dH.cwiseProduct(cell.tanhC);
    dC += dH.cwiseProduct(cell.o).cwiseProduct(
        cell.tanhC.unaryExpr([](Real t) { return tanh_deriv(t); }));

    Vector dzf = dC.cwiseProduct(C_prev).cwiseProduct(
        cell.f.unaryExpr([](Real s) { return sigmoid_deriv(s); }));
    Vector dzi = dC.cwiseProduct(cell.ctilde).cwiseProduct(
        cell.i.unaryExpr([](Real s) { return sigmoid_deriv(s); }));
    Vector dzo = dO.cwiseProduct(cell.o.unaryExpr([](Real s) { return sigmoid_deriv(s); }));
    Vector dzc = dC.cwiseProduct(cell.i).cwiseProduct(
        cell.ctilde.unaryExpr([](Real t) { return tanh_deriv(t); }));

    grads.W_fh += dzf * H_prev.transpose();
    grads.W_ih += dzi * H_prev.transpose();
    grads.W_oh += dzo * H_prev.transpose();
    grads.W_ch += dzc * H_prev.transpose();
    grads.W_fx += dzf * x.transpose();
    grads.W_ix += dzi * x.transpose();
    grads.W_ox += dzo * x.transpose();
    grads.W_cx += dzc * x.transpose();
    grads.b_f += dzf;
    grads.b_i += dzi;
    grads.b_o += dzo;
    grads.b_c += dzc;

    dH = p.W_fh.transpose() * dzf + p.W_ih.transpose() * dzi + p.W_oh.transpose() * dzo +
         p.W_ch.transpose() * dzc;
    dC = dC.cwiseProduct(cell.f);
  }
}

// Gradient of the summed objectives for one sample, accumulated into `grads`.
inline void backward(const ParameterSet& p, const NetworkDims& dims, const ForwardTrace& trace,
                     Real y, const LossConfig& cfg, GradientSet& grads) {
  LossGrad g1 = loss_f1_grad(trace.u, trace.l, y, cfg);
  LossGrad g2 = loss_f2_grad(trace.u, trace.l, cfg);
  backward_from_output(p, dims, trace, g1.du + g2.du, g1.dl + g2.dl, grads);
}

struct BatchStats {
  Real mean_f1 = 0.0;
  Real mean_f2 = 0.0;
  Real mean_total() const { return mean_f1 + mean_f2; }
};

// Mean gradient and mean losses over the rows of `data` named by `order`.
// Samples are reduced in the order given, so results are reproducible.
inline BatchStats batch_gradients(const ParameterSet& p, const NetworkDims& dims,
                                  const WindowedDataset& data,
                                  const std::vector<Index>& order, std::size_t begin,
                                  std::size_t end, const LossConfig& cfg, GradientSet& grads) {
  require(end > begin && end <= order.size(), "empty or out-of-range batch");
  zip_params([](const std::string&, auto& a) { a.setZero(); }, grads);
  BatchStats stats;
  for (std::size_t k = begin; k < end; ++k) {
    Index i = order[k];
    ForwardTrace trace = forward(p, dims, sample_from_row(data.inputs.row(i)));
    stats.mean_f1 += loss_f1(trace.u, trace.l, data.targets[i], cfg);
    stats.mean_f2 += loss_f2(trace.u, trace.l, cfg);
    backward(p, dims, trace, data.targets[i], cfg, grads);
  }
  Real inv = 1.0 / static_cast<Real>(end - begin);
  zip_params([&](const std::string&, auto& a) { a *= inv; }, grads);
  stats.mean_f1 *= inv;
  stats.mean_f2 *= inv;
  return stats;
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct OptimizerConfig {
  Real rho = 0.9;     // decay of the squared-gradient average
  Real eps = 0.001;   // step size
  Real delta = 1e-6;  // keeps the divisor positive before the average warms up

  void validate() const {
    require(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1), got ", rho);
    require(eps > 0.0, "step size must be > 0, got ", eps);
    require(delta > 0.0, "delta must be > 0, got ", delta);
  }
};

// Per-parameter squared-gradient running averages, shape-congruent with the
// parameters they serve.
struct OptimizerState {
  OptimizerConfig config;
  GradientSet r;
  std::int64_t steps = 0;

  OptimizerState(const OptimizerConfig& cfg, const ParameterSet& params)
      : config(cfg), r(zeros_like(params)) {
    config.validate();
  }
};

// r <- rho r + (1 - rho) g^2, w <- w - eps / (delta + sqrt(r)) * g, all
// elementwise. A non-finite gradient aborts, naming the parameter array.
inline void rmsprop_step(ParameterSet& params, const GradientSet& grads, OptimizerState& state) {
  const OptimizerConfig& c = state.config;
  zip_params(
      [&](const std::string& name, auto& w, const auto& g, auto& r) {
        require(g.allFinite(), "non-finite gradient in parameter array ", name);
        r.array() = c.rho * r.array() + (1.0 - c.rho) * g.array().square();
        w.array() -= c.eps / (c.delta + r.array().sqrt()) * g.array();
      },
      params, grads, state.r);
  ++state.steps;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
  Index batch_size = 32;
  Index epochs = 200;
  std::uint64_t seed = 42;
  bool shuffle = true;
  Real clip_threshold = 0.0; // global-norm gradient clip; 0 disables
  LossConfig loss;
  OptimizerConfig optimizer;

  void validate() const {
    require(batch_size >= 1, "batch_size must be >= 1, got ", batch_size);
    require(epochs >= 0, "epochs must be >= 0, got ", epochs);
    require(clip_threshold >= 0.0, "clip_threshold must be >= 0, got ", clip_threshold);
    loss.validate();
    optimizer.validate();
  }
};

struct EpochStats {
  Index epoch = 0; // 1-based
  Real mean_f1 = 0.0;
  Real mean_f2 = 0.0;
  Real mean_total() const { return mean_f1 + mean_f2; }
};

using TrainHistory = std::vector<EpochStats>;

inline void clip_gradients(GradientSet& grads, Real threshold) {
  if (threshold <= 0.0) return;
  Real sq = 0.0;
  zip_params([&](const std::string&, const auto& g) { sq += g.squaredNorm(); }, grads);
  Real norm = std::sqrt(sq);
  if (norm > threshold) {
    Real scale = threshold / norm;
    zip_params([&](const std::string&, auto& g) { g *= scale; }, grads);
  }
}

// Mini-batch descent over the sample set. Each epoch reshuffles the visit
// order (when enabled) and walks it in contiguous batches, the last of which
// may be short. Epoch statistics average the losses seen at the pre-update
// forward passes. Zero epochs is the identity: parameters stay untouched.
inline TrainHistory train(ParameterSet& params, const NetworkDims& dims,
                          const WindowedDataset& data, const TrainConfig& cfg,
                          OptimizerState* external_state = nullptr) {
  cfg.validate();
  check_params_match(params, dims);
  require(data.count() > 0, "training set is empty");
  require(data.lag_count == dims.cell_count, "dataset lag count ", data.lag_count,
          " != network cell count ", dims.cell_count);

  OptimizerState local_state(cfg.optimizer, params);
  OptimizerState& state = external_state ? *external_state : local_state;
  Rng shuffle_rng(substream(cfg.seed, 1));

  std::vector<Index> order(static_cast<std::size_t>(data.count()));
  std::iota(order.begin(), order.end(), Index{0});

  GradientSet grads = zeros_like(params);
  TrainHistory history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  const std::size_t n = order.size();
  const std::size_t B = static_cast<std::size_t>(cfg.batch_size);

  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffle_rng.shuffle(order);
    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t begin = 0; begin < n; begin += B) {
      std::size_t end = std::min(begin + B, n);
      BatchStats batch = batch_gradients(params, dims, data, order, begin, end, cfg.loss, grads);
      clip_gradients(grads, cfg.clip_threshold);
      rmsprop_step(params, grads, state);
      Real w = static_cast<Real>(end - begin) / static_cast<Real>(n);
      stats.mean_f1 += w * batch.mean_f1;
      stats.mean_f2 += w * batch.mean_f2;
    }
    history.push_back(stats);
  }
  return history;
}

inline void write_loss_history_csv(const TrainHistory& history, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open output file: ", path);
  out << "epoch,mean_f1,mean_f2,mean_total\n";
  for (const EpochStats& e : history) {
    out << e.epoch << ',' << format_real(e.mean_f1) << ',' << format_real(e.mean_f2) << ','
        << format_real(e.mean_total()) << '\n';
  }
  require(out.good(), "failed writing: ", path);
}

// ---------------------------------------------------------------------------
// Finite-difference gradient verification
// ---------------------------------------------------------------------------

inline Real total_loss(const ParameterSet& p, const NetworkDims& dims,
                       const Eigen::Ref<const Matrix>& sample, Real y, const LossConfig& cfg) {
  ForwardTrace t = forward(p, dims, sample);
  return loss_f1(t.u, t.l, y, cfg) + loss_f2(t.u, t.l, cfg);
}

// Distance from the evaluation point to the nearest non-differentiable locus:
// the midpoint kink, the zero-width kink, the interval boundary (where the
// outside indicator jumps), and every relu corner in the tail. Points closer
// than the finite-difference step would compare subgradient conventions, not
// derivatives.
inline Real kink_distance(const ForwardTrace& trace, Real y) {
  Real mid = (trace.u + trace.l) / 2.0;
  Real halfwidth = std::abs(trace.u - trace.l) / 2.0;
  Real d = std::abs(y - mid);
  d = std::min(d, std::abs(trace.u - trace.l));
  d = std::min(d, std::abs(std::abs(y - mid) - halfwidth));
  for (std::size_t k = 0; k + 1 < trace.fc_pre.size(); ++k) {
    d = std::min(d, trace.fc_pre[k].cwiseAbs().minCoeff());
  }
  return d;
}

// Largest relative disagreement between `analytic` and central differences of
// `loss_fn`, across every coordinate of every parameter array. Taking the
// analytic gradient as an argument lets tests feed a corrupted one and watch
// the check fail.
template <typename LossFn>
Real max_fd_error(const ParameterSet& params, const GradientSet& analytic, LossFn&& loss_fn,
                  Real fd_step, std::string* worst_name = nullptr) {
  Real worst = 0.0;
  ParameterSet probe = params;
  zip_params(
      [&](const std::string& name, auto& w, const auto& g) {
        for (Index idx = 0; idx < w.size(); ++idx) {
          Real saved = w.data()[idx];
          w.data()[idx] = saved + fd_step;
          Real hi = loss_fn(probe);
          w.data()[idx] = saved - fd_step;
          Real lo = loss_fn(probe);
          w.data()[idx] = saved;
          Real numeric = (hi - lo) / (2.0 * fd_step);
          Real a = g.data()[idx];
          // Central differences carry ~eps*|loss|/(2*step) of roundoff noise
          // (~1e-11 here), so relative error is meaningless for coordinates
          // whose gradient sits near that noise. The floor keeps the
          // comparison where finite differences are trustworthy.
          Real err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
          if (err > worst) {
            worst = err;
            if (worst_name) *worst_name = name;
          }
        }
      },
      probe, analytic);
  return worst;
}

struct GradCheckConfig {
  NetworkDims dims{1, 3, 3, {4}, 2}; // small on purpose: exhaustive sweep stays fast
  std::uint64_t seed = 42;
  int trials = 100;
  Real fd_step = 1e-5;
  Real kink_margin = 1e-3; // resample targets landing this close to a kink
  int max_resamples = 200;
  Real tolerance = 1e-4;
};

struct GradCheckReport {
  Real max_error_coverage_loss = 0.0; // worst relative error on the f1 gradient
  Real max_error_width_loss = 0.0;    // worst relative error on the f2 gradient
  std::string worst_param;
  int trials_run = 0;
  int resamples = 0;
  bool passed = false;

  Real max_rel_error() const { return std::max(max_error_coverage_loss, max_error_width_loss); }
};

// Draws random parameters, inputs, and targets; verifies the analytic
// gradients of the two losses, each against central differences of its own
// loss, coordinate by coordinate. A draw landing near a kink is discarded
// whole, parameters included: a degenerate parameter draw can pin the output
// to a kink (for instance a dead relu tail gives u = l everywhere), which no
// input resampling escapes.
inline GradCheckReport check_gradients(const GradCheckConfig& cfg = {}) {
  cfg.dims.validate();
  GradCheckReport report;
  LossConfig loss_cfg;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    Rng rng(substream(cfg.seed, 100 + trial));

    ParameterSet params;
    Matrix sample(cfg.dims.cell_count, cfg.dims.input_dim);
    ForwardTrace trace;
    Real y = 0.0;
    int attempts = 0;
    do {
      require(attempts++ <= cfg.max_resamples,
              "could not find a kink-free evaluation point after ", cfg.max_resamples,
              " resamples");
      params = init_params(cfg.dims, rng);
      for (Index r = 0; r < sample.rows(); ++r) {
        for (Index c = 0; c < sample.cols(); ++c) sample(r, c) = rng.uniform(0.0, 1.0);
      }
      y = rng.uniform(-0.5, 1.5);
      trace = forward(params, cfg.dims, sample);
    } while (kink_distance(trace, y) < cfg.kink_margin);
    report.resamples += attempts - 1;

    LossGrad g1 = loss_f1_grad(trace.u, trace.l, y, loss_cfg);
    GradientSet grads1 = zeros_like(params);
    backward_from_output(params, cfg.dims, trace, g1.du, g1.dl, grads1);
    std::string worst1;
    Real err1 = max_fd_error(
        params, grads1,
        [&](const ParameterSet& p) {
          ForwardTrace t = forward(p, cfg.dims, sample);
          return loss_f1(t.u, t.l, y, loss_cfg);
        },
        cfg.fd_step, &worst1);

    LossGrad g2 = loss_f2_grad(trace.u, trace.l, loss_cfg);
    GradientSet grads2 = zeros_like(params);
    backward_from_output(params, cfg.dims, trace, g2.du, g2.dl, grads2);
    std::string worst2;
    Real err2 = max_fd_error(
        params, grads2,
        [&](const ParameterSet& p) {
          ForwardTrace t = forward(p, cfg.dims, sample);
          return loss_f2(t.u, t.l, loss_cfg);
        },
        cfg.fd_step, &worst2);

    Real before = report.max_rel_error();
    report.max_error_coverage_loss = std::max(report.max_error_coverage_loss, err1);
    report.max_error_width_loss = std::max(report.max_error_width_loss, err2);
    if (report.max_rel_error() > before) {
      report.worst_param = err1 >= err2 ? worst1 : worst2;
    }
    ++report.trials_run;
  }
  report.passed = report.max_rel_error() <= cfg.tolerance;
  return report;
}

} // namespace lube
