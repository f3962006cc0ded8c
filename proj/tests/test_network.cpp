#include <doctest.h>

#include <cmath>

#include "lube/activations.hpp"
#include "lube/network.hpp"
#include "lube/random.hpp"
#include "lube/serialize.hpp"
#include "test_util.hpp"

using namespace lube;
using testutil::TempDir;

namespace {

ParameterSet scalar_lstm_params() {
  NetworkDims dims{1, 1, 1, {}, 2};
  ParameterSet p = init_params(dims, 0);
  p.W_fh(0, 0) = 0.5;
  p.W_fx(0, 0) = -0.3;
  p.b_f[0] = 0.1;
  p.W_ih(0, 0) = -0.2;
  p.W_ix(0, 0) = 0.4;
  p.b_i[0] = 0.0;
  p.W_oh(0, 0) = 0.3;
  p.W_ox(0, 0) = 0.2;
  p.b_o[0] = -0.1;
  p.W_ch(0, 0) = -0.5;
  p.W_cx(0, 0) = 0.6;
  p.b_c[0] = 0.2;
  return p;
}

ParameterSet zero_params(const NetworkDims& dims) {
  ParameterSet p = init_params(dims, 0);
  zip_params([](const std::string&, auto& a) { a.setZero(); }, p);
  return p;
}

} // namespace

TEST_CASE("activation definitions") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(std::tanh(0.0) == 0.0);
  CHECK(relu(-3.0) == 0.0);
  CHECK(relu(3.0) == 3.0);
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    Real x = rng.uniform(-20.0, 20.0);
    CHECK(sigmoid(x) + sigmoid(-x) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("lstm_step at zero parameters is the documented fixed point") {
  NetworkDims dims{1, 2, 1, {}, 2};
  ParameterSet p = zero_params(dims);
  CellState prev{Vector::Zero(2), Vector::Zero(2)};
  Vector x = Vector::Constant(1, 0.7);
  CellTrace t = lstm_step(p, x, prev);
  for (Index i = 0; i < 2; ++i) {
    CHECK(t.f[i] == 0.5);
    CHECK(t.i[i] == 0.5);
    CHECK(t.o[i] == 0.5);
    CHECK(t.ctilde[i] == 0.0);
    CHECK(t.C[i] == 0.0);
    CHECK(t.H[i] == 0.0);
  }
}

TEST_CASE("lstm_step at zero parameters halves the previous cell state") {
  NetworkDims dims{1, 1, 1, {}, 2};
  ParameterSet p = zero_params(dims);
  Vector x = Vector::Constant(1, 0.2);

  CellState prev{Vector::Constant(1, 0.3), Vector::Zero(1)};
  CellTrace t = lstm_step(p, x, prev);
  CHECK(t.C[0] == 0.15);
  // 0.5 * tanh(0.15); Approx absorbs the last-ulp spread between tanh
  // implementations.
  CHECK(t.H[0] == doctest::Approx(0.07444251681165898).epsilon(1e-14));

  CellState prev2{Vector::Constant(1, -0.8), Vector::Zero(1)};
  CellTrace t2 = lstm_step(p, x, prev2);
  CHECK(t2.C[0] == -0.4);
  CHECK(t2.H[0] == doctest::Approx(-0.18997448112761245).epsilon(1e-14)); // 0.5 * tanh(-0.4)
}

TEST_CASE("scalar lstm_step matches an independent hand evaluation") {
  ParameterSet p = scalar_lstm_params();
  CellState prev{Vector::Constant(1, -0.4), Vector::Constant(1, 0.5)};
  Vector x = Vector::Constant(1, 0.8);
  CellTrace t = lstm_step(p, x, prev);
  CHECK(t.f[0] == doctest::Approx(0.5274723043445937).epsilon(1e-12));
  CHECK(t.i[0] == doctest::Approx(0.5547792351072148).epsilon(1e-12));
  CHECK(t.o[0] == doctest::Approx(0.5523079095743253).epsilon(1e-12));
  CHECK(t.ctilde[0] == doctest::Approx(0.405321308689463).epsilon(1e-12));
  CHECK(t.C[0] == doctest::Approx(0.013874923869558103).epsilon(1e-12));
  CHECK(t.H[0] == doctest::Approx(0.00766273847730978).epsilon(1e-12));
}

TEST_CASE("gate activations stay strictly inside their ranges") {
  NetworkDims dims{1, 4, 1, {}, 2};
  ParameterSet p = init_params(dims, 21);
  Rng rng(22);
  for (int k = 0; k < 50; ++k) {
    CellState prev{Vector::Zero(4), Vector::Zero(4)};
    for (Index i = 0; i < 4; ++i) {
      prev.C[i] = rng.uniform(-2.0, 2.0);
      prev.H[i] = rng.uniform(-1.0, 1.0);
    }
    Vector x = Vector::Constant(1, rng.uniform(-3.0, 3.0));
    CellTrace t = lstm_step(p, x, prev);
    for (Index i = 0; i < 4; ++i) {
      CHECK(t.f[i] > 0.0);
      CHECK(t.f[i] < 1.0);
      CHECK(t.i[i] > 0.0);
      CHECK(t.i[i] < 1.0);
      CHECK(t.o[i] > 0.0);
      CHECK(t.o[i] < 1.0);
      CHECK(t.ctilde[i] > -1.0);
      CHECK(t.ctilde[i] < 1.0);
    }
  }
}

TEST_CASE("fc_forward matches a two-layer hand evaluation with a relu cut") {
  ParameterSet p;
  p.fc.resize(2);
  p.fc[0].W.resize(2, 2);
  p.fc[0].W << 1.0, -1.0, 0.5, 0.25;
  p.fc[0].b.resize(2);
  p.fc[0].b << 0.1, -0.2;
  p.fc[1].W.resize(2, 2);
  p.fc[1].W << 1.0, 2.0, -1.0, 0.5;
  p.fc[1].b.resize(2);
  p.fc[1].b << 0.05, -0.05;

  Vector in(2);
  in << 0.3, 0.9;
  ForwardTrace trace;
  fc_forward(p, in, trace);
  REQUIRE(trace.fc_pre.size() == 2);
  CHECK(trace.fc_pre[0][0] == doctest::Approx(-0.7).epsilon(1e-15));
  CHECK(trace.fc_act[0][0] == 0.0); // relu zeroes the negative pre-activation
  CHECK(trace.fc_act[1][0] == doctest::Approx(1.0999999999999999).epsilon(1e-15));
  CHECK(trace.fc_act[1][1] == doctest::Approx(0.33749999999999997).epsilon(1e-15));
}

TEST_CASE("fc_forward with zero parameters emits zero outputs") {
  NetworkDims dims{1, 3, 1, {4}, 2};
  ParameterSet p = zero_params(dims);
  Vector in = Vector::Constant(3, 0.9);
  ForwardTrace trace;
  fc_forward(p, in, trace);
  CHECK(trace.fc_act.back()[0] == 0.0);
  CHECK(trace.fc_act.back()[1] == 0.0);
}

TEST_CASE("single identity fc layer copies its inputs") {
  ParameterSet p;
  p.fc.resize(1);
  p.fc[0].W = Matrix::Identity(2, 2);
  p.fc[0].b = Vector::Zero(2);
  Vector in(2);
  in << 0.25, -0.75;
  ForwardTrace trace;
  fc_forward(p, in, trace);
  CHECK(trace.fc_act.back()[0] == 0.25);
  CHECK(trace.fc_act.back()[1] == -0.75);
}

TEST_CASE("rank orders the raw pair") {
  CHECK(rank(0.3, 0.7).upper == 0.7);
  CHECK(rank(0.3, 0.7).lower == 0.3);
  CHECK(rank(0.5, 0.5).upper == 0.5);
  CHECK(rank(0.5, 0.5).lower == 0.5);
  CHECK(rank(-1.0, -2.0).upper == -1.0);
  CHECK(rank(-1.0, -2.0).lower == -2.0);
  Rng rng(9);
  for (int k = 0; k < 1000; ++k) {
    PredictionInterval pi = rank(rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0));
    CHECK(pi.upper >= pi.lower);
  }
}

TEST_CASE("forward with zero parameters emits (0, 0) for any input") {
  NetworkDims dims{1, 3, 4, {4}, 2};
  ParameterSet p = zero_params(dims);
  Rng rng(2);
  Matrix sample(4, 1);
  for (Index r = 0; r < 4; ++r) sample(r, 0) = rng.uniform(-1.0, 1.0);
  ForwardTrace t = forward(p, dims, sample);
  CHECK(t.u == 0.0);
  CHECK(t.l == 0.0);
}

TEST_CASE("forward is order-sensitive in the lags") {
  NetworkDims dims{1, 5, 4, {4}, 2};
  ParameterSet p = init_params(dims, 31);
  Matrix sample(4, 1);
  sample << 0.1, 0.7, 0.3, 0.9;
  Matrix permuted(4, 1);
  permuted << 0.7, 0.1, 0.3, 0.9; // swap the first two lags, keep the last
  ForwardTrace a = forward(p, dims, sample);
  ForwardTrace b = forward(p, dims, permuted);
  CHECK((a.u != b.u || a.l != b.l));
}

TEST_CASE("forward is pure: identical inputs give bit-identical outputs") {
  NetworkDims dims{1, 6, 5, {5, 3}, 2};
  ParameterSet p = init_params(dims, 77);
  Rng rng(78);
  Matrix sample(5, 1);
  for (Index r = 0; r < 5; ++r) sample(r, 0) = rng.uniform(0.0, 1.0);
  ForwardTrace a = forward(p, dims, sample);
  ForwardTrace b = forward(p, dims, sample);
  CHECK(a.u == b.u);
  CHECK(a.l == b.l);
}

TEST_CASE("init_params is deterministic, bounded, and sets the documented biases") {
  NetworkDims dims{1, 8, 9, {32, 16, 8}, 2};
  ParameterSet a = init_params(dims, 42);
  ParameterSet b = init_params(dims, 42);
  ParameterSet c = init_params(dims, 43);

  bool identical = true;
  bool differs = false;
  zip_params(
      [&](const std::string&, const auto& x, const auto& y, const auto& z) {
        identical = identical && (x.array() == y.array()).all();
        differs = differs || !(x.array() == z.array()).all();
      },
      a, b, c);
  CHECK(identical);
  CHECK(differs);

  zip_params(
      [&](const std::string& name, const auto& m) {
        if (name[0] != 'W' && name.find(".W") == std::string::npos) return;
        Real scale = std::sqrt(6.0 / static_cast<Real>(m.rows() + m.cols()));
        CHECK(m.cwiseAbs().maxCoeff() <= scale);
      },
      a);

  CHECK(a.b_f.minCoeff() == 1.0);
  CHECK(a.b_f.maxCoeff() == 1.0);
  CHECK(a.b_i.cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.b_o.cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.b_c.cwiseAbs().maxCoeff() == 0.0);
  for (const FcLayer& layer : a.fc) CHECK(layer.b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dims validation and parameter shape checks") {
  NetworkDims bad;
  bad.output_dim = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
  NetworkDims dims{1, 4, 3, {5}, 2};
  CHECK(dims.fc_widths() == std::vector<Index>{4, 5, 2});
  ParameterSet p = init_params(dims, 1);
  CHECK_NOTHROW(check_params_match(p, dims));
  NetworkDims other{1, 5, 3, {5}, 2};
  CHECK_THROWS_AS(check_params_match(p, other), Error);
}

TEST_CASE("forward rejects a sample with the wrong shape") {
  NetworkDims dims{1, 3, 4, {}, 2};
  ParameterSet p = init_params(dims, 3);
  Matrix sample(3, 1); // one lag short
  sample.setZero();
  CHECK_THROWS_AS(forward(p, dims, sample), Error);
}

TEST_CASE("parameter JSON round-trip preserves forward outputs bit-exactly") {
  TempDir dir;
  NetworkDims dims{1, 6, 5, {7, 3}, 2};
  ParameterSet p = init_params(dims, 1234);
  NormalizationSpec norm{2.5, 9.0, NormMode::MinMax};
  save_model({dims, p, norm}, dir.file("model.json"));
  ModelFile loaded = load_model(dir.file("model.json"));

  CHECK(loaded.norm.min == 2.5);
  CHECK(loaded.norm.max == 9.0);
  CHECK(loaded.norm.mode == NormMode::MinMax);

  Rng rng(4321);
  for (int k = 0; k < 100; ++k) {
    Matrix sample(5, 1);
    for (Index r = 0; r < 5; ++r) sample(r, 0) = rng.uniform(-1.0, 2.0);
    ForwardTrace a = forward(p, dims, sample);
    ForwardTrace b = forward(loaded.params, loaded.dims, sample);
    CHECK(a.u == b.u);
    CHECK(a.l == b.l);
  }
}

TEST_CASE("model loading reports missing and misshapen parameters by name") {
  TempDir dir;
  NetworkDims dims{1, 3, 2, {4}, 2};
  ParameterSet p = init_params(dims, 9);
  Json j = model_to_json({dims, p, {}});

  Json missing = j;
  missing["parameters"].erase("W_ox");
  save_json(missing, dir.file("missing.json"));
  try {
    load_model(dir.file("missing.json"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("W_ox") != std::string::npos);
  }

  Json misshapen = j;
  misshapen["parameters"]["b_i"]["values"].push_back(0.0);
  save_json(misshapen, dir.file("misshapen.json"));
  try {
    load_model(dir.file("misshapen.json"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("b_i") != std::string::npos);
  }
}
