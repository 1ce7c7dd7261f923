#include <doctest.h>

#include <cmath>
#include <limits>

#include "dtfdd/gradcheck.hpp"
#include "dtfdd/mlp.hpp"
#include "support.hpp"

using namespace dtfdd;

namespace {

// Second implementation: explicit loops, no Eigen expressions.
std::vector<double> loop_forward(const MlpParams& p, const MlpSpec& spec, std::vector<double> x) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const DenseLayer& layer = p.layers[l];
    std::vector<double> y(static_cast<std::size_t>(layer.w.rows()));
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      double z = layer.b(r);
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) z += layer.w(r, c) * x[static_cast<std::size_t>(c)];
      const Activation act = l + 1 == p.layers.size() ? spec.output : spec.hidden;
      if (act == Activation::Relu) z = z > 0.0 ? z : 0.0;
      if (act == Activation::Tanh) z = std::tanh(z);
      y[static_cast<std::size_t>(r)] = z;
    }
    x = y;
  }
  return x;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& r) {
  return Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return testutil::uniform(r, -1, 1); });
}

}  // namespace

TEST_CASE("forward matches a loop implementation") {
  auto r = testutil::rng(34);
  for (Activation out : {Activation::Identity, Activation::Tanh}) {
    const MlpSpec spec{{3, 4, 2}, Activation::Relu, out};
    const Mlp net(spec, r);
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd x = random_matrix(3, 1, r);
      const Eigen::VectorXd y = net.predict(x);
      const auto oracle = loop_forward(net.params(), spec, {x(0), x(1), x(2)});
      CHECK(y(0) == doctest::Approx(oracle[0]).epsilon(1e-14));
      CHECK(y(1) == doctest::Approx(oracle[1]).epsilon(1e-14));
    }
  }
}

TEST_CASE("a column's output does not depend on the batch it is evaluated in") {
  auto r = testutil::rng(35);
  int mismatches = 0;
  for (int trial = 0; trial < 20; ++trial) {
    for (const auto& sizes : {std::vector<std::size_t>{7, 16, 1}, std::vector<std::size_t>{7, 60, 50, 1}}) {
      const Mlp net(MlpSpec{sizes, Activation::Relu, Activation::Identity}, r);
      const Eigen::MatrixXd x = random_matrix(7, 405, r);
      const Eigen::MatrixXd full = net.predict_batch(x);
      for (Eigen::Index width : {1, 2, 3, 5, 10, 40, 120}) {
        const Eigen::MatrixXd part = net.predict_batch(x.leftCols(width));
        for (Eigen::Index c = 0; c < width; ++c) mismatches += part(0, c) != full(0, c);
      }
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("trivial networks") {
  const Mlp zero = Mlp::zeros({{3, 5, 2}});
  CHECK(zero.predict(Eigen::Vector3d(1, -2, 3)).isZero());

  MlpParams p;
  p.layers.push_back({Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)});
  const Mlp identity({{3, 3}}, p);
  const Eigen::Vector3d x(0.25, -7.0, 3.5);
  CHECK(identity.predict(x) == x);
  CHECK_THROWS_AS(identity.predict(Eigen::Vector2d(1, 2)), std::invalid_argument);
}

TEST_CASE("linear layer weight gradient is g x^T") {
  auto r = testutil::rng(2);
  const Mlp net({{4, 3}}, r);
  const Eigen::MatrixXd x = random_matrix(4, 1, r);
  const Eigen::MatrixXd g = random_matrix(3, 1, r);
  const Gradients grads = net.backward(net.forward(x), g);
  CHECK((grads.params.layers[0].w - g * x.transpose()).norm() < 1e-15);
  CHECK((grads.params.layers[0].b - g).norm() < 1e-15);
  CHECK((grads.input - net.params().layers[0].w.transpose() * g).norm() < 1e-14);
}

TEST_CASE("ReLU blocks gradients at negative preactivation") {
  MlpParams p;
  p.layers.push_back({Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, -5.0)});
  p.layers.push_back({Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1)});
  const Mlp net({{1, 1, 1}}, p);
  const Gradients g = net.backward(net.forward(Eigen::MatrixXd::Constant(1, 1, 2.0)),
                                   Eigen::MatrixXd::Ones(1, 1));
  CHECK(g.input(0, 0) == 0.0);
  CHECK(g.params.layers[0].w(0, 0) == 0.0);
  CHECK(g.params.layers[1].b(0) == 1.0);
}

TEST_CASE("backward agrees with central differences") {
  auto r = testutil::rng(17);
  for (int seed = 0; seed < 20; ++seed) {
    for (Activation out : {Activation::Identity, Activation::Tanh}) {
      const Mlp net({{5, 7, 6, 3}, Activation::Relu, out}, r);
      const Eigen::MatrixXd x = random_matrix(5, 4, r);
      const Eigen::MatrixXd g = random_matrix(3, 4, r);
      CHECK(mlp_gradient_error(net, x, g) <= 1e-5);

      // Input gradient by hand, one coordinate at a time.
      const Gradients an = net.backward(net.forward(x), g);
      const double h = 1e-6;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::MatrixXd xp = x, xm = x;
        xp.row(i).array() += h;
        xm.row(i).array() -= h;
        const Eigen::MatrixXd dy = (net.predict_batch(xp) - net.predict_batch(xm)) / (2 * h);
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
          // Perturbing row i shifts every column independently.
          const double fd = dy.col(c).dot(g.col(c));
          CHECK(an.input(i, c) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("first Adam step moves by the learning rate") {
  MlpParams p;
  p.layers.push_back({Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1)});
  MlpParams g = MlpParams::zeros_like(p);
  g.layers[0].w(0, 0) = 1.0;
  AdamState st = AdamState::for_params(p);
  adam_step(p, g, st, 0.1);
  CHECK(p.layers[0].w(0, 0) - 2.0 == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(p.layers[0].b(0) == 0.0);
  CHECK(st.step == 1);

  double prev = p.layers[0].w(0, 0);
  for (int i = 0; i < 20; ++i) {
    adam_step(p, g, st, 0.1);
    CHECK(p.layers[0].w(0, 0) < prev);
    prev = p.layers[0].w(0, 0);
  }

  MlpParams bad = g;
  bad.layers[0].w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(p, bad, st, 0.1), TrainingDivergence);
}

TEST_CASE("zero gradients leave parameters unchanged") {
  auto r = testutil::rng(4);
  const Mlp net({{3, 4, 2}}, r);
  MlpParams p = net.params();
  AdamState st = AdamState::for_params(p);
  adam_step(p, MlpParams::zeros_like(p), st, 0.01);
  CHECK(p == net.params());
}

TEST_CASE("flatten round trip, length and linearity") {
  auto r = testutil::rng(9);
  const MlpSpec spec{{6, 60, 50, 3}};
  const Mlp a(spec, r), b(spec, r);
  const ParamVector fa = flatten(a.params());
  CHECK(fa.values.size() == 6 * 60 + 60 + 60 * 50 + 50 + 50 * 3 + 3);
  CHECK(fa.values.size() == spec.num_params());
  CHECK(unflatten(fa, spec) == a.params());

  ParamVector avg = fa;
  const ParamVector fb = flatten(b.params());
  for (std::size_t i = 0; i < avg.values.size(); ++i) avg.values[i] = 0.5 * (fa.values[i] + fb.values[i]);
  const MlpParams mid = unflatten(avg, spec);
  for (std::size_t l = 0; l < mid.layers.size(); ++l) {
    CHECK(mid.layers[l].w == 0.5 * (a.params().layers[l].w + b.params().layers[l].w));
    CHECK(mid.layers[l].b == 0.5 * (a.params().layers[l].b + b.params().layers[l].b));
  }

  ParamVector short_vec = fa;
  short_vec.values.pop_back();
  CHECK_THROWS_AS(unflatten(short_vec, spec), std::invalid_argument);
}

TEST_CASE("soft update is exact on dyadic values") {
  MlpParams target, online;
  target.layers.push_back({Eigen::MatrixXd::Constant(2, 2, 0.25), Eigen::VectorXd::Constant(2, -1.0)});
  online.layers.push_back({Eigen::MatrixXd::Constant(2, 2, 0.75), Eigen::VectorXd::Constant(2, 3.0)});
  soft_update(target, online, 0.5);
  CHECK(target.layers[0].w == Eigen::MatrixXd::Constant(2, 2, 0.5));
  CHECK(target.layers[0].b == Eigen::VectorXd::Constant(2, 1.0));
  soft_update(target, online, 1.0);
  CHECK(target == online);
  CHECK_THROWS(soft_update(target, online, 0.0));
}

TEST_CASE("invalid specs") {
  CHECK_THROWS(MlpSpec{{3}}.check());
  CHECK_THROWS(MlpSpec{{3, 0, 1}}.check());
}
