#include "dtfdd/mlp.hpp"

#include <cmath>
#include <string>

namespace dtfdd {

namespace {

Eigen::MatrixXd activate(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::Identity: return z;
    case Activation::Relu: return z.cwiseMax(0.0);
    case Activation::Tanh: return z.array().tanh().matrix();
  }
  return z;
}

// d act / d z evaluated at z, multiplied into `upstream`.
Eigen::MatrixXd activation_backward(Activation act, const Eigen::MatrixXd& z,
                                    const Eigen::MatrixXd& upstream) {
  switch (act) {
    case Activation::Identity: return upstream;
    case Activation::Relu:
      return (z.array() > 0.0).select(upstream, Eigen::MatrixXd::Zero(z.rows(), z.cols()));
    case Activation::Tanh: {
      const Eigen::ArrayXXd t = z.array().tanh();
      return (upstream.array() * (1.0 - t * t)).matrix();
    }
  }
  return upstream;
}

}  // namespace

std::size_t MlpSpec::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l + 1] * sizes[l] + sizes[l + 1];
  return n;
}

void MlpSpec::check() const {
  if (sizes.size() < 2) throw std::invalid_argument("MLP needs input and output sizes");
  for (std::size_t s : sizes) {
    if (s == 0) throw std::invalid_argument("MLP layer sizes must be positive");
  }
}

MlpParams MlpParams::zeros_like(const MlpParams& other) {
  MlpParams out;
  out.layers.reserve(other.layers.size());
  for (const auto& l : other.layers) {
    out.layers.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()),
                          Eigen::VectorXd::Zero(l.b.size())});
  }
  return out;
}

bool MlpParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.w.allFinite() || !l.b.allFinite()) return false;
  }
  return true;
}

bool MlpParams::operator==(const MlpParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& a = layers[i];
    const auto& b = other.layers[i];
    if (a.w.rows() != b.w.rows() || a.w.cols() != b.w.cols() || a.b.size() != b.b.size()) {
      return false;
    }
    if (a.w != b.w || a.b != b.b) return false;
  }
  return true;
}

Mlp::Mlp(MlpSpec spec, Rng& rng) : spec_(std::move(spec)) {
  spec_.check();
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    const auto in = static_cast<Eigen::Index>(spec_.sizes[l]);
    const auto out = static_cast<Eigen::Index>(spec_.sizes[l + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> unif(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    // Row-major fill so the draw order matches the flattened layout.
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.w(r, c) = unif(rng);
    }
    for (Eigen::Index r = 0; r < out; ++r) layer.b(r) = unif(rng);
    params_.layers.push_back(std::move(layer));
  }
}

Mlp::Mlp(MlpSpec spec, MlpParams params) : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.check();
  if (params_.layers.size() != spec_.num_layers()) {
    throw std::invalid_argument("parameter layer count does not match spec");
  }
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    const auto& layer = params_.layers[l];
    if (static_cast<std::size_t>(layer.w.rows()) != spec_.sizes[l + 1] ||
        static_cast<std::size_t>(layer.w.cols()) != spec_.sizes[l] ||
        static_cast<std::size_t>(layer.b.size()) != spec_.sizes[l + 1]) {
      throw std::invalid_argument("parameter shape mismatch in layer " + std::to_string(l));
    }
  }
}

Mlp Mlp::zeros(MlpSpec spec) {
  spec.check();
  MlpParams p;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto in = static_cast<Eigen::Index>(spec.sizes[l]);
    const auto out = static_cast<Eigen::Index>(spec.sizes[l + 1]);
    p.layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
  return Mlp(std::move(spec), std::move(p));
}

ForwardCache Mlp::forward(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != spec_.input_size()) {
    throw std::invalid_argument("MLP input has " + std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(spec_.input_size()));
  }
  ForwardCache cache;
  cache.inputs.reserve(spec_.num_layers());
  cache.preacts.reserve(spec_.num_layers());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    const auto& layer = params_.layers[l];
    // Coefficient-wise product: a column's output must not depend on the batch width.
    Eigen::MatrixXd z = layer.w.lazyProduct(a);
    z.colwise() += layer.b;
    const bool last = l + 1 == spec_.num_layers();
    Eigen::MatrixXd next = activate(last ? spec_.output : spec_.hidden, z);
    cache.inputs.push_back(std::move(a));
    cache.preacts.push_back(std::move(z));
    a = std::move(next);
  }
  cache.output = std::move(a);
  return cache;
}

Eigen::MatrixXd Mlp::predict_batch(const Eigen::MatrixXd& x) const { return forward(x).output; }

Eigen::VectorXd Mlp::predict(const Eigen::VectorXd& x) const {
  return predict_batch(x).col(0);
}

Gradients Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const {
  if (output_grad.rows() != cache.output.rows() || output_grad.cols() != cache.output.cols()) {
    throw std::invalid_argument("output gradient shape does not match forward output");
  }
  Gradients g;
  g.params = MlpParams::zeros_like(params_);
  const std::size_t L = spec_.num_layers();
  Eigen::MatrixXd delta = activation_backward(spec_.output, cache.preacts[L - 1], output_grad);
  for (std::size_t l = L; l-- > 0;) {
    g.params.layers[l].w.noalias() = delta * cache.inputs[l].transpose();
    g.params.layers[l].b = delta.rowwise().sum();
    Eigen::MatrixXd upstream = params_.layers[l].w.transpose() * delta;
    if (l == 0) {
      g.input = std::move(upstream);
    } else {
      delta = activation_backward(spec_.hidden, cache.preacts[l - 1], upstream);
    }
  }
  return g;
}

AdamState AdamState::for_params(const MlpParams& p) {
  AdamState s;
  s.m = MlpParams::zeros_like(p);
  s.v = MlpParams::zeros_like(p);
  return s;
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double lr) {
  if (grads.layers.size() != params.layers.size()) {
    throw std::invalid_argument("gradient layer count mismatch");
  }
  if (!grads.all_finite()) throw TrainingDivergence("non-finite gradient in Adam step");
  if (state.m.layers.empty()) state = AdamState::for_params(params);
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].w, grads.layers[l].w, state.m.layers[l].w, state.v.layers[l].w);
    update(params.layers[l].b, grads.layers[l].b, state.m.layers[l].b, state.v.layers[l].b);
  }
}

void soft_update(MlpParams& target, const MlpParams& online, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must be in (0, 1]");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].w = kappa * online.layers[l].w + (1.0 - kappa) * target.layers[l].w;
    target.layers[l].b = kappa * online.layers[l].b + (1.0 - kappa) * target.layers[l].b;
  }
}

ParamVector flatten(const MlpParams& params) {
  ParamVector out;
  for (const auto& l : params.layers) {
    out.shapes.emplace_back(static_cast<std::size_t>(l.w.rows()),
                            static_cast<std::size_t>(l.w.cols()));
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) out.values.push_back(l.w(r, c));
    }
    for (Eigen::Index r = 0; r < l.b.size(); ++r) out.values.push_back(l.b(r));
  }
  return out;
}

MlpParams unflatten(const ParamVector& vec, const MlpSpec& spec) {
  spec.check();
  if (vec.values.size() != spec.num_params()) {
    throw std::invalid_argument("parameter vector length " + std::to_string(vec.values.size()) +
                                " does not match spec (" + std::to_string(spec.num_params()) +
                                ")");
  }
  MlpParams out;
  std::size_t pos = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto rows = static_cast<Eigen::Index>(spec.sizes[l + 1]);
    const auto cols = static_cast<Eigen::Index>(spec.sizes[l]);
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) layer.w(r, c) = vec.values[pos++];
    }
    for (Eigen::Index r = 0; r < rows; ++r) layer.b(r) = vec.values[pos++];
    out.layers.push_back(std::move(layer));
  }
  return out;
}

}  // namespace dtfdd
