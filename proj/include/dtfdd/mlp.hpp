#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dtfdd/rng.hpp"

namespace dtfdd {

enum class Activation { Identity, Relu, Tanh };

struct MlpSpec {
  std::vector<std::size_t> sizes;  // input, hidden..., output
  Activation hidden = Activation::Relu;
  Activation output = Activation::Identity;

  std::size_t input_size() const { return sizes.front(); }
  std::size_t output_size() const { return sizes.back(); }
  std::size_t num_layers() const { return sizes.size() - 1; }
  std::size_t num_params() const;
  void check() const;
};

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  static MlpParams zeros_like(const MlpParams& other);
  bool all_finite() const;
  bool operator==(const MlpParams& other) const;
};

/// Thrown when a forward pass, loss or gradient turns non-finite.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Activations saved by a forward pass. Columns are samples.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> preacts; // pre-activation of each layer
  Eigen::MatrixXd output;
};

struct Gradients {
  MlpParams params;       // summed over the batch columns
  Eigen::MatrixXd input;  // d/d(input), one column per sample
};

/// Dense feed-forward network with ReLU/tanh/identity activations.
class Mlp {
 public:
  Mlp() = default;
  /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  Mlp(MlpSpec spec, Rng& rng);
  Mlp(MlpSpec spec, MlpParams params);

  static Mlp zeros(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  const MlpParams& params() const { return params_; }
  MlpParams& params() { return params_; }

  Eigen::VectorXd predict(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& x) const;

  ForwardCache forward(const Eigen::MatrixXd& x) const;
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const;

 private:
  MlpSpec spec_;
  MlpParams params_;
};

struct AdamState {
  MlpParams m;
  MlpParams v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const MlpParams& p);
};

/// One bias-corrected Adam descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
/// Pass negated gradients for ascent.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double lr);

/// target <- kappa * online + (1 - kappa) * target, elementwise.
void soft_update(MlpParams& target, const MlpParams& online, double kappa);

/// Flat parameter vector, layer-major; each layer's weights row-major then bias.
struct ParamVector {
  std::vector<double> values;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;  // (rows, cols) per layer
};

ParamVector flatten(const MlpParams& params);
MlpParams unflatten(const ParamVector& vec, const MlpSpec& spec);

}  // namespace dtfdd
