#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dtfdd/action_space.hpp"
#include "dtfdd/mlp.hpp"
#include "dtfdd/rng.hpp"

namespace dtfdd {

struct Transition {
  Eigen::VectorXd s;
  Embedding a{};
  double r = 0.0;  // scaled reward
  Eigen::VectorXd s_next;
};

/// `count` distinct integers from [0, n), uniformly (Floyd's algorithm).
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t count, Rng& rng);

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void store(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }

  /// `count` distinct slots drawn uniformly (Floyd's algorithm).
  std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;
  std::vector<const Transition*> sample(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

/// Ornstein-Uhlenbeck process on the 3-D proto-action.
struct OuNoise {
  double theta = 0.15;
  double sigma = 0.2;
  double mu = 0.0;
  Embedding state{0.0, 0.0, 0.0};

  const Embedding& step(Rng& rng);
  void reset() { state = {0.0, 0.0, 0.0}; }
};

struct AgentConfig {
  std::size_t k = 120;
  double gamma = 0.99;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double kappa = 1e-3;
  std::size_t batch = 300;
  std::size_t buffer_capacity = 1'000'000;
  std::vector<std::size_t> hidden{60, 50};
  double ou_theta = 0.15;
  double ou_sigma = 0.2;
  double ou_mu = 0.0;
  double ou_sigma_decay = 0.999;
};

MlpSpec actor_spec(std::size_t n_ues, const std::vector<std::size_t>& hidden);
MlpSpec critic_spec(std::size_t n_ues, const std::vector<std::size_t>& hidden);

/// Maps tanh outputs in (-1, 1) onto the unit cube.
Embedding to_unit_cube(const Eigen::VectorXd& tanh_out);

/// Critic input: state followed by the 3-D action embedding.
Eigen::VectorXd critic_input(const Eigen::VectorXd& state, const Embedding& action);

struct Selection {
  ActionIndex index;
  Embedding embedding{};
  double q = 0.0;
};

/// Among knn(proto, k), the action with the highest critic value; equal
/// values resolve to the nearest candidate, then the lowest action index.
Selection wolpertinger_select(const ActionSpace& space, const Eigen::VectorXd& state,
                              const Embedding& proto, std::size_t k, const Mlp& critic);

/// One base station's Wolpertinger DDPG learner.
class WddpgAgent {
 public:
  WddpgAgent(std::shared_ptr<const ActionSpace> space, std::size_t n_ues, AgentConfig cfg,
             Rng& init_rng);

  const ActionSpace& space() const { return *space_; }
  const AgentConfig& config() const { return cfg_; }
  std::size_t state_size() const { return 2 * n_ues_; }

  Embedding proto_action(const Eigen::VectorXd& state) const;
  Embedding target_proto_action(const Eigen::VectorXd& state) const;

  /// Noise-free Wolpertinger policy with the online networks.
  Selection greedy_action(const Eigen::VectorXd& state) const;

  /// Proto-action plus an OU step, clamped, then Wolpertinger refinement.
  Selection behavioral_action(const Eigen::VectorXd& state, Rng& noise_rng);

  /// TD step on the critic; returns the minibatch loss (1/2I) sum (Q - y)^2.
  double critic_td_update(const std::vector<const Transition*>& batch);

  /// Deterministic policy-gradient ascent step on the actor through the
  /// continuous proto-action.
  void actor_update(const std::vector<const Transition*>& batch);

  /// Gradient of J(theta) = mean_i Q(s_i, proto(s_i)) with respect to the
  /// actor parameters (no step taken).
  MlpParams actor_objective_gradient(const std::vector<const Transition*>& batch) const;

  void soft_update_targets();

  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  OuNoise& noise() { return noise_; }
  void end_epoch() { noise_.sigma *= cfg_.ou_sigma_decay; }

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  Mlp& target_actor() { return target_actor_; }
  Mlp& target_critic() { return target_critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic() const { return target_critic_; }

 private:
  std::shared_ptr<const ActionSpace> space_;
  std::size_t n_ues_;
  AgentConfig cfg_;
  Mlp actor_, critic_, target_actor_, target_critic_;
  AdamState actor_opt_, critic_opt_;
  ReplayBuffer buffer_;
  OuNoise noise_;
};

}  // namespace dtfdd
