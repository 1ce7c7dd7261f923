#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dtfdd/action_space.hpp"
#include "dtfdd/agent.hpp"
#include "dtfdd/env.hpp"
#include "dtfdd/federation.hpp"
#include "dtfdd/mlp.hpp"
#include "dtfdd/rng.hpp"

namespace dtfdd {

enum class PolicyKind { STfdd, MyopicDTfdd, DTdd, Iddpg, MaddpgLite, Random, Fwddpg };

const char* to_string(PolicyKind kind);
/// Accepts the CLI spellings (`fwddpg`, `s-tfdd`, `S_TFDD`, ...), case-insensitively.
PolicyKind parse_policy_kind(std::string_view text);
std::vector<PolicyKind> all_policy_kinds();

/// Receives the training-loop line label of each step as it executes.
using TraceFn = std::function<void(int)>;

/// A per-frame decision maker for all BSs, trained online at the frame barrier.
class Controller {
 public:
  virtual ~Controller() = default;

  virtual void begin_epoch() {}
  virtual std::vector<FrameAction> act(const std::vector<LocalState>& states) = 0;
  /// `frame` is the step index within the epoch.
  virtual void learn(const std::vector<LocalState>& states, const StepOutcome& outcome,
                     std::size_t frame) {
    (void)states;
    (void)outcome;
    (void)frame;
  }
  virtual void end_epoch() {}

  void set_trace(TraceFn fn) { trace_ = std::move(fn); }

 protected:
  void trace(int line) const {
    if (trace_) trace_(line);
  }

 private:
  TraceFn trace_;
};

/// Subchannel n goes to local UE n mod |U| in both directions.
FrameAction round_robin_action(std::size_t n_ues, std::size_t n_subchannels, std::size_t f);

/// Default static split: F/2 rounded.
std::size_t default_dl_subframes(std::size_t n_subframes);

/// Same action in every frame.
class StaticController : public Controller {
 public:
  explicit StaticController(std::vector<FrameAction> actions) : actions_(std::move(actions)) {}
  std::vector<FrameAction> act(const std::vector<LocalState>&) override { return actions_; }

 private:
  std::vector<FrameAction> actions_;
};

/// Pre-defined, non-adaptive D-TFDD configuration (round-robin assignment).
std::unique_ptr<StaticController> s_tfdd_policy(const std::vector<std::size_t>& ues_per_bs,
                                                std::size_t n_subchannels,
                                                std::size_t n_subframes,
                                                std::optional<std::size_t> dl_subframes = {});

/// Uniform over each BS's action indices.
class RandomController : public Controller {
 public:
  RandomController(const std::vector<std::size_t>& ues_per_bs, std::size_t n_subchannels,
                   std::size_t n_subframes, std::uint64_t master_seed);
  std::vector<FrameAction> act(const std::vector<LocalState>& states) override;
  const ActionSpace& space(std::size_t b) const { return *spaces_.at(b); }

 private:
  std::vector<std::shared_ptr<const ActionSpace>> spaces_;
  Rng rng_;
};

struct LearnerOptions {
  AgentConfig agent;
  ExchangePeriod exchange_period = 1;  // nullopt: never exchange
  bool frozen_assignment = false;      // D-TDD: only the subframe split is learned
  double reward_scale = 1.0;           // applied before rewards enter the replay buffer
};

/// One Wolpertinger DDPG learner per BS, with critic averaging over the
/// BS graph (FWDDPG). Myopic, D-TDD and IDDPG are option settings.
class FederatedWddpg : public Controller {
 public:
  FederatedWddpg(const std::vector<std::size_t>& ues_per_bs, std::size_t n_subchannels,
                 std::size_t n_subframes, LearnerOptions options, Eigen::MatrixXd weights,
                 std::uint64_t master_seed);

  void begin_epoch() override;
  std::vector<FrameAction> act(const std::vector<LocalState>& states) override;
  void learn(const std::vector<LocalState>& states, const StepOutcome& outcome,
             std::size_t frame) override;
  void end_epoch() override;

  std::size_t num_agents() const { return agents_.size(); }
  WddpgAgent& agent(std::size_t b) { return agents_.at(b); }
  const WddpgAgent& agent(std::size_t b) const { return agents_.at(b); }
  const Mailbox& mailbox() const { return mailbox_; }
  std::size_t exchanges() const { return exchanges_; }

 private:
  LearnerOptions opt_;
  Eigen::MatrixXd weights_;
  std::vector<WddpgAgent> agents_;
  std::vector<Rng> noise_rngs_;
  std::vector<Rng> replay_rngs_;
  std::vector<Selection> last_;
  Mailbox mailbox_;
  std::size_t exchanges_ = 0;
};

struct JointTransition {
  std::vector<Eigen::VectorXd> s;
  std::vector<Embedding> a;
  double r = 0.0;  // scaled global reward
  std::vector<Eigen::VectorXd> s_next;
};

/// Centralised-critic baseline: per-BS actors, one critic over the joint
/// (state, action) of all BSs trained on the global reward. Discrete actions
/// are refined BS by BS in index order, each against the critic with earlier
/// BSs at their chosen actions and later BSs at their proto-actions.
class MaddpgLite : public Controller {
 public:
  MaddpgLite(const std::vector<std::size_t>& ues_per_bs, std::size_t n_subchannels,
             std::size_t n_subframes, LearnerOptions options, std::uint64_t master_seed);

  void begin_epoch() override;
  std::vector<FrameAction> act(const std::vector<LocalState>& states) override;
  void learn(const std::vector<LocalState>& states, const StepOutcome& outcome,
             std::size_t frame) override;
  void end_epoch() override;

  std::size_t critic_input_size() const { return critic_.spec().sizes.front(); }
  const Mlp& actor(std::size_t b) const { return actors_.at(b); }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_critic() const { return target_critic_; }
  std::size_t buffer_size() const { return buffer_.size(); }

 private:
  struct Choice {
    std::vector<Embedding> embeddings;
    std::vector<ActionIndex> indices;
    double q = 0.0;
  };
  Choice refine(const std::vector<Eigen::VectorXd>& states, std::vector<Embedding> protos,
                const Mlp& critic) const;
  double critic_update(const std::vector<const JointTransition*>& batch);
  void actor_updates(const std::vector<const JointTransition*>& batch);

  LearnerOptions opt_;
  std::vector<std::shared_ptr<const ActionSpace>> spaces_;
  std::vector<std::size_t> offsets_;  // start of each BS's block in the critic input
  std::vector<Mlp> actors_, target_actors_;
  std::vector<AdamState> actor_opts_;
  Mlp critic_, target_critic_;
  AdamState critic_opt_;
  std::vector<JointTransition> buffer_;
  std::size_t next_slot_ = 0;
  std::vector<OuNoise> noise_;
  std::vector<Rng> noise_rngs_;
  Rng replay_rng_;
  std::vector<Embedding> last_;
};

}  // namespace dtfdd
