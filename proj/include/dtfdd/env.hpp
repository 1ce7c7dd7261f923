#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dtfdd/action_space.hpp"
#include "dtfdd/channel.hpp"
#include "dtfdd/queues.hpp"
#include "dtfdd/radio.hpp"
#include "dtfdd/rng.hpp"

namespace dtfdd {

struct EnvConfig {
  Topology topology;
  ChannelParams channel;
  LinkBudget budget;
  std::size_t n_subchannels = 5;
  std::size_t n_subframes = 10;
  SliceProfile gue_slice;
  SliceProfile uav_slice;
  std::size_t window = 50;  // dropping-ratio window, frames
};

/// One BS's observation: (q_ul, q_dl) of each of its UEs, in local UE order.
struct LocalState {
  std::vector<std::int64_t> raw;  // bits
  Eigen::VectorXd normalized;     // q_ul / UL buffer, q_dl / DL normaliser
};

struct UeOutcome {
  std::int64_t psi_dl = 0;
  std::int64_t psi_ul = 0;
  std::int64_t arrival_dl = 0;
  std::int64_t arrival_ul = 0;
  std::int64_t dropped_ul = 0;
  double drop_ratio = 0.0;
  bool qos_ok = true;
};

struct StepOutcome {
  std::vector<double> rewards;  // per BS, bits minus penalties
  std::vector<UeOutcome> ues;   // per global UE
  std::vector<LocalState> next_states;
};

/// Multi-cell D-TFDD network as seen by the learners. Within a frame the
/// order is: channels, rates, service, arrivals, dropping ratio, reward.
class DtfddEnv {
 public:
  DtfddEnv(EnvConfig cfg, std::uint64_t master_seed);

  const EnvConfig& config() const { return cfg_; }
  const CellMembers& cells() const { return cells_; }
  std::size_t num_bs() const { return cfg_.topology.num_bs(); }
  std::size_t num_ue() const { return cfg_.topology.num_ue(); }
  const SliceProfile& slice_of(std::size_t ue) const;
  const std::vector<UeQueueState>& queues() const { return queues_; }
  std::vector<UeQueueState>& mutable_queues() { return queues_; }

  /// Empties every queue and dropping-ratio window. Random streams continue.
  void reset();

  LocalState observe(std::size_t b) const;
  std::vector<LocalState> observe_all() const;

  /// Executes one frame. Throws std::invalid_argument on an invalid action
  /// before any state changes.
  StepOutcome step(std::span<const FrameAction> joint, std::size_t frame);

 private:
  EnvConfig cfg_;
  CellMembers cells_;
  std::vector<UeQueueState> queues_;
  Rng channel_rng_;
  Rng arrival_rng_;
};

/// sum over frames l >= from and BSs b of gamma^(l - from) * r_b(l).
/// `rewards[l][b]` is BS b's reward in frame l.
double discounted_sum_reward(const std::vector<std::vector<double>>& rewards, double gamma,
                             std::size_t from);

}  // namespace dtfdd
