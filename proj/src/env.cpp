#include "dtfdd/env.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dtfdd {

DtfddEnv::DtfddEnv(EnvConfig cfg, std::uint64_t master_seed)
    : cfg_(std::move(cfg)),
      cells_(cfg_.topology.ues_by_bs()),
      queues_(cfg_.topology.num_ue()),
      channel_rng_(make_stream(master_seed, "channel")),
      arrival_rng_(make_stream(master_seed, "arrivals")) {
  if (cfg_.window == 0) throw std::invalid_argument("dropping-ratio window must be >= 1");
}

const SliceProfile& DtfddEnv::slice_of(std::size_t ue) const {
  return cfg_.topology.ues.at(ue).kind == NodeKind::Uav ? cfg_.uav_slice : cfg_.gue_slice;
}

void DtfddEnv::reset() {
  for (auto& q : queues_) q = UeQueueState{};
}

LocalState DtfddEnv::observe(std::size_t b) const {
  const auto& members = cells_.at(b);
  LocalState st;
  st.raw.reserve(2 * members.size());
  st.normalized.resize(static_cast<Eigen::Index>(2 * members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    const std::size_t u = members[i];
    const SliceProfile& sl = slice_of(u);
    st.raw.push_back(queues_[u].q_ul);
    st.raw.push_back(queues_[u].q_dl);
    const auto idx = static_cast<Eigen::Index>(2 * i);
    st.normalized(idx) =
        static_cast<double>(queues_[u].q_ul) / static_cast<double>(sl.q_max_ul_bits());
    st.normalized(idx + 1) =
        static_cast<double>(queues_[u].q_dl) / static_cast<double>(kb_to_bits(sl.dl_norm_kb));
  }
  return st;
}

std::vector<LocalState> DtfddEnv::observe_all() const {
  std::vector<LocalState> out;
  out.reserve(num_bs());
  for (std::size_t b = 0; b < num_bs(); ++b) out.push_back(observe(b));
  return out;
}

StepOutcome DtfddEnv::step(std::span<const FrameAction> joint, std::size_t frame) {
  if (joint.size() != num_bs()) throw std::invalid_argument("one action per BS required");
  for (std::size_t b = 0; b < joint.size(); ++b) {
    if (auto v = validate(joint[b], cfg_.n_subchannels, cells_[b].size(), cfg_.n_subframes)) {
      throw std::invalid_argument("BS " + std::to_string(b) + ": " + v->message);
    }
  }

  const ChannelRealization chan =
      realize_frame_channels(cfg_.topology, cfg_.channel, cfg_.n_subchannels, frame, channel_rng_);
  const FrameAchievable ach =
      frame_achievable_bits(joint, cfg_.n_subframes, cells_, cfg_.topology, chan, cfg_.budget);

  StepOutcome out;
  out.rewards.assign(num_bs(), 0.0);
  out.ues.resize(num_ue());
  for (std::size_t u = 0; u < num_ue(); ++u) {
    UeQueueState& q = queues_[u];
    UeOutcome& o = out.ues[u];
    const SliceProfile& sl = slice_of(u);

    const ServedBits served = served_bits(ach.dl[u], ach.ul[u], q.q_dl, q.q_ul);
    o.psi_dl = served.psi_dl;
    o.psi_ul = served.psi_ul;

    // Packets arrive at the end of the frame.
    o.arrival_ul = sample_arrival(sl.lambda_ul_kb, arrival_rng_);
    o.arrival_dl = sample_arrival(sl.lambda_dl_kb, arrival_rng_);

    const std::int64_t q_ul_start = q.q_ul;
    q.q_dl = step_dl_queue(q.q_dl, o.psi_dl, o.arrival_dl);
    const UlStep ul = step_ul_queue(q.q_ul, o.psi_ul, o.arrival_ul, sl.q_max_ul_bits());
    q.q_ul = ul.q_ul;
    o.dropped_ul = ul.dropped;

    push_window(q, {o.psi_ul, o.arrival_ul, q_ul_start}, cfg_.window);
    o.drop_ratio = dropping_ratio(q.window, q.q_ul);
    o.qos_ok = qos_satisfied(o.drop_ratio, sl);

    const std::size_t b = cfg_.topology.ues[u].serving_bs;
    out.rewards[b] += static_cast<double>(o.psi_dl + o.psi_ul) - (o.qos_ok ? 0.0 : sl.penalty_bits);
  }
  out.next_states = observe_all();
  return out;
}

double discounted_sum_reward(const std::vector<std::vector<double>>& rewards, double gamma,
                             std::size_t from) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must be in [0, 1]");
  double total = 0.0;
  double weight = 1.0;
  for (std::size_t l = from; l < rewards.size(); ++l) {
    double frame_sum = 0.0;
    for (double r : rewards[l]) frame_sum += r;
    total += weight * frame_sum;
    weight *= gamma;
  }
  return total;
}

}  // namespace dtfdd
