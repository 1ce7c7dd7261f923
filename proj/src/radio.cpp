#include "dtfdd/radio.hpp"

#include <algorithm>
#include <cmath>

namespace dtfdd {

double LinkBudget::noise(NodeKind receiver) const {
  switch (receiver) {
    case NodeKind::Bs: return n0w_bs;
    case NodeKind::Gue: return n0w_gue;
    case NodeKind::Uav: return n0w_uav;
  }
  return n0w_bs;
}

double LinkBudget::dl_bits_at_threshold() const {
  return tau * w * std::log2(1.0 + sinr_threshold_ue);
}

double LinkBudget::ul_bits_at_threshold() const {
  return tau * w * std::log2(1.0 + sinr_threshold_bs);
}

InterferingSets interfering_sets(std::span<const FrameAction> joint, std::size_t t,
                                 std::size_t n) {
  InterferingSets sets;
  for (std::size_t b = 0; b < joint.size(); ++b) {
    const FrameAction& a = joint[b];
    const bool downlink = t < static_cast<std::size_t>(a.f);
    if (downlink) {
      if (a.dl[n] != kNoUe) sets.dl_cells.push_back(b);
    } else if (a.ul[n] != kNoUe) {
      sets.ul_cells.push_back(b);
    }
  }
  return sets;
}

SinrRate dl_sinr_rate(std::size_t b, std::size_t u, std::size_t n, const InterferingSets& sets,
                      std::span<const FrameAction> joint, const CellMembers& cells,
                      const Topology& topo, const ChannelRealization& chan,
                      const LinkBudget& budget) {
  double interference = 0.0;
  for (std::size_t bp : sets.dl_cells) {
    if (bp == b) continue;
    interference += budget.p_bs * chan.bs_to_ue(bp, u, n);
  }
  for (std::size_t bp : sets.ul_cells) {
    const std::size_t up = cells[bp][static_cast<std::size_t>(joint[bp].ul[n])];
    interference += budget.p_ue * chan.ue_to_ue(up, u, n);
  }
  const double sinr = budget.p_bs * chan.bs_to_ue(b, u, n) /
                      (interference + budget.noise(topo.ues[u].kind));
  const double bits = sinr >= budget.sinr_threshold_ue ? budget.dl_bits_at_threshold() : 0.0;
  return {sinr, bits};
}

SinrRate ul_sinr_rate(std::size_t u, std::size_t b, std::size_t n, const InterferingSets& sets,
                      std::span<const FrameAction> joint, const CellMembers& cells,
                      const ChannelRealization& chan, const LinkBudget& budget) {
  double interference = 0.0;
  for (std::size_t bp : sets.dl_cells) {
    interference += budget.p_bs * chan.bs_to_bs(bp, b, n);
  }
  for (std::size_t bp : sets.ul_cells) {
    if (bp == b) continue;
    const std::size_t up = cells[bp][static_cast<std::size_t>(joint[bp].ul[n])];
    interference += budget.p_ue * chan.ue_to_bs(up, b, n);
  }
  const double sinr =
      budget.p_ue * chan.ue_to_bs(u, b, n) / (interference + budget.noise(NodeKind::Bs));
  const double bits = sinr >= budget.sinr_threshold_bs ? budget.ul_bits_at_threshold() : 0.0;
  return {sinr, bits};
}

FrameAchievable frame_achievable_bits(std::span<const FrameAction> joint,
                                      std::size_t n_subframes, const CellMembers& cells,
                                      const Topology& topo, const ChannelRealization& chan,
                                      const LinkBudget& budget) {
  FrameAchievable out{std::vector<double>(topo.num_ue(), 0.0),
                      std::vector<double>(topo.num_ue(), 0.0)};
  const std::size_t n_subchannels = chan.num_subchannels();
  for (std::size_t t = 0; t < n_subframes; ++t) {
    for (std::size_t n = 0; n < n_subchannels; ++n) {
      const InterferingSets sets = interfering_sets(joint, t, n);
      for (std::size_t b : sets.dl_cells) {
        const std::size_t u = cells[b][static_cast<std::size_t>(joint[b].dl[n])];
        out.dl[u] += dl_sinr_rate(b, u, n, sets, joint, cells, topo, chan, budget).bits;
      }
      for (std::size_t b : sets.ul_cells) {
        const std::size_t u = cells[b][static_cast<std::size_t>(joint[b].ul[n])];
        out.ul[u] += ul_sinr_rate(u, b, n, sets, joint, cells, chan, budget).bits;
      }
    }
  }
  return out;
}

ServedBits served_bits(double achievable_dl, double achievable_ul, std::int64_t q_dl,
                       std::int64_t q_ul) {
  const auto dl = static_cast<std::int64_t>(std::floor(achievable_dl));
  const auto ul = static_cast<std::int64_t>(std::floor(achievable_ul));
  return {std::min(q_dl, dl), std::min(q_ul, ul)};
}

}  // namespace dtfdd

namespace dtfdd {

ServedBits ue_frame_throughput(std::size_t u, std::span<const FrameAction> joint,
                               std::size_t n_subframes, const CellMembers& cells,
                               const Topology& topo, const ChannelRealization& chan,
                               const LinkBudget& budget, std::int64_t q_dl, std::int64_t q_ul) {
  const FrameAchievable ach = frame_achievable_bits(joint, n_subframes, cells, topo, chan, budget);
  return served_bits(ach.dl.at(u), ach.ul.at(u), q_dl, q_ul);
}

}  // namespace dtfdd
