#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dtfdd/action_space.hpp"
#include "dtfdd/channel.hpp"

namespace dtfdd {

/// Linear-scale link budget. Noise power is per subchannel and depends on the
/// receiver class.
struct LinkBudget {
  double p_bs = 0.0;               // W
  double p_ue = 0.0;               // W
  double n0w_bs = 0.0;             // W
  double n0w_gue = 0.0;            // W
  double n0w_uav = 0.0;            // W
  double sinr_threshold_ue = 1.0;  // linear, DL receivers
  double sinr_threshold_bs = 1.0;  // linear, UL receivers
  double tau = 1e-3;               // s
  double w = 1e7;                  // Hz

  double noise(NodeKind receiver) const;
  double dl_bits_at_threshold() const;
  double ul_bits_at_threshold() const;
};

/// Global UE ids of each cell, indexed by the local UE slot used in FrameAction.
using CellMembers = std::vector<std::vector<std::size_t>>;

struct InterferingSets {
  std::vector<std::size_t> dl_cells;
  std::vector<std::size_t> ul_cells;
};

/// Cells transmitting on subchannel n in subframe t (0-based: t < f is DL).
InterferingSets interfering_sets(std::span<const FrameAction> joint, std::size_t t,
                                 std::size_t n);

struct SinrRate {
  double sinr = 0.0;
  double bits = 0.0;
};

/// DL reception at global UE `u` from its serving BS `b` on subchannel `n`.
/// Interference: other DL cells' BSs plus UL cells' scheduled UEs.
SinrRate dl_sinr_rate(std::size_t b, std::size_t u, std::size_t n, const InterferingSets& sets,
                      std::span<const FrameAction> joint, const CellMembers& cells,
                      const Topology& topo, const ChannelRealization& chan,
                      const LinkBudget& budget);

/// UL reception at BS `b` from global UE `u` on subchannel `n`.
/// Interference: DL cells' BSs plus other UL cells' scheduled UEs.
SinrRate ul_sinr_rate(std::size_t u, std::size_t b, std::size_t n, const InterferingSets& sets,
                      std::span<const FrameAction> joint, const CellMembers& cells,
                      const ChannelRealization& chan, const LinkBudget& budget);

/// Achievable bits per global UE summed over the frame's DL and UL subframes.
struct FrameAchievable {
  std::vector<double> dl;
  std::vector<double> ul;
};

FrameAchievable frame_achievable_bits(std::span<const FrameAction> joint,
                                      std::size_t n_subframes, const CellMembers& cells,
                                      const Topology& topo, const ChannelRealization& chan,
                                      const LinkBudget& budget);

struct ServedBits {
  std::int64_t psi_dl = 0;
  std::int64_t psi_ul = 0;
};

/// Served data is capped by the queue at frame granularity. Achievable bits
/// are floored so that queue bookkeeping stays in whole bits.
ServedBits served_bits(double achievable_dl, double achievable_ul, std::int64_t q_dl,
                       std::int64_t q_ul);

ServedBits ue_frame_throughput(std::size_t u, std::span<const FrameAction> joint,
                               std::size_t n_subframes, const CellMembers& cells,
                               const Topology& topo,
                               const ChannelRealization& chan, const LinkBudget& budget,
                               std::int64_t q_dl, std::int64_t q_ul);

}  // namespace dtfdd
