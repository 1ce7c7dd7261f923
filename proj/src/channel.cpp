#include "dtfdd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dtfdd {

double distance3d(const Position3D& a, const Position3D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Trajectory::Trajectory(std::vector<Position3D> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) throw ConfigError("trajectory needs at least one waypoint");
  for (const auto& p : waypoints_) {
    if (p.z < 0.0) throw ConfigError("trajectory waypoint below ground");
  }
}

Trajectory Trajectory::circle(double cx, double cy, double radius, double height,
                              std::size_t n_waypoints) {
  if (n_waypoints == 0) throw ConfigError("circular trajectory needs at least one waypoint");
  std::vector<Position3D> pts;
  pts.reserve(n_waypoints);
  for (std::size_t i = 0; i < n_waypoints; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(n_waypoints);
    pts.push_back({cx + radius * std::cos(angle), cy + radius * std::sin(angle), height});
  }
  return Trajectory(std::move(pts));
}

Position3D uav_position(const Trajectory& traj, std::size_t frame) {
  return traj.waypoints()[frame % traj.size()];
}

PathLossParams PathLossClass::at_height(double uav_height) const {
  PathLossParams p;
  p.a_los = db_to_linear(a_los_db);
  p.alpha_los = alpha_los;
  p.a_nlos = db_to_linear(a_nlos_db);
  p.alpha_nlos = alpha_nlos;
  if (height_dependent()) p.alpha_nlos += nlos_height_slope * std::log10(uav_height);
  return p;
}

double los_probability(double beta, double h_tx, double h_rx, const EnvironmentParams& env) {
  const double c4 = std::floor(beta * std::sqrt(env.c1 * env.c2) / 1000.0 - 1.0);
  if (c4 < 0.0) return 1.0;  // empty product
  const double denom = 2.0 * env.c3 * env.c3;  // (sqrt(2) c3)^2
  double p = 1.0;
  for (double j = 0.0; j <= c4; j += 1.0) {
    const double h = h_tx - (j + 0.5) * (h_tx - h_rx) / (c4 + 1.0);
    p *= 1.0 - std::exp(-(h * h) / denom);
  }
  return p;
}

double sample_path_loss(double beta, const PathLossParams& params, double p_los, Rng& rng) {
  if (!(beta > 0.0)) throw std::domain_error("path loss undefined at zero distance");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const bool los = unif(rng) < p_los;
  return los ? params.a_los * std::pow(beta, params.alpha_los)
             : params.a_nlos * std::pow(beta, params.alpha_nlos);
}

double sample_small_scale_fading(int m, Rng& rng) {
  if (m < 1) throw std::domain_error("fading parameter m must be >= 1");
  std::exponential_distribution<double> expo(static_cast<double>(m));
  double h = 0.0;
  for (int j = 0; j <= m; ++j) h += expo(rng);
  return h;
}

double channel_gain(double path_loss, double fading) { return fading / path_loss; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

const char* to_string(LinkClass c) {
  switch (c) {
    case LinkClass::BsGue: return "bs_gue";
    case LinkClass::BsUav: return "bs_uav";
    case LinkClass::BsBs: return "bs_bs";
    case LinkClass::UavUav: return "uav_uav";
    case LinkClass::GueGue: return "gue_gue";
    case LinkClass::GueUav: return "gue_uav";
  }
  return "?";
}

LinkClass classify_link(NodeKind a, NodeKind b) {
  auto count = [&](NodeKind k) { return int(a == k) + int(b == k); };
  if (count(NodeKind::Bs) == 2) return LinkClass::BsBs;
  if (count(NodeKind::Bs) == 1) return count(NodeKind::Uav) == 1 ? LinkClass::BsUav : LinkClass::BsGue;
  if (count(NodeKind::Uav) == 2) return LinkClass::UavUav;
  if (count(NodeKind::Gue) == 2) return LinkClass::GueGue;
  return LinkClass::GueUav;
}

std::vector<std::vector<std::size_t>> Topology::ues_by_bs() const {
  std::vector<std::vector<std::size_t>> out(num_bs());
  for (std::size_t u = 0; u < ues.size(); ++u) out.at(ues[u].serving_bs).push_back(u);
  return out;
}

Position3D Topology::ue_position(std::size_t ue, std::size_t frame) const {
  return uav_position(ues.at(ue).trajectory, frame);
}

ChannelRealization::ChannelRealization(std::size_t num_bs, std::size_t num_ue,
                                       std::size_t num_subchannels, std::size_t frame)
    : num_bs_(num_bs),
      num_nodes_(num_bs + num_ue),
      num_subchannels_(num_subchannels),
      frame_(frame),
      gains_(num_nodes_ * num_nodes_ * num_subchannels, 0.0),
      realised_(num_nodes_ * num_nodes_, 0) {}

double ChannelRealization::gain(std::size_t tx_node, std::size_t rx_node, std::size_t n) const {
  if (tx_node >= num_nodes_ || rx_node >= num_nodes_ || n >= num_subchannels_) {
    throw std::out_of_range("channel gain index out of range");
  }
  if (!realised_[tx_node * num_nodes_ + rx_node]) {
    throw std::out_of_range("link not realised in this frame");
  }
  return gains_[index(tx_node, rx_node, n)];
}

bool ChannelRealization::has(std::size_t tx_node, std::size_t rx_node) const {
  return tx_node < num_nodes_ && rx_node < num_nodes_ &&
         realised_[tx_node * num_nodes_ + rx_node] != 0;
}

void ChannelRealization::set(std::size_t tx_node, std::size_t rx_node, std::size_t n, double g) {
  if (!(g > 0.0)) throw std::domain_error("link gain must be positive");
  gains_.at(index(tx_node, rx_node, n)) = g;
  realised_.at(tx_node * num_nodes_ + rx_node) = 1;
}

std::size_t ChannelRealization::entry_count() const {
  std::size_t pairs = 0;
  for (char r : realised_) pairs += r ? 1 : 0;
  return pairs * num_subchannels_;
}

namespace {

struct NodeView {
  NodeKind kind;
  Position3D pos;
  std::size_t cell;
};

}  // namespace

ChannelRealization realize_frame_channels(const Topology& topo, const ChannelParams& params,
                                          std::size_t num_subchannels, std::size_t frame,
                                          Rng& rng) {
  const std::size_t nb = topo.num_bs();
  std::vector<NodeView> nodes;
  nodes.reserve(topo.num_nodes());
  for (std::size_t b = 0; b < nb; ++b) nodes.push_back({NodeKind::Bs, topo.bs_positions[b], b});
  for (std::size_t u = 0; u < topo.num_ue(); ++u) {
    nodes.push_back({topo.ues[u].kind, topo.ue_position(u, frame), topo.ues[u].serving_bs});
  }

  ChannelRealization out(nb, topo.num_ue(), num_subchannels, frame);
  for (std::size_t tx = 0; tx < nodes.size(); ++tx) {
    for (std::size_t rx = 0; rx < nodes.size(); ++rx) {
      if (tx == rx) continue;
      const NodeView& a = nodes[tx];
      const NodeView& b = nodes[rx];
      const bool a_bs = a.kind == NodeKind::Bs;
      const bool b_bs = b.kind == NodeKind::Bs;
      // BS<->UE links are always needed; BS-BS and UE-UE only across cells.
      if (a_bs == b_bs && a.cell == b.cell) continue;

      const LinkClass cls = classify_link(a.kind, b.kind);
      const auto it = params.pathloss.find(cls);
      if (it == params.pathloss.end()) {
        throw ConfigError(std::string("missing path-loss class '") + to_string(cls) + "'");
      }
      // Height-dependent exponents use the UAV endpoint, receiver first.
      const double uav_h = b.kind == NodeKind::Uav ? b.pos.z : a.pos.z;
      const PathLossParams pl = it->second.at_height(uav_h);

      const double beta = distance3d(a.pos, b.pos);
      const double p_los = los_probability(beta, a.pos.z, b.pos.z, params.env);
      const double loss = sample_path_loss(beta, pl, p_los, rng);
      for (std::size_t n = 0; n < num_subchannels; ++n) {
        const double g = channel_gain(loss, sample_small_scale_fading(params.env.m, rng));
        // Underflow to zero is measure-zero in practice; keep gains positive.
        out.set(tx, rx, n, std::max(g, std::numeric_limits<double>::denorm_min()));
      }
    }
  }
  return out;
}

}  // namespace dtfdd
