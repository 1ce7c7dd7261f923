#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtfdd/rng.hpp"

namespace dtfdd {

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  // height above ground, metres
};

double distance3d(const Position3D& a, const Position3D& b);

/// Discretised flight path: one waypoint per time frame, cycled when exhausted.
class Trajectory {
 public:
  explicit Trajectory(std::vector<Position3D> waypoints);

  static Trajectory stationary(const Position3D& p) { return Trajectory({p}); }

  /// Circle of `radius` around (cx, cy) at constant height, sampled at
  /// `n_waypoints` evenly spaced angles starting at angle 0.
  static Trajectory circle(double cx, double cy, double radius, double height,
                           std::size_t n_waypoints);

  const std::vector<Position3D>& waypoints() const { return waypoints_; }
  std::size_t size() const { return waypoints_.size(); }

 private:
  std::vector<Position3D> waypoints_;
};

Position3D uav_position(const Trajectory& traj, std::size_t frame);

/// Linear-scale path-loss law: A * beta^alpha, LoS or NLoS branch.
struct PathLossParams {
  double a_los = 1.0;
  double alpha_los = 2.0;
  double a_nlos = 1.0;
  double alpha_nlos = 2.0;
};

/// One row of the path-loss table as configured (dB reference losses). The
/// NLoS exponent may depend on the UAV height: alpha_nlos + slope * log10(h).
struct PathLossClass {
  double a_los_db = 0.0;
  double alpha_los = 2.0;
  double a_nlos_db = 0.0;
  double alpha_nlos = 2.0;
  double nlos_height_slope = 0.0;

  bool height_dependent() const { return nlos_height_slope != 0.0; }
  PathLossParams at_height(double uav_height) const;
};

/// ITU environment constants and the fading parameter m.
struct EnvironmentParams {
  double c1 = 0.3;
  double c2 = 500.0;
  double c3 = 20.0;
  int m = 1;
};

double los_probability(double beta, double h_tx, double h_rx, const EnvironmentParams& env);

double sample_path_loss(double beta, const PathLossParams& params, double p_los, Rng& rng);

/// Draws h with CDF F(x) = 1 - sum_{j=0..m} (m x)^j / j! * exp(-m x).
/// That law is Gamma(m + 1, rate m), sampled exactly as a sum of m + 1
/// exponentials with rate m.
double sample_small_scale_fading(int m, Rng& rng);

double channel_gain(double path_loss, double fading);

double db_to_linear(double db);
double dbm_to_watts(double dbm);

// ---------------------------------------------------------------------------
// Network layout

enum class NodeKind { Bs, Gue, Uav };

struct UeSite {
  NodeKind kind = NodeKind::Gue;
  std::size_t serving_bs = 0;
  Trajectory trajectory = Trajectory::stationary({});
};

enum class LinkClass { BsGue, BsUav, BsBs, UavUav, GueGue, GueUav };

const char* to_string(LinkClass c);
LinkClass classify_link(NodeKind a, NodeKind b);

struct Topology {
  std::vector<Position3D> bs_positions;
  std::vector<UeSite> ues;

  std::size_t num_bs() const { return bs_positions.size(); }
  std::size_t num_ue() const { return ues.size(); }
  std::size_t num_nodes() const { return num_bs() + num_ue(); }

  /// Global UE ids served by each BS, in ascending order.
  std::vector<std::vector<std::size_t>> ues_by_bs() const;

  Position3D ue_position(std::size_t ue, std::size_t frame) const;
};

struct ChannelParams {
  EnvironmentParams env;
  std::map<LinkClass, PathLossClass> pathloss;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-frame link gains for every directed (tx, rx, subchannel) triple the
/// interference computation can touch. Nodes are numbered BSs first
/// (0..B-1), then UEs (B..B+U-1).
class ChannelRealization {
 public:
  ChannelRealization() = default;
  ChannelRealization(std::size_t num_bs, std::size_t num_ue, std::size_t num_subchannels,
                     std::size_t frame);

  std::size_t frame() const { return frame_; }
  std::size_t num_subchannels() const { return num_subchannels_; }

  double gain(std::size_t tx_node, std::size_t rx_node, std::size_t n) const;
  bool has(std::size_t tx_node, std::size_t rx_node) const;
  void set(std::size_t tx_node, std::size_t rx_node, std::size_t n, double g);

  double bs_to_ue(std::size_t b, std::size_t u, std::size_t n) const {
    return gain(b, num_bs_ + u, n);
  }
  double ue_to_bs(std::size_t u, std::size_t b, std::size_t n) const {
    return gain(num_bs_ + u, b, n);
  }
  double bs_to_bs(std::size_t b_tx, std::size_t b_rx, std::size_t n) const {
    return gain(b_tx, b_rx, n);
  }
  double ue_to_ue(std::size_t u_tx, std::size_t u_rx, std::size_t n) const {
    return gain(num_bs_ + u_tx, num_bs_ + u_rx, n);
  }

  /// Number of realised (tx, rx, n) gains.
  std::size_t entry_count() const;

  bool operator==(const ChannelRealization&) const = default;

 private:
  std::size_t index(std::size_t tx, std::size_t rx, std::size_t n) const {
    return (tx * num_nodes_ + rx) * num_subchannels_ + n;
  }

  std::size_t num_bs_ = 0;
  std::size_t num_nodes_ = 0;
  std::size_t num_subchannels_ = 0;
  std::size_t frame_ = 0;
  std::vector<double> gains_;
  std::vector<char> realised_;  // per (tx, rx) pair
};

/// Samples every link needed by the DL/UL interference sums: BS->UE, UE->BS,
/// BS->BS across cells and UE->UE across cells. Each subchannel gets an
/// independent small-scale draw; the LoS/NLoS branch is drawn once per link.
ChannelRealization realize_frame_channels(const Topology& topo, const ChannelParams& params,
                                          std::size_t num_subchannels, std::size_t frame,
                                          Rng& rng);

}  // namespace dtfdd
