#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtfdd/agent.hpp"
#include "dtfdd/baselines.hpp"
#include "dtfdd/channel.hpp"
#include "dtfdd/env.hpp"
#include "dtfdd/federation.hpp"
#include "dtfdd/queues.hpp"
#include "dtfdd/radio.hpp"

namespace dtfdd {

enum class Association { Nearest, Generator };

struct TopologyConfig {
  double area_m = 3000.0;
  std::vector<Position3D> bs_positions;  // z is ignored; bs_height_m applies
  double bs_height_m = 10.0;
  std::vector<std::vector<NodeKind>> cell_ue_kinds;  // UEs placed around each BS
  double ue_distance_m = 150.0;
  double gue_height_m = 1.5;
  double uav_height_m = 100.0;
  double uav_orbit_radius_m = 50.0;
  std::size_t uav_waypoints = 20;
  Association association = Association::Nearest;
};

struct RadioConfig {
  std::size_t n_subchannels = 5;
  std::size_t n_subframes = 10;
  double bs_power_dbm = 24.0;
  double ue_power_dbm = 23.0;
  double noise_bs_dbm = -91.0;
  double noise_gue_dbm = -95.0;
  double noise_uav_dbm = -99.0;
  double sinr_threshold_ue_db = 0.0;
  double sinr_threshold_bs_db = -3.0;
  double bandwidth_hz = 10e6;
  double subframe_s = 1e-3;
};

struct LearningConfig {
  std::size_t epochs = 1000;
  std::size_t steps = 300;
  AgentConfig agent;
  std::optional<double> penalty_kb;  // per violating UE; unset: 0.5 (lambda_ul + lambda_dl) of its slice
  std::size_t window = 50;
  ExchangePeriod exchange_period = 1;
};

struct FederationConfig {
  double radius_m = 1500.0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // overrides radius when set
};

struct ExperimentConfig {
  TopologyConfig topology;
  RadioConfig radio;
  ChannelParams channel;
  SliceProfile gue_slice;
  SliceProfile uav_slice;
  LearningConfig learning;
  FederationConfig federation;
  std::optional<std::size_t> static_dl_subframes;
  PolicyKind policy = PolicyKind::Fwddpg;
  std::uint64_t seed = 1;
};

/// Full-scale defaults: 10 BSs on a 2 x 5 grid in 3 km x 3 km, three UEs per
/// BS (two GUEs, one UAV), N = 5, F = 10.
ExperimentConfig default_config();

/// Parses `[section]` / `key = value` text on top of the defaults and
/// validates the result. Errors carry the offending key path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Throws ConfigError naming the first violated field.
void validate_config(const ExperimentConfig& cfg);

Topology build_topology(const ExperimentConfig& cfg);
LinkBudget build_link_budget(const RadioConfig& radio);
EnvConfig build_env_config(const ExperimentConfig& cfg);
BsGraph build_federation_graph(const ExperimentConfig& cfg);

/// 1 / (F * N * tau * W): one frame's full capacity at the threshold rate
/// in one direction maps to a reward of about 1.
double reward_scale(const RadioConfig& radio);

/// The config rendered back to the text format, every key explicit.
std::string render_config(const ExperimentConfig& cfg);

}  // namespace dtfdd
