#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "dtfdd/action_space.hpp"
#include "dtfdd/channel.hpp"
#include "dtfdd/env.hpp"

namespace dtfdd {

/// One executed frame: the joint action and what it produced.
struct FrameRecord {
  std::vector<FrameAction> joint;
  StepOutcome outcome;
};

/// Static facts about the network needed to aggregate records.
struct MetricsLayout {
  std::vector<NodeKind> ue_kinds;  // per global UE
  CellMembers cells;               // local slot -> global UE
  std::size_t n_subframes = 1;
};

MetricsLayout metrics_layout(const DtfddEnv& env);

struct EpochMetrics {
  std::size_t epoch = 0;
  double sum_reward = 0.0;        // sum over frames and BSs, bits
  double qos_probability = 0.0;   // fraction of (UE, frame) pairs with d <= d_max
  double drop_ratio_gue = 0.0;    // mean over (GUE, frame); NaN without GUEs
  double drop_ratio_uav = 0.0;
  double subchannel_share_gue = 0.0;  // assigned (subchannel, direction) slots held by GUEs
  double subchannel_share_uav = 0.0;
  std::vector<double> dl_fraction;    // per BS, mean f / F
};

/// Throws std::invalid_argument on an empty epoch.
EpochMetrics compute_metrics(std::size_t epoch, const std::vector<FrameRecord>& frames,
                             const MetricsLayout& layout);

std::string csv_header(std::size_t num_bs);
std::string csv_row(const EpochMetrics& m);

/// Header plus one row per epoch. Throws std::runtime_error on I/O failure.
void emit_csv(const std::vector<EpochMetrics>& metrics, std::size_t num_bs,
              const std::string& path);

/// Streaming writer used by the training loop.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::size_t num_bs);
  void write(const EpochMetrics& m);

 private:
  std::ostream& out_;
};

}  // namespace dtfdd
