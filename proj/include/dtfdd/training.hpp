#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "dtfdd/baselines.hpp"
#include "dtfdd/config.hpp"
#include "dtfdd/env.hpp"
#include "dtfdd/metrics.hpp"

namespace dtfdd {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds the controller selected by `cfg.policy` for `env`'s cell layout.
std::unique_ptr<Controller> make_controller(const ExperimentConfig& cfg, const DtfddEnv& env);

struct TrainingHooks {
  std::function<void(const EpochMetrics&)> on_epoch;
  TraceFn trace;  // training-loop line labels, in execution order
  /// Called after every executed frame.
  std::function<void(std::size_t epoch, std::size_t step, const FrameRecord&)> on_frame;
};

struct TrainingResult {
  std::vector<EpochMetrics> metrics;
  std::unique_ptr<Controller> controller;
};

/// Runs cfg.learning.epochs epochs of cfg.learning.steps frames. Numerical
/// divergence is rethrown as TrainingError with the epoch and frame.
TrainingResult run_training(const ExperimentConfig& cfg, const TrainingHooks& hooks = {});

}  // namespace dtfdd
