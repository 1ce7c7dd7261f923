#include "dtfdd/training.hpp"

#include <string>

namespace dtfdd {

namespace {

std::vector<std::size_t> ues_per_bs(const DtfddEnv& env) {
  std::vector<std::size_t> out;
  for (const auto& cell : env.cells()) out.push_back(cell.size());
  return out;
}

}  // namespace

std::unique_ptr<Controller> make_controller(const ExperimentConfig& cfg, const DtfddEnv& env) {
  const auto counts = ues_per_bs(env);
  const std::size_t n = cfg.radio.n_subchannels;
  const std::size_t f = cfg.radio.n_subframes;

  LearnerOptions opt;
  opt.agent = cfg.learning.agent;
  opt.exchange_period = cfg.learning.exchange_period;
  opt.reward_scale = reward_scale(cfg.radio);

  switch (cfg.policy) {
    case PolicyKind::STfdd:
      return s_tfdd_policy(counts, n, f, cfg.static_dl_subframes);
    case PolicyKind::Random:
      return std::make_unique<RandomController>(counts, n, f, cfg.seed);
    case PolicyKind::MaddpgLite:
      return std::make_unique<MaddpgLite>(counts, n, f, opt, cfg.seed);
    case PolicyKind::MyopicDTfdd:
      opt.agent.gamma = 0.0;
      break;
    case PolicyKind::DTdd:
      opt.frozen_assignment = true;
      break;
    case PolicyKind::Iddpg:
      opt.exchange_period.reset();
      break;
    case PolicyKind::Fwddpg:
      break;
  }
  const Eigen::MatrixXd weights = metropolis_weights(build_federation_graph(cfg));
  return std::make_unique<FederatedWddpg>(counts, n, f, opt, weights, cfg.seed);
}

TrainingResult run_training(const ExperimentConfig& cfg, const TrainingHooks& hooks) {
  auto trace = [&](int line) {
    if (hooks.trace) hooks.trace(line);
  };

  DtfddEnv env(build_env_config(cfg), cfg.seed);
  TrainingResult result;
  trace(1);
  trace(2);
  trace(3);
  trace(4);
  result.controller = make_controller(cfg, env);
  result.controller->set_trace(hooks.trace);
  trace(5);
  const MetricsLayout layout = metrics_layout(env);

  std::vector<FrameRecord> frames;
  frames.reserve(cfg.learning.steps);
  for (std::size_t epoch = 0; epoch < cfg.learning.epochs; ++epoch) {
    trace(6);
    trace(7);
    env.reset();
    result.controller->begin_epoch();
    frames.clear();
    for (std::size_t t = 0; t < cfg.learning.steps; ++t) {
      trace(8);
      try {
        const std::vector<LocalState> states = env.observe_all();
        FrameRecord rec;
        rec.joint = result.controller->act(states);
        trace(13);
        rec.outcome = env.step(rec.joint, epoch * cfg.learning.steps + t);
        result.controller->learn(states, rec.outcome, t);
        if (hooks.on_frame) hooks.on_frame(epoch, t, rec);
        frames.push_back(std::move(rec));
      } catch (const TrainingDivergence& e) {
        throw TrainingError("training diverged at epoch " + std::to_string(epoch) + ", frame " +
                            std::to_string(t) + ": " + e.what());
      }
    }
    result.controller->end_epoch();
    result.metrics.push_back(compute_metrics(epoch, frames, layout));
    if (hooks.on_epoch) hooks.on_epoch(result.metrics.back());
  }
  return result;
}

}  // namespace dtfdd
