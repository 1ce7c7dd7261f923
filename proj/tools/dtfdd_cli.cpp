#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dtfdd/action_space.hpp"
#include "dtfdd/config.hpp"
#include "dtfdd/federation.hpp"
#include "dtfdd/gradcheck.hpp"
#include "dtfdd/metrics.hpp"
#include "dtfdd/training.hpp"

using namespace dtfdd;

namespace {

ExperimentConfig config_from(const std::string& path) {
  return path.empty() ? parse_config("") : load_config(path);
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& policy,
            const std::optional<std::uint64_t>& seed, const std::string& out_path,
            const std::optional<std::size_t>& epochs, bool quiet) {
  ExperimentConfig cfg = config_from(config_path);
  if (policy) cfg.policy = parse_policy_kind(*policy);
  if (seed) cfg.seed = *seed;
  if (epochs) cfg.learning.epochs = *epochs;
  validate_config(cfg);

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  CsvWriter writer(out, cfg.topology.bs_positions.size());
  TrainingHooks hooks;
  hooks.on_epoch = [&](const EpochMetrics& m) {
    writer.write(m);
    if (!quiet) {
      std::fprintf(stderr, "epoch %zu  sum_reward %.6g  qos %.3f\n", m.epoch, m.sum_reward,
                   m.qos_probability);
    }
  };
  run_training(cfg, hooks);
  out.close();
  if (!out) throw std::runtime_error("error closing '" + out_path + "'");
  return 0;
}

// Counts N x U binary assignment matrices with at most one UE per subchannel.
std::optional<std::uint64_t> brute_force_assignments(std::size_t n, std::size_t u) {
  const std::size_t bits = n * u;
  if (bits > 20) return std::nullopt;
  std::uint64_t count = 0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << bits); ++m) {
    bool ok = true;
    for (std::size_t row = 0; row < n && ok; ++row) {
      const std::uint64_t r = (m >> (row * u)) & ((std::uint64_t{1} << u) - 1);
      ok = (r & (r - 1)) == 0;
    }
    count += ok;
  }
  return count;
}

int cmd_enumerate(std::size_t n, std::size_t u, std::size_t f, bool list) {
  const std::uint64_t nested = count_subchannel_assignments(n, u);
  const std::uint64_t closed = count_subchannel_assignments_closed_form(n, u);
  const std::uint64_t total = action_space_size(n, u, f);
  const auto brute = brute_force_assignments(n, u);
  std::cout << "assignments_per_direction " << nested << "\n"
            << "closed_form " << closed << "\n";
  if (brute) std::cout << "brute_force " << *brute << "\n";
  std::cout << "action_space_size " << total << "\n";
  if (list) {
    const ActionSpace space(n, u, f);
    for (std::uint64_t i = 0; i < space.size(); ++i) {
      const FrameAction a = space.decode(ActionIndex{i});
      std::cout << i << " f=" << a.f << " dl=";
      for (int x : a.dl) std::cout << (x == kNoUe ? std::string("-") : std::to_string(x));
      std::cout << " ul=";
      for (int x : a.ul) std::cout << (x == kNoUe ? std::string("-") : std::to_string(x));
      std::cout << "\n";
    }
  }
  return nested == closed && (!brute || *brute == nested) ? 0 : 1;
}

int cmd_gradcheck(std::size_t seeds, std::size_t n_ues, std::size_t batch) {
  const std::vector<std::size_t> hidden{60, 50};
  double worst_actor = 0.0, worst_critic = 0.0, worst_objective = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng = make_stream(s, "gradcheck");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Mlp actor(actor_spec(n_ues, hidden), rng);
    const Mlp critic(critic_spec(n_ues, hidden), rng);
    Eigen::MatrixXd xa(static_cast<Eigen::Index>(2 * n_ues), static_cast<Eigen::Index>(batch));
    Eigen::MatrixXd xc(static_cast<Eigen::Index>(2 * n_ues + 3), static_cast<Eigen::Index>(batch));
    for (Eigen::Index i = 0; i < xa.size(); ++i) xa.data()[i] = unit(rng);
    for (Eigen::Index i = 0; i < xc.size(); ++i) xc.data()[i] = unit(rng);
    Eigen::MatrixXd ga(3, static_cast<Eigen::Index>(batch));
    Eigen::MatrixXd gc(1, static_cast<Eigen::Index>(batch));
    for (Eigen::Index i = 0; i < ga.size(); ++i) ga.data()[i] = unit(rng) - 0.5;
    for (Eigen::Index i = 0; i < gc.size(); ++i) gc.data()[i] = unit(rng) - 0.5;
    worst_actor = std::max(worst_actor, mlp_gradient_error(actor, xa, ga));
    worst_critic = std::max(worst_critic, mlp_gradient_error(critic, xc, gc));

    AgentConfig ac;
    ac.hidden = {8, 6};
    ac.buffer_capacity = batch;
    const auto space = std::make_shared<const ActionSpace>(2, n_ues, 4);
    WddpgAgent agent(space, n_ues, ac, rng);
    std::vector<Transition> ts(batch);
    std::vector<const Transition*> ptrs;
    for (auto& t : ts) {
      t.s = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(2 * n_ues), [&] { return unit(rng); });
      ptrs.push_back(&t);
    }
    worst_objective = std::max(worst_objective, actor_objective_gradient_error(agent, ptrs));
  }
  std::printf("actor_max_rel_error %.3e\ncritic_max_rel_error %.3e\nactor_objective_max_rel_error %.3e\n",
              worst_actor, worst_critic, worst_objective);
  const bool ok = worst_actor <= 1e-5 && worst_critic <= 1e-5 && worst_objective <= 1e-4;
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int cmd_graph(const std::string& config_path, bool dump) {
  const ExperimentConfig cfg = config_from(config_path);
  const BsGraph g = build_federation_graph(cfg);
  std::printf("nodes %zu\nconnected %s\n", g.num_nodes(), g.connected() ? "yes" : "no");
  if (dump) {
    for (const auto& [a, b] : g.edges()) std::printf("edge %zu %zu\n", a, b);
    const Eigen::MatrixXd w = metropolis_weights(g);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      std::printf("weights %ld", static_cast<long>(r));
      for (Eigen::Index c = 0; c < w.cols(); ++c) std::printf(" %.17g", w(r, c));
      std::printf("\n");
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated Wolpertinger DDPG for multi-cell D-TFDD resource allocation"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "train a policy and write per-epoch metrics as CSV");
  std::string config_path, out_path;
  std::optional<std::string> policy;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  bool quiet = false;
  run->add_option("--config", config_path, "config file (defaults apply when omitted)");
  run->add_option("--policy", policy,
                  "fwddpg | s_tfdd | myopic_d_tfdd | d_tdd | iddpg | maddpg_lite | random");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--out", out_path, "metrics CSV path")->required();
  run->add_option("--epochs", epochs, "override learning.epochs");
  run->add_flag("--quiet", quiet, "no per-epoch progress on stderr");

  auto* enumerate = app.add_subcommand("enumerate-actions", "count (and optionally list) actions");
  std::size_t en = 0, eu = 0, ef = 0;
  bool list = false;
  enumerate->add_option("--n", en, "subchannels")->required();
  enumerate->add_option("--u", eu, "UEs in the cell")->required();
  enumerate->add_option("--f", ef, "subframes per frame")->required();
  enumerate->add_flag("--list", list, "print every action");

  auto* grad = app.add_subcommand("gradcheck", "compare backprop with finite differences");
  std::size_t gseeds = 100, gues = 3, gbatch = 4;
  grad->add_option("--seeds", gseeds, "number of random networks");
  grad->add_option("--ues", gues, "UEs per cell (sets input width)");
  grad->add_option("--batch", gbatch, "samples per check");

  auto* graph = app.add_subcommand("graph", "show the federation graph and gossip weights");
  std::string graph_config;
  bool dump = false;
  graph->add_option("--config", graph_config, "config file");
  graph->add_flag("--dump", dump, "print edges and the weight matrix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, policy, seed, out_path, epochs, quiet);
    if (*enumerate) return cmd_enumerate(en, eu, ef, list);
    if (*grad) return cmd_gradcheck(gseeds, gues, gbatch);
    if (*graph) return cmd_graph(graph_config, dump);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
