#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "dtfdd/agent.hpp"
#include "dtfdd/gradcheck.hpp"
#include "support.hpp"

using namespace dtfdd;

namespace {

Transition make_transition(std::size_t n_state, double r_value, Rng& r) {
  Transition t;
  t.s = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(n_state), [&] { return testutil::uniform(r); });
  t.s_next = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(n_state), [&] { return testutil::uniform(r); });
  t.a = {testutil::uniform(r), testutil::uniform(r), testutil::uniform(r)};
  t.r = r_value;
  return t;
}

AgentConfig small_config() {
  AgentConfig c;
  c.hidden = {8, 6};
  c.k = 10;
  c.batch = 4;
  c.buffer_capacity = 64;
  return c;
}

// Exhaustive argmax of the critic.
std::pair<ActionIndex, double> argmax_q(const ActionSpace& space, const Eigen::VectorXd& s,
                                        const Mlp& critic) {
  std::pair<ActionIndex, double> best{ActionIndex{0}, -INFINITY};
  for (std::uint64_t i = 0; i < space.size(); ++i) {
    const double q = critic.predict(critic_input(s, space.embed(ActionIndex{i})))(0);
    if (q > best.second) best = {ActionIndex{i}, q};
  }
  return best;
}

}  // namespace

TEST_CASE("replay buffer is a ring") {
  ReplayBuffer rb(3);
  auto r = testutil::rng(1);
  for (int i = 0; i < 5; ++i) rb.store(make_transition(2, i, r));
  CHECK(rb.size() == 3);
  std::multiset<double> rewards;
  for (std::size_t i = 0; i < rb.size(); ++i) rewards.insert(rb.at(i).r);
  CHECK(rewards == std::multiset<double>{2, 3, 4});
  CHECK_THROWS(ReplayBuffer(0));
}

TEST_CASE("sampling the whole buffer gives a permutation") {
  ReplayBuffer rb(10);
  auto r = testutil::rng(2);
  for (int i = 0; i < 10; ++i) rb.store(make_transition(2, i, r));
  auto idx = rb.sample_indices(10, r);
  std::sort(idx.begin(), idx.end());
  std::vector<std::size_t> all(10);
  std::iota(all.begin(), all.end(), 0);
  CHECK(idx == all);
  CHECK_THROWS(rb.sample_indices(11, r));
}

TEST_CASE("seeded sampling is reproducible and uniform") {
  auto a = testutil::rng(77), b = testutil::rng(77);
  CHECK(sample_distinct(100, 10, a) == sample_distinct(100, 10, b));
  auto r = testutil::rng(5);
  std::vector<int> hits(20, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const auto s = sample_distinct(20, 5, r);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 5);
    for (auto i : s) ++hits[i];
  }
  const double expect = trials * 5.0 / 20.0;
  double chi2 = 0.0;
  for (int h : hits) chi2 += (h - expect) * (h - expect) / expect;
  CHECK(chi2 < 43.8);  // 99.9% quantile, 19 dof
}

TEST_CASE("OU noise reverts to its mean") {
  auto r = testutil::rng(12);
  const int chains = 10000;
  double sum = 0.0;
  for (int c = 0; c < chains; ++c) {
    OuNoise n{0.15, 0.2, 0.3, {0, 0, 0}};
    for (int t = 0; t < 100; ++t) n.step(r);
    sum += n.state[0];
  }
  CHECK(sum / chains == doctest::Approx(0.3 * (1.0 - std::pow(0.85, 100))).epsilon(0.05));
  OuNoise silent{0.15, 0.0, 0.0, {0, 0, 0}};
  for (int t = 0; t < 10; ++t) CHECK(silent.step(r) == Embedding{0, 0, 0});
}

TEST_CASE("proto actions") {
  auto r = testutil::rng(3);
  const auto space = std::make_shared<const ActionSpace>(2, 2, 4);
  WddpgAgent agent(space, 2, small_config(), r);
  const Eigen::Vector4d s(0.1, 0.9, 0.3, 0.0);
  const Embedding p = agent.proto_action(s);
  CHECK(p == agent.proto_action(s));
  for (double x : p) CHECK((x >= 0.0 && x <= 1.0));
  agent.actor() = Mlp::zeros(agent.actor().spec());
  CHECK(agent.proto_action(s) == Embedding{0.5, 0.5, 0.5});
}

TEST_CASE("targets start as copies") {
  auto r = testutil::rng(3);
  const auto space = std::make_shared<const ActionSpace>(2, 2, 4);
  const WddpgAgent agent(space, 2, small_config(), r);
  CHECK(agent.actor().params() == agent.target_actor().params());
  CHECK(agent.critic().params() == agent.target_critic().params());
  CHECK(agent.critic().spec().input_size() == 2 * 2 + 3);
}

TEST_CASE("Wolpertinger with k = |A| is the exhaustive argmax") {
  auto r = testutil::rng(44);
  const ActionSpace space(2, 2, 2);
  for (int c = 0; c < 100; ++c) {
    const Mlp critic(critic_spec(2, {16, 8}), r);
    const Eigen::Vector4d s = Eigen::Vector4d::NullaryExpr([&] { return testutil::uniform(r); });
    const Embedding proto{testutil::uniform(r), testutil::uniform(r), testutil::uniform(r)};
    const Selection sel = wolpertinger_select(space, s, proto, space.size(), critic);
    const auto [idx, q] = argmax_q(space, s, critic);
    CHECK(sel.index == idx);
    CHECK(sel.q == doctest::Approx(q).epsilon(1e-12));
    CHECK(sel.embedding == space.embed(sel.index));
  }
}

TEST_CASE("selected Q is non-decreasing in k") {
  auto r = testutil::rng(45);
  const ActionSpace space(2, 2, 3);
  for (int probe = 0; probe < 100; ++probe) {
    const Mlp critic(critic_spec(2, {12}), r);
    const Eigen::Vector4d s = Eigen::Vector4d::NullaryExpr([&] { return testutil::uniform(r); });
    const Embedding proto{testutil::uniform(r), testutil::uniform(r), testutil::uniform(r)};
    double prev = -INFINITY;
    for (std::size_t k = 1; k <= space.size(); k += 7) {
      const double q = wolpertinger_select(space, s, proto, k, critic).q;
      CHECK(q >= prev);
      prev = q;
    }
  }
}

TEST_CASE("k = 1 and constant critics pick the nearest action") {
  auto r = testutil::rng(46);
  const ActionSpace space(3, 2, 4);
  const Mlp critic(critic_spec(2, {12}), r);
  Mlp flat = Mlp::zeros(critic_spec(2, {12}));
  flat.params().layers.back().b(0) = 3.25;
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector4d s = Eigen::Vector4d::NullaryExpr([&] { return testutil::uniform(r); });
    const Embedding proto{testutil::uniform(r), testutil::uniform(r), testutil::uniform(r)};
    const ActionIndex nearest = space.knn(proto, 1)[0].index;
    CHECK(wolpertinger_select(space, s, proto, 1, critic).index == nearest);
    const Selection sel = wolpertinger_select(space, s, proto, 50, flat);
    CHECK(sel.index == nearest);
    CHECK(sel.q == 3.25);
  }
}

TEST_CASE("critic step with no bootstrap follows the analytic gradient") {
  auto r = testutil::rng(7);
  AgentConfig cfg = small_config();
  cfg.gamma = 0.0;
  const auto space = std::make_shared<const ActionSpace>(2, 2, 4);
  WddpgAgent agent(space, 2, cfg, r);
  const Transition t = make_transition(4, 0.8, r);

  const Mlp before = agent.critic();
  const ForwardCache cache = before.forward(critic_input(t.s, t.a));
  const double q = cache.output(0, 0);
  const Gradients g = before.backward(cache, Eigen::MatrixXd::Constant(1, 1, q - 0.8));

  const double loss = agent.critic_td_update({&t});
  CHECK(loss == doctest::Approx(0.5 * (q - 0.8) * (q - 0.8)).epsilon(1e-14));
  // First Adam step: delta = -lr * g / (|g| + eps), elementwise.
  const ParamVector gv = flatten(g.params), b0 = flatten(before.params()),
                    b1 = flatten(agent.critic().params());
  for (std::size_t i = 0; i < gv.values.size(); ++i) {
    const double expect = -cfg.critic_lr * gv.values[i] / (std::abs(gv.values[i]) + 1e-8);
    CHECK(b1.values[i] - b0.values[i] == doctest::Approx(expect).epsilon(1e-9).scale(1e-12));
  }
  CHECK(agent.target_critic().params() == before.params());
}

TEST_CASE("critic loss edge cases") {
  auto r = testutil::rng(8);
  AgentConfig cfg = small_config();
  cfg.gamma = 0.0;
  const auto space = std::make_shared<const ActionSpace>(2, 2, 4);
  WddpgAgent a1(space, 2, cfg, r);
  WddpgAgent a2 = a1;
  const Transition t = make_transition(4, -0.3, r);
  CHECK(a1.critic_td_update({&t}) == doctest::Approx(a2.critic_td_update({&t, &t, &t})));

  WddpgAgent a3(space, 2, cfg, r);
  Transition exact = t;
  exact.r = a3.critic().predict(critic_input(t.s, t.a))(0);
  const MlpParams before = a3.critic().params();
  CHECK(a3.critic_td_update({&exact}) == 0.0);
  CHECK(a3.critic().params() == before);
  CHECK_THROWS(a3.critic_td_update({}));
}

TEST_CASE("critic blind to the action gives a zero actor gradient") {
  auto r = testutil::rng(9);
  const auto space = std::make_shared<const ActionSpace>(2, 2, 4);
  WddpgAgent agent(space, 2, small_config(), r);
  agent.critic().params().layers[0].w.rightCols(3).setZero();
  std::vector<Transition> ts;
  for (int i = 0; i < 4; ++i) ts.push_back(make_transition(4, 0.0, r));
  std::vector<const Transition*> batch;
  for (auto& t : ts) batch.push_back(&t);
  const ParamVector g = flatten(agent.actor_objective_gradient(batch));
  CHECK(std::all_of(g.values.begin(), g.values.end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("actor objective gradient agrees with finite differences") {
  auto r = testutil::rng(10);
  const auto space = std::make_shared<const ActionSpace>(2, 3, 4);
  for (int seed = 0; seed < 10; ++seed) {
    WddpgAgent agent(space, 3, small_config(), r);
    std::vector<Transition> ts;
    for (int i = 0; i < 4; ++i) ts.push_back(make_transition(6, 0.0, r));
    std::vector<const Transition*> batch;
    for (auto& t : ts) batch.push_back(&t);
    CHECK(actor_objective_gradient_error(agent, batch) <= 1e-4);
  }
}

TEST_CASE("actor step ascends the objective without touching targets") {
  auto r = testutil::rng(11);
  const auto space = std::make_shared<const ActionSpace>(2, 2, 4);
  AgentConfig cfg = small_config();
  cfg.actor_lr = 1e-3;
  WddpgAgent agent(space, 2, cfg, r);
  std::vector<Transition> ts;
  for (int i = 0; i < 8; ++i) ts.push_back(make_transition(4, 0.0, r));
  std::vector<const Transition*> batch;
  for (auto& t : ts) batch.push_back(&t);
  auto objective = [&] {
    double j = 0.0;
    for (auto* t : batch) j += agent.critic().predict(critic_input(t->s, agent.proto_action(t->s)))(0);
    return j;
  };
  const MlpParams target = agent.target_actor().params();
  const double before = objective();
  agent.actor_update(batch);
  CHECK(objective() > before);
  CHECK(agent.target_actor().params() == target);
}

TEST_CASE("soft target updates converge geometrically") {
  auto r = testutil::rng(12);
  AgentConfig cfg = small_config();
  cfg.kappa = 0.5;
  const auto space = std::make_shared<const ActionSpace>(2, 2, 4);
  WddpgAgent agent(space, 2, cfg, r);
  const MlpParams start = agent.target_critic().params();
  agent.critic() = Mlp(agent.critic().spec(), r);
  for (int i = 0; i < 10; ++i) agent.soft_update_targets();
  const ParamVector t = flatten(agent.target_critic().params()), o = flatten(agent.critic().params()),
                    s0 = flatten(start);
  for (std::size_t i = 0; i < t.values.size(); ++i)
    CHECK(t.values[i] == doctest::Approx(o.values[i] + std::pow(0.5, 10) * (s0.values[i] - o.values[i])));
}

TEST_CASE("behavioral action without noise equals the greedy action") {
  auto r = testutil::rng(13);
  AgentConfig cfg = small_config();
  cfg.ou_sigma = 0.0;
  const auto space = std::make_shared<const ActionSpace>(2, 2, 4);
  WddpgAgent agent(space, 2, cfg, r);
  agent.noise().sigma = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector4d s = Eigen::Vector4d::NullaryExpr([&] { return testutil::uniform(r); });
    CHECK(agent.behavioral_action(s, r).index == agent.greedy_action(s).index);
  }
}
