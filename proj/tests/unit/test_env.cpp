#include <doctest.h>

#include <numeric>
#include <stdexcept>

#include "dtfdd/config.hpp"
#include "dtfdd/env.hpp"
#include "support.hpp"

using namespace dtfdd;

namespace {

const char* kTwoCells = R"(
[topology]
area_m = 1000
bs_positions = 250,500 | 750,500
cell_ue_types = gue,uav | gue,uav
[radio]
subchannels = 2
subframes = 4
[slice.gue]
lambda_ul_kb = 1.5
lambda_dl_kb = 2
buffer_kb = 2.5
d_max = 0.2
[slice.uav]
lambda_ul_kb = 0.5
lambda_dl_kb = 0.8
buffer_kb = 1
d_max = 0.1
[learning]
penalty_kb = 1
)";

const char* kOneCell = R"(
[topology]
area_m = 1000
bs_positions = 500,500
cell_ue_types = gue
ue_distance_m = 10
[radio]
subchannels = 1
subframes = 5
)";

EnvConfig env_config(const char* text) { return build_env_config(parse_config(text)); }

std::vector<FrameAction> random_joint(const DtfddEnv& env, Rng& r) {
  std::vector<FrameAction> joint;
  const auto& cfg = env.config();
  for (std::size_t b = 0; b < env.num_bs(); ++b) {
    const ActionSpace space(cfg.n_subchannels, env.cells()[b].size(), cfg.n_subframes);
    joint.push_back(space.decode(ActionIndex{r() % space.size()}));
  }
  return joint;
}

}  // namespace

TEST_CASE("fresh environment observes zeros of the right size") {
  const DtfddEnv env(env_config(kTwoCells), 1);
  REQUIRE(env.num_bs() == 2);
  for (std::size_t b = 0; b < 2; ++b) {
    const LocalState s = env.observe(b);
    CHECK(s.raw.size() == 2 * env.cells()[b].size());
    CHECK(s.normalized.size() == 4);
    CHECK(s.normalized.isZero());
  }
}

TEST_CASE("observation layout and normalisation") {
  DtfddEnv env(env_config(kTwoCells), 1);
  const std::size_t ue = env.cells()[1][0];
  env.mutable_queues()[ue].q_ul = kb_to_bits(100);
  env.mutable_queues()[ue].q_dl = kb_to_bits(1);
  const LocalState s1 = env.observe(1);
  CHECK(s1.raw == std::vector<std::int64_t>{800000, 8000, 0, 0});
  CHECK(s1.normalized(0) == doctest::Approx(100 / 2.5));
  CHECK(s1.normalized(1) == doctest::Approx(1 / 2.5));
  CHECK(env.observe(0).normalized.isZero());  // other cells stay invisible
}

TEST_CASE("first frame from empty queues earns nothing") {
  DtfddEnv env(env_config(kTwoCells), 3);
  auto r = testutil::rng(1);
  const StepOutcome out = env.step(random_joint(env, r), 0);
  for (double reward : out.rewards) CHECK(reward == 0.0);
  for (std::size_t u = 0; u < env.num_ue(); ++u) {
    CHECK(out.next_states.size() == 2);
    CHECK(env.queues()[u].q_dl == out.ues[u].arrival_dl);
  }
}

TEST_CASE("single cell serves its DL queue up to the queue length") {
  DtfddEnv env(env_config(kOneCell), 5);
  env.mutable_queues()[0].q_dl = 20000;
  const std::vector<FrameAction> joint{{2, {0}, {kNoUe}}};
  const StepOutcome out = env.step(joint, 0);
  CHECK(out.ues[0].psi_dl == 20000);
  CHECK(out.ues[0].psi_ul == 0);
  CHECK(out.rewards[0] == 20000.0);
}

TEST_CASE("rewards decompose into served bits minus penalties") {
  const EnvConfig cfg = env_config(kTwoCells);
  DtfddEnv env(cfg, 11);
  auto r = testutil::rng(2);
  std::vector<std::int64_t> q_dl0(env.num_ue(), 0), q_ul0(env.num_ue(), 0);
  std::vector<std::int64_t> arrived(env.num_ue(), 0), served(env.num_ue(), 0), dropped(env.num_ue(), 0);
  for (std::size_t frame = 0; frame < 300; ++frame) {
    const StepOutcome out = env.step(random_joint(env, r), frame);
    for (std::size_t b = 0; b < env.num_bs(); ++b) {
      double expect = 0.0;
      for (std::size_t u : env.cells()[b]) {
        const UeOutcome& o = out.ues[u];
        expect += static_cast<double>(o.psi_dl + o.psi_ul);
        if (!o.qos_ok) expect -= env.slice_of(u).penalty_bits;
        CHECK(o.qos_ok == (o.drop_ratio <= env.slice_of(u).d_max));
        CHECK((o.drop_ratio >= 0.0 && o.drop_ratio <= 1.0));
      }
      CHECK(out.rewards[b] == doctest::Approx(expect));
    }
    for (std::size_t u = 0; u < env.num_ue(); ++u) {
      const UeOutcome& o = out.ues[u];
      arrived[u] += o.arrival_dl + o.arrival_ul;
      served[u] += o.psi_dl + o.psi_ul;
      dropped[u] += o.dropped_ul;
    }
  }
  for (std::size_t u = 0; u < env.num_ue(); ++u) {
    const auto& q = env.queues()[u];
    CHECK(q_dl0[u] + q_ul0[u] + arrived[u] == served[u] + dropped[u] + q.q_dl + q.q_ul);
    CHECK(q.q_ul <= env.slice_of(u).q_max_ul_bits());
  }
}

TEST_CASE("penalty lowers the reward by exactly its size per violation") {
  EnvConfig cheap = env_config(kTwoCells), dear = cheap;
  cheap.gue_slice.penalty_bits = cheap.uav_slice.penalty_bits = 0.0;
  dear.gue_slice.penalty_bits = dear.uav_slice.penalty_bits = 12345.0;
  DtfddEnv a(cheap, 4), b(dear, 4);
  auto r = testutil::rng(3);
  int violations = 0;
  for (std::size_t frame = 0; frame < 100; ++frame) {
    const auto joint = random_joint(a, r);
    const StepOutcome oa = a.step(joint, frame), ob = b.step(joint, frame);
    for (std::size_t bs = 0; bs < 2; ++bs) {
      int bad = 0;
      for (std::size_t u : a.cells()[bs]) bad += !ob.ues[u].qos_ok;
      violations += bad;
      CHECK(oa.rewards[bs] - ob.rewards[bs] == 12345.0 * bad);
    }
  }
  CHECK(violations > 0);
}

TEST_CASE("same seed, same actions, same outcome") {
  DtfddEnv a(env_config(kTwoCells), 9), b(env_config(kTwoCells), 9);
  auto r = testutil::rng(4);
  for (std::size_t frame = 0; frame < 50; ++frame) {
    const auto joint = random_joint(a, r);
    const StepOutcome oa = a.step(joint, frame), ob = b.step(joint, frame);
    CHECK(oa.rewards == ob.rewards);
    for (std::size_t u = 0; u < a.num_ue(); ++u) CHECK(oa.ues[u].psi_dl == ob.ues[u].psi_dl);
  }
}

TEST_CASE("invalid actions are rejected before any change") {
  DtfddEnv env(env_config(kTwoCells), 2);
  auto r = testutil::rng(5);
  for (std::size_t frame = 0; frame < 5; ++frame) env.step(random_joint(env, r), frame);
  const auto before = env.queues();
  std::vector<FrameAction> joint = random_joint(env, r);
  joint[1].f = 9;
  CHECK_THROWS_AS(env.step(joint, 5), std::invalid_argument);
  joint.pop_back();
  CHECK_THROWS_AS(env.step(joint, 5), std::invalid_argument);
  for (std::size_t u = 0; u < env.num_ue(); ++u) {
    CHECK(env.queues()[u].q_dl == before[u].q_dl);
    CHECK(env.queues()[u].q_ul == before[u].q_ul);
    CHECK(env.queues()[u].window.size() == before[u].window.size());
  }
}

TEST_CASE("reset empties queues and windows") {
  DtfddEnv env(env_config(kTwoCells), 2);
  auto r = testutil::rng(6);
  for (std::size_t frame = 0; frame < 5; ++frame) env.step(random_joint(env, r), frame);
  env.reset();
  for (const auto& q : env.queues()) {
    CHECK(q.q_dl == 0);
    CHECK(q.q_ul == 0);
    CHECK(q.window.empty());
  }
}

TEST_CASE("discounted sum reward") {
  const std::vector<std::vector<double>> one_bs{{1.0}, {1.0}};
  CHECK(discounted_sum_reward(one_bs, 0.5, 0) == 1.5);
  const std::vector<std::vector<double>> rs{{1.0, 2.0}, {4.0, 8.0}, {16.0, 32.0}};
  CHECK(discounted_sum_reward(rs, 0.0, 0) == 3.0);
  CHECK(discounted_sum_reward(rs, 0.0, 1) == 12.0);
  CHECK(discounted_sum_reward(rs, 0.5, 1) == 12.0 + 0.5 * 48.0);
  const std::vector<std::vector<double>> flat(7, std::vector<double>(3, 2.5));
  CHECK(discounted_sum_reward(flat, 1.0, 0) == 3 * 2.5 * 7);
  CHECK_THROWS(discounted_sum_reward(rs, 1.5, 0));
}
