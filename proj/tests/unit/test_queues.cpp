#include <doctest.h>

#include <stdexcept>

#include "dtfdd/queues.hpp"
#include "support.hpp"

using namespace dtfdd;

TEST_CASE("DL queue examples") {
  CHECK(step_dl_queue(100, 30, 20) == 90);
  CHECK(step_dl_queue(0, 0, 50) == 50);
  CHECK(step_dl_queue(77, 77, 0) == 0);
  CHECK_THROWS_AS(step_dl_queue(10, 11, 0), std::logic_error);
}

TEST_CASE("UL queue examples") {
  const UlStep clamp = step_ul_queue(100, 100, 50, 40);
  CHECK(clamp.q_ul == 40);
  CHECK(clamp.dropped == 10);
  const UlStep fits = step_ul_queue(10, 5, 20, 100);
  CHECK(fits.q_ul == 25);
  CHECK(fits.dropped == 0);
  const UlStep saturated = step_ul_queue(64, 0, 9, 64);
  CHECK(saturated.q_ul == 64);
  CHECK(saturated.dropped == 9);
  CHECK_THROWS_AS(step_ul_queue(3, 4, 0, 10), std::logic_error);
}

TEST_CASE("saturated buffer gives a two-thirds dropping ratio") {
  const std::int64_t kb50 = kb_to_bits(50);
  UeQueueState s;
  for (int l = 0; l < 3; ++l) {
    const std::int64_t start = s.q_ul;
    const UlStep st = step_ul_queue(s.q_ul, 0, kb50, kb50);
    push_window(s, {0, kb50, start}, 50);
    s.q_ul = st.q_ul;
  }
  CHECK(s.q_ul == kb50);
  CHECK(dropping_ratio(s.window, s.q_ul) == 2.0 / 3.0);
}

TEST_CASE("fully served window has no drops") {
  UeQueueState s;
  for (int l = 0; l < 10; ++l) push_window(s, {1000, 1000, 0}, 50);
  CHECK(dropping_ratio(s.window, 0) == 0.0);
  UeQueueState idle;
  push_window(idle, {0, 0, 0}, 50);
  CHECK(dropping_ratio(idle.window, 0) == 0.0);
  CHECK(dropping_ratio({}, 0) == 0.0);
}

TEST_CASE("window keeps only the most recent frames") {
  UeQueueState s;
  for (std::int64_t l = 0; l < 7; ++l) push_window(s, {l, l, l}, 4);
  REQUIRE(s.window.size() == 4);
  CHECK(s.window.front().served == 3);
  CHECK(s.window.back().served == 6);
  UeQueueState short_run;
  for (std::int64_t l = 0; l < 2; ++l) push_window(short_run, {l, l, l}, 4);
  CHECK(short_run.window.size() == 2);
  CHECK(short_run.window.front().queue_at_start == 0);
}

TEST_CASE("conservation over random frames") {
  auto r = testutil::rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::int64_t q_max = 1 + static_cast<std::int64_t>(r() % 50000);
    std::int64_t q_dl = static_cast<std::int64_t>(r() % 20000);
    std::int64_t q_ul = static_cast<std::int64_t>(r() % static_cast<std::uint64_t>(q_max + 1));
    const std::int64_t q_dl0 = q_dl, q_ul0 = q_ul;
    std::int64_t arr_dl = 0, arr_ul = 0, srv_dl = 0, srv_ul = 0, dropped = 0;
    UeQueueState all_history, windowed;
    for (int l = 0; l < 1000; ++l) {
      const std::int64_t psi_dl = q_dl ? static_cast<std::int64_t>(r() % static_cast<std::uint64_t>(q_dl + 1)) : 0;
      const std::int64_t psi_ul = q_ul ? static_cast<std::int64_t>(r() % static_cast<std::uint64_t>(q_ul + 1)) : 0;
      const std::int64_t a_dl = sample_arrival(1.5, r);
      const std::int64_t a_ul = sample_arrival(2.0, r);
      q_dl = step_dl_queue(q_dl, psi_dl, a_dl);
      const std::int64_t start = q_ul;
      const UlStep st = step_ul_queue(q_ul, psi_ul, a_ul, q_max);
      q_ul = st.q_ul;
      push_window(all_history, {psi_ul, a_ul, start}, 1000);
      push_window(windowed, {psi_ul, a_ul, start}, 17);
      arr_dl += a_dl;
      arr_ul += a_ul;
      srv_dl += psi_dl;
      srv_ul += psi_ul;
      dropped += st.dropped;
      CHECK(q_ul >= 0);
      CHECK(q_ul <= q_max);
      const double d = dropping_ratio(windowed.window, q_ul);
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
    }
    CHECK(q_dl0 + arr_dl == srv_dl + q_dl);
    CHECK(q_ul0 + arr_ul == srv_ul + dropped + q_ul);
    if (arr_ul > 0) {
      CHECK(dropping_ratio_unclamped(all_history.window, q_ul) ==
            doctest::Approx(static_cast<double>(dropped) / static_cast<double>(arr_ul)));
    }
  }
}

TEST_CASE("Poisson arrivals: mean and variance at 150 KB") {
  auto r = testutil::rng(150);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::int64_t bits = sample_arrival(150.0, r);
    CHECK_MESSAGE(bits % kBitsPerKb == 0, "arrivals are whole KB");
    const double kb = static_cast<double>(bits) / kBitsPerKb;
    sum += kb;
    sum2 += kb * kb;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean - 150.0) <= 1.5);
  CHECK(std::abs(var - 150.0) <= 4.5);
}

TEST_CASE("tiny arrival rate is almost always zero") {
  auto r = testutil::rng(3);
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) zeros += sample_arrival(1e-9, r) == 0;
  CHECK(zeros == 10000);
  CHECK_THROWS(sample_arrival(0.0, r));
}

TEST_CASE("QoS boundary is inclusive") {
  SliceProfile p;
  p.d_max = 0.1;
  CHECK(qos_satisfied(0.1, p));
  CHECK(qos_satisfied(0.0, p));
  CHECK_FALSE(qos_satisfied(std::nextafter(0.1, 1.0), p));
}

TEST_CASE("KB conversion") {
  CHECK(kb_to_bits(1.0) == 8000);
  CHECK(kb_to_bits(2.5) == 20000);
}
