#include <doctest.h>

#include <cmath>

#include "dtfdd/federation.hpp"
#include "support.hpp"

using namespace dtfdd;

namespace {

BsGraph random_graph(std::size_t n, double p, Rng& r) {
  BsGraph g(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (testutil::uniform(r) < p) g.add_edge(a, b);
  return g;
}

ParamVector vec(std::vector<double> v) { return {std::move(v), {}}; }

}  // namespace

TEST_CASE("graphs from positions") {
  const std::vector<Position3D> line{{0, 0, 10}, {100, 0, 10}, {200, 0, 10}};
  CHECK(build_graph(line, 1e-9).edges().empty());
  CHECK(build_graph(line, 1000).edges().size() == 3);
  const BsGraph path = build_graph(line, 150);
  CHECK(path.edges() == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});
  CHECK(path.connected());
  CHECK(build_graph(line, 100).has_edge(0, 1));  // boundary is inclusive
  CHECK_FALSE(build_graph(line, 99).connected());
  CHECK_THROWS(build_graph(line, 0.0));
}

TEST_CASE("Metropolis weights on a path") {
  BsGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  const Eigen::MatrixXd z = metropolis_weights(g);
  CHECK(z(0, 1) == doctest::Approx(1.0 / 3));
  CHECK(z(1, 2) == doctest::Approx(1.0 / 3));
  CHECK(z(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(z(1, 1) == doctest::Approx(1.0 / 3));
  CHECK(z(2, 2) == doctest::Approx(2.0 / 3));
  CHECK(z(0, 2) == 0.0);
}

TEST_CASE("isolated node has a unit row") {
  BsGraph g(3);
  g.add_edge(0, 1);
  const Eigen::MatrixXd z = metropolis_weights(g);
  CHECK(z.row(2) == Eigen::RowVector3d(0, 0, 1));
}

TEST_CASE("random graphs give symmetric doubly stochastic weights") {
  auto r = testutil::rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + r() % 10;
    const BsGraph g = random_graph(n, testutil::uniform(r), r);
    const Eigen::MatrixXd z = metropolis_weights(g);
    CHECK((z - z.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((z.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(z.minCoeff() >= 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b) CHECK((z(a, b) > 0.0) == g.has_edge(a, b));
  }
}

TEST_CASE("two nodes average exactly") {
  BsGraph g(2);
  g.add_edge(0, 1);
  const auto out = exchange_and_aggregate({vec({1.0, 4.0}), vec({3.0, -2.0})}, metropolis_weights(g), 0, 1);
  CHECK(out[0].values == std::vector<double>{2.0, 1.0});
  CHECK(out[1].values == std::vector<double>{2.0, 1.0});
}

TEST_CASE("exchange period") {
  CHECK(is_exchange_frame(0, 1));
  CHECK(is_exchange_frame(6, 3));
  CHECK_FALSE(is_exchange_frame(7, 3));
  CHECK_FALSE(is_exchange_frame(0, std::nullopt));
  BsGraph g(2);
  g.add_edge(0, 1);
  const std::vector<ParamVector> local{vec({1.0}), vec({3.0})};
  const auto off = exchange_and_aggregate(local, metropolis_weights(g), 7, 3);
  CHECK(off[0].values == local[0].values);
  CHECK(off[1].values == local[1].values);
  const auto never = exchange_and_aggregate(local, metropolis_weights(g), 0, std::nullopt);
  CHECK(never[1].values == local[1].values);
  CHECK_THROWS(exchange_and_aggregate({vec({1.0}), vec({1.0, 2.0})}, metropolis_weights(g), 0, 1));
}

TEST_CASE("isolated node keeps its parameters bit for bit") {
  BsGraph g(3);
  g.add_edge(0, 1);
  const std::vector<ParamVector> local{vec({0.1, 0.2}), vec({0.3, 0.7}), vec({0.1 + 0.2, 1.0 / 3.0})};
  const auto out = exchange_and_aggregate(local, metropolis_weights(g), 0, 1);
  CHECK(out[2].values == local[2].values);
}

TEST_CASE("gossip preserves the mean and reaches consensus") {
  auto r = testutil::rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + r() % 7;
    BsGraph g(n);
    for (std::size_t b = 1; b < n; ++b) g.add_edge(r() % b, b);  // random tree
    for (std::size_t extra = 0; extra < n; ++extra) {
      const std::size_t a = r() % n, b = r() % n;
      if (a != b && !g.has_edge(a, b)) g.add_edge(a, b);
    }
    REQUIRE(g.connected());
    const Eigen::MatrixXd z = metropolis_weights(g);
    std::vector<ParamVector> v;
    for (std::size_t b = 0; b < n; ++b) v.push_back(vec({testutil::uniform(r, -5, 5), testutil::uniform(r, -5, 5)}));
    auto mean = [&](std::size_t i) {
      double s = 0.0;
      for (const auto& p : v) s += p.values[i];
      return s / static_cast<double>(n);
    };
    const double m0 = mean(0), m1 = mean(1);
    for (int round = 0; round < 2000; ++round) {
      v = exchange_and_aggregate(v, z, static_cast<std::size_t>(round), 1);
      CHECK(mean(0) == doctest::Approx(m0).epsilon(1e-12));
    }
    for (const auto& p : v) {
      CHECK(std::abs(p.values[0] - m0) < 1e-6);
      CHECK(std::abs(p.values[1] - m1) < 1e-6);
    }
  }
}

TEST_CASE("mailbox") {
  Mailbox box(2);
  box.publish({1, 5, vec({2.5})});
  CHECK(box.received_from(1).frame == 5);
  CHECK(box.received_from(1).params.values == std::vector<double>{2.5});
  CHECK_THROWS(box.received_from(0));
  box.clear();
  CHECK_THROWS(box.received_from(1));
}

TEST_CASE("graph edge validation") {
  BsGraph g(2);
  CHECK_THROWS(g.add_edge(0, 0));
  CHECK_THROWS(g.add_edge(0, 2));
  CHECK(BsGraph(1).connected());
}
