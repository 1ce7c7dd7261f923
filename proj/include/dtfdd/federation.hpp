#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dtfdd/channel.hpp"
#include "dtfdd/mlp.hpp"

namespace dtfdd {

/// Undirected simple graph over BS ids 0..B-1.
class BsGraph {
 public:
  explicit BsGraph(std::size_t num_nodes);

  void add_edge(std::size_t a, std::size_t b);
  bool has_edge(std::size_t a, std::size_t b) const;
  std::size_t num_nodes() const { return adj_.size(); }
  std::size_t degree(std::size_t b) const { return adj_.at(b).size(); }
  const std::vector<std::size_t>& neighbors(std::size_t b) const { return adj_.at(b); }
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  bool connected() const;

 private:
  std::vector<std::vector<std::size_t>> adj_;  // sorted neighbour lists
};

/// Edge (b, b') iff the BSs are within `radius` metres of each other.
BsGraph build_graph(const std::vector<Position3D>& positions, double radius);

/// Symmetric doubly stochastic weights: 1 / (1 + max(deg b, deg b')) on
/// edges, the diagonal completing each row to 1.
Eigen::MatrixXd metropolis_weights(const BsGraph& graph);

struct ParamMessage {
  std::size_t sender = 0;
  std::size_t frame = 0;
  ParamVector params;
};

/// In-process per-frame mailbox: every agent publishes an immutable snapshot
/// of its locally updated critic, then each one aggregates its neighbours'.
class Mailbox {
 public:
  explicit Mailbox(std::size_t num_agents) : slots_(num_agents) {}

  void publish(ParamMessage msg);
  const ParamMessage& received_from(std::size_t sender) const;
  void clear();

 private:
  std::vector<std::optional<ParamMessage>> slots_;
};

/// Exchange period: nullopt means never (independent learners).
using ExchangePeriod = std::optional<std::size_t>;

bool is_exchange_frame(std::size_t frame, const ExchangePeriod& period);

/// Returns the per-BS critic vectors for the next frame. At exchange frames
/// BS b receives sum_b' z(b, b') * local[b']; otherwise its own vector.
std::vector<ParamVector> exchange_and_aggregate(const std::vector<ParamVector>& local,
                                                const Eigen::MatrixXd& weights,
                                                std::size_t frame, const ExchangePeriod& period);

}  // namespace dtfdd
