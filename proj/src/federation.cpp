#include "dtfdd/federation.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dtfdd {

BsGraph::BsGraph(std::size_t num_nodes) : adj_(num_nodes) {}

void BsGraph::add_edge(std::size_t a, std::size_t b) {
  if (a == b) throw std::invalid_argument("self-loops are not allowed");
  if (a >= adj_.size() || b >= adj_.size()) throw std::out_of_range("graph node out of range");
  if (has_edge(a, b)) return;
  adj_[a].insert(std::lower_bound(adj_[a].begin(), adj_[a].end(), b), b);
  adj_[b].insert(std::lower_bound(adj_[b].begin(), adj_[b].end(), a), a);
}

bool BsGraph::has_edge(std::size_t a, std::size_t b) const {
  const auto& n = adj_.at(a);
  return std::binary_search(n.begin(), n.end(), b);
}

std::vector<std::pair<std::size_t, std::size_t>> BsGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < adj_.size(); ++a) {
    for (std::size_t b : adj_[a]) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

bool BsGraph::connected() const {
  if (adj_.empty()) return true;
  std::vector<char> seen(adj_.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : adj_[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == adj_.size();
}

BsGraph build_graph(const std::vector<Position3D>& positions, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("connection radius must be positive");
  BsGraph g(positions.size());
  for (std::size_t a = 0; a < positions.size(); ++a) {
    for (std::size_t b = a + 1; b < positions.size(); ++b) {
      if (distance3d(positions[a], positions[b]) <= radius) g.add_edge(a, b);
    }
  }
  return g;
}

Eigen::MatrixXd metropolis_weights(const BsGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : graph.edges()) {
    const double w =
        1.0 / (1.0 + static_cast<double>(std::max(graph.degree(a), graph.degree(b))));
    z(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = w;
    z(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = w;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j : graph.neighbors(static_cast<std::size_t>(i))) {
      off += z(i, static_cast<Eigen::Index>(j));
    }
    z(i, i) = 1.0 - off;
  }
  return z;
}

void Mailbox::publish(ParamMessage msg) {
  const std::size_t s = msg.sender;
  slots_.at(s) = std::move(msg);
}

const ParamMessage& Mailbox::received_from(std::size_t sender) const {
  const auto& slot = slots_.at(sender);
  if (!slot) throw std::logic_error("no message from agent " + std::to_string(sender));
  return *slot;
}

void Mailbox::clear() {
  for (auto& s : slots_) s.reset();
}

bool is_exchange_frame(std::size_t frame, const ExchangePeriod& period) {
  return period.has_value() && *period > 0 && frame % *period == 0;
}

std::vector<ParamVector> exchange_and_aggregate(const std::vector<ParamVector>& local,
                                                const Eigen::MatrixXd& weights,
                                                std::size_t frame, const ExchangePeriod& period) {
  if (local.empty()) return {};
  const std::size_t len = local.front().values.size();
  for (const auto& v : local) {
    if (v.values.size() != len) throw std::invalid_argument("parameter vector length mismatch");
  }
  if (static_cast<std::size_t>(weights.rows()) != local.size() ||
      static_cast<std::size_t>(weights.cols()) != local.size()) {
    throw std::invalid_argument("weight matrix does not match the number of agents");
  }
  if (!is_exchange_frame(frame, period)) return local;

  std::vector<ParamVector> out(local.size());
  for (std::size_t b = 0; b < local.size(); ++b) {
    const auto bi = static_cast<Eigen::Index>(b);
    if (weights(bi, bi) == 1.0) {  // isolated node keeps its parameters bit for bit
      out[b] = local[b];
      continue;
    }
    out[b].shapes = local[b].shapes;
    out[b].values.assign(len, 0.0);
    for (std::size_t bp = 0; bp < local.size(); ++bp) {
      const double z = weights(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(bp));
      if (z == 0.0) continue;
      for (std::size_t i = 0; i < len; ++i) out[b].values[i] += z * local[bp].values[i];
    }
  }
  return out;
}

}  // namespace dtfdd
