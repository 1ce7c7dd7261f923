#include "dtfdd/action_space.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <unordered_set>

namespace dtfdd {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error(what);
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error(what);
  return r;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) is always divisible by i at this point.
    r = checked_mul(r, n - k + i, "binomial overflow") / i;
  }
  return r;
}

// Ways to give UEs j..J (1-based) disjoint non-empty subchannel sets drawn
// from `remaining` subchannels, leaving at least one subchannel for each
// UE still to be served.
std::uint64_t nested_assignments(std::size_t j, std::size_t J, std::size_t remaining) {
  if (j > J) return 1;
  const std::size_t still_needed = J - j;
  if (remaining < still_needed + 1) return 0;
  std::uint64_t total = 0;
  for (std::size_t eta = 1; eta <= remaining - still_needed; ++eta) {
    const std::uint64_t here = binomial(remaining, eta);
    const std::uint64_t rest = nested_assignments(j + 1, J, remaining - eta);
    total = checked_add(total, checked_mul(here, rest, "assignment count overflow"),
                        "assignment count overflow");
  }
  return total;
}

}  // namespace

std::optional<ActionViolation> validate(const FrameAction& action, std::size_t n_subchannels,
                                        std::size_t n_ues, std::size_t n_subframes) {
  using Kind = ActionViolation::Kind;
  if (action.f < 0 || static_cast<std::size_t>(action.f) > n_subframes) {
    return ActionViolation{Kind::SubframeRange, 0,
                           "DL subframe count " + std::to_string(action.f) + " outside [0, " +
                               std::to_string(n_subframes) + "]"};
  }
  if (action.dl.size() != n_subchannels || action.ul.size() != n_subchannels) {
    return ActionViolation{Kind::ShapeMismatch, 0,
                           "assignment vectors must have one entry per subchannel (" +
                               std::to_string(n_subchannels) + ")"};
  }
  for (std::size_t n = 0; n < n_subchannels; ++n) {
    for (int ue : {action.dl[n], action.ul[n]}) {
      if (ue != kNoUe && (ue < 0 || static_cast<std::size_t>(ue) >= n_ues)) {
        return ActionViolation{Kind::UeMembership, n,
                               "subchannel " + std::to_string(n) + " assigned to UE " +
                                   std::to_string(ue) + " not served by this BS"};
      }
    }
  }
  return std::nullopt;
}

std::uint64_t count_subchannel_assignments(std::size_t n_subchannels, std::size_t n_ues) {
  std::uint64_t total = 0;
  for (std::size_t J = 0; J <= n_ues; ++J) {
    const std::uint64_t pick = binomial(n_ues, J);
    if (pick == 0) continue;
    total = checked_add(total,
                        checked_mul(pick, nested_assignments(1, J, n_subchannels),
                                    "assignment count overflow"),
                        "assignment count overflow");
  }
  return total;
}

std::uint64_t count_subchannel_assignments_closed_form(std::size_t n_subchannels,
                                                       std::size_t n_ues) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < n_subchannels; ++i) {
    r = checked_mul(r, n_ues + 1, "assignment count overflow");
  }
  return r;
}

std::uint64_t action_space_size(std::size_t n_subchannels, std::size_t n_ues,
                                std::size_t n_subframes) {
  const std::uint64_t num = count_subchannel_assignments_closed_form(n_subchannels, n_ues);
  const char* msg = "action space size exceeds 64 bits";
  return checked_mul(checked_mul(num, num, msg), n_subframes + 1, msg);
}

Embedding clamp_unit(const Embedding& p) {
  Embedding out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = std::clamp(p[i], 0.0, 1.0);
  return out;
}

ActionSpace::ActionSpace(std::size_t n_subchannels, std::size_t n_ues, std::size_t n_subframes)
    : n_subchannels_(n_subchannels), n_ues_(n_ues), n_subframes_(n_subframes) {
  const std::uint64_t num = count_subchannel_assignments_closed_form(n_subchannels, n_ues);
  axes_ = {n_subframes + 1, num, num};
  size_ = action_space_size(n_subchannels, n_ues, n_subframes);
}

ActionSpace ActionSpace::with_fixed_assignment(std::size_t n_subchannels, std::size_t n_ues,
                                               std::size_t n_subframes, std::vector<int> dl,
                                               std::vector<int> ul) {
  FrameAction probe{0, dl, ul};
  if (auto v = dtfdd::validate(probe, n_subchannels, n_ues, n_subframes)) {
    throw std::invalid_argument("fixed assignment invalid: " + v->message);
  }
  ActionSpace s(0, 0, n_subframes);
  s.n_subchannels_ = n_subchannels;
  s.n_ues_ = n_ues;
  s.axes_ = {n_subframes + 1, 1, 1};
  s.size_ = n_subframes + 1;
  s.fixed_ = Fixed{std::move(dl), std::move(ul)};
  return s;
}

std::uint64_t ActionSpace::numeral(const std::vector<int>& assign) const {
  std::uint64_t value = 0;
  for (std::size_t n = n_subchannels_; n-- > 0;) {
    value = value * (n_ues_ + 1) + static_cast<std::uint64_t>(assign[n] + 1);
  }
  return value;
}

std::vector<int> ActionSpace::assignment(std::uint64_t value) const {
  std::vector<int> out(n_subchannels_, kNoUe);
  for (std::size_t n = 0; n < n_subchannels_; ++n) {
    out[n] = static_cast<int>(value % (n_ues_ + 1)) - 1;
    value /= (n_ues_ + 1);
  }
  return out;
}

std::optional<ActionViolation> ActionSpace::validate(const FrameAction& action) const {
  if (auto v = dtfdd::validate(action, n_subchannels_, n_ues_, n_subframes_)) return v;
  if (fixed_ && (action.dl != fixed_->dl || action.ul != fixed_->ul)) {
    return ActionViolation{ActionViolation::Kind::UeMembership, 0,
                           "subchannel assignment differs from the frozen assignment"};
  }
  return std::nullopt;
}

ActionIndex ActionSpace::encode(const FrameAction& action) const {
  if (auto v = validate(action)) throw std::invalid_argument(v->message);
  const std::uint64_t f = static_cast<std::uint64_t>(action.f);
  if (fixed_) return {f};
  return {(f * axes_.dl + numeral(action.dl)) * axes_.ul + numeral(action.ul)};
}

FrameAction ActionSpace::decode(ActionIndex idx) const {
  if (idx.value >= size_) {
    throw std::out_of_range("action index " + std::to_string(idx.value) + " >= " +
                            std::to_string(size_));
  }
  if (fixed_) return {static_cast<int>(idx.value), fixed_->dl, fixed_->ul};
  const std::uint64_t ul = idx.value % axes_.ul;
  const std::uint64_t rest = idx.value / axes_.ul;
  const std::uint64_t dl = rest % axes_.dl;
  const std::uint64_t f = rest / axes_.dl;
  return {static_cast<int>(f), assignment(dl), assignment(ul)};
}

double ActionSpace::grid_value(std::uint64_t i, std::uint64_t count) {
  if (count <= 1) return 0.0;
  return static_cast<double>(i) / static_cast<double>(count - 1);
}

Embedding ActionSpace::embed(ActionIndex idx) const {
  if (idx.value >= size_) throw std::out_of_range("action index out of range");
  const std::uint64_t ul = idx.value % axes_.ul;
  const std::uint64_t rest = idx.value / axes_.ul;
  const std::uint64_t dl = rest % axes_.dl;
  const std::uint64_t f = rest / axes_.dl;
  return {grid_value(f, axes_.f), grid_value(dl, axes_.dl), grid_value(ul, axes_.ul)};
}

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  if (a.sq_distance != b.sq_distance) return a.sq_distance < b.sq_distance;
  return a.index < b.index;
}

double sq(double v) { return v * v; }

}  // namespace

std::vector<Neighbor> ActionSpace::knn_flat_scan(const Embedding& proto, std::size_t k) const {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  const Embedding q = clamp_unit(proto);
  std::vector<Neighbor> all;
  all.reserve(size_);
  for (std::uint64_t i = 0; i < size_; ++i) {
    const Embedding e = embed(ActionIndex{i});
    all.push_back({ActionIndex{i}, sq(e[0] - q[0]) + sq(e[1] - q[1]) + sq(e[2] - q[2])});
  }
  const std::size_t keep = static_cast<std::size_t>(std::min<std::uint64_t>(k, size_));
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    closer);
  all.resize(keep);
  return all;
}

std::vector<Neighbor> ActionSpace::knn(const Embedding& proto, std::size_t k) const {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  const Embedding q = clamp_unit(proto);
  const std::array<std::uint64_t, 3> counts{axes_.f, axes_.dl, axes_.ul};

  // Per axis: grid positions ordered by distance to the query coordinate,
  // with their squared 1-D distances (non-decreasing).
  struct AxisOrder {
    std::vector<std::uint64_t> pos;
    std::vector<double> d2;
  };
  const std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(k, size_));
  std::array<AxisOrder, 3> order;
  for (std::size_t a = 0; a < 3; ++a) {
    const std::uint64_t count = counts[a];
    // Split the axis at the query: positions <= lo lie at or below it,
    // positions >= hi above it, so both walks have growing distance.
    const auto n = static_cast<std::int64_t>(count);
    std::int64_t lo = static_cast<std::int64_t>(q[a] * static_cast<double>(n - 1));
    lo = std::clamp<std::int64_t>(lo, 0, n - 1);
    while (lo + 1 < n && grid_value(static_cast<std::uint64_t>(lo + 1), count) <= q[a]) ++lo;
    while (lo >= 0 && grid_value(static_cast<std::uint64_t>(lo), count) > q[a]) --lo;
    std::int64_t hi = lo + 1;
    while (lo >= 0 || hi < static_cast<std::int64_t>(count)) {
      const bool take_hi =
          hi < static_cast<std::int64_t>(count) &&
          (lo < 0 || sq(grid_value(static_cast<std::uint64_t>(hi), count) - q[a]) <=
                         sq(grid_value(static_cast<std::uint64_t>(lo), count) - q[a]));
      const std::int64_t p = take_hi ? hi++ : lo--;
      order[a].pos.push_back(static_cast<std::uint64_t>(p));
      order[a].d2.push_back(sq(grid_value(static_cast<std::uint64_t>(p), count) - q[a]));
    }
  }

  struct Item {
    double d;
    std::array<std::uint32_t, 3> r;  // ranks into the per-axis orders
  };
  auto cmp = [](const Item& a, const Item& b) { return a.d > b.d; };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
  std::unordered_set<std::uint64_t> seen;
  auto key = [&](const std::array<std::uint32_t, 3>& r) {
    return (static_cast<std::uint64_t>(r[0]) * counts[1] + r[1]) * counts[2] + r[2];
  };
  auto push = [&](const std::array<std::uint32_t, 3>& r) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (r[a] >= order[a].pos.size()) return;
    }
    if (!seen.insert(key(r)).second) return;
    heap.push({order[0].d2[r[0]] + order[1].d2[r[1]] + order[2].d2[r[2]], r});
  };

  push({0, 0, 0});
  std::vector<Neighbor> found;
  while (!heap.empty()) {
    const Item top = heap.top();
    // Everything tied with the k-th distance is collected so that the index
    // tie-break below sees all candidates.
    if (found.size() >= want && top.d > found[want - 1].sq_distance) break;
    heap.pop();
    const std::uint64_t idx =
        (order[0].pos[top.r[0]] * counts[1] + order[1].pos[top.r[1]]) * counts[2] +
        order[2].pos[top.r[2]];
    found.push_back({ActionIndex{idx}, top.d});
    for (std::size_t a = 0; a < 3; ++a) {
      auto next = top.r;
      ++next[a];
      push(next);
    }
  }
  std::sort(found.begin(), found.end(), closer);
  found.resize(want);
  return found;
}

}  // namespace dtfdd
