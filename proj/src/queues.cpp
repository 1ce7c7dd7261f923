#include "dtfdd/queues.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace dtfdd {

std::int64_t sample_arrival(double lambda_kb, Rng& rng) {
  if (!(lambda_kb > 0.0)) throw std::domain_error("arrival mean must be positive");
  std::poisson_distribution<std::int64_t> poisson(lambda_kb);
  return poisson(rng) * kBitsPerKb;
}

std::int64_t step_dl_queue(std::int64_t q_dl, std::int64_t psi_dl, std::int64_t arrival) {
  if (psi_dl < 0 || psi_dl > q_dl) throw std::logic_error("DL service exceeds queue");
  return q_dl - psi_dl + arrival;
}

UlStep step_ul_queue(std::int64_t q_ul, std::int64_t psi_ul, std::int64_t arrival,
                     std::int64_t q_max) {
  if (psi_ul < 0 || psi_ul > q_ul) throw std::logic_error("UL service exceeds queue");
  const std::int64_t offered = q_ul - psi_ul + arrival;
  return {std::min(q_max, offered), std::max<std::int64_t>(0, offered - q_max)};
}

void push_window(UeQueueState& state, const UlWindowRecord& record, std::size_t capacity) {
  state.window.push_back(record);
  while (state.window.size() > capacity) state.window.pop_front();
}

double dropping_ratio_unclamped(const std::deque<UlWindowRecord>& window,
                                std::int64_t q_ul_next) {
  if (window.empty()) return 0.0;
  std::int64_t served = 0;
  std::int64_t arrived = 0;
  for (const auto& r : window) {
    served += r.served;
    arrived += r.arrived;
  }
  if (arrived == 0) return 0.0;
  // Integer numerator keeps exact cases (e.g. 2/3) correctly rounded.
  const std::int64_t lost = arrived - (served + q_ul_next - window.front().queue_at_start);
  return static_cast<double>(lost) / static_cast<double>(arrived);
}

double dropping_ratio(const std::deque<UlWindowRecord>& window, std::int64_t q_ul_next) {
  return std::clamp(dropping_ratio_unclamped(window, q_ul_next), 0.0, 1.0);
}

bool qos_satisfied(double d, const SliceProfile& profile) { return d <= profile.d_max; }

}  // namespace dtfdd
