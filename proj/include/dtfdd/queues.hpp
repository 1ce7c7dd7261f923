#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>

#include "dtfdd/rng.hpp"

namespace dtfdd {

inline constexpr std::int64_t kBitsPerKb = 8000;  // 1 KB = 1000 bytes

inline std::int64_t kb_to_bits(double kb) { return std::llround(kb * kBitsPerKb); }

struct SliceProfile {
  double lambda_ul_kb = 0.0;  // mean UL arrival per frame
  double lambda_dl_kb = 0.0;  // mean DL arrival per frame
  double d_max = 0.0;         // tolerable UL dropping ratio
  double q_max_ul_kb = 0.0;   // UL buffer size
  double penalty_bits = 0.0;  // reward penalty per violating UE
  double dl_norm_kb = 0.0;    // DL queue normaliser for observations

  std::int64_t q_max_ul_bits() const { return kb_to_bits(q_max_ul_kb); }
};

/// Per-frame UL record kept for the dropping-ratio window.
struct UlWindowRecord {
  std::int64_t served = 0;         // psi_ul(l)
  std::int64_t arrived = 0;        // D_ul(l)
  std::int64_t queue_at_start = 0; // Q_ul(l)
};

struct UeQueueState {
  std::int64_t q_dl = 0;
  std::int64_t q_ul = 0;
  std::deque<UlWindowRecord> window;  // oldest first, at most `capacity` records
};

/// Poisson(lambda) KB converted to bits.
std::int64_t sample_arrival(double lambda_kb, Rng& rng);

std::int64_t step_dl_queue(std::int64_t q_dl, std::int64_t psi_dl, std::int64_t arrival);

struct UlStep {
  std::int64_t q_ul = 0;
  std::int64_t dropped = 0;
};

UlStep step_ul_queue(std::int64_t q_ul, std::int64_t psi_ul, std::int64_t arrival,
                     std::int64_t q_max);

/// Appends the frame's record and trims the window to the last `capacity` frames.
void push_window(UeQueueState& state, const UlWindowRecord& record, std::size_t capacity);

/// Dropping ratio over the window records, given the queue length at the
/// start of the next frame. Zero arrivals give 0; the result is clamped to
/// [0, 1].
double dropping_ratio(const std::deque<UlWindowRecord>& window, std::int64_t q_ul_next);

/// Same, without clamping; used to check the window against conservation.
double dropping_ratio_unclamped(const std::deque<UlWindowRecord>& window,
                                std::int64_t q_ul_next);

bool qos_satisfied(double d, const SliceProfile& profile);

}  // namespace dtfdd
