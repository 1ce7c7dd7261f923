#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dtfdd {

inline constexpr int kNoUe = -1;

/// One BS's decision for a frame. Subchannel n is given to at most one UE
/// per direction by construction: dl[n] / ul[n] hold a local UE slot in
/// [0, U) or kNoUe.
struct FrameAction {
  int f = 0;  // number of leading DL subframes
  std::vector<int> dl;
  std::vector<int> ul;

  bool operator==(const FrameAction&) const = default;
};

struct ActionIndex {
  std::uint64_t value = 0;
  auto operator<=>(const ActionIndex&) const = default;
};

struct ActionViolation {
  enum class Kind { SubframeRange, ShapeMismatch, UeMembership };
  Kind kind;
  std::size_t subchannel = 0;
  std::string message;
};

std::optional<ActionViolation> validate(const FrameAction& action, std::size_t n_subchannels,
                                        std::size_t n_ues, std::size_t n_subframes);

/// Number of per-direction subchannel assignments, evaluated as the nested
/// sum over J served UEs and their subchannel counts eta_1..eta_J.
std::uint64_t count_subchannel_assignments(std::size_t n_subchannels, std::size_t n_ues);

/// (U + 1)^N; throws std::overflow_error past 64 bits.
std::uint64_t count_subchannel_assignments_closed_form(std::size_t n_subchannels,
                                                       std::size_t n_ues);

/// Num_UL * Num_DL * (F + 1); throws std::overflow_error past 64 bits.
std::uint64_t action_space_size(std::size_t n_subchannels, std::size_t n_ues,
                                std::size_t n_subframes);

using Embedding = std::array<double, 3>;

struct Neighbor {
  ActionIndex index;
  double sq_distance = 0.0;
};

/// Indexed per-BS action space with a normalised 3-D embedding
/// (f / F, dl numeral / (Num - 1), ul numeral / (Num - 1)).
///
/// Indices are mixed radix: f is the most significant digit, then the DL
/// assignment as a base-(U+1) numeral over subchannels (subchannel 0 least
/// significant, digit 0 = unassigned, digit d = UE d-1), then the UL numeral.
///
/// A space built with `with_fixed_assignment` keeps the subchannel
/// assignment frozen and only varies f, so it has F + 1 actions whose
/// embeddings lie on the first axis.
class ActionSpace {
 public:
  ActionSpace(std::size_t n_subchannels, std::size_t n_ues, std::size_t n_subframes);

  static ActionSpace with_fixed_assignment(std::size_t n_subchannels, std::size_t n_ues,
                                           std::size_t n_subframes, std::vector<int> dl,
                                           std::vector<int> ul);

  std::size_t num_subchannels() const { return n_subchannels_; }
  std::size_t num_ues() const { return n_ues_; }
  std::size_t num_subframes() const { return n_subframes_; }
  bool fixed_assignment() const { return fixed_.has_value(); }
  std::uint64_t size() const { return size_; }

  ActionIndex encode(const FrameAction& action) const;
  FrameAction decode(ActionIndex idx) const;

  Embedding embed(const FrameAction& action) const { return embed(encode(action)); }
  Embedding embed(ActionIndex idx) const;

  std::optional<ActionViolation> validate(const FrameAction& action) const;

  /// Exact k nearest actions to `proto` (clamped to the unit cube) by
  /// Euclidean distance, ordered by (distance, index). Uses best-first
  /// search over the separable grid instead of scanning the whole space.
  std::vector<Neighbor> knn(const Embedding& proto, std::size_t k) const;

  /// Reference implementation scanning every action.
  std::vector<Neighbor> knn_flat_scan(const Embedding& proto, std::size_t k) const;

 private:
  struct Axes {
    std::uint64_t f = 1, dl = 1, ul = 1;
  };

  std::uint64_t numeral(const std::vector<int>& assign) const;
  std::vector<int> assignment(std::uint64_t numeral) const;
  static double grid_value(std::uint64_t i, std::uint64_t count);

  std::size_t n_subchannels_;
  std::size_t n_ues_;
  std::size_t n_subframes_;
  Axes axes_;
  std::uint64_t size_ = 0;
  struct Fixed {
    std::vector<int> dl, ul;
  };
  std::optional<Fixed> fixed_;
};

Embedding clamp_unit(const Embedding& p);

}  // namespace dtfdd
