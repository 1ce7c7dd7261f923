#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dtfdd {

/// Random stream used throughout the simulator.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream seed from the master seed and a fixed label
/// such as "channel" or "noise/3". The mapping is stable across runs and builds.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

Rng make_stream(std::uint64_t master, std::string_view label);

}  // namespace dtfdd
