#pragma once

#include <cstdint>
#include <random>

namespace prescriptor {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Seed for the stream identified by (master, a, b). Streams are keyed by
// replication and purpose so results do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

// Well-known purpose tags for derive_seed.
namespace stream {
inline constexpr std::uint64_t train_x = 1;
inline constexpr std::uint64_t train_y = 2;
inline constexpr std::uint64_t query_x = 3;
inline constexpr std::uint64_t query_draws = 4;
inline constexpr std::uint64_t validation_x = 5;
inline constexpr std::uint64_t validation_y = 6;
inline constexpr std::uint64_t pollution = 7;
inline constexpr std::uint64_t censoring = 8;
inline constexpr std::uint64_t model = 9;
inline constexpr std::uint64_t query_pollution = 10;
inline constexpr std::uint64_t pilot = 11;
}  // namespace stream

}  // namespace prescriptor
