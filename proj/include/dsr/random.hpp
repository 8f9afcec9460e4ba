#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dsr {

/// Purposes of independent random streams derived from one master seed.
enum class Stream : std::uint32_t { Assessment = 0, Oracle = 1, Partition = 2, Holdout = 3 };

/// Deterministic generator for (master seed, stream, run, block).
///
/// Each tuple gets its own engine, so results never depend on which worker
/// thread executes a task or in what order tasks finish.
inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t run = 0,
                                   std::uint64_t block = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), static_cast<std::uint32_t>(stream), lo(run), hi(run),
                    lo(block), hi(block)};
  return std::mt19937_64(seq);
}

}  // namespace dsr
