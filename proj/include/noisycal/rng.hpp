#pragma once

#include <cstdint>
#include <random>

namespace noisycal {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream for (seed, stream). Used to give every Monte-Carlo chunk,
// data row or repetition its own generator so results do not depend on how
// work is scheduled across threads.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

Engine make_engine(std::uint64_t seed, std::uint64_t stream);

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// One uniform on [0, 1) for (seed, stream) without building an engine.
inline double hashed_uniform(std::uint64_t seed, std::uint64_t stream) {
  return static_cast<double>(derive_seed(seed, stream) >> 11) * 0x1.0p-53;
}

}  // namespace noisycal
