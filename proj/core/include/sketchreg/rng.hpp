#pragma once

#include <cstdint>
#include <random>

namespace sketchreg {

// splitmix64 step; used both as a seed mixer and to derive independent
// per-task streams from a master seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t seed_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

inline std::uint64_t seed_combine(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return seed_combine(seed_combine(a, b), c);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(mix64(seed));
}

}  // namespace sketchreg
