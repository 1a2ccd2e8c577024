#pragma once

#include <cstdint>
#include <random>

#include "degentaxis/grid.hpp"

namespace testing {

inline degentaxis::Grid grid1(int n, double L = 1.0) {
  const int c[] = {n};
  const double e[] = {L};
  return degentaxis::make_grid(1, c, e);
}

inline degentaxis::Grid grid2(int nx, int ny, double Lx = 1.0, double Ly = 1.0) {
  const int c[] = {nx, ny};
  const double e[] = {Lx, Ly};
  return degentaxis::make_grid(2, c, e);
}

/// Uniform entries in [lo, hi).
inline degentaxis::Field random_field(const degentaxis::Grid& g, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  degentaxis::Field f(g);
  for (auto& x : f.values) x = d(rng);
  return f;
}

}  // namespace testing
