#pragma once

// Test-only generators and oracles. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "wcons/measure.hpp"

namespace wcons::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi_inclusive) {
  return lo + static_cast<std::size_t>(rng() % (hi_inclusive - lo + 1));
}

/// Atoms in [lo, hi]; weights are multiples of 1/denominator (denominator a
/// power of two), so every cumulative sum is exact in binary floating point.
inline EmpiricalMeasure random_dyadic_empirical(Rng& rng, std::size_t max_atoms, std::size_t denominator,
                                                double lo = -10.0, double hi = 10.0) {
  const std::size_t atoms = uniform_index(rng, 1, std::min(max_atoms, denominator));
  std::vector<std::size_t> units(atoms, 1);
  for (std::size_t extra = denominator - atoms; extra > 0; --extra) ++units[uniform_index(rng, 0, atoms - 1)];
  EmpiricalMeasure m;
  for (std::size_t i = 0; i < atoms; ++i) {
    m.atoms.push_back(uniform(rng, lo, hi));
    m.weights.push_back(static_cast<double>(units[i]) / static_cast<double>(denominator));
  }
  return m;
}

inline Gaussian1D random_gaussian(Rng& rng, double mean_lo = -10.0, double mean_hi = 10.0, double var_lo = 0.1,
                                  double var_hi = 25.0) {
  return Gaussian1D{uniform(rng, mean_lo, mean_hi), uniform(rng, var_lo, var_hi)};
}

inline Measure random_measure(Rng& rng) {
  if (rng() % 2 == 0) return random_dyadic_empirical(rng, 16, 64);
  return random_gaussian(rng, -5.0, 5.0, 0.1, 4.0);
}

/// Exact transport cost by enumerating every bijection between equal-mass
/// units. Inputs must have weights that are multiples of 1/units.
inline double brute_force_cost_pow(const EmpiricalMeasure& a, const EmpiricalMeasure& b, std::size_t units,
                                   double p) {
  auto expand = [units](const EmpiricalMeasure& m) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      const auto count = static_cast<std::size_t>(std::llround(m.weights[i] * static_cast<double>(units)));
      xs.insert(xs.end(), count, m.atoms[i]);
    }
    return xs;
  };
  const auto xa = expand(a);
  auto xb = expand(b);
  std::sort(xb.begin(), xb.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t k = 0; k < xa.size(); ++k) c += std::pow(std::abs(xa[k] - xb[k]), p);
    best = std::min(best, c / static_cast<double>(units));
  } while (std::next_permutation(xb.begin(), xb.end()));
  return best;
}

}  // namespace wcons::test
