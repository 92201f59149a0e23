#include "wcons/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wcons::kernels {

double lp_center(std::span<const double> weights, std::span<const double> ys, double p) {
  assert(weights.size() == ys.size());
  if (p == 2.0) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j)
      if (weights[j] != 0.0) acc += weights[j] * ys[j];
    return acc;
  }
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    if (weights[j] == 0.0) continue;
    lo = first ? ys[j] : std::min(lo, ys[j]);
    hi = first ? ys[j] : std::max(hi, ys[j]);
    first = false;
  }
  // The derivative sum_j w_j sign(g - y_j)|g - y_j|^(p-1) is increasing in g
  // and changes sign on [lo, hi]; bisect until the bracket cannot shrink.
  auto slope = [&](double g) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (weights[j] == 0.0) continue;
      const double d = g - ys[j];
      acc += weights[j] * std::copysign(std::pow(std::abs(d), p - 1.0), d);
    }
    return acc;
  };
  for (int it = 0; it < 200 && lo < hi; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  return lo + 0.5 * (hi - lo);
}

namespace {

inline double abs_pow(double d, double p) {
  d = std::abs(d);
  return p == 2.0 ? d * d : std::pow(d, p);
}

inline double row_mean_pow(std::span<const double> a, std::span<const double> b, double p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += abs_pow(a[k] - b[k], p);
  return acc / static_cast<double>(a.size());
}

inline void mix_row(std::span<const double> wrow, StackedView in, std::size_t k_begin, std::size_t k_end,
                    std::span<double> out_row) {
  for (std::size_t k = k_begin; k < k_end; ++k) out_row[k] = 0.0;
  for (std::size_t j = 0; j < in.agents; ++j) {
    const double w = wrow[j];
    if (w == 0.0) continue;
    const auto src = in.row(j);
    for (std::size_t k = k_begin; k < k_end; ++k) out_row[k] += w * src[k];
  }
}

inline void mix_lp_level(std::span<const double> wrow, StackedView in, std::size_t k, double p,
                         std::vector<double>& column, double& out) {
  for (std::size_t j = 0; j < in.agents; ++j) column[j] = in.data[j * in.levels + k];
  out = lp_center(wrow, column, p);
}

inline bool better(double v, std::size_t i, std::size_t j, const PairMax& best) {
  if (v != best.value) return v > best.value;
  return i < best.i || (i == best.i && j < best.j);
}

}  // namespace

// ---------------------------------------------------------------------------

namespace serial {

void mix_linear(std::span<const double> weights, StackedView in, std::span<double> out) {
  const std::size_t n = in.agents, m = in.levels;
  for (std::size_t i = 0; i < n; ++i) mix_row(weights.subspan(i * n, n), in, 0, m, out.subspan(i * m, m));
}

void mix_lp(std::span<const double> weights, StackedView in, std::span<double> out, double p) {
  const std::size_t n = in.agents, m = in.levels;
  std::vector<double> column(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) mix_lp_level(weights.subspan(i * n, n), in, k, p, column, out[i * m + k]);
}

PairMax max_pairwise_pow(StackedView in, double p) {
  PairMax best;
  for (std::size_t i = 0; i < in.agents; ++i)
    for (std::size_t j = i + 1; j < in.agents; ++j) {
      const double v = row_mean_pow(in.row(i), in.row(j), p);
      if (v > best.value) best = {v, i, j};
    }
  return best;
}

Envelope envelope(StackedView in) {
  Envelope env{std::vector<double>(in.row(0).begin(), in.row(0).end()),
               std::vector<double>(in.row(0).begin(), in.row(0).end())};
  for (std::size_t i = 1; i < in.agents; ++i) {
    const auto r = in.row(i);
    for (std::size_t k = 0; k < in.levels; ++k) {
      env.lo[k] = std::min(env.lo[k], r[k]);
      env.hi[k] = std::max(env.hi[k], r[k]);
    }
  }
  return env;
}

}  // namespace serial

// ---------------------------------------------------------------------------

namespace omp {

namespace {
constexpr std::size_t kBlock = 512;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void mix_linear(std::span<const double> weights, StackedView in, std::span<double> out) {
  const std::size_t n = in.agents, m = in.levels;
  const std::size_t blocks = (m + kBlock - 1) / kBlock;
  const auto tasks = static_cast<long long>(n * blocks);
#pragma omp parallel for schedule(static)
  for (long long t = 0; t < tasks; ++t) {
    const std::size_t i = static_cast<std::size_t>(t) / blocks;
    const std::size_t b = static_cast<std::size_t>(t) % blocks;
    mix_row(weights.subspan(i * n, n), in, b * kBlock, std::min(m, (b + 1) * kBlock), out.subspan(i * m, m));
  }
}

void mix_lp(std::span<const double> weights, StackedView in, std::span<double> out, double p) {
  const std::size_t n = in.agents, m = in.levels;
  const auto tasks = static_cast<long long>(n * m);
#pragma omp parallel
  {
    std::vector<double> column(n);
#pragma omp for schedule(static)
    for (long long t = 0; t < tasks; ++t) {
      const std::size_t i = static_cast<std::size_t>(t) / m;
      const std::size_t k = static_cast<std::size_t>(t) % m;
      mix_lp_level(weights.subspan(i * n, n), in, k, p, column, out[i * m + k]);
    }
  }
}

PairMax max_pairwise_pow(StackedView in, double p) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < in.agents; ++i)
    for (std::size_t j = i + 1; j < in.agents; ++j) pairs.emplace_back(i, j);
  PairMax best;
  const auto count = static_cast<long long>(pairs.size());
#pragma omp parallel
  {
    PairMax local;
#pragma omp for schedule(static)
    for (long long t = 0; t < count; ++t) {
      const auto [i, j] = pairs[static_cast<std::size_t>(t)];
      const double v = row_mean_pow(in.row(i), in.row(j), p);
      if (better(v, i, j, local)) local = {v, i, j};
    }
#pragma omp critical
    if (better(local.value, local.i, local.j, best)) best = local;
  }
  return best;
}

Envelope envelope(StackedView in) {
  Envelope env{std::vector<double>(in.levels), std::vector<double>(in.levels)};
  const auto m = static_cast<long long>(in.levels);
#pragma omp parallel for schedule(static)
  for (long long kk = 0; kk < m; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    double lo = in.data[k], hi = in.data[k];
    for (std::size_t i = 1; i < in.agents; ++i) {
      const double v = in.data[i * in.levels + k];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    env.lo[k] = lo;
    env.hi[k] = hi;
  }
  return env;
}

}  // namespace omp

}  // namespace wcons::kernels
