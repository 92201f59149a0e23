#pragma once

// Data-parallel inner loops of the consensus step and its diagnostics.
//
// Agent states are stacked row-major: row i holds agent i's quantile values
// on the shared grid. Each kernel exists twice: `serial` is the reference
// implementation kept for testing, `omp` is the OpenMP version used by the
// engine. Both evaluate every output element with the same operation order,
// so their results are bitwise identical.

#include <cstddef>
#include <span>
#include <vector>

namespace wcons::kernels {

struct StackedView {
  std::span<const double> data;
  std::size_t agents;
  std::size_t levels;

  std::span<const double> row(std::size_t i) const { return data.subspan(i * levels, levels); }
};

struct PairMax {
  double value = 0.0;  // mean of |a - b|^p over grid levels
  std::size_t i = 0;
  std::size_t j = 0;
};

struct Envelope {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Pointwise minimizer of sum_j w_j |g - y_j|^p over g, for p >= 2.
/// Reduces to the weighted mean at p = 2.
double lp_center(std::span<const double> weights, std::span<const double> ys, double p);

namespace serial {

/// out(i, k) = sum_j W(i, j) * in(j, k); zero weights are skipped.
void mix_linear(std::span<const double> weights, StackedView in, std::span<double> out);
/// out(i, k) = lp_center(row i of W, column k of in).
void mix_lp(std::span<const double> weights, StackedView in, std::span<double> out, double p);
PairMax max_pairwise_pow(StackedView in, double p);
Envelope envelope(StackedView in);

}  // namespace serial

namespace omp {

void mix_linear(std::span<const double> weights, StackedView in, std::span<double> out);
void mix_lp(std::span<const double> weights, StackedView in, std::span<double> out, double p);
PairMax max_pairwise_pow(StackedView in, double p);
Envelope envelope(StackedView in);

int max_threads();

}  // namespace omp

}  // namespace wcons::kernels
