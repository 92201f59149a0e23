#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "wcons/error.hpp"

namespace wcons {

/// Discretization of the quantile domain (0,1): M cells of equal width on
/// [clip, 1 - clip], sampled at cell midpoints. Every cell carries mass 1/M.
class GridSpec {
 public:
  static constexpr double kDefaultClip = 1e-6;

  GridSpec(std::size_t size, double clip = kDefaultClip);

  std::size_t size() const noexcept { return size_; }
  double clip() const noexcept { return clip_; }
  double cell_width() const noexcept { return (1.0 - 2.0 * clip_) / static_cast<double>(size_); }
  double point(std::size_t k) const noexcept {
    return clip_ + (static_cast<double>(k) + 0.5) * cell_width();
  }
  std::vector<double> points() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::size_t size_;
  double clip_;
};

struct EmpiricalMeasure {
  std::vector<double> atoms;
  std::vector<double> weights;
};

struct Gaussian1D {
  double mean = 0.0;
  double variance = 1.0;

  double stddev() const;
};

struct QuantileMeasure {
  GridSpec grid;
  std::vector<double> values;
};

using Measure = std::variant<EmpiricalMeasure, Gaussian1D, QuantileMeasure>;

/// Wasserstein exponent p, restricted to 2 <= p < inf.
class WassersteinOrder {
 public:
  explicit WassersteinOrder(double p = 2.0);
  double value() const noexcept { return p_; }
  bool is_two() const noexcept { return p_ == 2.0; }

 private:
  double p_;
};

/// Sparse coupling: source atom index -> (target atom index -> mass).
using TransportPlan = std::map<std::size_t, std::map<std::size_t, double>>;

struct OracleResult {
  double cost;
  TransportPlan plan;
};

Measure validate(Measure m);
EmpiricalMeasure validate(EmpiricalMeasure m);
Gaussian1D validate(Gaussian1D m);
QuantileMeasure validate(QuantileMeasure m);

EmpiricalMeasure dirac(double location);

double normal_cdf(double x);
/// Standard normal inverse CDF, absolute accuracy well below 1e-10 on (0,1).
double normal_quantile(double u);

double cdf(const Measure& m, double x);
/// Generalized inverse inf{y : F(y) >= u}; throws OutOfDomain outside (0,1).
double quantile(const Measure& m, double u);
QuantileMeasure to_quantile(const Measure& m, const GridSpec& g);

/// p-th power of the L_p distance between two quantile measures on a shared grid.
double quantile_distance_pow(const QuantileMeasure& a, const QuantileMeasure& b, WassersteinOrder ord);
double quantile_distance(const QuantileMeasure& a, const QuantileMeasure& b, WassersteinOrder ord);

/// Exact p-th power cost between two empirical measures, by merging the
/// breakpoints of their piecewise-constant quantile functions.
double empirical_distance_pow(const EmpiricalMeasure& a, const EmpiricalMeasure& b, WassersteinOrder ord);

double gaussian_w2(const Gaussian1D& a, const Gaussian1D& b);

/// l_p between arbitrary measures. Closed forms are used for Gaussian pairs
/// (p = 2) and empirical pairs; everything else goes through the grid.
double wasserstein(const Measure& a, const Measure& b, WassersteinOrder ord, const GridSpec& g);

/// Monotone north-west-corner coupling on sorted atoms; exact on the line.
OracleResult discrete_w_oracle(const EmpiricalMeasure& a, const EmpiricalMeasure& b, WassersteinOrder ord);

inline constexpr std::size_t kOracleMaxAtoms = 64;

}  // namespace wcons
