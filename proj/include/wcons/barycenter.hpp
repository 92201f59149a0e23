#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wcons/measure.hpp"

namespace wcons {

/// Non-negative weights over a collection of measures, summing to one.
class WeightVector {
 public:
  /// Throws NegativeWeight / NonFinite / WeightSumMismatch (tolerance 1e-12).
  explicit WeightVector(std::vector<double> weights);
  /// Divides by the total instead of rejecting drift; total must be positive.
  static WeightVector normalized(std::vector<double> raw);
  static WeightVector uniform(std::size_t n);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const noexcept { return w_; }

 private:
  struct Trusted {};
  WeightVector(std::vector<double> weights, Trusted) : w_(std::move(weights)) {}
  std::vector<double> w_;
};

struct GaussianND {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Throws DimensionMismatch, NonFinite or NotSPD.
GaussianND validate(GaussianND g);

struct FixedPointReport {
  GaussianND solution;
  int iterations = 0;
  double residual = 0.0;
};

QuantileMeasure barycenter_quantile(std::span<const QuantileMeasure> ms, const WeightVector& w);

/// Minimizer of sum_j w_j l_p(., mu_j)^p on the grid, for any admissible p.
/// Identical to barycenter_quantile at p = 2.
QuantileMeasure barycenter_quantile(std::span<const QuantileMeasure> ms, const WeightVector& w,
                                    WassersteinOrder ord);

Gaussian1D barycenter_gaussian_1d(std::span<const Gaussian1D> gs, const WeightVector& w,
                                  WassersteinOrder ord = WassersteinOrder{2.0});

/// Covariance solves Q = sum_j w_j (Q^1/2 P_j Q^1/2)^1/2 by Picard iteration
/// started from `initial` (default sum_j w_j P_j).
FixedPointReport barycenter_gaussian_nd(std::span<const GaussianND> gs, const WeightVector& w, double tol,
                                        int max_iter, const std::optional<Eigen::MatrixXd>& initial = std::nullopt);

/// Operator-norm residual of the barycenter fixed-point equation at Q.
double bures_residual(const Eigen::MatrixXd& q, std::span<const GaussianND> gs, const WeightVector& w);

/// Symmetric PSD square root via eigendecomposition; eigenvalues clamped below at 1e-14.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m);
Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& m);

EmpiricalMeasure barycenter_empirical_1d(std::span<const EmpiricalMeasure> ms, const WeightVector& w,
                                         const GridSpec& g, WassersteinOrder ord = WassersteinOrder{2.0});

/// Collapses runs of grid values closer than 1e-9 into atoms of mass run/M.
EmpiricalMeasure collapse_to_empirical(const QuantileMeasure& q);

double objective(const Measure& candidate, std::span<const Measure> ms, const WeightVector& w,
                 WassersteinOrder ord, const GridSpec& g);

/// McCann interpolant (1 - s) a + s b in quantile coordinates.
QuantileMeasure geodesic_interpolate(const QuantileMeasure& a, const QuantileMeasure& b, double s);

}  // namespace wcons
