#include "wcons/barycenter.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "wcons/kernels.hpp"

namespace wcons {

namespace {

constexpr double kWeightTol = 1e-12;
constexpr double kEigenFloor = 1e-14;
constexpr double kAtomMergeTol = 1e-9;

void check_weights(std::span<const double> w) {
  for (double x : w) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "weight");
    if (x < 0.0) throw Error(ErrorCode::NegativeWeight, "weight " + std::to_string(x));
  }
}

void check_count(std::size_t measures, const WeightVector& w) {
  if (measures != w.size()) throw Error(ErrorCode::LengthMismatch, "measure count differs from weight count");
  if (measures == 0) throw Error(ErrorCode::LengthMismatch, "no measures given");
}

void require_p2(WassersteinOrder ord, const char* what) {
  if (!ord.is_two()) throw Error(ErrorCode::UnsupportedOrder, std::string(what) + " is only defined for p = 2");
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd spectral_function(const Eigen::MatrixXd& m, double (*f)(double)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "symmetric eigendecomposition");
  Eigen::VectorXd ev = es.eigenvalues().unaryExpr([f](double x) { return f(std::max(x, kEigenFloor)); });
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double operator_norm_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------------------

WeightVector::WeightVector(std::vector<double> weights) : w_(std::move(weights)) {
  check_weights(w_);
  const double total = std::accumulate(w_.begin(), w_.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightTol)
    throw Error(ErrorCode::WeightSumMismatch, "weights sum to " + std::to_string(total));
}

WeightVector WeightVector::normalized(std::vector<double> raw) {
  check_weights(raw);
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::WeightSumMismatch, "weights have no mass");
  for (double& x : raw) x /= total;
  return WeightVector(std::move(raw), Trusted{});
}

WeightVector WeightVector::uniform(std::size_t n) {
  return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)), Trusted{});
}

GaussianND validate(GaussianND g) {
  const auto m = g.mean.size();
  if (g.covariance.rows() != m || g.covariance.cols() != m)
    throw Error(ErrorCode::DimensionMismatch, "covariance shape does not match mean");
  if (!g.mean.allFinite() || !g.covariance.allFinite()) throw Error(ErrorCode::NonFinite, "gaussian");
  if ((g.covariance - g.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorCode::NotSPD, "covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.covariance, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw Error(ErrorCode::NotSPD, "covariance is not positive definite");
  return g;
}

// ---------------------------------------------------------------------------

QuantileMeasure barycenter_quantile(std::span<const QuantileMeasure> ms, const WeightVector& w) {
  return barycenter_quantile(ms, w, WassersteinOrder{2.0});
}

QuantileMeasure barycenter_quantile(std::span<const QuantileMeasure> ms, const WeightVector& w,
                                    WassersteinOrder ord) {
  check_count(ms.size(), w);
  const GridSpec& g = ms.front().grid;
  for (const auto& m : ms)
    if (!(m.grid == g)) throw Error(ErrorCode::GridMismatch, "barycenter inputs on different grids");

  QuantileMeasure out{g, std::vector<double>(g.size())};
  std::vector<double> column(ms.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (std::size_t j = 0; j < ms.size(); ++j) column[j] = ms[j].values[k];
    out.values[k] = kernels::lp_center(w.values(), column, ord.value());
  }
  return out;
}

Gaussian1D barycenter_gaussian_1d(std::span<const Gaussian1D> gs, const WeightVector& w, WassersteinOrder ord) {
  require_p2(ord, "closed-form Gaussian barycenter");
  check_count(gs.size(), w);
  double mean = 0.0, sd = 0.0;
  for (std::size_t j = 0; j < gs.size(); ++j) {
    if (w[j] == 0.0) continue;
    mean += w[j] * gs[j].mean;
    sd += w[j] * gs[j].stddev();
  }
  return Gaussian1D{mean, sd * sd};
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m) {
  return spectral_function(m, [](double x) { return std::sqrt(x); });
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& m) {
  return spectral_function(m, [](double x) { return 1.0 / std::sqrt(x); });
}

namespace {

// sum_j w_j (Q^1/2 P_j Q^1/2)^1/2 given Q^1/2.
Eigen::MatrixXd bures_map(const Eigen::MatrixXd& q_half, std::span<const GaussianND> gs, const WeightVector& w) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(q_half.rows(), q_half.cols());
  for (std::size_t j = 0; j < gs.size(); ++j) {
    if (w[j] == 0.0) continue;
    acc += w[j] * spd_sqrt(q_half * gs[j].covariance * q_half);
  }
  return symmetrized(acc);
}

}  // namespace

double bures_residual(const Eigen::MatrixXd& q, std::span<const GaussianND> gs, const WeightVector& w) {
  return operator_norm_sym(q - bures_map(spd_sqrt(q), gs, w));
}

FixedPointReport barycenter_gaussian_nd(std::span<const GaussianND> gs, const WeightVector& w, double tol,
                                        int max_iter, const std::optional<Eigen::MatrixXd>& initial) {
  check_count(gs.size(), w);
  if (!(tol > 0.0)) throw Error(ErrorCode::OutOfDomain, "tolerance must be positive");
  const auto dim = gs.front().mean.size();
  for (const auto& g : gs) {
    if (g.mean.size() != dim) throw Error(ErrorCode::DimensionMismatch, "inputs differ in dimension");
    validate(g);
  }

  FixedPointReport report;
  report.solution.mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t j = 0; j < gs.size(); ++j) {
    report.solution.mean += w[j] * gs[j].mean;
    q += w[j] * gs[j].covariance;
  }
  if (initial) {
    if (initial->rows() != dim || initial->cols() != dim)
      throw Error(ErrorCode::DimensionMismatch, "initial covariance has wrong shape");
    q = validate(GaussianND{Eigen::VectorXd::Zero(dim), *initial}).covariance;
  }

  for (int it = 0;; ++it) {
    const Eigen::MatrixXd q_half = spd_sqrt(q);
    const Eigen::MatrixXd s = bures_map(q_half, gs, w);
    const double residual = operator_norm_sym(q - s);
    if (residual <= tol) {
      report.solution.covariance = q;
      report.iterations = it;
      report.residual = residual;
      return report;
    }
    if (it >= max_iter)
      throw Error(ErrorCode::NoConvergence, "no convergence after " + std::to_string(max_iter) +
                                                " iterations (residual " + std::to_string(residual) + ")");
    const Eigen::MatrixXd q_inv_half = spd_inv_sqrt(q);
    q = symmetrized(q_inv_half * s * s * q_inv_half);
  }
}

// ---------------------------------------------------------------------------

EmpiricalMeasure collapse_to_empirical(const QuantileMeasure& q) {
  EmpiricalMeasure out;
  const double cell = 1.0 / static_cast<double>(q.values.size());
  std::size_t start = 0;
  for (std::size_t k = 1; k <= q.values.size(); ++k) {
    if (k < q.values.size() && q.values[k] - q.values[start] <= kAtomMergeTol) continue;
    out.atoms.push_back(q.values[start]);
    out.weights.push_back(static_cast<double>(k - start) * cell);
    start = k;
  }
  const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
  for (double& x : out.weights) x /= total;
  return out;
}

EmpiricalMeasure barycenter_empirical_1d(std::span<const EmpiricalMeasure> ms, const WeightVector& w,
                                         const GridSpec& g, WassersteinOrder ord) {
  require_p2(ord, "empirical barycenter");
  check_count(ms.size(), w);
  std::vector<QuantileMeasure> qs;
  qs.reserve(ms.size());
  for (const auto& m : ms) qs.push_back(to_quantile(validate(m), g));
  return collapse_to_empirical(barycenter_quantile(qs, w));
}

double objective(const Measure& candidate, std::span<const Measure> ms, const WeightVector& w,
                 WassersteinOrder ord, const GridSpec& g) {
  check_count(ms.size(), w);
  double acc = 0.0;
  for (std::size_t j = 0; j < ms.size(); ++j) {
    if (w[j] == 0.0) continue;
    acc += w[j] * std::pow(wasserstein(candidate, ms[j], ord, g), ord.value());
  }
  return acc;
}

QuantileMeasure geodesic_interpolate(const QuantileMeasure& a, const QuantileMeasure& b, double s) {
  if (!(a.grid == b.grid)) throw Error(ErrorCode::GridMismatch, "interpolation endpoints on different grids");
  if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorCode::OutOfDomain, "interpolation parameter must lie in [0,1]");
  if (s == 0.0) return a;
  if (s == 1.0) return b;
  QuantileMeasure out{a.grid, std::vector<double>(a.values.size())};
  for (std::size_t k = 0; k < a.values.size(); ++k) out.values[k] = (1.0 - s) * a.values[k] + s * b.values[k];
  return out;
}

}  // namespace wcons
