#include "wcons/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace wcons {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::WeightSumMismatch: return "WeightSumMismatch";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::NonMonotoneQuantiles: return "NonMonotoneQuantiles";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::SparsityMismatch: return "SparsityMismatch";
    case ErrorCode::RepresentationMismatch: return "RepresentationMismatch";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

GridSpec::GridSpec(std::size_t size, double clip) : size_(size), clip_(clip) {
  if (size < 2) throw Error(ErrorCode::OutOfDomain, "grid size must be >= 2");
  if (!(clip > 0.0 && clip <= 1e-3)) throw Error(ErrorCode::OutOfDomain, "grid clip must lie in (0, 1e-3]");
}

std::vector<double> GridSpec::points() const {
  std::vector<double> u(size_);
  for (std::size_t k = 0; k < size_; ++k) u[k] = point(k);
  return u;
}

double Gaussian1D::stddev() const { return std::sqrt(variance); }

WassersteinOrder::WassersteinOrder(double p) : p_(p) {
  if (!(p >= 2.0 && std::isfinite(p))) throw Error(ErrorCode::UnsupportedOrder, "p must satisfy 2 <= p < inf");
}

// ---------------------------------------------------------------------------
// Validation

namespace {

constexpr double kWeightSumTol = 1e-9;
constexpr double kMonotoneSlack = 1e-12;

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

EmpiricalMeasure validate(EmpiricalMeasure m) {
  if (m.atoms.size() != m.weights.size())
    throw Error(ErrorCode::LengthMismatch, "atoms and weights differ in length");
  if (!all_finite(m.atoms) || !all_finite(m.weights)) throw Error(ErrorCode::NonFinite, "empirical measure");
  for (double w : m.weights)
    if (w < 0.0) throw Error(ErrorCode::NegativeWeight, "weight " + std::to_string(w));
  const double total = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightSumTol)
    throw Error(ErrorCode::WeightSumMismatch, "weights sum to " + std::to_string(total));
  if (total != 1.0)
    for (double& w : m.weights) w /= total;

  std::vector<std::size_t> order(m.atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.atoms[a] < m.atoms[b]; });
  EmpiricalMeasure sorted;
  sorted.atoms.reserve(order.size());
  sorted.weights.reserve(order.size());
  for (std::size_t i : order) {
    sorted.atoms.push_back(m.atoms[i]);
    sorted.weights.push_back(m.weights[i]);
  }
  return sorted;
}

Gaussian1D validate(Gaussian1D m) {
  if (!std::isfinite(m.mean) || !std::isfinite(m.variance)) throw Error(ErrorCode::NonFinite, "gaussian");
  if (!(m.variance > 0.0)) throw Error(ErrorCode::NonPositiveVariance, "variance " + std::to_string(m.variance));
  return m;
}

QuantileMeasure validate(QuantileMeasure m) {
  if (m.values.size() != m.grid.size())
    throw Error(ErrorCode::LengthMismatch, "quantile values do not match grid size");
  if (!all_finite(m.values)) throw Error(ErrorCode::NonFinite, "quantile values");
  for (std::size_t k = 1; k < m.values.size(); ++k)
    if (m.values[k] < m.values[k - 1] - kMonotoneSlack)
      throw Error(ErrorCode::NonMonotoneQuantiles, "decrease at grid index " + std::to_string(k));
  return m;
}

Measure validate(Measure m) {
  return std::visit([](auto&& v) -> Measure { return validate(std::move(v)); }, std::move(m));
}

EmpiricalMeasure dirac(double location) { return EmpiricalMeasure{{location}, {1.0}}; }

// ---------------------------------------------------------------------------
// Standard normal

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation, relative error ~1.2e-9 before refinement.
double acklam_lower(double u) {
  constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                          -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                          3.754408661907416e+00};
  const double q = std::sqrt(-2.0 * std::log(u));
  return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double acklam_central(double u) {
  constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                          1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                          6.680131188771972e+01, -1.328068155288572e+01};
  const double q = u - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Valid for u <= 0.5, where the lower-tail cdf is evaluated without cancellation.
double normal_quantile_lower(double u) {
  constexpr double kLow = 0.02425;
  double x = u < kLow ? acklam_lower(u) : acklam_central(u);
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  x -= (normal_cdf(x) - u) / density;
  return x;
}

}  // namespace

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::OutOfDomain, "normal quantile requires u in (0,1)");
  if (u == 0.5) return 0.0;
  return u < 0.5 ? normal_quantile_lower(u) : -normal_quantile_lower(1.0 - u);
}

// ---------------------------------------------------------------------------
// cdf / quantile

namespace {

struct CdfVisitor {
  double x;
  double operator()(const EmpiricalMeasure& m) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.atoms.size() && m.atoms[i] <= x; ++i) acc += m.weights[i];
    return std::min(acc, 1.0);
  }
  double operator()(const Gaussian1D& m) const { return normal_cdf((x - m.mean) / m.stddev()); }
  double operator()(const QuantileMeasure& m) const {
    const auto below = std::upper_bound(m.values.begin(), m.values.end(), x) - m.values.begin();
    return static_cast<double>(below) / static_cast<double>(m.values.size());
  }
};

struct QuantileVisitor {
  double u;
  double operator()(const EmpiricalMeasure& m) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      acc += m.weights[i];
      if (acc >= u) return m.atoms[i];
    }
    return m.atoms.back();
  }
  double operator()(const Gaussian1D& m) const { return m.mean + m.stddev() * normal_quantile(u); }
  double operator()(const QuantileMeasure& m) const {
    const GridSpec& g = m.grid;
    const double pos = std::floor((u - g.clip()) / g.cell_width());
    const double last = static_cast<double>(g.size() - 1);
    return m.values[static_cast<std::size_t>(std::clamp(pos, 0.0, last))];
  }
};

}  // namespace

double cdf(const Measure& m, double x) { return std::visit(CdfVisitor{x}, m); }

double quantile(const Measure& m, double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::OutOfDomain, "quantile level must lie in (0,1)");
  return std::visit(QuantileVisitor{u}, m);
}

QuantileMeasure to_quantile(const Measure& m, const GridSpec& g) {
  if (const auto* q = std::get_if<QuantileMeasure>(&m); q && q->grid == g) return *q;
  QuantileMeasure out{g, std::vector<double>(g.size())};
  if (const auto* raw = std::get_if<EmpiricalMeasure>(&m)) {
    const EmpiricalMeasure sorted = validate(*raw);
    const EmpiricalMeasure* e = &sorted;
    // Single sweep over the sorted atoms; grid levels are increasing.
    std::size_t i = 0;
    double acc = e->weights.empty() ? 0.0 : e->weights[0];
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double u = g.point(k);
      while (acc < u && i + 1 < e->atoms.size()) acc += e->weights[++i];
      out.values[k] = e->atoms[i];
    }
    return out;
  }
  for (std::size_t k = 0; k < g.size(); ++k) out.values[k] = quantile(m, g.point(k));
  return out;
}

// ---------------------------------------------------------------------------
// Distances

namespace {

double root(double x, WassersteinOrder ord) {
  return ord.is_two() ? std::sqrt(x) : std::pow(x, 1.0 / ord.value());
}

double abs_pow(double d, double p) {
  d = std::abs(d);
  return p == 2.0 ? d * d : std::pow(d, p);
}

}  // namespace

double quantile_distance_pow(const QuantileMeasure& a, const QuantileMeasure& b, WassersteinOrder ord) {
  if (!(a.grid == b.grid)) throw Error(ErrorCode::GridMismatch, "quantile measures on different grids");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) acc += abs_pow(a.values[k] - b.values[k], ord.value());
  return acc / static_cast<double>(a.values.size());
}

double quantile_distance(const QuantileMeasure& a, const QuantileMeasure& b, WassersteinOrder ord) {
  return root(quantile_distance_pow(a, b, ord), ord);
}

double empirical_distance_pow(const EmpiricalMeasure& raw_a, const EmpiricalMeasure& raw_b, WassersteinOrder ord) {
  const EmpiricalMeasure a = validate(raw_a), b = validate(raw_b);
  std::vector<double> breaks;
  breaks.reserve(a.weights.size() + b.weights.size() + 1);
  breaks.push_back(0.0);
  for (const auto* m : {&a, &b}) {
    double acc = 0.0;
    for (double w : m->weights) breaks.push_back(std::min(acc += w, 1.0));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.back() = 1.0;

  const Measure ma = a, mb = b;
  double total = 0.0;
  for (std::size_t k = 1; k < breaks.size(); ++k) {
    const double len = breaks[k] - breaks[k - 1];
    if (len <= 0.0) continue;
    // Adjacent breakpoints one ulp below 1 can round their midpoint up to 1.
    const double mid = std::min(0.5 * (breaks[k] + breaks[k - 1]), std::nextafter(1.0, 0.0));
    total += len * abs_pow(quantile(ma, mid) - quantile(mb, mid), ord.value());
  }
  return total;
}

double gaussian_w2(const Gaussian1D& a, const Gaussian1D& b) {
  return std::hypot(a.mean - b.mean, a.stddev() - b.stddev());
}

double wasserstein(const Measure& a, const Measure& b, WassersteinOrder ord, const GridSpec& g) {
  if (ord.is_two()) {
    const auto* ga = std::get_if<Gaussian1D>(&a);
    const auto* gb = std::get_if<Gaussian1D>(&b);
    if (ga && gb) return gaussian_w2(*ga, *gb);
  }
  const auto* ea = std::get_if<EmpiricalMeasure>(&a);
  const auto* eb = std::get_if<EmpiricalMeasure>(&b);
  if (ea && eb) return root(empirical_distance_pow(*ea, *eb, ord), ord);
  for (const Measure* m : {&a, &b})
    if (const auto* q = std::get_if<QuantileMeasure>(m); q && !(q->grid == g))
      throw Error(ErrorCode::GridMismatch, "quantile measure is not on the requested grid");
  return quantile_distance(to_quantile(a, g), to_quantile(b, g), ord);
}

OracleResult discrete_w_oracle(const EmpiricalMeasure& a, const EmpiricalMeasure& b, WassersteinOrder ord) {
  if (a.atoms.size() > kOracleMaxAtoms || b.atoms.size() > kOracleMaxAtoms)
    throw Error(ErrorCode::TooLarge, "oracle supports at most 64 atoms per measure");
  const EmpiricalMeasure sa = validate(a), sb = validate(b);

  // Sorting permutes indices; map back so the plan refers to the caller's atoms.
  auto original_index = [](const EmpiricalMeasure& orig, const EmpiricalMeasure& sorted) {
    std::vector<std::size_t> idx(sorted.atoms.size());
    std::vector<bool> used(orig.atoms.size(), false);
    for (std::size_t s = 0; s < sorted.atoms.size(); ++s)
      for (std::size_t o = 0; o < orig.atoms.size(); ++o)
        if (!used[o] && orig.atoms[o] == sorted.atoms[s]) {
          idx[s] = o;
          used[o] = true;
          break;
        }
    return idx;
  };
  const auto ia = original_index(a, sa), ib = original_index(b, sb);

  constexpr double kMassEps = 1e-14;
  OracleResult out{0.0, {}};
  std::size_t i = 0, j = 0;
  double ra = sa.weights[0], rb = sb.weights[0];
  while (i < sa.atoms.size() && j < sb.atoms.size()) {
    const double mass = std::min(ra, rb);
    if (mass > 0.0) {
      out.plan[ia[i]][ib[j]] += mass;
      out.cost += mass * abs_pow(sa.atoms[i] - sb.atoms[j], ord.value());
    }
    ra -= mass;
    rb -= mass;
    if (ra <= kMassEps && ++i < sa.atoms.size()) ra = sa.weights[i];
    if (rb <= kMassEps && ++j < sb.atoms.size()) rb = sb.weights[j];
  }
  out.cost = root(out.cost, ord);
  return out;
}

}  // namespace wcons
