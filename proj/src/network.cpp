#include "wcons/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace wcons {

NetworkSnapshot::NetworkSnapshot(std::size_t n, std::span<const Edge> edges) : n_(n) {
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw Error(ErrorCode::OutOfDomain, "edge index out of range");
    if (a == b) continue;
    edges_.emplace(std::min(a, b), std::max(a, b));
  }
}

NetworkSnapshot NetworkSnapshot::complete(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return NetworkSnapshot(n, e);
}

NetworkSnapshot NetworkSnapshot::path(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return NetworkSnapshot(n, e);
}

NetworkSnapshot NetworkSnapshot::cycle(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  if (n > 2) e.emplace_back(n - 1, 0);
  return NetworkSnapshot(n, e);
}

NetworkSnapshot NetworkSnapshot::star(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 1; i < n; ++i) e.emplace_back(0, i);
  return NetworkSnapshot(n, e);
}

bool NetworkSnapshot::has_edge(std::size_t i, std::size_t j) const {
  return edges_.count({std::min(i, j), std::max(i, j)}) > 0;
}

std::vector<std::size_t> NetworkSnapshot::degrees() const {
  std::vector<std::size_t> d(n_, 0);
  for (auto [a, b] : edges_) {
    ++d[a];
    ++d[b];
  }
  return d;
}

std::vector<std::vector<std::size_t>> NetworkSnapshot::neighbors() const {
  std::vector<std::vector<std::size_t>> nb(n_);
  for (auto [a, b] : edges_) {
    nb[a].push_back(b);
    nb[b].push_back(a);
  }
  for (auto& v : nb) std::sort(v.begin(), v.end());
  return nb;
}

// ---------------------------------------------------------------------------

WeightMatrix::WeightMatrix(std::size_t n, std::vector<double> row_major) : n_(n), w_(std::move(row_major)) {
  if (w_.size() != n * n) throw Error(ErrorCode::SizeMismatch, "weight matrix is not n x n");
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = w_[i * n + j];
      if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "weight matrix entry");
      if (x < 0.0) throw Error(ErrorCode::NegativeWeight, "weight matrix entry");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw Error(ErrorCode::WeightSumMismatch, "row " + std::to_string(i) + " sums to " + std::to_string(total));
    if (!(w_[i * n + i] > 0.0)) throw Error(ErrorCode::SparsityMismatch, "diagonal must be positive");
  }
}

Eigen::MatrixXd WeightMatrix::to_eigen() const {
  Eigen::MatrixXd m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
  return m;
}

bool WeightMatrix::is_symmetric(double tol) const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

bool WeightMatrix::is_doubly_stochastic(double tol) const {
  for (std::size_t j = 0; j < n_; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n_; ++i) col += (*this)(i, j);
    if (std::abs(col - 1.0) > tol) return false;
  }
  return true;
}

bool WeightMatrix::is_consistent_with(const NetworkSnapshot& g) const {
  if (g.size() != n_) return false;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j && (*this)(i, j) > 0.0 && !g.has_edge(i, j)) return false;
  return true;
}

// ---------------------------------------------------------------------------

WeightMatrix metropolis_weights(const NetworkSnapshot& g) {
  const std::size_t n = g.size();
  const auto deg = g.degrees();
  std::vector<double> w(n * n, 0.0);
  for (auto [a, b] : g.edges()) {
    const double x = 1.0 / (1.0 + static_cast<double>(std::max(deg[a], deg[b])));
    w[a * n + b] = x;
    w[b * n + a] = x;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) off += w[i * n + j];
    w[i * n + i] = 1.0 - off;
  }
  return WeightMatrix(n, std::move(w));
}

WeightMatrix lazy_uniform_weights(const NetworkSnapshot& g, double self_weight) {
  if (!(self_weight > 0.0 && self_weight < 1.0)) throw Error(ErrorCode::OutOfDomain, "self weight must lie in (0,1)");
  const std::size_t n = g.size();
  const auto nb = g.neighbors();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (nb[i].empty()) {
      w[i * n + i] = 1.0;
      continue;
    }
    w[i * n + i] = self_weight;
    const double share = (1.0 - self_weight) / static_cast<double>(nb[i].size());
    for (std::size_t j : nb[i]) w[i * n + j] = share;
  }
  return WeightMatrix(n, std::move(w));
}

WeightMatrix restrict_to(const WeightMatrix& w, const NetworkSnapshot& g) {
  const std::size_t n = w.size();
  if (g.size() != n) throw Error(ErrorCode::SizeMismatch, "snapshot and weight matrix differ in size");
  std::vector<double> out(w.data().begin(), w.data().end());
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double& x = out[i * n + j];
      if (i != j && !g.has_edge(i, j)) x = 0.0;
      total += x;
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= total;
  }
  return WeightMatrix(n, std::move(out));
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> components(const NetworkSnapshot& g) {
  const auto nb = g.neighbors();
  std::vector<int> seen(g.size(), 0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp, stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (std::size_t u : nb[v])
        if (!seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

bool is_connected(const NetworkSnapshot& g) { return g.size() <= 1 || components(g).size() == 1; }

NetworkSnapshot union_graph(std::span<const NetworkSnapshot> snaps) {
  if (snaps.empty()) return {};
  const std::size_t n = snaps.front().size();
  std::vector<Edge> all;
  for (const auto& s : snaps) {
    if (s.size() != n) throw Error(ErrorCode::SizeMismatch, "snapshots differ in agent count");
    all.insert(all.end(), s.edges().begin(), s.edges().end());
  }
  return NetworkSnapshot(n, all);
}

SpectralReport spectral_report(const WeightMatrix& w) {
  SpectralReport r;
  const Eigen::MatrixXd m = w.to_eigen();
  if (w.is_symmetric()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "symmetric eigensolver");
    for (double x : es.eigenvalues()) r.moduli.push_back(std::abs(x));
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "general eigensolver");
    for (const auto& z : es.eigenvalues()) r.moduli.push_back(std::abs(z));
  }
  std::sort(r.moduli.begin(), r.moduli.end(), std::greater<>());
  r.second_largest = r.moduli.size() > 1 ? r.moduli[1] : 0.0;
  r.is_doubly_stochastic = w.is_doubly_stochastic();
  return r;
}

// ---------------------------------------------------------------------------

TopologySchedule::TopologySchedule(Kind kind) : kind_(std::move(kind)) {
  if (const auto* s = std::get_if<StaticSchedule>(&kind_)) {
    n_ = s->graph.size();
  } else if (const auto* p = std::get_if<PeriodicSchedule>(&kind_)) {
    if (p->snapshots.empty()) throw Error(ErrorCode::SizeMismatch, "periodic schedule has no snapshots");
    n_ = p->snapshots.front().size();
    for (const auto& s : p->snapshots)
      if (s.size() != n_) throw Error(ErrorCode::SizeMismatch, "periodic snapshots differ in agent count");
  } else {
    const auto& r = std::get<RandomSchedule>(kind_);
    if (!(r.probability >= 0.0 && r.probability <= 1.0))
      throw Error(ErrorCode::OutOfDomain, "edge probability must lie in [0,1]");
    n_ = r.base.size();
  }
}

NetworkSnapshot TopologySchedule::at(std::size_t t) const {
  if (const auto* s = std::get_if<StaticSchedule>(&kind_)) return s->graph;
  if (const auto* p = std::get_if<PeriodicSchedule>(&kind_)) return p->snapshots[t % p->snapshots.size()];
  const auto& r = std::get<RandomSchedule>(kind_);
  const auto t64 = static_cast<std::uint64_t>(t);
  std::seed_seq seq{static_cast<std::uint32_t>(r.seed), static_cast<std::uint32_t>(r.seed >> 32),
                    static_cast<std::uint32_t>(t64), static_cast<std::uint32_t>(t64 >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<Edge> kept;
  for (const auto& e : r.base.edges()) {
    // 53 random bits -> [0,1); avoids implementation-defined distributions.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < r.probability) kept.push_back(e);
  }
  return NetworkSnapshot(n_, kept);
}

bool jointly_connected(const TopologySchedule& sched, std::size_t window, std::size_t horizon) {
  if (window == 0 || horizon < window) throw Error(ErrorCode::OutOfDomain, "need 1 <= window <= horizon");
  std::vector<NetworkSnapshot> snaps;
  snaps.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) snaps.push_back(sched.at(t));
  for (std::size_t t = 0; t + window <= horizon; ++t) {
    const auto u = union_graph(std::span<const NetworkSnapshot>(snaps).subspan(t, window));
    if (!is_connected(u)) return false;
  }
  return true;
}

}  // namespace wcons
