#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "wcons/error.hpp"

namespace wcons {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected graph on n agents. Edges are stored as (min, max); self-loops
/// are implicit and never stored.
class NetworkSnapshot {
 public:
  NetworkSnapshot() = default;
  NetworkSnapshot(std::size_t n, std::span<const Edge> edges);
  NetworkSnapshot(std::size_t n, std::initializer_list<Edge> edges)
      : NetworkSnapshot(n, std::span<const Edge>(edges.begin(), edges.size())) {}

  static NetworkSnapshot complete(std::size_t n);
  static NetworkSnapshot path(std::size_t n);
  static NetworkSnapshot cycle(std::size_t n);
  static NetworkSnapshot star(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  const std::set<Edge>& edges() const noexcept { return edges_; }
  bool has_edge(std::size_t i, std::size_t j) const;
  std::vector<std::size_t> degrees() const;
  std::vector<std::vector<std::size_t>> neighbors() const;

  friend bool operator==(const NetworkSnapshot&, const NetworkSnapshot&) = default;

 private:
  std::size_t n_ = 0;
  std::set<Edge> edges_;
};

/// Row-stochastic n x n weights with positive diagonal, stored row-major.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  /// Validates non-negativity, row sums (1e-12) and positive diagonal.
  WeightMatrix(std::size_t n, std::vector<double> row_major);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return std::span<const double>(w_).subspan(i * n_, n_); }
  std::span<const double> data() const noexcept { return w_; }
  Eigen::MatrixXd to_eigen() const;

  bool is_symmetric(double tol = 1e-12) const;
  bool is_doubly_stochastic(double tol = 1e-10) const;
  /// w_ij > 0 only on edges and the diagonal.
  bool is_consistent_with(const NetworkSnapshot& g) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> w_;
};

struct SpectralReport {
  std::vector<double> moduli;  // descending
  double second_largest = 0.0;
  bool is_doubly_stochastic = false;
};

WeightMatrix metropolis_weights(const NetworkSnapshot& g);
WeightMatrix lazy_uniform_weights(const NetworkSnapshot& g, double self_weight);
/// Zeroes entries off the snapshot's edges and rescales each row to sum 1.
WeightMatrix restrict_to(const WeightMatrix& w, const NetworkSnapshot& g);

bool is_connected(const NetworkSnapshot& g);
NetworkSnapshot union_graph(std::span<const NetworkSnapshot> snaps);
/// Connected components, each sorted ascending, ordered by smallest member.
std::vector<std::vector<std::size_t>> components(const NetworkSnapshot& g);

SpectralReport spectral_report(const WeightMatrix& w);

struct StaticSchedule {
  NetworkSnapshot graph;
};

struct PeriodicSchedule {
  std::vector<NetworkSnapshot> snapshots;
};

/// Each base edge is present at step t independently with `probability`,
/// drawn from a generator seeded by (seed, t).
struct RandomSchedule {
  NetworkSnapshot base;
  double probability = 1.0;
  std::uint64_t seed = 0;
};

class TopologySchedule {
 public:
  using Kind = std::variant<StaticSchedule, PeriodicSchedule, RandomSchedule>;

  explicit TopologySchedule(Kind kind);

  std::size_t size() const noexcept { return n_; }
  const Kind& kind() const noexcept { return kind_; }
  bool is_static() const noexcept { return std::holds_alternative<StaticSchedule>(kind_); }
  /// Pure function of t (and the seed for random schedules).
  NetworkSnapshot at(std::size_t t) const;

 private:
  Kind kind_;
  std::size_t n_ = 0;
};

/// True iff every sliding window of `window` consecutive snapshots in
/// [0, horizon) has a connected union. A finite-horizon certificate only.
bool jointly_connected(const TopologySchedule& sched, std::size_t window, std::size_t horizon);

}  // namespace wcons
