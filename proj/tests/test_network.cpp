#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "wcons/network.hpp"

using namespace wcons;
using doctest::Approx;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IoError;
}

NetworkSnapshot random_connected(test::Rng& rng, std::size_t n, double density) {
  // Random spanning tree plus extra edges.
  std::vector<Edge> edges;
  for (std::size_t v = 1; v < n; ++v) edges.emplace_back(test::uniform_index(rng, 0, v - 1), v);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (test::uniform(rng, 0, 1) < density) edges.emplace_back(i, j);
  return NetworkSnapshot(n, edges);
}

}  // namespace

TEST_CASE("metropolis weights examples") {
  const auto w = metropolis_weights(NetworkSnapshot::path(3));
  const double expect[3][3] = {{2. / 3, 1. / 3, 0}, {1. / 3, 1. / 3, 1. / 3}, {0, 1. / 3, 2. / 3}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(w(i, j) == Approx(expect[i][j]).epsilon(1e-15));
  CHECK(w.is_doubly_stochastic());

  const auto pair = metropolis_weights(NetworkSnapshot(2, {{0, 1}}));
  CHECK(pair(0, 0) == 0.5);
  CHECK(pair(0, 1) == 0.5);
  CHECK(metropolis_weights(NetworkSnapshot(1, {}))(0, 0) == 1.0);
}

TEST_CASE("metropolis weights are symmetric and doubly stochastic") {
  test::Rng rng(100);
  for (int rep = 0; rep < 100; ++rep) {
    const auto g = random_connected(rng, test::uniform_index(rng, 2, 20), 0.2);
    const auto w = metropolis_weights(g);
    CHECK(w.is_symmetric());
    CHECK(w.is_doubly_stochastic());
    CHECK(w.is_consistent_with(g));
    CHECK(spectral_report(w).second_largest < 1.0 - 1e-12);
  }
}

TEST_CASE("lazy uniform weights examples") {
  const auto iso = lazy_uniform_weights(NetworkSnapshot(3, {{0, 1}}), 0.3);
  CHECK(iso(2, 2) == 1.0);
  const auto star = lazy_uniform_weights(NetworkSnapshot::star(4), 0.4);
  CHECK(star(0, 0) == 0.4);
  for (int j = 1; j < 4; ++j) CHECK(star(0, j) == Approx(0.2));
  CHECK(star(1, 1) == 0.4);
  CHECK(star(1, 0) == Approx(0.6));
  CHECK_FALSE(star.is_doubly_stochastic());
  const auto pair = lazy_uniform_weights(NetworkSnapshot(2, {{0, 1}}), 0.5);
  CHECK(pair(0, 1) == 0.5);
  CHECK(code_of([] { lazy_uniform_weights(NetworkSnapshot::path(3), 1.0); }) == ErrorCode::OutOfDomain);
}

TEST_CASE("weight matrix validation") {
  CHECK(code_of([] { WeightMatrix(2, {0.5, 0.6, 0.5, 0.5}); }) == ErrorCode::WeightSumMismatch);
  CHECK(code_of([] { WeightMatrix(2, {0.0, 1.0, 0.5, 0.5}); }) == ErrorCode::SparsityMismatch);
  CHECK(code_of([] { WeightMatrix(2, {1.5, -0.5, 0.5, 0.5}); }) == ErrorCode::NegativeWeight);
}

TEST_CASE("restrict_to rescales rows over active edges") {
  const WeightMatrix full(3, {0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5});
  const auto r = restrict_to(full, NetworkSnapshot(3, {{0, 1}}));
  CHECK(r(0, 0) == Approx(2.0 / 3));
  CHECK(r(0, 1) == Approx(1.0 / 3));
  CHECK(r(0, 2) == 0.0);
  CHECK(r(2, 2) == 1.0);
}

TEST_CASE("connectivity examples") {
  CHECK(is_connected(NetworkSnapshot::path(3)));
  CHECK_FALSE(is_connected(NetworkSnapshot(3, {})));
  CHECK_FALSE(is_connected(NetworkSnapshot(4, {{0, 1}, {2, 3}})));
  CHECK(components(NetworkSnapshot(4, {{0, 1}, {2, 3}})).size() == 2);
}

TEST_CASE("union graph") {
  const std::vector<NetworkSnapshot> ab{NetworkSnapshot(3, {{0, 1}}), NetworkSnapshot(3, {{1, 2}})};
  CHECK(union_graph(ab) == NetworkSnapshot::path(3));
  const std::vector<NetworkSnapshot> same{NetworkSnapshot::cycle(4), NetworkSnapshot::cycle(4)};
  CHECK(union_graph(same) == NetworkSnapshot::cycle(4));
  const std::vector<NetworkSnapshot> empty{NetworkSnapshot(3, {}), NetworkSnapshot(3, {})};
  CHECK(union_graph(empty).edges().empty());
  const std::vector<NetworkSnapshot> bad{NetworkSnapshot(3, {}), NetworkSnapshot(4, {})};
  CHECK(code_of([&] { union_graph(bad); }) == ErrorCode::SizeMismatch);

  SUBCASE("idempotent and order independent") {
    test::Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<NetworkSnapshot> snaps;
      for (int k = 0; k < 4; ++k) snaps.push_back(random_connected(rng, 6, 0.1));
      const auto u = union_graph(snaps);
      std::vector<NetworkSnapshot> rev(snaps.rbegin(), snaps.rend());
      CHECK(union_graph(rev) == u);
      const std::vector<NetworkSnapshot> twice{u, u};
      CHECK(union_graph(twice) == u);
    }
  }
}

TEST_CASE("joint connectivity") {
  const TopologySchedule alternating(PeriodicSchedule{{NetworkSnapshot(3, {{0, 1}}), NetworkSnapshot(3, {{1, 2}})}});
  CHECK(jointly_connected(alternating, 2, 100));
  CHECK_FALSE(jointly_connected(alternating, 1, 100));
  CHECK(jointly_connected(TopologySchedule(StaticSchedule{NetworkSnapshot::path(4)}), 1, 50));
  CHECK(jointly_connected(TopologySchedule(StaticSchedule{NetworkSnapshot::path(4)}), 7, 50));
  CHECK_FALSE(jointly_connected(TopologySchedule(StaticSchedule{NetworkSnapshot(3, {})}), 5, 50));
}

TEST_CASE("random schedules are deterministic and jointly connected over dense bases") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TopologySchedule sched(RandomSchedule{NetworkSnapshot::complete(6), 0.5, seed});
    CHECK(sched.at(17) == sched.at(17));
    CHECK(jointly_connected(sched, 10, 1000));
  }
  const TopologySchedule a(RandomSchedule{NetworkSnapshot::complete(6), 0.5, 1});
  const TopologySchedule b(RandomSchedule{NetworkSnapshot::complete(6), 0.5, 2});
  bool differs = false;
  for (std::size_t t = 0; t < 10; ++t) differs = differs || !(a.at(t) == b.at(t));
  CHECK(differs);
}

TEST_CASE("spectral report examples") {
  const auto half = spectral_report(WeightMatrix(2, {0.5, 0.5, 0.5, 0.5}));
  CHECK(half.moduli[0] == Approx(1.0));
  CHECK(half.second_largest == Approx(0.0).epsilon(1e-12));

  const auto path = spectral_report(metropolis_weights(NetworkSnapshot::path(3)));
  CHECK(path.moduli[0] == Approx(1.0).epsilon(1e-12));
  CHECK(path.moduli[1] == Approx(2.0 / 3).epsilon(1e-12));
  CHECK(std::abs(path.moduli[2]) < 1e-12);
  CHECK(path.is_doubly_stochastic);

  const auto id = spectral_report(WeightMatrix(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
  CHECK(id.second_largest == 1.0);

  SUBCASE("non-symmetric row-stochastic matrix has leading modulus one") {
    const auto lazy = spectral_report(lazy_uniform_weights(NetworkSnapshot::star(5), 0.3));
    CHECK(lazy.moduli[0] == Approx(1.0).epsilon(1e-10));
    CHECK(lazy.second_largest < 1.0);
    CHECK_FALSE(lazy.is_doubly_stochastic);
  }
}
