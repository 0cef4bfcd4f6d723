#include <doctest.h>

#include <loopeq/area.hpp>
#include <loopeq/rng.hpp>

#include "common.hpp"

using namespace loopeq;
using namespace loopeq::testutil;

namespace {

// Turns a net flow m into an oriented assignment and verifies balance.
bool flow_balances(const Lattice& lat, const LatticeString& s,
                   const std::map<PlaqId, int64_t>& m) {
  PlaquetteCountOri j;
  for (auto& [p, v] : m) {
    if (v > 0) j.set(OriPlaq::positive(p), (uint32_t)v);
    if (v < 0) j.set(OriPlaq::negative(p), (uint32_t)(-v));
  }
  return is_balanced(lat, s, j);
}

}  // namespace

TEST_CASE("areas of canonical shapes") {
  Lattice lat(3, 2);
  CHECK(area(lat, LatticeString::null_at(0), 4).require() == 0);
  CHECK(area(lat, pstring2(lat, 0, 0), 4).require() == 1);

  for (auto [r, s, want] : {std::array<int, 3>{2, 1, 2},
                            std::array<int, 3>{2, 2, 4},
                            std::array<int, 3>{3, 2, 6}}) {
    auto loop = rectangular_loop(lat, site2(lat, -1, -1), 0, 1, r, s);
    auto str = LatticeString::from_loops(lat, {loop});
    CHECK(area(lat, str, 16).require() == want);
    CHECK(support_area(lat, str, 16).require() == want);
  }

  // Loop plus its reversal balances with nothing.
  Loop fwd = ploop2(lat, 0, 0);
  Loop rev;
  for (auto it = fwd.rbegin(); it != fwd.rend(); ++it)
    rev.push_back(it->inverse());
  CHECK(area(lat, LatticeString::from_loops(lat, {fwd, rev}), 4).require() ==
        0);

  // Two far-apart squares add up.
  auto two = LatticeString::from_loops(lat, {ploop2(lat, -2, -2),
                                             ploop2(lat, 1, 1)});
  CHECK(area(lat, two, 8).require() == 2);
}

TEST_CASE("area cap reports unbounded and require throws") {
  Lattice lat(2, 2);
  auto s = pstring2(lat, 0, 0);
  AreaResult r = area(lat, s, 0);
  CHECK(!r.bounded);
  CHECK_THROWS_AS(r.require(), std::runtime_error);
  CHECK(area(lat, s, 1).require() == 1);
}

TEST_CASE("minimal flows achieve the optimum and balance") {
  for (int d : {2, 3}) {
    Lattice lat(2, d);
    CounterRng rng(7 + d, 0);
    int verified = 0;
    for (int it = 0; it < 40; ++it) {
      auto s = random_string(lat, rng, 12, 2);
      if (s.is_null()) continue;
      AreaResult a = area(lat, s, 20);
      if (!a.bounded) continue;
      auto m = min_balancing_flow(lat, s, 20);
      REQUIRE(m.has_value());
      int64_t total = 0;
      for (auto& [p, v] : *m) total += v > 0 ? v : -v;
      CHECK(total == a.value);
      CHECK(flow_balances(lat, s, *m));
      ++verified;
    }
    CHECK(verified > 10);
  }
}

TEST_CASE("support area bounds below every balanced support") {
  Lattice lat(2, 2);
  CounterRng rng(11, 0);
  int verified = 0;
  for (int it = 0; it < 40; ++it) {
    auto s = random_string(lat, rng, 12, 2);
    if (s.is_null()) continue;
    auto m = min_balancing_flow(lat, s, 20);
    if (!m) continue;
    AreaResult sup = support_area(lat, s, 20);
    if (!sup.bounded) continue;
    // The flow induces a balanced assignment; pad it with an idle +-pair.
    PlaquetteCountOri j;
    int64_t support = 0;
    for (auto& [p, v] : *m) {
      if (v > 0) j.set(OriPlaq::positive(p), (uint32_t)v);
      if (v < 0) j.set(OriPlaq::negative(p), (uint32_t)(-v));
      if (v != 0) ++support;
    }
    CHECK(support >= sup.value);
    if (sup.value > 0) CHECK(support_area_exceeds(lat, s, sup.value - 1));
    CHECK(!support_area_exceeds(lat, s, sup.value));
    ++verified;
  }
  CHECK(verified > 10);
}

TEST_CASE("m_of_p counts the deepest cluster intersection") {
  Lattice lat(3, 2);
  Loop loop = ploop2(lat, 0, 0);
  PlaquetteSet inside;
  inside.insert(plaq2(lat, 0, 0));
  CHECK(m_of_p(lat, loop, inside, 1) == 1);
  CHECK(m_of_p(lat, loop, inside, 3) == 1);

  PlaquetteSet far;
  far.insert(plaq2(lat, -3, -3));
  CHECK(m_of_p(lat, loop, far, 2) == 0);

  // A neighbor chain is reachable once the cluster may extend.
  PlaquetteSet chain;
  chain.insert(plaq2(lat, 1, 0));
  chain.insert(plaq2(lat, 2, 0));
  CHECK(m_of_p(lat, loop, chain, 1) == 1);
  CHECK(m_of_p(lat, loop, chain, 2) == 2);
}

TEST_CASE("diophantine solvability") {
  using M = std::vector<std::vector<int64_t>>;
  CHECK(diophantine_solvable(M{{2, 3}}, {1}));
  CHECK(!diophantine_solvable(M{{2, 4}}, {3}));
  CHECK(diophantine_solvable(M{{1, 0}, {0, 1}}, {7, -5}));
  CHECK(!diophantine_solvable(M{{2, 0}, {3, 0}}, {2, 2}));
  CHECK(diophantine_solvable(M{{0, 0}}, {0}));
  CHECK(!diophantine_solvable(M{{0, 0}}, {1}));
}
