#include <doctest.h>

#include <algorithm>
#include <loopeq/strings.hpp>
#include <set>

#include "common.hpp"

using namespace loopeq;
using namespace loopeq::testutil;

namespace {

Loop rotated(Loop l, int k) {
  std::rotate(l.begin(), l.begin() + k, l.end());
  return l;
}

Loop reversed(const Loop& l) {
  Loop out;
  for (auto it = l.rbegin(); it != l.rend(); ++it)
    out.push_back(it->inverse());
  return out;
}

}  // namespace

TEST_CASE("null strings share one canonical key") {
  Lattice lat(1, 2);
  auto a = LatticeString::null_at(0);
  auto b = LatticeString::null_at(5);
  CHECK(a.is_null());
  CHECK(a.basepoint() == 0);
  CHECK(canonical_key(a) == canonical_key(b));
  CHECK(a.total_length() == 0);
  CHECK(iota_quarters(a) == 0);
}

TEST_CASE("from_loops validates the walk") {
  Lattice lat(2, 2);
  Loop good = ploop2(lat, 0, 0);
  CHECK_NOTHROW(LatticeString::from_loops(lat, {good}));

  Loop open(good.begin(), good.begin() + 3);
  CHECK_THROWS_AS(LatticeString::from_loops(lat, {open}),
                  std::invalid_argument);

  Loop backtrack = good;
  backtrack.push_back(good[3].inverse());
  backtrack.push_back(good[3]);
  CHECK_THROWS_AS(LatticeString::from_loops(lat, {backtrack}),
                  std::invalid_argument);

  Loop skip = good;
  std::swap(skip[1], skip[2]);  // consecutive edges no longer meet
  CHECK_THROWS_AS(LatticeString::from_loops(lat, {skip}),
                  std::invalid_argument);
}

TEST_CASE("erase_backtracks reduces to the cyclic normal form") {
  Lattice lat(2, 2);
  Loop p = ploop2(lat, 0, 0);

  // Insert a spur in the middle: e X e^-1.
  EdgeId spur = lat.edge_at(site2(lat, 1, 0), 0);
  Loop noisy;
  noisy.push_back(p[0]);
  noisy.push_back(OriEdge::forward(spur));
  noisy.push_back(OriEdge::backward(spur));
  for (size_t i = 1; i < p.size(); ++i) noisy.push_back(p[i]);
  CHECK(erase_backtracks(noisy) == p);

  // Wrap-around backtrack: rotate so the spur straddles the seam.
  Loop seam = rotated(noisy, 2);
  Loop r = erase_backtracks(seam);
  CHECK(r.size() == 4);
  CHECK(canonical_key(LatticeString::from_loops(lat, {r})) ==
        canonical_key(LatticeString::from_loops(lat, {p})));

  // Full cancellation.
  Loop pair{OriEdge::forward(spur), OriEdge::backward(spur)};
  CHECK(erase_backtracks(pair).empty());
  CHECK(erase_backtracks(erase_backtracks(noisy)) == p);
}

TEST_CASE("iota counts quarter perimeter minus loops") {
  Lattice lat(3, 2);
  auto one = pstring2(lat, 0, 0);
  CHECK(iota_quarters(one) == 0);  // 4/4 - 1
  auto rect = LatticeString::from_loops(
      lat, {rectangular_loop(lat, site2(lat, 0, 0), 0, 1, 2, 3)});
  CHECK(iota_quarters(rect) == 10 - 4);  // perimeter 10, one loop
  auto two = LatticeString::from_loops(lat, {ploop2(lat, 0, 0),
                                             ploop2(lat, 1, 1)});
  CHECK(iota_quarters(two) == 8 - 8);
}

TEST_CASE("canonical key quotient: rotations and loop order, not reversal") {
  Lattice lat(3, 2);
  Loop a = ploop2(lat, 0, 0);
  Loop b = rectangular_loop(lat, site2(lat, -1, -1), 0, 1, 2, 1);
  auto s1 = LatticeString::from_loops(lat, {a, b});
  auto s2 = LatticeString::from_loops(lat, {rotated(b, 3), rotated(a, 1)});
  CHECK(canonical_key(s1) == canonical_key(s2));
  auto s3 = LatticeString::from_loops(lat, {a, reversed(b)});
  CHECK(canonical_key(s1) != canonical_key(s3));

  auto c1 = canonical_string(s2);
  CHECK(canonical_key(c1) == canonical_key(s1));
  // Canonicalization is idempotent including the representation.
  auto c2 = canonical_string(c1);
  CHECK(c1.loops() == c2.loops());
  CHECK(!key_to_hex(canonical_key(s1)).empty());
}

TEST_CASE("occurrence counts see string and plaquette copies") {
  Lattice lat(2, 2);
  PlaqId p = plaq2(lat, 0, 0);
  auto s = pstring2(lat, 0, 0);
  Loop bd = ploop2(lat, 0, 0);

  PlaquetteCountOri j;
  CHECK(occurrence_count(lat, s, j, bd[0]) == 1);
  CHECK(occurrence_count(lat, s, j, bd[0].inverse()) == 0);
  j.set(OriPlaq::negative(p), 2);
  CHECK(occurrence_count(lat, s, j, bd[0]) == 1);
  CHECK(occurrence_count(lat, s, j, bd[0].inverse()) == 2);

  PlaquetteCountPos k;
  k.set(p, 3);
  CHECK(unoriented_occurrence_count(lat, s, k, bd[0].edge()) == 1 + 3);
  EdgeId far = lat.edge_at(site2(lat, -2, -2), 0);
  CHECK(unoriented_occurrence_count(lat, s, k, far) == 0);
}

TEST_CASE("edge flux and balance") {
  Lattice lat(2, 2);
  PlaqId p = plaq2(lat, 0, 0);
  auto s = pstring2(lat, 0, 0);

  auto flux = edge_flux(lat, s);
  CHECK(flux.size() == 4);
  for (auto& [e, v] : flux) CHECK((v == 1 || v == -1));

  PlaquetteCountOri j;
  CHECK(!is_balanced(lat, s, j));
  j.set(OriPlaq::negative(p), 1);
  CHECK(is_balanced(lat, s, j));
  for (auto& [e, v] : edge_flux(lat, s, j)) CHECK(v == 0);
  j.set(OriPlaq::negative(p), 2);
  CHECK(!is_balanced(lat, s, j));

  // A loop together with its reversal balances with J = 0.
  auto sym = LatticeString::from_loops(
      lat, {ploop2(lat, 0, 0),
            [&] {
              Loop r;
              auto l = ploop2(lat, 0, 0);
              for (auto it = l.rbegin(); it != l.rend(); ++it)
                r.push_back(it->inverse());
              return r;
            }()});
  CHECK(is_balanced(lat, sym, {}));
}

TEST_CASE("string_edge_set is sorted and unique") {
  Lattice lat(2, 2);
  auto s = LatticeString::from_loops(lat, {ploop2(lat, 0, 0),
                                           ploop2(lat, 1, 0)});
  auto es = string_edge_set(s);
  CHECK(es.size() == 7);  // two squares sharing one edge
  CHECK(std::is_sorted(es.begin(), es.end()));
  CHECK(std::adjacent_find(es.begin(), es.end()) == es.end());
}

TEST_CASE("plaquette and rectangle constructors") {
  Lattice lat(3, 2);
  PlaqId p = plaq2(lat, 1, 1);
  Loop pos = plaquette_loop(lat, OriPlaq::positive(p));
  Loop neg = plaquette_loop(lat, OriPlaq::negative(p));
  CHECK(pos.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(neg[i] == pos[3 - i].inverse());

  Loop rect = rectangular_loop(lat, site2(lat, -1, 0), 0, 1, 3, 2);
  CHECK(rect.size() == 10);
  CHECK_NOTHROW(LatticeString::from_loops(lat, {rect}));
  CHECK_THROWS_AS(rectangular_loop(lat, site2(lat, 2, 0), 0, 1, 3, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(rectangular_loop(lat, site2(lat, 0, 0), 0, 1, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("random strings are valid and reproducible") {
  Lattice lat(2, 3);
  CounterRng r1(42, 0), r2(42, 0);
  int nonnull = 0;
  for (int i = 0; i < 50; ++i) {
    auto s1 = random_string(lat, r1, 12, 2);
    auto s2 = random_string(lat, r2, 12, 2);
    CHECK(canonical_key(s1) == canonical_key(s2));
    if (s1.is_null()) continue;
    ++nonnull;
    CHECK_NOTHROW(LatticeString::from_loops(lat, s1.loops()));
    for (const Loop& l : s1.loops()) CHECK(l.size() >= 4);
  }
  CHECK(nonnull > 25);
}

TEST_CASE("plaquette counts enforce nonnegativity") {
  PlaquetteCountPos k;
  CHECK(k.at(PlaqId{3}) == 0);
  k.set(PlaqId{3}, 2);
  k.add(PlaqId{3}, -1);
  CHECK(k.at(PlaqId{3}) == 1);
  CHECK_THROWS_AS(k.add(PlaqId{3}, -2), std::invalid_argument);
  k.add(PlaqId{5}, 4);
  CHECK(k.total() == 5);
  CHECK(k.support_size() == 2);
  CHECK(k.support().contains(PlaqId{5}));
  k.set(PlaqId{5}, 0);
  CHECK(k.support_size() == 1);

  PlaquetteCountOri j;
  j.set(OriPlaq{7}, 1);
  j.add(OriPlaq{7}, 2);
  CHECK(j.at(OriPlaq{7}) == 3);
  CHECK(j.total() == 3);
  CHECK_THROWS_AS(j.add(OriPlaq{9}, -1), std::invalid_argument);
}
