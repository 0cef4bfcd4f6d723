#pragma once

#include <map>
#include <optional>

#include "loopeq/strings.hpp"

// Minimal balancing assignments.  A plaquette assignment J balances s when
// every oriented edge is traversed as often as its inverse; grouping J by net
// count m(q) = J(q+) - J(q-) per unoriented plaquette turns balance into the
// integer system  flux(s) + B m = 0  with B the plaquette/edge incidence
// (entries +-1), total count sum_q |m(q)| and support count #{q : m(q) != 0}.

namespace loopeq {

struct AreaResult {
  bool bounded = false;  // optimum found within cap
  int value = 0;         // valid when bounded; optimum > cap otherwise
  int cap = 0;

  // Convenience for tests on instances known to fit the cap.
  int require() const;
};

// Minimal sum_q |m(q)| over balancing assignments, or unbounded past cap.
// Branch and bound: branch on unit corrections at the first unbalanced edge,
// prune with exact integer lower bounds (max residual, total residual / 4),
// which are dual-feasible certificates for the linear relaxation.  No
// floating point is involved in pruning.
AreaResult area(const Lattice& lat, const LatticeString& s, int cap);

// A minimizing net assignment itself, when the optimum is within cap.
std::optional<std::map<PlaqId, int64_t>> min_balancing_flow(
    const Lattice& lat, const LatticeString& s, int cap);

// Minimal number of distinct oriented plaquettes used by any balancing
// assignment.  Searches supports of size 0..cap (each connected component of
// a minimal support shares an edge with s, which bounds the candidate sets)
// and decides integer feasibility per support by exact elimination.
AreaResult support_area(const Lattice& lat, const LatticeString& s, int cap);

// True iff support_area(s) > bound; runs the same search capped at bound.
bool support_area_exceeds(const Lattice& lat, const LatticeString& s,
                          int bound);

// Largest |p intersect C| over clusters C of the loop with |C| <= area_bound;
// a cluster is a plaquette set whose components all touch an edge of the loop.
int m_of_p(const Lattice& lat, const Loop& loop, const PlaquetteSet& p,
           int area_bound, size_t cap = 2'000'000);

// Integer solvability of A x = b (small dense systems, exact arithmetic).
// Exposed for tests; throws CapacityError if intermediate values overflow.
bool diophantine_solvable(std::vector<std::vector<int64_t>> a,
                          std::vector<int64_t> b);

}  // namespace loopeq
