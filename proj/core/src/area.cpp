#include "loopeq/area.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <set>
#include <stdexcept>

namespace loopeq {

namespace {

// Residual flux per unoriented edge; zero entries are always erased so the
// first violated edge is begin().
using Flux = std::map<EdgeId, int64_t>;

void add_flux(Flux& f, EdgeId e, int64_t delta) {
  auto it = f.find(e);
  if (it == f.end()) {
    if (delta != 0) f.emplace(e, delta);
    return;
  }
  it->second += delta;
  if (it->second == 0) f.erase(it);
}

// Signed boundary stencil of the positive orientation of q.
struct Stencil {
  std::array<EdgeId, 4> edges;
  std::array<int, 4> signs;
};

Stencil stencil_of(const Lattice& lat, PlaqId q) {
  Stencil st;
  auto b = lat.boundary(OriPlaq::positive(q));
  for (int i = 0; i < 4; ++i) {
    st.edges[i] = b[i].edge();
    st.signs[i] = b[i].is_forward() ? +1 : -1;
  }
  return st;
}

int64_t abs64(int64_t x) { return x < 0 ? -x : x; }

// Admissible lower bound on the remaining cost: one applied plaquette changes
// each of its four edges by one, so both the largest single residual and a
// quarter of the total residual are exact lower bounds.
int64_t lower_bound(const Flux& f) {
  int64_t maxr = 0, total = 0;
  for (const auto& [e, v] : f) {
    maxr = std::max(maxr, abs64(v));
    total += abs64(v);
  }
  return std::max(maxr, (total + 3) / 4);
}

struct Searcher {
  const Lattice& lat;
  Flux flux;
  std::map<PlaqId, int64_t> assignment;
  std::map<PlaqId, Stencil> stencils;
  bool record_assignment = false;
  std::map<PlaqId, int64_t> best_assignment;

  const Stencil& stencil(PlaqId q) {
    auto it = stencils.find(q);
    if (it == stencils.end()) it = stencils.emplace(q, stencil_of(lat, q)).first;
    return it->second;
  }

  void apply(PlaqId q, int dir) {
    const Stencil& st = stencil(q);
    for (int i = 0; i < 4; ++i) add_flux(flux, st.edges[i], dir * st.signs[i]);
    assignment[q] += dir;
    if (assignment[q] == 0) assignment.erase(q);
  }

  // Depth-first search with budget; every unit step must shrink the residual
  // at the first violated edge, which loses no optimal solution because some
  // plaquette unit of any feasible completion opposes that residual.
  bool search(int64_t budget) {
    if (flux.empty()) {
      if (record_assignment) best_assignment = assignment;
      return true;
    }
    if (lower_bound(flux) > budget) return false;
    auto [e, r] = *flux.begin();
    int want = r > 0 ? -1 : +1;  // desired change of flux at e
    for (PlaqId q : lat.plaquettes_containing(e)) {
      const Stencil& st = stencil(q);
      int sigma = 0;
      for (int i = 0; i < 4; ++i)
        if (st.edges[i] == e) sigma = st.signs[i];
      int dir = want * sigma;  // adding dir copies of q+ moves flux(e) by want
      apply(q, dir);
      bool ok = search(budget - 1);
      apply(q, -dir);
      if (ok) return true;
    }
    return false;
  }
};

Flux initial_flux(const Lattice& lat, const LatticeString& s) {
  Flux f;
  for (const auto& [e, v] : edge_flux(lat, s))
    if (v != 0) f.emplace(e, v);
  return f;
}

}  // namespace

int AreaResult::require() const {
  if (!bounded)
    throw std::runtime_error("AreaResult::require: optimum exceeded cap");
  return value;
}

AreaResult area(const Lattice& lat, const LatticeString& s, int cap) {
  if (cap < 0) throw std::invalid_argument("area: cap must be >= 0");
  Searcher srch{lat, initial_flux(lat, s)};
  int64_t start = lower_bound(srch.flux);
  for (int64_t budget = start; budget <= cap; ++budget)
    if (srch.search(budget))
      return {true, static_cast<int>(budget), cap};
  return {false, 0, cap};
}

std::optional<std::map<PlaqId, int64_t>> min_balancing_flow(
    const Lattice& lat, const LatticeString& s, int cap) {
  Searcher srch{lat, initial_flux(lat, s)};
  srch.record_assignment = true;
  int64_t start = lower_bound(srch.flux);
  for (int64_t budget = start; budget <= cap; ++budget)
    if (srch.search(budget)) return srch.best_assignment;
  return std::nullopt;
}

bool diophantine_solvable(std::vector<std::vector<int64_t>> a,
                          std::vector<int64_t> b) {
  size_t rows = a.size();
  size_t cols = rows ? a[0].size() : 0;
  if (b.size() != rows) throw std::invalid_argument("diophantine: shape");
  constexpr int64_t kOverflowGuard = int64_t(1) << 56;
  auto guard = [&](int64_t v) {
    if (abs64(v) > kOverflowGuard)
      throw CapacityError("diophantine_solvable: coefficient overflow");
    return v;
  };

  // Smith-style reduction: integer row operations act on equations (and b),
  // integer column operations substitute unknowns; both preserve solvability.
  size_t pr = 0, pc = 0;
  while (pr < rows && pc < cols) {
    // Find the nonzero entry of minimal magnitude in the remaining block.
    size_t bi = rows, bj = cols;
    for (size_t i = pr; i < rows; ++i)
      for (size_t j = pc; j < cols; ++j)
        if (a[i][j] != 0 &&
            (bi == rows || abs64(a[i][j]) < abs64(a[bi][bj]))) {
          bi = i;
          bj = j;
        }
    if (bi == rows) break;  // remaining block is zero
    std::swap(a[pr], a[bi]);
    std::swap(b[pr], b[bi]);
    for (size_t i = 0; i < rows; ++i) std::swap(a[i][pc], a[i][bj]);

    bool clean = true;
    for (size_t i = pr + 1; i < rows; ++i) {
      if (a[i][pc] == 0) continue;
      int64_t q = a[i][pc] / a[pr][pc];
      for (size_t j = pc; j < cols; ++j) a[i][j] = guard(a[i][j] - q * a[pr][j]);
      b[i] = guard(b[i] - q * b[pr]);
      if (a[i][pc] != 0) clean = false;
    }
    for (size_t j = pc + 1; j < cols; ++j) {
      if (a[pr][j] == 0) continue;
      int64_t q = a[pr][j] / a[pr][pc];
      for (size_t i = pr; i < rows; ++i) a[i][j] = guard(a[i][j] - q * a[i][pc]);
      if (a[pr][j] != 0) clean = false;
    }
    if (!clean) continue;  // remainders left; repeat with a smaller pivot
    ++pr;
    ++pc;
  }
  // Diagonalized: pivot d must divide its right-hand side, zero rows need 0.
  for (size_t i = 0; i < rows; ++i) {
    int64_t d = (i < cols) ? a[i][i] : 0;
    if (d == 0) {
      if (b[i] != 0) return false;
    } else if (b[i] % d != 0) {
      return false;
    }
  }
  return true;
}

namespace {

// Integer feasibility of a balancing assignment supported exactly inside
// `support` (values may be any integers, zero allowed).
bool support_feasible(const Lattice& lat, const Flux& flux,
                      const PlaquetteSet& support) {
  if (support.empty()) return flux.empty();
  // Equations: all edges touched by the support, plus every violated edge.
  std::set<EdgeId> edge_set;
  for (const auto& [e, v] : flux) edge_set.insert(e);
  std::vector<Stencil> stencils;
  for (PlaqId q : support) {
    stencils.push_back(stencil_of(lat, q));
    for (EdgeId e : stencils.back().edges) edge_set.insert(e);
  }
  std::vector<EdgeId> edges(edge_set.begin(), edge_set.end());
  std::vector<std::vector<int64_t>> a(edges.size(),
                                      std::vector<int64_t>(support.size(), 0));
  std::vector<int64_t> b(edges.size(), 0);
  for (size_t r = 0; r < edges.size(); ++r) {
    auto it = flux.find(edges[r]);
    b[r] = it == flux.end() ? 0 : -it->second;
    for (size_t c = 0; c < stencils.size(); ++c)
      for (int i = 0; i < 4; ++i)
        if (stencils[c].edges[i] == edges[r]) a[r][c] += stencils[c].signs[i];
  }
  return diophantine_solvable(std::move(a), std::move(b));
}

AreaResult support_area_impl(const Lattice& lat, const LatticeString& s,
                             int cap) {
  if (cap < 0) throw std::invalid_argument("support_area: cap must be >= 0");
  Flux flux = initial_flux(lat, s);
  if (flux.empty()) return {true, 0, cap};
  // Candidate supports: subsets whose components all touch an edge of s.
  // Any component of a minimal support shares an edge with s, else dropping
  // it would keep balance with fewer plaquettes.
  auto edges = string_edge_set(s);
  for (int size = 1; size <= cap; ++size) {
    // Sizes below `size` were already rejected in earlier rounds; the last
    // enumeration dominates the cost, so re-enumerating stays cheap.
    for (const PlaquetteSet& c : enumerate_clusters(lat, edges, size))
      if (static_cast<int>(c.size()) == size && support_feasible(lat, flux, c))
        return {true, size, cap};
  }
  return {false, 0, cap};
}

}  // namespace

AreaResult support_area(const Lattice& lat, const LatticeString& s, int cap) {
  return support_area_impl(lat, s, cap);
}

bool support_area_exceeds(const Lattice& lat, const LatticeString& s,
                          int bound) {
  if (bound < 0) return true;
  return !support_area_impl(lat, s, bound).bounded;
}

int m_of_p(const Lattice& lat, const Loop& loop, const PlaquetteSet& p,
           int area_bound, size_t cap) {
  std::vector<EdgeId> edges;
  for (OriEdge e : loop) edges.push_back(e.edge());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  int best = 0;
  for (const PlaquetteSet& c : enumerate_clusters(lat, edges, area_bound, cap)) {
    int hit = 0;
    for (PlaqId q : c)
      if (p.contains(q)) ++hit;
    best = std::max(best, hit);
  }
  return best;
}

}  // namespace loopeq
