#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "loopeq/lattice.hpp"
#include "loopeq/rng.hpp"

// Strings of closed lattice loops and their counting helpers.
//
// A Loop is a closed edge walk with no backtrack anywhere in the cyclic order,
// so it has at least four edges.  A LatticeString is either a finite sequence
// of such loops or the null string, which carries only a basepoint site and
// has Wilson value one.  Loop order and the starting edge of each loop are
// representation choices; canonical_key quotients both out.

namespace loopeq {

using Loop = std::vector<OriEdge>;

class LatticeString {
 public:
  LatticeString() = default;

  static LatticeString null_at(SiteId x);
  // Validates every loop against the lattice; throws std::invalid_argument on
  // open walks, non-incident consecutive edges, or backtracks.
  static LatticeString from_loops(const Lattice& lat, std::vector<Loop> loops,
                                  SiteId base_for_null = 0);

  bool is_null() const { return loops_.empty(); }
  const std::vector<Loop>& loops() const { return loops_; }
  SiteId basepoint() const { return base_; }
  int loop_count() const { return static_cast<int>(loops_.size()); }
  int total_length() const;

 private:
  friend LatticeString canonical_string(const LatticeString&);
  std::vector<Loop> loops_;
  SiteId base_ = 0;
};

// Finitely supported count on unoriented plaquettes; absent means zero.
class PlaquetteCountPos {
 public:
  uint32_t at(PlaqId p) const;
  void set(PlaqId p, uint32_t n);
  // Throws std::invalid_argument if the result would go negative.
  void add(PlaqId p, int64_t delta);
  const std::vector<std::pair<PlaqId, uint32_t>>& entries() const {
    return v_;
  }
  uint64_t total() const;
  size_t support_size() const { return v_.size(); }
  PlaquetteSet support() const;
  bool operator==(const PlaquetteCountPos&) const = default;
  auto operator<=>(const PlaquetteCountPos&) const = default;

 private:
  std::vector<std::pair<PlaqId, uint32_t>> v_;  // sorted, values > 0
};

// Same, on oriented plaquettes.
class PlaquetteCountOri {
 public:
  uint32_t at(OriPlaq p) const;
  void set(OriPlaq p, uint32_t n);
  void add(OriPlaq p, int64_t delta);
  const std::vector<std::pair<OriPlaq, uint32_t>>& entries() const {
    return v_;
  }
  uint64_t total() const;
  size_t support_size() const { return v_.size(); }
  bool operator==(const PlaquetteCountOri&) const = default;

 private:
  std::vector<std::pair<OriPlaq, uint32_t>> v_;
};

// Removes backtracks from a closed edge sequence, including across the
// wrap-around, until none remain.  The reduced word is independent of the
// erasure order, so a single stack pass plus end-trimming suffices.
Loop erase_backtracks(Loop walk);

// Four times the splitting complexity |s|/4 - #loops; exact in integers.
int iota_quarters(const LatticeString& s);

// Occurrences of the oriented edge e in s plus J(p) copies of each oriented
// plaquette boundary.
uint64_t occurrence_count(const Lattice& lat, const LatticeString& s,
                          const PlaquetteCountOri& j, OriEdge e);
// Occurrences of e in either orientation, counting K(p) copies of each
// unoriented plaquette containing e.
uint64_t unoriented_occurrence_count(const Lattice& lat,
                                     const LatticeString& s,
                                     const PlaquetteCountPos& k, EdgeId e);

// Net signed traversal count per unoriented edge: forward minus backward,
// including J(p) boundary copies when given.
std::map<EdgeId, int64_t> edge_flux(const Lattice& lat,
                                    const LatticeString& s);
std::map<EdgeId, int64_t> edge_flux(const Lattice& lat, const LatticeString& s,
                                    const PlaquetteCountOri& j);

// (s, J) is balanced when every oriented edge appears as often as its
// inverse, i.e. all net fluxes vanish.
bool is_balanced(const Lattice& lat, const LatticeString& s,
                 const PlaquetteCountOri& j);

// Unoriented edges traversed by s, sorted and deduplicated.
std::vector<EdgeId> string_edge_set(const LatticeString& s);

// Canonical byte key: per loop the lexicographically minimal rotation of its
// edge ids, loops sorted; all null strings share one key regardless of
// basepoint since their Wilson value does not depend on it.  Loop reversal
// inverts edge ids and therefore changes the key.
std::string canonical_key(const LatticeString& s);
std::string key_to_hex(const std::string& key);

// The canonical representative itself (rotated loops in sorted order).  Used
// wherever a designated "first edge" must be reproducible.
LatticeString canonical_string(const LatticeString& s);

// --- Constructors ---

Loop plaquette_loop(const Lattice& lat, OriPlaq p);
// Corner-anchored R x S rectangle in the (mu, nu) plane, traversed mu-first.
// Throws std::invalid_argument if it leaves the box or R, S < 1.
Loop rectangular_loop(const Lattice& lat, SiteId corner, int mu, int nu, int r,
                      int s);
// Closed random walks (a shuffled zero-sum step multiset) with backtrack
// erasure; retries until every loop survives reduction, else returns null.
LatticeString random_string(const Lattice& lat, CounterRng& rng, int max_len,
                            int max_loops);

}  // namespace loopeq
