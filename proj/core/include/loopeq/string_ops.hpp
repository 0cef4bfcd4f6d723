#pragma once

#include <optional>

#include "loopeq/strings.hpp"

// The loop operations.  Each function enumerates every operation anchored at
// a designated edge position and returns one result per anchor, in a fixed
// deterministic order, together with the weight that multiplies the resulting
// state's value on the right-hand side of the loop equation:
//
//   positive splitting    -1          negative splitting    +1
//   positive merger       -1/N^2      negative merger       +1/N^2
//   positive deformation  -beta/N     negative deformation  +beta/N
//   revival               (N beta)^|J| / prod_p J(p)!
//
// Result strings have backtracks erased and null loops dropped.  When every
// loop of a result cancels, the result is the null string based at the tail
// of the designated edge.

namespace loopeq {

enum class OpKind {
  SplitPos,
  SplitNeg,
  MergePos,
  MergeNeg,
  DeformPos,
  DeformNeg,
  Revive,
};

const char* op_kind_name(OpKind k);

// Position of an edge inside a string: loop index, offset within the loop.
struct EdgePos {
  int loop = 0;
  int offset = 0;
  auto operator<=>(const EdgePos&) const = default;
};

struct OpResult {
  OpKind kind;
  LatticeString str;
  // K' for deformations and revivals; other operations leave K unchanged and
  // keep this empty.
  PlaquetteCountPos count;
  bool count_valid = false;
  // Q' for revivals only.
  PlaquetteSet q;
  double coeff = 0.0;
};

// (s, K, Q): string, plaquette budget on good plaquettes, absorbed bad set.
struct Triple {
  LatticeString s;
  PlaquetteCountPos k;
  PlaquetteSet q;
};

OriEdge edge_at_pos(const LatticeString& s, EdgePos pos);

// Splittings at pos: one per other occurrence of the same unoriented lattice
// edge on the same loop (positive when orientations agree).
std::vector<OpResult> splittings(const Lattice& lat, const LatticeString& s,
                                 EdgePos pos);

// Mergers at pos: one per occurrence of the same unoriented lattice edge on a
// different loop.
std::vector<OpResult> mergers(const Lattice& lat, const LatticeString& s,
                              EdgePos pos, double n);

// Deformations at pos, one per oriented plaquette whose boundary traverses
// the designated edge (positive) or its inverse (negative).  The first
// overload is unconstrained, as in the loop equation for the full action; the
// second requires a remaining count K(p) >= 1 and decrements it.
std::vector<OpResult> deformations(const Lattice& lat, const LatticeString& s,
                                   EdgePos pos, double n, double beta);
std::vector<OpResult> deformations(const Lattice& lat, const LatticeString& s,
                                   EdgePos pos, const PlaquetteCountPos& k,
                                   double n, double beta);

// Union of the connected components of p touching s, provided every edge of
// s lies in some plaquette of that union; nullopt when s is not stuck.
// Null strings are never stuck.
std::optional<PlaquetteSet> stuck_component(const Lattice& lat,
                                            const LatticeString& s,
                                            const PlaquetteSet& p);

// First edge position (loop-major order) whose lattice edge lies in no
// plaquette of p; nullopt exactly when s is null or stuck.
std::optional<EdgePos> good_edge(const Lattice& lat, const LatticeString& s,
                                 const PlaquetteSet& p);

// Revivals of a stuck triple: one result per nonzero assignment J on the
// oriented boundary plaquettes of the stuck component with
// J(p) + J(p^-1) <= K(p).  Prepends J(p) copies of each plaquette boundary
// loop in id order, zeroes K on the boundary set, and absorbs the stuck
// component into Q.  Throws std::invalid_argument when t.s is not stuck and
// CapacityError when more than `cap` assignments exist.
std::vector<OpResult> revivals(const Lattice& lat, const Triple& t,
                               const PlaquetteSet& p, double n, double beta,
                               size_t cap = 1'000'000);

}  // namespace loopeq
