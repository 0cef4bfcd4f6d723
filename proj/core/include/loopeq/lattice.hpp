#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

// Finite lattice box {-L,...,L}^d with its positively oriented cells.
//
// Encoding conventions (fixed, relied on by canonical forms and CSV output):
//   site index: mixed radix over coordinates, axis 0 least significant,
//               idx = sum_k (x_k + L) * (2L+1)^k
//   edge (x, mu): the unoriented edge from x to x + e_mu; valid iff x_mu < L.
//               id = site * d + mu
//   oriented edge: 2 * edge + sign bit (0 = traversed x -> x+e_mu, 1 = reverse)
//   plaquette (x, mu < nu): corner x spanning axes mu, nu; valid iff
//               x_mu < L and x_nu < L.  id = site * C(d,2) + pair_index
//   oriented plaquette: 2 * plaquette + sign bit.
//
// All ids are dense per cell class and give a stable total order: site-major,
// then axis (or axis pair), then orientation.

namespace loopeq {

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using SiteId = int32_t;

struct EdgeId {
  int32_t v = -1;
  auto operator<=>(const EdgeId&) const = default;
};

struct OriEdge {
  int32_t v = -1;
  auto operator<=>(const OriEdge&) const = default;

  static OriEdge forward(EdgeId e) { return {e.v * 2}; }
  static OriEdge backward(EdgeId e) { return {e.v * 2 + 1}; }
  EdgeId edge() const { return {v / 2}; }
  bool is_forward() const { return (v & 1) == 0; }
  OriEdge inverse() const { return {v ^ 1}; }
};

struct PlaqId {
  int32_t v = -1;
  auto operator<=>(const PlaqId&) const = default;
};

struct OriPlaq {
  int32_t v = -1;
  auto operator<=>(const OriPlaq&) const = default;

  static OriPlaq positive(PlaqId p) { return {p.v * 2}; }
  static OriPlaq negative(PlaqId p) { return {p.v * 2 + 1}; }
  PlaqId plaq() const { return {v / 2}; }
  bool is_positive() const { return (v & 1) == 0; }
  OriPlaq inverse() const { return {v ^ 1}; }
};

// Sorted duplicate-free set of unoriented plaquettes.
class PlaquetteSet {
 public:
  PlaquetteSet() = default;
  explicit PlaquetteSet(std::vector<PlaqId> ids);

  bool contains(PlaqId p) const;
  void insert(PlaqId p);
  void erase(PlaqId p);
  size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<PlaqId>& ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  auto operator<=>(const PlaquetteSet&) const = default;

  PlaquetteSet unioned(const PlaquetteSet& other) const;

 private:
  std::vector<PlaqId> ids_;
};

class Lattice {
 public:
  // Throws std::invalid_argument unless L >= 1, d >= 2.
  Lattice(int L, int d);

  int L() const { return L_; }
  int d() const { return d_; }
  int side() const { return 2 * L_ + 1; }
  int axis_pairs() const { return d_ * (d_ - 1) / 2; }

  // --- Sites ---
  int site_count() const { return site_count_; }
  bool in_box(std::span<const int> coords) const;
  SiteId site(std::span<const int> coords) const;
  std::vector<int> coords(SiteId s) const;
  int coord(SiteId s, int axis) const;
  // One step along +-axis; nullopt when it leaves the box.
  std::optional<SiteId> step(SiteId s, int axis, int dir) const;

  // --- Edges ---
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<EdgeId>& edges() const { return edges_; }
  bool edge_valid(EdgeId e) const;
  // Edge from tail along +axis; invalid EdgeId{} if it leaves the box.
  EdgeId edge_at(SiteId tail, int axis) const;
  SiteId edge_tail(EdgeId e) const { return e.v / d_; }
  int edge_axis(EdgeId e) const { return e.v % d_; }
  SiteId tail(OriEdge e) const;
  SiteId head(OriEdge e) const { return tail(e.inverse()); }

  // --- Plaquettes ---
  int plaq_count() const { return static_cast<int>(plaqs_.size()); }
  const std::vector<PlaqId>& plaqs() const { return plaqs_; }
  bool plaq_valid(PlaqId p) const;
  PlaqId plaq_at(SiteId corner, int mu, int nu) const;
  SiteId plaq_corner(PlaqId p) const { return p.v / axis_pairs(); }
  std::pair<int, int> plaq_axes(PlaqId p) const;

  // Boundary in traversal order; the negative orientation traverses the same
  // four unoriented edges in reverse with inverted directions.
  std::array<OriEdge, 4> boundary(OriPlaq p) const;
  std::array<EdgeId, 4> plaq_edges(PlaqId p) const;

  // Unoriented plaquettes whose boundary contains e: 2(d-1) in the bulk,
  // fewer next to the box boundary (out-of-box plaquettes are omitted).
  const std::vector<PlaqId>& plaquettes_containing(EdgeId e) const;
  // Oriented plaquettes whose boundary traverses e with matching orientation;
  // exactly one orientation per unoriented plaquette containing e.edge().
  std::vector<OriPlaq> plaquettes_traversing(OriEdge e) const;
  // Plaquettes sharing at least one unoriented edge with p.
  const std::vector<PlaqId>& plaq_neighbors(PlaqId p) const;

 private:
  int L_;
  int d_;
  int site_count_;
  std::vector<EdgeId> edges_;
  std::vector<PlaqId> plaqs_;
  std::vector<std::vector<PlaqId>> edge_to_plaqs_;   // indexed by EdgeId::v
  std::vector<std::vector<PlaqId>> plaq_adjacency_;  // indexed by PlaqId::v
  std::vector<std::pair<int8_t, int8_t>> pair_axes_; // pair index -> (mu, nu)
  std::vector<int> pair_index_;                      // mu * d + nu -> pair index
};

// Good plaquettes sharing an edge with a plaquette of q, relative to the bad
// set p (members of p and of q itself are excluded).
PlaquetteSet boundary_of_set(const Lattice& lat, const PlaquetteSet& q,
                             const PlaquetteSet& p);

// All subsets C of positive plaquettes with |C| <= max_size such that every
// connected component of C (adjacency = shared unoriented edge) contains at
// least one plaquette touching an edge from `edges`.  Includes the empty set.
// Throws CapacityError when more than `cap` subsets would be produced.
std::vector<PlaquetteSet> enumerate_clusters(const Lattice& lat,
                                             std::span<const EdgeId> edges,
                                             int max_size,
                                             size_t cap = 2'000'000);

}  // namespace loopeq
