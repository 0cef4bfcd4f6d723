#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "loopeq/string_ops.hpp"

// Reachable configuration spaces for the fixed-point form of the loop
// equations.  A state is a triple (s, K, Q): a string, a per-plaquette
// weight-truncation budget, and the set of tail-weighted plaquettes already
// absorbed by revivals.  K is stored as the deficit B - K, which is sparse
// because almost every plaquette keeps its full budget.
//
// Two models share the machinery.  In the truncated model every plaquette
// carries the weight exp_K and the space is closed under splittings, mergers
// and deformations; closure holds because no operation increases any edge
// occupancy count.  In the modified model a fixed set of bad plaquettes
// carries the tail weight exp - exp_B, operations anchor at the first edge
// lying in no bad plaquette, stuck states escape through revivals, and the
// space is clipped to triples with |supp(B - K) union Q| not exceeding the
// minimal balanced support of the root loop.

namespace loopeq {

enum class ModelKind { Truncated, Modified };

// How a state's value is determined.
enum class StateClass {
  Interior,      // value = sum over terms of coeff * value(target)
  NullBoundary,  // null string; value injected from outside
  Boundary0,     // terminal state whose value provably vanishes
  Boundary1,     // terminal state; value injected from outside
  Exterior,      // clipped out of the space; value injected from outside
};

const char* state_class_name(StateClass c);

struct ModelSpec {
  ModelKind model = ModelKind::Truncated;
  double n = 1.0;    // gauge group dimension
  double beta = 0.0;
  long long b = 1;   // weight truncation degree
  PlaquetteSet bad;  // modified model: plaquettes carrying the tail weight
};

struct BuildCaps {
  size_t max_states = 200'000;
  int max_perimeter = 4096;        // total string length per state
  int64_t max_iota_quarters = 4096;
  int area_cap = 64;               // bound for minimal-area searches
  size_t revival_cap = 1'000'000;
  // When true, states past any budget above become Exterior leaves instead
  // of the build failing with CapacityError.
  bool frontier_exterior = false;
};

struct TransitionTerm {
  int target = -1;
  double coeff = 0.0;
};

struct StateRecord {
  LatticeString s;            // canonical form; its first edge is the anchor
  PlaquetteCountPos deficit;  // B - K on budgeted plaquettes
  PlaquetteSet q;             // absorbed bad components (modified model)
  PlaquetteSet q_boundary;    // good plaquettes sharing an edge with q
  StateClass cls = StateClass::Interior;
  bool stuck = false;
  int64_t iota_quarters = 0;
  int64_t area = -1;  // minimal spanning area; computed in the truncated model
  // Operation tallies before aggregation by successor.
  int n_split = 0;
  int n_merge = 0;
  int n_deform = 0;
  int n_revive = 0;
  std::vector<TransitionTerm> terms;  // aggregated by target, first-seen order
};

// Dedup key: canonical string key plus the lattice-anchored deficit and Q.
std::string state_key(const LatticeString& s, const PlaquetteCountPos& deficit,
                      const PlaquetteSet& q);

struct StateSpace {
  Lattice lat;
  ModelSpec spec;
  std::vector<StateRecord> states;
  std::unordered_map<std::string, int> index;  // state_key -> position
  int root = -1;
  // Modified model: minimal balanced-support size of the root loop, the
  // clipping radius of the space.
  int64_t root_support_area = -1;

  const StateRecord& at(int i) const { return states.at(i); }
  int size() const { return static_cast<int>(states.size()); }
  // Index of a state given any representative string, or -1.
  int find(const LatticeString& s, const PlaquetteCountPos& deficit,
           const PlaquetteSet& q) const;
  // Reconstructs the dense budget K = B - deficit over budgeted plaquettes.
  PlaquetteCountPos budget_from_deficit(const PlaquetteCountPos& deficit) const;
  PlaquetteCountPos full_count(const StateRecord& rec) const;
  // max over lattice edges of the occupancy count of (s, K).
  uint64_t max_edge_occupancy(const StateRecord& rec) const;
  int count_class(StateClass c) const;
};

// Explores every state reachable from (root, K = B, Q = {}) and classifies
// it.  Throws std::invalid_argument on malformed specs (non-positive N,
// negative beta, B < 1 or B too large for exact enumeration, bad plaquettes
// in the truncated model) and CapacityError when caps are exceeded.
StateSpace build_reachable(const Lattice& lat, const Loop& root,
                           const ModelSpec& spec, const BuildCaps& caps = {});

}  // namespace loopeq
