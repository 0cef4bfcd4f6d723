#include "loopeq/state_space.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <utility>

#include "loopeq/area.hpp"

namespace loopeq {

const char* state_class_name(StateClass c) {
  switch (c) {
    case StateClass::Interior: return "interior";
    case StateClass::NullBoundary: return "null";
    case StateClass::Boundary0: return "boundary0";
    case StateClass::Boundary1: return "boundary1";
    case StateClass::Exterior: return "exterior";
  }
  return "?";
}

namespace {

void append_i32(std::string& out, int32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void append_u32(std::string& out, uint32_t v) {
  append_i32(out, static_cast<int32_t>(v));
}

}  // namespace

std::string state_key(const LatticeString& s, const PlaquetteCountPos& deficit,
                      const PlaquetteSet& q) {
  std::string key = canonical_key(s);
  key.push_back('\x01');
  for (const auto& [p, v] : deficit.entries()) {
    append_i32(key, p.v);
    append_u32(key, v);
  }
  key.push_back('\x02');
  for (PlaqId p : q) append_i32(key, p.v);
  return key;
}

int StateSpace::find(const LatticeString& s, const PlaquetteCountPos& deficit,
                     const PlaquetteSet& q) const {
  auto it = index.find(state_key(canonical_string(s), deficit, q));
  return it == index.end() ? -1 : it->second;
}

PlaquetteCountPos StateSpace::budget_from_deficit(
    const PlaquetteCountPos& deficit) const {
  PlaquetteCountPos k;
  for (PlaqId p : lat.plaqs()) {
    if (spec.bad.contains(p)) continue;
    k.set(p, static_cast<uint32_t>(spec.b) - deficit.at(p));
  }
  return k;
}

PlaquetteCountPos StateSpace::full_count(const StateRecord& rec) const {
  return budget_from_deficit(rec.deficit);
}

uint64_t StateSpace::max_edge_occupancy(const StateRecord& rec) const {
  PlaquetteCountPos k = full_count(rec);
  uint64_t worst = 0;
  for (EdgeId e : lat.edges())
    worst = std::max(worst, unoriented_occurrence_count(lat, rec.s, k, e));
  return worst;
}

int StateSpace::count_class(StateClass c) const {
  int n = 0;
  for (const StateRecord& r : states)
    if (r.cls == c) ++n;
  return n;
}

namespace {

class Builder {
 public:
  Builder(const Lattice& lat, const ModelSpec& spec, const BuildCaps& caps)
      : sp_{lat, spec}, caps_(caps) {}

  StateSpace run(const Loop& root) {
    const ModelSpec& spec = sp_.spec;
    if (!(spec.n > 0)) throw std::invalid_argument("build_reachable: N <= 0");
    if (spec.beta < 0)
      throw std::invalid_argument("build_reachable: negative beta");
    if (spec.b < 1)
      throw std::invalid_argument("build_reachable: truncation degree < 1");
    // Budgets enter sparse uint32 counts; exact enumeration needs them small.
    if (spec.b > 100'000)
      throw std::invalid_argument(
          "build_reachable: truncation degree too large to enumerate");
    if (spec.model == ModelKind::Truncated && !spec.bad.empty())
      throw std::invalid_argument(
          "build_reachable: truncated model has no bad set");

    LatticeString s0 = canonical_string(
        LatticeString::from_loops(sp_.lat, {root}));
    if (sp_.spec.model == ModelKind::Modified)
      sp_.root_support_area =
          support_area(sp_.lat, s0, caps_.area_cap).require();

    sp_.root = get_or_add(std::move(s0), {}, {});
    if (sp_.states[sp_.root].cls == StateClass::Exterior)
      throw std::invalid_argument("build_reachable: root outside the space");
    if (sp_.spec.model == ModelKind::Truncated) {
      uint64_t occ = sp_.max_edge_occupancy(sp_.states[sp_.root]);
      uint64_t cap = 2ull * sp_.lat.d() * static_cast<uint64_t>(sp_.spec.b);
      if (occ > cap)
        throw std::invalid_argument(
            "build_reachable: root violates the edge occupancy bound");
    }

    while (!pending_.empty()) {
      int i = pending_.front();
      pending_.pop_front();
      classify(i);
    }
    return std::move(sp_);
  }

 private:
  StateSpace sp_;
  BuildCaps caps_;
  std::deque<int> pending_;

  bool in_omega(const PlaquetteCountPos& deficit,
                const PlaquetteSet& q) const {
    if (sp_.spec.model == ModelKind::Truncated) return true;
    int64_t n = static_cast<int64_t>(q.size());
    for (const auto& [p, v] : deficit.entries())
      if (!q.contains(p)) ++n;
    return n <= sp_.root_support_area;
  }

  PlaquetteCountPos deficit_from_count(const PlaquetteCountPos& k) const {
    PlaquetteCountPos d;
    uint32_t b = static_cast<uint32_t>(sp_.spec.b);
    for (PlaqId p : sp_.lat.plaqs()) {
      if (sp_.spec.bad.contains(p)) continue;
      uint32_t have = k.at(p);
      if (have < b) d.set(p, b - have);
    }
    return d;
  }

  // Returns the state index, creating the record if needed.  New states
  // outside the space (or past the state budget, when permitted) become
  // Exterior leaves and are never expanded.
  int get_or_add(LatticeString s, PlaquetteCountPos deficit, PlaquetteSet q) {
    LatticeString cs = canonical_string(s);
    std::string key = state_key(cs, deficit, q);
    auto it = sp_.index.find(key);
    if (it != sp_.index.end()) return it->second;

    bool member = in_omega(deficit, q);
    int64_t iota = iota_quarters(cs);
    bool budget = sp_.states.size() < caps_.max_states &&
                  cs.total_length() <= caps_.max_perimeter &&
                  iota <= caps_.max_iota_quarters;
    if (!budget && member && !caps_.frontier_exterior)
      throw CapacityError("build_reachable: state budget exceeded");

    StateRecord rec;
    rec.s = std::move(cs);
    rec.deficit = std::move(deficit);
    rec.q = std::move(q);
    rec.q_boundary = boundary_of_set(sp_.lat, rec.q, sp_.spec.bad);
    rec.iota_quarters = iota;
    if (sp_.spec.model == ModelKind::Truncated)
      rec.area = area(sp_.lat, rec.s, caps_.area_cap).require();
    int id = static_cast<int>(sp_.states.size());
    if (!member || !budget) {
      rec.cls = StateClass::Exterior;
    } else {
      pending_.push_back(id);
    }
    sp_.states.push_back(std::move(rec));
    sp_.index.emplace(std::move(key), id);
    return id;
  }

  void add_term(std::vector<TransitionTerm>& terms, int target, double coeff) {
    for (TransitionTerm& t : terms)
      if (t.target == target) {
        t.coeff += coeff;
        return;
      }
    terms.push_back({target, coeff});
  }

  void classify(int id) {
    // Copy what expansion needs: get_or_add may reallocate the state vector.
    LatticeString s = sp_.states[id].s;
    PlaquetteCountPos deficit = sp_.states[id].deficit;
    PlaquetteSet q = sp_.states[id].q;
    const ModelSpec& spec = sp_.spec;

    if (s.is_null()) {
      sp_.states[id].cls = StateClass::NullBoundary;
      return;
    }

    if (spec.model == ModelKind::Truncated) {
      uint64_t occ = sp_.max_edge_occupancy(sp_.states[id]);
      uint64_t cap = 2ull * sp_.lat.d() * static_cast<uint64_t>(spec.b);
      if (occ > cap)
        throw std::runtime_error(
            "build_reachable: closure violated the edge occupancy bound");
      expand_anchor(id, s, deficit, q, EdgePos{0, 0}, /*require_member=*/false);
      return;
    }

    std::optional<EdgePos> anchor = good_edge(sp_.lat, s, spec.bad);
    if (anchor) {
      expand_anchor(id, s, deficit, q, *anchor, /*require_member=*/true);
      return;
    }

    // Stuck: every edge of s is covered by bad plaquettes.
    sp_.states[id].stuck = true;
    PlaquetteSet qt = *stuck_component(sp_.lat, s, spec.bad);
    // The escape identity needs the absorbed component to stay smaller than
    // every balanced support of s.
    if (!support_area_exceeds(sp_.lat, s, static_cast<int>(qt.size()))) {
      sp_.states[id].cls = StateClass::Boundary1;
      return;
    }
    PlaquetteCountPos k = sp_.budget_from_deficit(deficit);
    std::vector<OpResult> rv = revivals(sp_.lat, Triple{s, k, q}, spec.bad,
                                        spec.n, spec.beta, caps_.revival_cap);
    if (rv.empty()) {
      // No budget left on the escape boundary: the value vanishes.
      sp_.states[id].cls = StateClass::Boundary0;
      return;
    }
    sp_.states[id].n_revive = static_cast<int>(rv.size());
    // Every revival shares one (K', Q'); membership is decided once.
    PlaquetteCountPos d2 = deficit_from_count(rv.front().count);
    if (!in_omega(d2, rv.front().q)) {
      sp_.states[id].cls = StateClass::Boundary1;
      return;
    }
    std::vector<TransitionTerm> terms;
    for (OpResult& r : rv) {
      int t = get_or_add(std::move(r.str), deficit_from_count(r.count), r.q);
      add_term(terms, t, r.coeff);
    }
    sp_.states[id].cls = StateClass::Interior;
    sp_.states[id].terms = std::move(terms);
  }

  // Splittings, mergers and deformations anchored at `pos`.  In the modified
  // model (require_member) deformation successors may leave the space; they
  // become Exterior leaves unless every successor leaves, which makes the
  // state a supplied-value boundary state.
  void expand_anchor(int id, const LatticeString& s,
                     const PlaquetteCountPos& deficit, const PlaquetteSet& q,
                     EdgePos pos, bool require_member) {
    const ModelSpec& spec = sp_.spec;
    PlaquetteCountPos k = sp_.budget_from_deficit(deficit);
    std::vector<OpResult> sm = splittings(sp_.lat, s, pos);
    int n_split = static_cast<int>(sm.size());
    for (OpResult& r : mergers(sp_.lat, s, pos, spec.n))
      sm.push_back(std::move(r));
    int n_merge = static_cast<int>(sm.size()) - n_split;
    std::vector<OpResult> df =
        deformations(sp_.lat, s, pos, k, spec.n, spec.beta);

    sp_.states[id].n_split = n_split;
    sp_.states[id].n_merge = n_merge;
    sp_.states[id].n_deform = static_cast<int>(df.size());

    if (sm.empty() && df.empty()) {
      // The anchor edge occurs once and no incident plaquette has budget
      // left.  In the modified model such an isolated good edge forces the
      // value to vanish; in the truncated model the state is interior with
      // an empty right-hand side, which pins the value to zero anyway.
      sp_.states[id].cls =
          require_member ? StateClass::Boundary0 : StateClass::Interior;
      return;
    }

    std::vector<PlaquetteCountPos> df_deficit(df.size());
    bool any_member = !sm.empty();
    for (size_t i = 0; i < df.size(); ++i) {
      df_deficit[i] = deficit_from_count(df[i].count);
      if (!require_member || in_omega(df_deficit[i], q)) any_member = true;
    }
    if (require_member && !any_member) {
      sp_.states[id].cls = StateClass::Boundary1;
      return;
    }

    std::vector<TransitionTerm> terms;
    for (OpResult& r : sm) {
      int t = get_or_add(std::move(r.str), deficit, q);
      add_term(terms, t, r.coeff);
    }
    for (size_t i = 0; i < df.size(); ++i) {
      int t = get_or_add(std::move(df[i].str), std::move(df_deficit[i]), q);
      add_term(terms, t, df[i].coeff);
    }
    sp_.states[id].cls = StateClass::Interior;
    sp_.states[id].terms = std::move(terms);
  }
};

}  // namespace

StateSpace build_reachable(const Lattice& lat, const Loop& root,
                           const ModelSpec& spec, const BuildCaps& caps) {
  Builder b(lat, spec, caps);
  return b.run(root);
}

}  // namespace loopeq
