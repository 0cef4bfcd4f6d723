#include "loopeq/string_ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace loopeq {

namespace {

// Loop rotated so position `offset` comes first.
Loop rotate_to(const Loop& l, int offset) {
  Loop out;
  out.reserve(l.size());
  for (size_t k = 0; k < l.size(); ++k)
    out.push_back(l[(offset + k) % l.size()]);
  return out;
}

// Assembles a result string from raw loops: erases backtracks (cyclically),
// drops loops that cancel entirely, and falls back to the null string at
// `base` when nothing survives.
LatticeString assemble(const Lattice& lat, std::vector<Loop> raw, SiteId base) {
  std::vector<Loop> kept;
  for (Loop& l : raw) {
    Loop r = erase_backtracks(std::move(l));
    if (!r.empty()) kept.push_back(std::move(r));
  }
  if (kept.empty()) return LatticeString::null_at(base);
  return LatticeString::from_loops(lat, std::move(kept), base);
}

std::vector<Loop> other_loops(const LatticeString& s, int skip) {
  std::vector<Loop> out;
  for (int i = 0; i < s.loop_count(); ++i)
    if (i != skip) out.push_back(s.loops()[i]);
  return out;
}

void require_designated(const LatticeString& s, EdgePos pos) {
  if (s.is_null())
    throw std::invalid_argument("loop operation: null string has no edges");
  if (pos.loop < 0 || pos.loop >= s.loop_count())
    throw std::invalid_argument("loop operation: loop index out of range");
  int len = static_cast<int>(s.loops()[pos.loop].size());
  if (pos.offset < 0 || pos.offset >= len)
    throw std::invalid_argument("loop operation: offset out of range");
}

}  // namespace

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::SplitPos: return "split+";
    case OpKind::SplitNeg: return "split-";
    case OpKind::MergePos: return "merge+";
    case OpKind::MergeNeg: return "merge-";
    case OpKind::DeformPos: return "deform+";
    case OpKind::DeformNeg: return "deform-";
    case OpKind::Revive: return "revive";
  }
  return "?";
}

OriEdge edge_at_pos(const LatticeString& s, EdgePos pos) {
  require_designated(s, pos);
  return s.loops()[pos.loop][pos.offset];
}

std::vector<OpResult> splittings(const Lattice& lat, const LatticeString& s,
                                 EdgePos pos) {
  require_designated(s, pos);
  Loop rot = rotate_to(s.loops()[pos.loop], pos.offset);
  OriEdge e = rot[0];
  SiteId base = lat.tail(e);
  std::vector<OpResult> out;
  for (size_t k = 1; k < rot.size(); ++k) {
    if (rot[k].edge() != e.edge()) continue;
    Loop b(rot.begin() + 1, rot.begin() + k);
    Loop c(rot.begin() + k + 1, rot.end());
    std::vector<Loop> raw = other_loops(s, pos.loop);
    if (rot[k] == e) {
      // Same orientation: (e' c, e b).
      Loop first = {rot[k]};
      first.insert(first.end(), c.begin(), c.end());
      Loop second = {e};
      second.insert(second.end(), b.begin(), b.end());
      raw.insert(raw.begin(), second);
      raw.insert(raw.begin(), first);
      out.push_back({OpKind::SplitPos, assemble(lat, std::move(raw), base),
                     {}, false, {}, -1.0});
    } else {
      // Opposite orientation: (c, b), both anchors erased.
      raw.insert(raw.begin(), b);
      raw.insert(raw.begin(), c);
      out.push_back({OpKind::SplitNeg, assemble(lat, std::move(raw), base),
                     {}, false, {}, +1.0});
    }
  }
  return out;
}

std::vector<OpResult> mergers(const Lattice& lat, const LatticeString& s,
                              EdgePos pos, double n) {
  require_designated(s, pos);
  if (n <= 0) throw std::invalid_argument("mergers: N must be positive");
  Loop rot_i = rotate_to(s.loops()[pos.loop], pos.offset);
  OriEdge e = rot_i[0];
  SiteId base = lat.tail(e);
  std::vector<OpResult> out;
  for (int j = 0; j < s.loop_count(); ++j) {
    if (j == pos.loop) continue;
    const Loop& lj = s.loops()[j];
    for (size_t k = 0; k < lj.size(); ++k) {
      if (lj[k].edge() != e.edge()) continue;
      Loop rot_j = rotate_to(lj, static_cast<int>(k));
      std::vector<Loop> rest;
      for (int m = 0; m < s.loop_count(); ++m)
        if (m != pos.loop && m != j) rest.push_back(s.loops()[m]);
      if (lj[k] == e) {
        // e' d c e b  ~  e (rest of loop i) e' (rest of loop j).
        Loop merged;
        merged.reserve(rot_i.size() + rot_j.size());
        merged.insert(merged.end(), rot_i.begin(), rot_i.end());
        merged.insert(merged.end(), rot_j.begin(), rot_j.end());
        rest.insert(rest.begin(), merged);
        out.push_back({OpKind::MergePos, assemble(lat, std::move(rest), base),
                       {}, false, {}, -1.0 / (n * n)});
      } else {
        // adcb  ~  (rest of loop i after e) (rest of loop j after e').
        Loop merged;
        merged.insert(merged.end(), rot_i.begin() + 1, rot_i.end());
        merged.insert(merged.end(), rot_j.begin() + 1, rot_j.end());
        rest.insert(rest.begin(), merged);
        out.push_back({OpKind::MergeNeg, assemble(lat, std::move(rest), base),
                       {}, false, {}, +1.0 / (n * n)});
      }
    }
  }
  return out;
}

namespace {

std::vector<OpResult> deformations_impl(const Lattice& lat,
                                        const LatticeString& s, EdgePos pos,
                                        const PlaquetteCountPos* k, double n,
                                        double beta) {
  require_designated(s, pos);
  if (n <= 0) throw std::invalid_argument("deformations: N must be positive");
  Loop rot = rotate_to(s.loops()[pos.loop], pos.offset);
  OriEdge e = rot[0];
  SiteId base = lat.tail(e);
  std::vector<OpResult> out;

  auto emit = [&](OriPlaq p, bool positive) {
    if (k && k->at(p.plaq()) == 0) return;
    Loop pl = plaquette_loop(lat, p);
    int anchor = -1;
    OriEdge match = positive ? e : e.inverse();
    for (int i = 0; i < 4; ++i)
      if (pl[i] == match) anchor = i;
    Loop prot = rotate_to(pl, anchor);
    std::vector<Loop> raw = other_loops(s, pos.loop);
    Loop result;
    if (positive) {
      // e (rest of loop) e' (rest of plaquette boundary).
      result.insert(result.end(), rot.begin(), rot.end());
      result.insert(result.end(), prot.begin(), prot.end());
    } else {
      // The plaquette path replaces the designated edge: c (rest of loop).
      result.insert(result.end(), prot.begin() + 1, prot.end());
      result.insert(result.end(), rot.begin() + 1, rot.end());
    }
    raw.insert(raw.begin(), std::move(result));
    OpResult r{positive ? OpKind::DeformPos : OpKind::DeformNeg,
               assemble(lat, std::move(raw), base),
               {},
               false,
               {},
               (positive ? -1.0 : +1.0) * beta / n};
    if (k) {
      r.count = *k;
      r.count.add(p.plaq(), -1);
      r.count_valid = true;
    }
    out.push_back(r);
  };

  for (OriPlaq p : lat.plaquettes_traversing(e)) emit(p, true);
  for (OriPlaq p : lat.plaquettes_traversing(e.inverse())) emit(p, false);
  return out;
}

}  // namespace

std::vector<OpResult> deformations(const Lattice& lat, const LatticeString& s,
                                   EdgePos pos, double n, double beta) {
  return deformations_impl(lat, s, pos, nullptr, n, beta);
}

std::vector<OpResult> deformations(const Lattice& lat, const LatticeString& s,
                                   EdgePos pos, const PlaquetteCountPos& k,
                                   double n, double beta) {
  return deformations_impl(lat, s, pos, &k, n, beta);
}

std::optional<PlaquetteSet> stuck_component(const Lattice& lat,
                                            const LatticeString& s,
                                            const PlaquetteSet& p) {
  if (s.is_null()) return std::nullopt;
  auto edges = string_edge_set(s);
  for (EdgeId e : edges) {
    bool covered = false;
    for (PlaqId q : lat.plaquettes_containing(e))
      if (p.contains(q)) {
        covered = true;
        break;
      }
    if (!covered) return std::nullopt;
  }
  // Components of p touching s, found by flooding inside p from the touching
  // plaquettes.
  std::vector<PlaqId> frontier;
  for (EdgeId e : edges)
    for (PlaqId q : lat.plaquettes_containing(e))
      if (p.contains(q)) frontier.push_back(q);
  std::sort(frontier.begin(), frontier.end());
  frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
  PlaquetteSet comp;
  while (!frontier.empty()) {
    PlaqId q = frontier.back();
    frontier.pop_back();
    if (comp.contains(q)) continue;
    comp.insert(q);
    for (PlaqId nb : lat.plaq_neighbors(q))
      if (p.contains(nb) && !comp.contains(nb)) frontier.push_back(nb);
  }
  return comp;
}

std::optional<EdgePos> good_edge(const Lattice& lat, const LatticeString& s,
                                 const PlaquetteSet& p) {
  if (s.is_null()) return std::nullopt;
  for (int li = 0; li < s.loop_count(); ++li) {
    const Loop& l = s.loops()[li];
    for (int o = 0; o < static_cast<int>(l.size()); ++o) {
      bool bad = false;
      for (PlaqId q : lat.plaquettes_containing(l[o].edge()))
        if (p.contains(q)) {
          bad = true;
          break;
        }
      if (!bad) return EdgePos{li, o};
    }
  }
  return std::nullopt;
}

std::vector<OpResult> revivals(const Lattice& lat, const Triple& t,
                               const PlaquetteSet& p, double n, double beta,
                               size_t cap) {
  auto comp = stuck_component(lat, t.s, p);
  if (!comp) throw std::invalid_argument("revivals: string is not stuck");
  PlaquetteSet boundary = boundary_of_set(lat, *comp, p);

  // Per boundary plaquette q the pair (j+, j-) ranges over j+ + j- <= K(q);
  // the all-zero assignment is excluded.
  struct Slot {
    PlaqId q;
    uint32_t kq;
  };
  std::vector<Slot> slots;
  size_t combos = 1;
  for (PlaqId q : boundary) {
    uint32_t kq = t.k.at(q);
    slots.push_back({q, kq});
    combos *= static_cast<size_t>(kq + 1) * (kq + 2) / 2;
    if (combos > cap)
      throw CapacityError("revivals: assignment cap exceeded");
  }

  PlaquetteCountPos k_zeroed = t.k;
  for (PlaqId q : boundary) k_zeroed.set(q, 0);
  PlaquetteSet q_after = t.q.unioned(*comp);

  std::vector<OpResult> out;
  std::vector<std::pair<uint32_t, uint32_t>> pick(slots.size());
  auto factorial = [](uint32_t m) {
    double f = 1;
    for (uint32_t i = 2; i <= m; ++i) f *= i;
    return f;
  };

  std::function<void(size_t)> rec = [&](size_t idx) {
    if (idx == slots.size()) {
      uint64_t total = 0;
      double fact = 1;
      for (auto [jp, jm] : pick) {
        total += jp + jm;
        fact *= factorial(jp) * factorial(jm);
      }
      if (total == 0) return;
      std::vector<Loop> raw;
      // Copies of oriented boundary loops in id order: positive orientation
      // of each plaquette first, then the negative one.
      for (size_t si = 0; si < slots.size(); ++si) {
        auto [jp, jm] = pick[si];
        for (uint32_t c = 0; c < jp; ++c)
          raw.push_back(plaquette_loop(lat, OriPlaq::positive(slots[si].q)));
        for (uint32_t c = 0; c < jm; ++c)
          raw.push_back(plaquette_loop(lat, OriPlaq::negative(slots[si].q)));
      }
      for (const Loop& l : t.s.loops()) raw.push_back(l);
      OpResult r;
      r.kind = OpKind::Revive;
      r.str = LatticeString::from_loops(lat, std::move(raw));
      r.count = k_zeroed;
      r.count_valid = true;
      r.q = q_after;
      r.coeff = std::pow(n * beta, static_cast<double>(total)) / fact;
      out.push_back(std::move(r));
      return;
    }
    for (uint32_t jp = 0; jp <= slots[idx].kq; ++jp)
      for (uint32_t jm = 0; jp + jm <= slots[idx].kq; ++jm) {
        pick[idx] = {jp, jm};
        rec(idx + 1);
      }
  };
  rec(0);
  return out;
}

}  // namespace loopeq
