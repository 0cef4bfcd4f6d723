#include "loopeq/strings.hpp"

#include <algorithm>
#include <cstring>

namespace loopeq {

namespace {

void validate_loop(const Lattice& lat, const Loop& loop) {
  if (loop.empty())
    throw std::invalid_argument("Loop: empty (use a null string instead)");
  for (OriEdge e : loop)
    if (!lat.edge_valid(e.edge()))
      throw std::invalid_argument("Loop: edge outside lattice");
  size_t n = loop.size();
  for (size_t i = 0; i < n; ++i) {
    OriEdge cur = loop[i];
    OriEdge nxt = loop[(i + 1) % n];
    if (lat.head(cur) != lat.tail(nxt))
      throw std::invalid_argument("Loop: consecutive edges not incident");
    if (nxt == cur.inverse())
      throw std::invalid_argument("Loop: contains a backtrack");
  }
  if (n < 4) throw std::invalid_argument("Loop: shorter than four edges");
}

Loop min_rotation(const Loop& loop) {
  size_t n = loop.size();
  size_t best = 0;
  for (size_t i = 1; i < n; ++i) {
    for (size_t k = 0; k < n; ++k) {
      int32_t a = loop[(i + k) % n].v;
      int32_t b = loop[(best + k) % n].v;
      if (a != b) {
        if (a < b) best = i;
        break;
      }
    }
  }
  Loop out(n);
  for (size_t k = 0; k < n; ++k) out[k] = loop[(best + k) % n];
  return out;
}

void append_i32(std::string& out, int32_t x) {
  char buf[4];
  std::memcpy(buf, &x, 4);
  out.append(buf, 4);
}

}  // namespace

LatticeString LatticeString::null_at(SiteId x) {
  LatticeString s;
  s.base_ = x;
  return s;
}

LatticeString LatticeString::from_loops(const Lattice& lat,
                                        std::vector<Loop> loops,
                                        SiteId base_for_null) {
  for (const Loop& l : loops) validate_loop(lat, l);
  LatticeString s;
  s.loops_ = std::move(loops);
  s.base_ = base_for_null;
  return s;
}

int LatticeString::total_length() const {
  int n = 0;
  for (const Loop& l : loops_) n += static_cast<int>(l.size());
  return n;
}

uint32_t PlaquetteCountPos::at(PlaqId p) const {
  auto it = std::lower_bound(v_.begin(), v_.end(), p,
                             [](const auto& a, PlaqId b) { return a.first < b; });
  return (it != v_.end() && it->first == p) ? it->second : 0;
}

void PlaquetteCountPos::set(PlaqId p, uint32_t n) {
  auto it = std::lower_bound(v_.begin(), v_.end(), p,
                             [](const auto& a, PlaqId b) { return a.first < b; });
  if (it != v_.end() && it->first == p) {
    if (n == 0)
      v_.erase(it);
    else
      it->second = n;
  } else if (n != 0) {
    v_.insert(it, {p, n});
  }
}

void PlaquetteCountPos::add(PlaqId p, int64_t delta) {
  int64_t cur = at(p);
  if (cur + delta < 0)
    throw std::invalid_argument("PlaquetteCountPos: negative count");
  set(p, static_cast<uint32_t>(cur + delta));
}

uint64_t PlaquetteCountPos::total() const {
  uint64_t t = 0;
  for (const auto& [p, n] : v_) t += n;
  return t;
}

PlaquetteSet PlaquetteCountPos::support() const {
  std::vector<PlaqId> ids;
  ids.reserve(v_.size());
  for (const auto& [p, n] : v_) ids.push_back(p);
  return PlaquetteSet(std::move(ids));
}

uint32_t PlaquetteCountOri::at(OriPlaq p) const {
  auto it = std::lower_bound(v_.begin(), v_.end(), p,
                             [](const auto& a, OriPlaq b) { return a.first < b; });
  return (it != v_.end() && it->first == p) ? it->second : 0;
}

void PlaquetteCountOri::set(OriPlaq p, uint32_t n) {
  auto it = std::lower_bound(v_.begin(), v_.end(), p,
                             [](const auto& a, OriPlaq b) { return a.first < b; });
  if (it != v_.end() && it->first == p) {
    if (n == 0)
      v_.erase(it);
    else
      it->second = n;
  } else if (n != 0) {
    v_.insert(it, {p, n});
  }
}

void PlaquetteCountOri::add(OriPlaq p, int64_t delta) {
  int64_t cur = at(p);
  if (cur + delta < 0)
    throw std::invalid_argument("PlaquetteCountOri: negative count");
  set(p, static_cast<uint32_t>(cur + delta));
}

uint64_t PlaquetteCountOri::total() const {
  uint64_t t = 0;
  for (const auto& [p, n] : v_) t += n;
  return t;
}

Loop erase_backtracks(Loop walk) {
  Loop stack;
  stack.reserve(walk.size());
  for (OriEdge e : walk) {
    if (!stack.empty() && stack.back() == e.inverse())
      stack.pop_back();
    else
      stack.push_back(e);
  }
  // Wrap-around cancellations: the word is cyclic.
  while (stack.size() >= 2 && stack.front() == stack.back().inverse()) {
    stack.pop_back();
    stack.erase(stack.begin());
  }
  return stack;
}

int iota_quarters(const LatticeString& s) {
  return s.total_length() - 4 * s.loop_count();
}

uint64_t occurrence_count(const Lattice& lat, const LatticeString& s,
                          const PlaquetteCountOri& j, OriEdge e) {
  uint64_t n = 0;
  for (const Loop& l : s.loops())
    for (OriEdge le : l)
      if (le == e) ++n;
  for (const auto& [p, cnt] : j.entries())
    for (OriEdge be : lat.boundary(p))
      if (be == e) n += cnt;
  return n;
}

uint64_t unoriented_occurrence_count(const Lattice& lat,
                                     const LatticeString& s,
                                     const PlaquetteCountPos& k, EdgeId e) {
  uint64_t n = 0;
  for (const Loop& l : s.loops())
    for (OriEdge le : l)
      if (le.edge() == e) ++n;
  for (PlaqId p : lat.plaquettes_containing(e)) n += k.at(p);
  return n;
}

std::map<EdgeId, int64_t> edge_flux(const Lattice&, const LatticeString& s) {
  std::map<EdgeId, int64_t> flux;
  for (const Loop& l : s.loops())
    for (OriEdge e : l) flux[e.edge()] += e.is_forward() ? +1 : -1;
  return flux;
}

std::map<EdgeId, int64_t> edge_flux(const Lattice& lat, const LatticeString& s,
                                    const PlaquetteCountOri& j) {
  auto flux = edge_flux(lat, s);
  for (const auto& [p, cnt] : j.entries())
    for (OriEdge e : lat.boundary(p))
      flux[e.edge()] += (e.is_forward() ? +1 : -1) * static_cast<int64_t>(cnt);
  return flux;
}

bool is_balanced(const Lattice& lat, const LatticeString& s,
                 const PlaquetteCountOri& j) {
  for (const auto& [e, f] : edge_flux(lat, s, j))
    if (f != 0) return false;
  return true;
}

std::vector<EdgeId> string_edge_set(const LatticeString& s) {
  std::vector<EdgeId> out;
  for (const Loop& l : s.loops())
    for (OriEdge e : l) out.push_back(e.edge());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string canonical_key(const LatticeString& s) {
  std::string out;
  if (s.is_null()) {
    out.push_back('N');
    return out;
  }
  std::vector<Loop> rotated;
  rotated.reserve(s.loops().size());
  for (const Loop& l : s.loops()) rotated.push_back(min_rotation(l));
  std::sort(rotated.begin(), rotated.end());
  out.push_back('S');
  append_i32(out, static_cast<int32_t>(rotated.size()));
  for (const Loop& l : rotated) {
    append_i32(out, static_cast<int32_t>(l.size()));
    for (OriEdge e : l) append_i32(out, e.v);
  }
  return out;
}

std::string key_to_hex(const std::string& key) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(key.size() * 2);
  for (unsigned char c : key) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

LatticeString canonical_string(const LatticeString& s) {
  if (s.is_null()) return LatticeString::null_at(s.basepoint());
  std::vector<Loop> rotated;
  rotated.reserve(s.loops().size());
  for (const Loop& l : s.loops()) rotated.push_back(min_rotation(l));
  std::sort(rotated.begin(), rotated.end());
  // Rotation and reordering preserve loop validity, so skip revalidation.
  LatticeString out;
  out.loops_ = std::move(rotated);
  out.base_ = s.basepoint();
  return out;
}

LatticeString random_string(const Lattice& lat, CounterRng& rng, int max_len,
                            int max_loops) {
  if (max_len < 4 || max_loops < 1)
    throw std::invalid_argument("random_string: need max_len >= 4, max_loops >= 1");
  for (int attempt = 0; attempt < 32; ++attempt) {
    int want = 1 + static_cast<int>(rng.below(max_loops));
    std::vector<Loop> loops;
    bool ok = true;
    for (int li = 0; li < want && ok; ++li) {
      Loop loop;
      bool built = false;
      for (int tries = 0; tries < 16 && !built; ++tries) {
        int half = 2 + static_cast<int>(rng.below(std::max(1, max_len / 2 - 1)));
        // Zero-sum step multiset: h random signed axes plus their inverses,
        // shuffled, gives a closed walk from any start point.
        std::vector<int> steps;  // signed axis, +-(axis+1)
        steps.reserve(2 * half);
        for (int k = 0; k < half; ++k) {
          int axis = static_cast<int>(rng.below(lat.d()));
          int sgn = rng.below(2) ? 1 : -1;
          steps.push_back(sgn * (axis + 1));
          steps.push_back(-sgn * (axis + 1));
        }
        for (size_t k = steps.size(); k > 1; --k)
          std::swap(steps[k - 1], steps[rng.below(k)]);

        SiteId start = static_cast<SiteId>(rng.below(lat.site_count()));
        SiteId at = start;
        Loop walk;
        bool inside = true;
        for (int st : steps) {
          int axis = std::abs(st) - 1;
          int dir = st > 0 ? +1 : -1;
          auto nxt = lat.step(at, axis, dir);
          if (!nxt) {
            inside = false;
            break;
          }
          EdgeId e = dir > 0 ? lat.edge_at(at, axis) : lat.edge_at(*nxt, axis);
          walk.push_back(dir > 0 ? OriEdge::forward(e) : OriEdge::backward(e));
          at = *nxt;
        }
        if (!inside) continue;
        Loop reduced = erase_backtracks(std::move(walk));
        if (reduced.empty() || static_cast<int>(reduced.size()) > max_len)
          continue;
        loop = std::move(reduced);
        built = true;
      }
      if (!built)
        ok = false;
      else
        loops.push_back(std::move(loop));
    }
    if (ok) return LatticeString::from_loops(lat, std::move(loops));
  }
  return LatticeString::null_at(static_cast<SiteId>(rng.below(lat.site_count())));
}

Loop plaquette_loop(const Lattice& lat, OriPlaq p) {
  auto b = lat.boundary(p);
  return Loop(b.begin(), b.end());
}

Loop rectangular_loop(const Lattice& lat, SiteId corner, int mu, int nu, int r,
                      int s) {
  if (r < 1 || s < 1)
    throw std::invalid_argument("rectangular_loop: sides must be >= 1");
  if (mu == nu || mu < 0 || nu < 0 || mu >= lat.d() || nu >= lat.d())
    throw std::invalid_argument("rectangular_loop: bad axes");
  Loop out;
  SiteId at = corner;
  auto push = [&](int axis, int dir) {
    auto nxt = lat.step(at, axis, dir);
    if (!nxt)
      throw std::invalid_argument("rectangular_loop: leaves the box");
    EdgeId e = dir > 0 ? lat.edge_at(at, axis) : lat.edge_at(*nxt, axis);
    out.push_back(dir > 0 ? OriEdge::forward(e) : OriEdge::backward(e));
    at = *nxt;
  };
  for (int k = 0; k < r; ++k) push(mu, +1);
  for (int k = 0; k < s; ++k) push(nu, +1);
  for (int k = 0; k < r; ++k) push(mu, -1);
  for (int k = 0; k < s; ++k) push(nu, -1);
  return out;
}

}  // namespace loopeq
