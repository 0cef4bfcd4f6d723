#include "loopeq/lattice.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace loopeq {

PlaquetteSet::PlaquetteSet(std::vector<PlaqId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool PlaquetteSet::contains(PlaqId p) const {
  return std::binary_search(ids_.begin(), ids_.end(), p);
}

void PlaquetteSet::insert(PlaqId p) {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), p);
  if (it == ids_.end() || *it != p) ids_.insert(it, p);
}

void PlaquetteSet::erase(PlaqId p) {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), p);
  if (it != ids_.end() && *it == p) ids_.erase(it);
}

PlaquetteSet PlaquetteSet::unioned(const PlaquetteSet& other) const {
  std::vector<PlaqId> out;
  out.reserve(ids_.size() + other.ids_.size());
  std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(),
                 other.ids_.end(), std::back_inserter(out));
  PlaquetteSet r;
  r.ids_ = std::move(out);
  return r;
}

Lattice::Lattice(int L, int d) : L_(L), d_(d) {
  if (L < 1) throw std::invalid_argument("Lattice: L must be >= 1");
  if (d < 2) throw std::invalid_argument("Lattice: d must be >= 2");
  // Dense id spaces stay well inside int32 for every size used here.
  long long sites = 1;
  for (int k = 0; k < d; ++k) sites *= (2LL * L + 1);
  if (sites * d * axis_pairs() > (1LL << 30))
    throw std::invalid_argument("Lattice: box too large for dense cell ids");
  site_count_ = static_cast<int>(sites);

  pair_axes_.reserve(axis_pairs());
  pair_index_.assign(d * d, -1);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = mu + 1; nu < d; ++nu) {
      pair_index_[mu * d + nu] = static_cast<int>(pair_axes_.size());
      pair_axes_.push_back({static_cast<int8_t>(mu), static_cast<int8_t>(nu)});
    }

  for (SiteId s = 0; s < site_count_; ++s)
    for (int mu = 0; mu < d; ++mu)
      if (coord(s, mu) < L) edges_.push_back({s * d + mu});

  for (SiteId s = 0; s < site_count_; ++s)
    for (int pi = 0; pi < axis_pairs(); ++pi) {
      auto [mu, nu] = pair_axes_[pi];
      if (coord(s, mu) < L && coord(s, nu) < L)
        plaqs_.push_back({s * axis_pairs() + pi});
    }

  edge_to_plaqs_.assign(static_cast<size_t>(site_count_) * d, {});
  for (PlaqId p : plaqs_)
    for (EdgeId e : plaq_edges(p)) edge_to_plaqs_[e.v].push_back(p);
  for (auto& v : edge_to_plaqs_) std::sort(v.begin(), v.end());

  plaq_adjacency_.assign(static_cast<size_t>(site_count_) * axis_pairs(), {});
  for (PlaqId p : plaqs_) {
    std::vector<PlaqId> nbrs;
    for (EdgeId e : plaq_edges(p))
      for (PlaqId q : edge_to_plaqs_[e.v])
        if (q != p) nbrs.push_back(q);
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    plaq_adjacency_[p.v] = std::move(nbrs);
  }
}

bool Lattice::in_box(std::span<const int> coords) const {
  if (static_cast<int>(coords.size()) != d_) return false;
  for (int x : coords)
    if (x < -L_ || x > L_) return false;
  return true;
}

SiteId Lattice::site(std::span<const int> c) const {
  if (!in_box(c)) throw std::invalid_argument("Lattice::site: outside box");
  SiteId idx = 0;
  for (int k = d_ - 1; k >= 0; --k) idx = idx * side() + (c[k] + L_);
  return idx;
}

std::vector<int> Lattice::coords(SiteId s) const {
  std::vector<int> c(d_);
  for (int k = 0; k < d_; ++k) {
    c[k] = s % side() - L_;
    s /= side();
  }
  return c;
}

int Lattice::coord(SiteId s, int axis) const {
  for (int k = 0; k < axis; ++k) s /= side();
  return s % side() - L_;
}

std::optional<SiteId> Lattice::step(SiteId s, int axis, int dir) const {
  int x = coord(s, axis);
  if (x + dir < -L_ || x + dir > L_) return std::nullopt;
  int stride = 1;
  for (int k = 0; k < axis; ++k) stride *= side();
  return s + dir * stride;
}

bool Lattice::edge_valid(EdgeId e) const {
  if (e.v < 0 || e.v >= site_count_ * d_) return false;
  return coord(edge_tail(e), edge_axis(e)) < L_;
}

EdgeId Lattice::edge_at(SiteId tail, int axis) const {
  if (axis < 0 || axis >= d_ || tail < 0 || tail >= site_count_)
    throw std::invalid_argument("Lattice::edge_at: bad site or axis");
  if (coord(tail, axis) >= L_) return {};
  return {tail * d_ + axis};
}

SiteId Lattice::tail(OriEdge e) const {
  SiteId t = edge_tail(e.edge());
  if (e.is_forward()) return t;
  return *step(t, edge_axis(e.edge()), +1);
}

bool Lattice::plaq_valid(PlaqId p) const {
  if (p.v < 0 || p.v >= site_count_ * axis_pairs()) return false;
  auto [mu, nu] = pair_axes_[p.v % axis_pairs()];
  SiteId c = plaq_corner(p);
  return coord(c, mu) < L_ && coord(c, nu) < L_;
}

PlaqId Lattice::plaq_at(SiteId corner, int mu, int nu) const {
  if (mu > nu) std::swap(mu, nu);
  if (mu < 0 || nu >= d_ || mu == nu)
    throw std::invalid_argument("Lattice::plaq_at: bad axis pair");
  PlaqId p{corner * axis_pairs() + pair_index_[mu * d_ + nu]};
  if (!plaq_valid(p)) return {};
  return p;
}

std::pair<int, int> Lattice::plaq_axes(PlaqId p) const {
  auto [mu, nu] = pair_axes_[p.v % axis_pairs()];
  return {mu, nu};
}

std::array<OriEdge, 4> Lattice::boundary(OriPlaq p) const {
  auto [mu, nu] = plaq_axes(p.plaq());
  SiteId c = plaq_corner(p.plaq());
  SiteId c_mu = *step(c, mu, +1);
  SiteId c_nu = *step(c, nu, +1);
  // Positive: c --mu--> c+mu --nu--> c+mu+nu --(-mu)--> c+nu --(-nu)--> c.
  std::array<OriEdge, 4> pos = {
      OriEdge::forward(edge_at(c, mu)),
      OriEdge::forward(edge_at(c_mu, nu)),
      OriEdge::backward(edge_at(c_nu, mu)),
      OriEdge::backward(edge_at(c, nu)),
  };
  if (p.is_positive()) return pos;
  return {pos[3].inverse(), pos[2].inverse(), pos[1].inverse(),
          pos[0].inverse()};
}

std::array<EdgeId, 4> Lattice::plaq_edges(PlaqId p) const {
  auto b = boundary(OriPlaq::positive(p));
  return {b[0].edge(), b[1].edge(), b[2].edge(), b[3].edge()};
}

const std::vector<PlaqId>& Lattice::plaquettes_containing(EdgeId e) const {
  if (!edge_valid(e))
    throw std::invalid_argument("plaquettes_containing: invalid edge");
  return edge_to_plaqs_[e.v];
}

std::vector<OriPlaq> Lattice::plaquettes_traversing(OriEdge e) const {
  std::vector<OriPlaq> out;
  for (PlaqId q : plaquettes_containing(e.edge())) {
    OriPlaq cand = OriPlaq::positive(q);
    bool found = false;
    for (OriEdge b : boundary(cand))
      if (b == e) {
        found = true;
        break;
      }
    out.push_back(found ? cand : cand.inverse());
  }
  return out;
}

const std::vector<PlaqId>& Lattice::plaq_neighbors(PlaqId p) const {
  if (!plaq_valid(p))
    throw std::invalid_argument("plaq_neighbors: invalid plaquette");
  return plaq_adjacency_[p.v];
}

PlaquetteSet boundary_of_set(const Lattice& lat, const PlaquetteSet& q,
                             const PlaquetteSet& p) {
  for (PlaqId a : q)
    if (!p.contains(a))
      throw std::invalid_argument("boundary_of_set: q not within p");
  PlaquetteSet out;
  for (PlaqId a : q)
    for (PlaqId b : lat.plaq_neighbors(a))
      if (!p.contains(b) && !q.contains(b)) out.insert(b);
  return out;
}

std::vector<PlaquetteSet> enumerate_clusters(const Lattice& lat,
                                             std::span<const EdgeId> edges,
                                             int max_size, size_t cap) {
  if (max_size < 0) throw std::invalid_argument("enumerate_clusters: max_size");
  std::vector<PlaquetteSet> out;
  out.emplace_back();  // the empty set always qualifies
  if (max_size == 0) return out;

  // Seed plaquettes: those containing one of the given edges.  Every admissible
  // subset lies within graph distance max_size - 1 of a seed, so restrict the
  // universe to that ball before enumerating.
  std::set<PlaqId> seed_set;
  for (EdgeId e : edges)
    for (PlaqId p : lat.plaquettes_containing(e)) seed_set.insert(p);
  std::vector<PlaqId> universe(seed_set.begin(), seed_set.end());
  {
    std::set<PlaqId> ball = seed_set;
    std::vector<PlaqId> frontier = universe;
    for (int r = 1; r < max_size; ++r) {
      std::vector<PlaqId> next;
      for (PlaqId p : frontier)
        for (PlaqId nb : lat.plaq_neighbors(p))
          if (ball.insert(nb).second) next.push_back(nb);
      frontier = std::move(next);
      if (frontier.empty()) break;
    }
    universe.assign(ball.begin(), ball.end());
  }

  auto touches_seed = [&](PlaqId p) { return seed_set.count(p) != 0; };

  // Check that every connected component of c contains a seed plaquette.
  auto admissible = [&](const std::vector<PlaqId>& c) {
    std::vector<char> visited(c.size(), 0);
    for (size_t i = 0; i < c.size(); ++i) {
      if (visited[i]) continue;
      std::vector<size_t> stack = {i};
      visited[i] = 1;
      bool ok = false;
      std::vector<size_t> comp;
      while (!stack.empty()) {
        size_t j = stack.back();
        stack.pop_back();
        comp.push_back(j);
        if (touches_seed(c[j])) ok = true;
        for (PlaqId nb : lat.plaq_neighbors(c[j]))
          for (size_t k = 0; k < c.size(); ++k)
            if (!visited[k] && c[k] == nb) {
              visited[k] = 1;
              stack.push_back(k);
            }
      }
      if (!ok) return false;
    }
    return true;
  };

  std::vector<PlaqId> current;
  std::function<void(size_t)> rec = [&](size_t from) {
    if (!current.empty()) {
      if (admissible(current)) {
        if (out.size() >= cap)
          throw CapacityError("enumerate_clusters: subset cap exceeded");
        out.emplace_back(std::vector<PlaqId>(current));
      }
    }
    if (static_cast<int>(current.size()) == max_size) return;
    for (size_t i = from; i < universe.size(); ++i) {
      current.push_back(universe[i]);
      rec(i + 1);
      current.pop_back();
    }
  };
  rec(0);

  // Subsets that fail the component condition were enumerated and filtered;
  // for small max_size the universe is tight enough that this stays cheap.
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace loopeq
