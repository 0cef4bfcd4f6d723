#include "loopeq/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "loopeq/area.hpp"
#include "loopeq/string_ops.hpp"
#include "loopeq/strings.hpp"

namespace loopeq {
namespace {

std::string describe(const Lattice& lat, const LatticeString& s,
                     EdgePos pos) {
  std::string out = "L=" + std::to_string(lat.L()) +
                    " d=" + std::to_string(lat.d()) + " loops=[";
  for (const Loop& l : s.loops()) {
    out += "(";
    for (OriEdge e : l) out += std::to_string(e.v) + " ";
    out += ")";
  }
  out += "] pos=" + std::to_string(pos.loop) + ":" +
         std::to_string(pos.offset);
  return out;
}

class Sweep {
 public:
  Sweep(const InvariantSuiteOptions& opt, InvariantReport& rep)
      : opt_(opt), rep_(rep) {}

  void run() {
    for (auto [L, d] : opt_.lattices) {
      Lattice lat(L, d);
      run_class(lat, "split", 0);
      run_class(lat, "merge", 1);
      run_class(lat, "deform", 2);
      run_class(lat, "revive", 3);
    }
  }

 private:
  void check(const char* lemma, bool ok, const Lattice& lat,
             const LatticeString& s, EdgePos pos, const char* what) {
    InvariantCounts& c = rep_.lemmas[lemma];
    ++c.checks;
    if (!ok) {
      ++c.violations;
      if (rep_.witnesses.size() < opt_.witness_cap)
        rep_.witnesses.push_back(
            {lemma, std::string(what) + " @ " + describe(lat, s, pos)});
    }
  }

  // First loop-major position admitting the class, or nullopt.
  std::optional<EdgePos> find_anchor(const Lattice& lat,
                                     const LatticeString& s, int cls,
                                     double n) {
    if (cls >= 2) return EdgePos{0, 0};  // deform and revive anchor anywhere
    for (int li = 0; li < s.loop_count(); ++li)
      for (int off = 0; off < (int)s.loops()[li].size(); ++off) {
        EdgePos pos{li, off};
        if (cls == 0 && !splittings(lat, s, pos).empty()) return pos;
        if (cls == 1 && !mergers(lat, s, pos, n).empty()) return pos;
      }
    return std::nullopt;
  }

  void run_class(const Lattice& lat, const char* lemma, int cls) {
    const double n = 2.0, beta = 0.1;
    CounterRng rng(opt_.seed, (uint64_t)cls * 64 + (uint64_t)lat.d());
    InvariantCounts& cc = rep_.lemmas[lemma];
    long long done = 0, attempts = 0;
    long long attempts_cap = opt_.cases * 4000;
    while (done < opt_.cases && attempts < attempts_cap) {
      ++attempts;
      ++rep_.generation_attempts;
      LatticeString s = random_string(lat, rng, opt_.max_len, opt_.max_loops);
      if (s.is_null()) continue;
      if (cls == 1 && s.loop_count() < 2) continue;
      auto pos = find_anchor(lat, s, cls, n);
      if (!pos) continue;
      ++done;
      ++cc.cases;
      int iota = iota_quarters(s);
      AreaResult a0 = area(lat, s, opt_.area_cap);
      switch (cls) {
        case 0:
          check_splits(lat, s, *pos, iota, a0);
          break;
        case 1:
          check_merges(lat, s, *pos, iota, a0, n);
          break;
        case 2:
          check_deforms(lat, s, *pos, iota, a0, n, beta);
          break;
        case 3:
          check_revivals(lat, s, *pos, iota, rng, n, beta);
          break;
      }
    }
  }

  int biased_iota(const LatticeString& s) const {
    return iota_quarters(s) + opt_.iota_bias_quarters;
  }

  // 2dB with the smallest B covering the maximal edge occupancy of s.
  long long occupancy_bound(const Lattice& lat, const LatticeString& s) {
    PlaquetteCountPos none;
    uint64_t occ = 0;
    for (EdgeId e : string_edge_set(s))
      occ = std::max(occ, unoriented_occurrence_count(lat, s, none, e));
    long long two_d = 2 * lat.d();
    long long b = std::max<long long>(1, ((long long)occ + two_d - 1) / two_d);
    return two_d * b;
  }

  void check_splits(const Lattice& lat, const LatticeString& s, EdgePos pos,
                    int iota, const AreaResult& a0) {
    auto res = splittings(lat, s, pos);
    ++rep_.lemmas["counts"].cases;
    check("counts", (long long)res.size() <= occupancy_bound(lat, s), lat, s,
          pos, "splittings exceed 2dB");
    for (const OpResult& r : res) {
      check("split", biased_iota(r.str) <= iota - 4, lat, s, pos,
            "iota drop below one");
      if (a0.bounded) {
        AreaResult a1 = area(lat, r.str, opt_.area_cap);
        check("split", a1.bounded && a1.value == a0.value, lat, s, pos,
              "area changed");
      }
    }
  }

  void check_merges(const Lattice& lat, const LatticeString& s, EdgePos pos,
                    int iota, const AreaResult& a0, double n) {
    auto res = mergers(lat, s, pos, n);
    ++rep_.lemmas["counts"].cases;
    check("counts", (long long)res.size() <= occupancy_bound(lat, s), lat, s,
          pos, "mergers exceed 2dB");
    for (const OpResult& r : res) {
      check("merge", biased_iota(r.str) <= iota + 4, lat, s, pos,
            "iota growth above one");
      if (a0.bounded) {
        AreaResult a1 = area(lat, r.str, opt_.area_cap);
        check("merge", a1.bounded && a1.value == a0.value, lat, s, pos,
              "area changed");
      }
    }
  }

  void check_deforms(const Lattice& lat, const LatticeString& s, EdgePos pos,
                     int iota, const AreaResult& a0, double n, double beta) {
    auto res = deformations(lat, s, pos, n, beta);
    check("deform", (long long)res.size() <= 4 * lat.d(), lat, s, pos,
          "more than 4d deformations");
    for (const OpResult& r : res) {
      check("deform", biased_iota(r.str) <= iota + 4, lat, s, pos,
            "iota growth above one");
      if (a0.bounded) {
        AreaResult a1 = area(lat, r.str, opt_.area_cap + 1);
        check("deform", !a1.bounded || a0.value <= a1.value + 1, lat, s, pos,
              "area dropped by more than one");
      }
    }
  }

  void check_revivals(const Lattice& lat, const LatticeString& s, EdgePos pos,
                      int iota, CounterRng& rng, double n, double beta) {
    // Stuck by construction: cover every traversed edge with bad plaquettes.
    PlaquetteSet bad;
    for (EdgeId e : string_edge_set(s))
      for (PlaqId p : lat.plaquettes_containing(e)) bad.insert(p);
    auto comp = stuck_component(lat, s, bad);
    check("revive", comp.has_value(), lat, s, pos, "covered string not stuck");
    if (!comp) return;
    check("revive",
          (long long)boundary_of_set(lat, *comp, bad).size() <=
              8 * (lat.d() - 1) * (long long)comp->size(),
          lat, s, pos, "boundary inequality");

    // Small random budget on the revival boundary keeps the set enumerable.
    PlaquetteSet bd = boundary_of_set(lat, *comp, bad);
    PlaquetteCountPos k;
    long long expect = 1;
    if (!bd.empty()) {
      for (int j = 0; j < 3; ++j) {
        PlaqId p = bd.ids()[rng.below(bd.ids().size())];
        if (k.at(p) != 0) continue;
        uint32_t v = 1 + (uint32_t)rng.below(2);
        k.set(p, v);
        expect *= (long long)(v + 1) * (v + 2) / 2;
      }
    }
    auto res = revivals(lat, Triple{s, k, {}}, bad, n, beta);
    check("revive", (long long)res.size() == expect - 1, lat, s, pos,
          "revival count mismatch");
    for (const OpResult& r : res) {
      check("revive", biased_iota(r.str) == iota, lat, s, pos,
            "iota changed");
      check("revive", r.q == *comp, lat, s, pos, "absorbed set mismatch");
      bool zeroed = true;
      for (PlaqId p : bd)
        if (r.count.at(p) != 0) zeroed = false;
      check("revive", r.count_valid && zeroed, lat, s, pos,
            "budget not cleared on the boundary");
      check("revive", r.coeff > 0, lat, s, pos, "non-positive weight");
    }
  }

  const InvariantSuiteOptions& opt_;
  InvariantReport& rep_;
};

}  // namespace

long long InvariantReport::total_checks() const {
  long long t = 0;
  for (auto& [k, v] : lemmas) t += v.checks;
  return t;
}

long long InvariantReport::total_violations() const {
  long long t = 0;
  for (auto& [k, v] : lemmas) t += v.violations;
  return t;
}

bool InvariantReport::passed() const {
  return total_checks() > 0 && total_violations() == 0;
}

std::string InvariantReport::to_csv() const {
  std::string out = "lemma,cases,checks,violations\n";
  for (auto& [k, v] : lemmas) {
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%lld,%lld,%lld\n", k.c_str(),
                  v.cases, v.checks, v.violations);
    out += line;
  }
  return out;
}

InvariantReport run_invariant_suite(const InvariantSuiteOptions& opt) {
  InvariantReport rep;
  Sweep(opt, rep).run();
  return rep;
}

}  // namespace loopeq
