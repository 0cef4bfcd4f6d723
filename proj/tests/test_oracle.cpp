#include <doctest.h>

#include <cmath>
#include <loopeq/oracle.hpp>
#include <loopeq/trunc_exp.hpp>

#include "common.hpp"

using namespace loopeq;
using namespace loopeq::testutil;

TEST_CASE("matrix helpers") {
  CMatrix i2 = CMatrix::identity(2);
  CHECK(trace(i2) == Complex{2.0, 0.0});
  CHECK(unitarity_defect(i2) == doctest::Approx(0.0));

  CMatrix a(2), b(2);
  a.at(0, 0) = {1, 1};
  a.at(0, 1) = {2, 0};
  a.at(1, 0) = {0, -1};
  a.at(1, 1) = {1, 0};
  b.at(0, 0) = {0, 1};
  b.at(1, 0) = {1, 0};
  b.at(1, 1) = {3, 0};
  CMatrix c = matmul(a, b);
  CHECK(c.at(0, 0) == Complex{1, 1});   // (1+i)i + 2*1 = i + i^2 + 2
  CHECK(c.at(0, 1) == Complex{6, 0});
  CHECK(c.at(1, 0) == Complex{2, 0});   // -i*i + 1
  CHECK(c.at(1, 1) == Complex{3, 0});
  CMatrix ad = adjoint(a);
  CHECK(ad.at(0, 1) == Complex{0, 1});
  CHECK(ad.at(1, 0) == Complex{2, 0});
}

TEST_CASE("haar samples are unitary and phase-corrected") {
  CounterRng rng(2024, 0);
  for (int n : {1, 2, 3, 5}) {
    for (int rep = 0; rep < 5; ++rep) {
      CMatrix u = sample_haar_unitary(n, rng);
      CHECK(u.n == n);
      CHECK(unitarity_defect(u) < 1e-12);
    }
  }
  // E |tr u|^2 = 1/N^2 * E |Tr|^2 = 1/N^2 for Haar SU-invariant measure.
  const int reps = 4000, n = 3;
  double acc = 0;
  for (int rep = 0; rep < reps; ++rep) {
    CMatrix u = sample_haar_unitary(n, rng);
    Complex t = trace(u);
    acc += std::norm(t);
  }
  // E |Tr U|^2 = 1 for Haar on U(N).
  CHECK(acc / reps == doctest::Approx(1.0).epsilon(0.12));
}

TEST_CASE("gauge configurations and Wilson values") {
  Lattice lat(1, 2);
  CounterRng rng(5, 0);
  GaugeConfig cfg = sample_gauge_config(lat, 3, rng);
  // Slot-indexed by EdgeId::v = site * d + axis; boundary slots stay unused.
  REQUIRE((int)cfg.u.size() == lat.site_count() * lat.d());

  Loop l = ploop2(lat, 0, 0);
  Complex w = wilson_loop_value(lat, cfg, l);
  CHECK(std::abs(w) <= 1.0 + 1e-12);

  // Reversal conjugates.
  Loop r;
  for (auto it = l.rbegin(); it != l.rend(); ++it) r.push_back(it->inverse());
  Complex wr = wilson_loop_value(lat, cfg, r);
  CHECK(wr.real() == doctest::Approx(w.real()));
  CHECK(wr.imag() == doctest::Approx(-w.imag()));

  // Oriented access: backward is the adjoint.
  EdgeId e = lat.edges()[0];
  CMatrix fwd = cfg.oriented(OriEdge::forward(e));
  CMatrix bwd = cfg.oriented(OriEdge::backward(e));
  CMatrix prod = matmul(fwd, bwd);
  CHECK(unitarity_defect(CMatrix::identity(3)) ==
        doctest::Approx(0.0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(prod.at(i, j) - (i == j ? Complex{1, 0} : Complex{0, 0})) <
            1e-12);

  // Strings multiply loop values; the null string is one.
  auto s2 = LatticeString::from_loops(lat, {l, l});
  Complex ws = wilson_string_value(lat, cfg, s2);
  CHECK(ws.real() == doctest::Approx((w * w).real()));
  CHECK(wilson_string_value(lat, cfg, LatticeString::null_at(0)) ==
        Complex{1.0, 0.0});
}

TEST_CASE("gauge invariance of observables and weights") {
  Lattice lat(1, 2);
  CounterRng rng(6, 0);
  GaugeConfig cfg = sample_gauge_config(lat, 2, rng);
  double beta = 0.3;

  std::vector<Complex> w0;
  for (PlaqId p : lat.plaqs())
    w0.push_back(wilson_loop_value(lat, cfg,
                                   plaquette_loop(lat, OriPlaq::positive(p))));
  auto x0 = plaquette_actions(lat, cfg, beta);

  CMatrix g = sample_haar_unitary(2, rng);
  gauge_transform(lat, cfg, site2(lat, 0, 0), g);

  std::vector<Complex> w1;
  for (PlaqId p : lat.plaqs())
    w1.push_back(wilson_loop_value(lat, cfg,
                                   plaquette_loop(lat, OriPlaq::positive(p))));
  auto x1 = plaquette_actions(lat, cfg, beta);
  for (size_t i = 0; i < w0.size(); ++i)
    CHECK(std::abs(w0[i] - w1[i]) < 1e-12);
  for (size_t i = 0; i < x0.size(); ++i)
    CHECK(x0[i] == doctest::Approx(x1[i]).epsilon(1e-12));
}

TEST_CASE("action weights compose truncations and tails") {
  Lattice lat(1, 2);
  auto ps = lat.plaqs();
  REQUIRE(ps.size() == 4);
  // Slot-indexed by PlaqId::v = corner site * axis pairs; invalid slots idle.
  std::vector<double> x(
      static_cast<size_t>(lat.site_count()) * lat.axis_pairs());
  const std::vector<double> vals{0.3, -0.2, 0.05, 0.7};
  for (size_t i = 0; i < ps.size(); ++i) x[ps[i].v] = vals[i];

  ActionWeights full;
  double manual = std::exp(0.3 - 0.2 + 0.05 + 0.7);
  CHECK(action_weight(lat, full, x) == doctest::Approx(manual));

  ActionWeights mixed;
  mixed.full = false;
  mixed.b = 3;
  mixed.k.set(ps[0], 2);
  mixed.k.set(ps[1], 3);
  mixed.bad.insert(ps[3]);
  // Third plaquette has no budget entry: degree zero keeps factor 1.
  double want = exp_trunc(0.3, 2) * exp_trunc(-0.2, 3) * exp_trunc(0.05, 0) *
                exp_tail(0.7, 3);
  CHECK(action_weight(lat, mixed, x) == doctest::Approx(want));
}

TEST_CASE("batch table estimate") {
  McBatchTable t;
  t.samples_per_batch = 10;
  t.batch_means = {{Complex{1.0, 0.0}, Complex{3.0, 0.0}}};
  McEstimate e = t.estimate(0);
  CHECK(e.mean == Complex{2.0, 0.0});
  // se = sqrt(sum |m - mean|^2 / (b(b-1))) = sqrt(2/2) = 1
  CHECK(e.se == doctest::Approx(1.0));
  CHECK(e.samples == 20);
}

TEST_CASE("monte carlo runs are thread-count invariant") {
  Lattice lat(1, 2);
  auto s = pstring2(lat, 0, 0);
  ActionWeights full;
  McOptions o;
  o.samples = 4000;
  o.batches = 8;
  o.seed = 99;
  o.threads = 1;
  auto t1 = mc_string_integrals(lat, 2, 0.2, {s}, {full}, o);
  o.threads = 3;
  auto t3 = mc_string_integrals(lat, 2, 0.2, {s}, {full}, o);
  REQUIRE(t1.batch_means[0].size() == t3.batch_means[0].size());
  for (size_t b = 0; b < t1.batch_means[0].size(); ++b)
    CHECK(t1.batch_means[0][b] == t3.batch_means[0][b]);
}

TEST_CASE("wilson expectation matches the 2d character expansion") {
  Lattice lat(1, 2);
  McOptions o;
  o.samples = 200'000;
  o.seed = 12;
  o.threads = 4;
  double beta = 0.2;
  McEstimate e = mc_wilson_expectation(lat, ploop2(lat, 0, 0), 1, beta, o);
  double want = u1_wilson_2d(1, beta);
  CHECK(std::abs(e.mean.real() - want) <= 3.0 * e.se);
  CHECK(std::abs(e.mean.imag()) <= 3.0 * e.se);
  CHECK(e.se < 0.01);
}

TEST_CASE("mc_phi agrees across doubled samples") {
  Lattice lat(1, 2);
  auto s = pstring2(lat, 0, 0);
  ActionWeights w;
  w.full = false;
  w.b = 2;
  for (PlaqId p : lat.plaqs()) w.k.set(p, 2);
  McOptions o;
  o.seed = 3;
  o.threads = 2;
  o.samples = 50'000;
  McEstimate e1 = mc_phi(lat, s, w, 1, 0.1, o);
  o.samples = 100'000;
  o.stream_base = 1000;
  McEstimate e2 = mc_phi(lat, s, w, 1, 0.1, o);
  CHECK(std::abs(e1.mean - e2.mean) <= 3.0 * (e1.se + e2.se));
}

TEST_CASE("exact u1 monomial equals the balance indicator") {
  Lattice lat(2, 2);
  PlaqId p = plaq2(lat, 0, 0);
  auto s = pstring2(lat, 0, 0);
  PlaquetteCountOri j;
  CHECK(exact_u1_monomial(lat, s, j) == 0);
  j.set(OriPlaq::negative(p), 1);
  CHECK(exact_u1_monomial(lat, s, j) == 1);
  j.set(OriPlaq::negative(p), 2);
  CHECK(exact_u1_monomial(lat, s, j) == 0);
  CHECK(exact_u1_monomial(lat, LatticeString::null_at(0), {}) == 1);

  CounterRng rng(8, 0);
  for (int it = 0; it < 300; ++it) {
    auto t = random_string(lat, rng, 12, 2);
    PlaquetteCountOri jj;
    int picks = (int)rng.below(4);
    for (int k = 0; k < picks; ++k) {
      PlaqId q = lat.plaqs()[rng.below(lat.plaqs().size())];
      jj.add(rng.below(2) ? OriPlaq::positive(q) : OriPlaq::negative(q), 1);
    }
    CHECK(exact_u1_monomial(lat, t, jj) == (is_balanced(lat, t, jj) ? 1 : 0));
  }
}

TEST_CASE("exact u1 phi base cases") {
  Lattice lat(1, 2);
  double beta = 0.17;
  CHECK(exact_u1_phi(lat, LatticeString::null_at(0), PlaquetteCountPos{},
                     beta) == doctest::Approx(1.0));

  auto s = pstring2(lat, 0, 0);
  PlaqId p = plaq2(lat, 0, 0);
  PlaquetteCountPos k1;
  k1.set(p, 1);
  CHECK(exact_u1_phi(lat, s, k1, beta) == doctest::Approx(beta));
  PlaquetteCountPos k2;
  k2.set(p, 2);
  CHECK(exact_u1_phi(lat, s, k2, beta) == doctest::Approx(beta));
  PlaquetteCountPos k3;
  k3.set(p, 3);
  CHECK(exact_u1_phi(lat, s, k3, beta) ==
        doctest::Approx(beta + beta * beta * beta / 2));

  // Monotone in each budget entry for positive beta.
  PlaquetteCountPos lo, hi;
  for (PlaqId q : lat.plaqs()) {
    lo.set(q, 1);
    hi.set(q, 3);
  }
  double a = exact_u1_phi(lat, LatticeString::null_at(0), lo, beta);
  double b = exact_u1_phi(lat, LatticeString::null_at(0), hi, beta);
  CHECK(a >= 1.0);
  CHECK(b >= a);

  // Work cap guards runaway enumeration.
  U1Options tiny;
  tiny.work_cap = 1;
  PlaquetteCountPos big;
  for (PlaqId q : lat.plaqs()) big.set(q, 6);
  CHECK_THROWS_AS(exact_u1_phi(lat, LatticeString::null_at(0), big, 0.3, tiny),
                  CapacityError);
}

TEST_CASE("bessel ratio and 2d wilson oracle") {
  CHECK(bessel_i(0, 0.0) == doctest::Approx(1.0));
  CHECK(bessel_i(1, 0.0) == doctest::Approx(0.0));
  double r = bessel_i(1, 0.2) / bessel_i(0, 0.2);
  CHECK(r == doctest::Approx(0.099503310573912637).epsilon(1e-13));
  // Recurrence I_{v-1}(x) - I_{v+1}(x) = (2v/x) I_v(x).
  double x = 0.7;
  CHECK(bessel_i(0, x) - bessel_i(2, x) ==
        doctest::Approx(2.0 / x * bessel_i(1, x)).epsilon(1e-12));
  CHECK_THROWS_AS(bessel_i(-1, 1.0), std::invalid_argument);

  CHECK(u1_wilson_2d(0, 0.1) == doctest::Approx(1.0));
  CHECK(u1_wilson_2d(3, 0.1) == doctest::Approx(std::pow(r, 3)));
}

TEST_CASE("loop equation residual is statistically zero") {
  Lattice lat(1, 2);
  auto s = pstring2(lat, 0, 0);
  McOptions o;
  o.samples = 40'000;
  o.seed = 21;
  o.threads = 4;
  McResidual res = mc_loop_equation_residual(lat, s, {0, 0}, 2, 0.1, o);
  CHECK(res.term_count >= 4);
  CHECK(std::abs(res.mean) <= 4.0 * res.se);
  CHECK(res.lhs.se > 0);
}
