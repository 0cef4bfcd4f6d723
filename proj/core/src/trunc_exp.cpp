#include "loopeq/trunc_exp.hpp"

#include <mpfr.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace loopeq {

RegimeReport validate_parameters(const ModelParams& p) {
  if (p.d < 2) throw std::invalid_argument("validate_parameters: d must be >= 2");
  if (p.n < 1 || p.beta < 0 || p.b < 1)
    throw std::invalid_argument("validate_parameters: need N >= 1, beta >= 0, B >= 1");
  RegimeReport r;
  double d = p.d;
  r.n_min = 1e10 * std::pow(d, 10.0);
  r.beta_max = std::pow(10.0, -10.0 * d) / d;
  r.b_lo = 1e-3 * p.n / (2 * d);
  r.b_hi = 1e-3 * p.n / d;
  r.n_ok = p.n >= r.n_min;
  r.beta_ok = p.beta <= r.beta_max;
  r.b_range_ok = static_cast<double>(p.b) >= r.b_lo &&
                 static_cast<double>(p.b) <= r.b_hi;
  r.b_odd = (p.b % 2) == 1;
  r.in_regime = r.n_ok && r.beta_ok && r.b_range_ok && r.b_odd;
  r.coupling_ratio = 2 * d * p.n * p.beta / static_cast<double>(p.b);
  r.truncation_ratio = d * static_cast<double>(p.b) / p.n;
  return r;
}

double exp_trunc(double x, long long k) {
  if (k < 0) throw std::invalid_argument("exp_trunc: k must be >= 0");
  double sum = 1.0, comp = 0.0, term = 1.0;
  for (long long j = 1; j <= k; ++j) {
    term *= x / static_cast<double>(j);
    // Kahan update.
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (std::abs(term) < 1e-20 * std::abs(sum) && j > std::abs(x)) break;
  }
  return sum;
}

double exp_tail(double x, long long k) {
  if (k < 0) throw std::invalid_argument("exp_tail: k must be >= 0");
  // Leading term x^{k+1}/(k+1)!; in double it may underflow, in which case
  // the tail is zero at this precision.
  double term = 1.0;
  for (long long j = 1; j <= k + 1; ++j) {
    term *= x / static_cast<double>(j);
    if (term == 0.0) return 0.0;
  }
  double sum = 0.0, comp = 0.0;
  for (long long j = k + 1;; ++j) {
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    term *= x / static_cast<double>(j + 1);
    if (std::abs(term) < 1e-20 * std::abs(sum) || term == 0.0) break;
    if (j > k + 1000000) break;
  }
  return sum;
}

namespace {

// Minimal RAII wrapper over one mpfr_t at a fixed precision.
class Big {
 public:
  explicit Big(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  Big(const Big& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Big& operator=(const Big& o) {
    mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  ~Big() { mpfr_clear(v_); }
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

struct Scratch {
  mpfr_prec_t prec;
  explicit Scratch(mpfr_prec_t p) : prec(p) {}
  Big make(double init = 0.0) {
    Big b(prec);
    mpfr_set_d(b.get(), init, MPFR_RNDN);
    return b;
  }
};

// tail_k(x) = sum_{j > k} x^j / j!, evaluated from the leading term via
// logs (safe for k ~ 10^10) and a fast-converging ratio series.
Big tail_big(Scratch& sc, double x, long long k) {
  Big t = sc.make();
  if (x == 0.0) return t;
  // log |x|^{k+1} / (k+1)!  =  (k+1) log|x| - lgamma(k+2)
  Big logx = sc.make(std::abs(x));
  mpfr_log(logx.get(), logx.get(), MPFR_RNDN);
  mpfr_mul_si(logx.get(), logx.get(), k + 1, MPFR_RNDN);
  Big lg = sc.make(static_cast<double>(k) + 2.0);
  int sgn = 0;
  mpfr_lgamma(lg.get(), &sgn, lg.get(), MPFR_RNDN);
  mpfr_sub(logx.get(), logx.get(), lg.get(), MPFR_RNDN);
  mpfr_exp(t.get(), logx.get(), MPFR_RNDN);
  if (x < 0 && ((k + 1) % 2) == 1) mpfr_neg(t.get(), t.get(), MPFR_RNDN);

  Big sum = sc.make();
  Big term = t;
  Big xx = sc.make(x);
  for (long long j = k + 1;; ++j) {
    mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    mpfr_mul(term.get(), term.get(), xx.get(), MPFR_RNDN);
    mpfr_div_si(term.get(), term.get(), j + 1, MPFR_RNDN);
    // Terms decay by a factor |x|/j; a handful of iterations suffices.
    Big probe = sc.make();
    mpfr_abs(probe.get(), term.get(), MPFR_RNDN);
    Big scale = sc.make();
    mpfr_abs(scale.get(), sum.get(), MPFR_RNDN);
    mpfr_mul_2si(scale.get(), scale.get(), -static_cast<long>(sc.prec) - 16,
                 MPFR_RNDN);
    if (mpfr_cmp(probe.get(), scale.get()) <= 0 || mpfr_zero_p(term.get()))
      break;
    if (j > k + 10000)
      throw std::runtime_error("tail_big: series failed to converge");
  }
  return sum;
}

std::string big_str(const Big& b) {
  char* s = nullptr;
  mpfr_asprintf(&s, "%.8Re", b.get());
  std::string out = s ? s : "?";
  mpfr_free_str(s);
  return out;
}

// Widens the global exponent range for the duration of a check and restores
// it afterwards, also on exceptions.
struct ExponentRangeGuard {
  mpfr_exp_t emin, emax;
  ExponentRangeGuard() : emin(mpfr_get_emin()), emax(mpfr_get_emax()) {
    mpfr_set_emin(mpfr_get_emin_min());
    mpfr_set_emax(mpfr_get_emax_max());
  }
  ~ExponentRangeGuard() {
    mpfr_set_emin(emin);
    mpfr_set_emax(emax);
  }
};

}  // namespace

LemmaCheckReport check_lemma_bounds(const ModelParams& p,
                                    const LemmaCheckOptions& opts) {
  LemmaCheckReport rep;
  rep.regime = validate_parameters(p);
  if (!rep.regime.in_regime && !opts.demo_mode) return rep;
  if (opts.grid_points < 2)
    throw std::invalid_argument("check_lemma_bounds: need at least 2 grid points");
  rep.checked = true;

  // Quantities like exp(-B/10) live far outside the default exponent range.
  ExponentRangeGuard range_guard;

  Scratch sc(opts.precision_bits);
  double xmax = 2.0 * p.n * p.beta;
  long long bb = p.b;

  std::vector<long long> ks;
  for (int i = 0; i < opts.k_samples; ++i) {
    long long k = static_cast<long long>(
        std::llround(static_cast<double>(bb) * i /
                     std::max(1, opts.k_samples - 1)));
    if (k < 0) k = 0;
    if (k > bb) k = bb;
    if (ks.empty() || ks.back() != k) ks.push_back(k);
  }

  for (int gi = 0; gi < opts.grid_points; ++gi) {
    double x = -xmax + 2.0 * xmax * gi / (opts.grid_points - 1);
    if (opts.demo_mode &&
        !(bb >= 10 && static_cast<double>(bb + 1) >= 2.0 * M_E * std::abs(x))) {
      ++rep.points_skipped;
      continue;
    }
    Big ex = sc.make(x);
    mpfr_exp(ex.get(), ex.get(), MPFR_RNDN);
    Big tail = tail_big(sc, x, bb);
    Big expb = sc.make();
    mpfr_sub(expb.get(), ex.get(), tail.get(), MPFR_RNDN);

    // (1) 0 < exp_B(x) <= exp(x)
    ++rep.points_checked[0];
    if (mpfr_sgn(expb.get()) <= 0 || mpfr_cmp(expb.get(), ex.get()) > 0) {
      rep.violations.push_back(
          {1, x, -1, "exp_B=" + big_str(expb) + " exp=" + big_str(ex)});
    }

    // (2) |tail_B(x)| <= exp(-B/10) exp_B(x)
    ++rep.points_checked[1];
    {
      Big lhs = sc.make();
      mpfr_abs(lhs.get(), tail.get(), MPFR_RNDN);
      Big rhs = sc.make(-static_cast<double>(bb) / 10.0);
      mpfr_exp(rhs.get(), rhs.get(), MPFR_RNDN);
      mpfr_mul(rhs.get(), rhs.get(), expb.get(), MPFR_RNDN);
      if (mpfr_cmp(lhs.get(), rhs.get()) > 0) {
        rep.violations.push_back(
            {2, x, -1, "tail=" + big_str(lhs) + " bound=" + big_str(rhs)});
      }
    }

    // (3) |exp_k(x)| <= e^{B-k} exp_B(x), sampled k
    for (long long k : ks) {
      ++rep.points_checked[2];
      Big tk = tail_big(sc, x, k);
      Big expk = sc.make();
      mpfr_sub(expk.get(), ex.get(), tk.get(), MPFR_RNDN);
      mpfr_abs(expk.get(), expk.get(), MPFR_RNDN);
      Big rhs = sc.make(static_cast<double>(bb - k));
      mpfr_exp(rhs.get(), rhs.get(), MPFR_RNDN);
      mpfr_mul(rhs.get(), rhs.get(), expb.get(), MPFR_RNDN);
      if (mpfr_cmp(expk.get(), rhs.get()) > 0) {
        rep.violations.push_back(
            {3, x, k, "exp_k=" + big_str(expk) + " bound=" + big_str(rhs)});
      }
    }
  }
  return rep;
}

}  // namespace loopeq
