#pragma once

#include <string>
#include <vector>

// Truncated exponentials exp_k(x) = sum_{j<=k} x^j/j! and the weak-coupling
// parameter regime
//
//   N >= 10^10 d^10,   beta <= 10^{-10d}/d,   10^-3 N/(2d) <= B <= 10^-3 N/d,
//   B odd.
//
// In that regime, for |x| <= 2 N beta, three inequalities hold:
//   (1)  0 < exp_B(x) <= exp(x)
//   (2)  |exp(x) - exp_B(x)| <= exp(-B/10) exp_B(x)
//   (3)  |exp_k(x)| <= e^{B-k} exp_B(x)   for 0 <= k <= B.
// Their magnitudes (e.g. exp(-B/10) with B ~ 10^10) are far below the double
// range, so the checker runs in extended-precision arithmetic with a widened
// exponent range.

namespace loopeq {

struct ModelParams {
  int d = 2;
  double n = 1.0;       // matrix dimension N; integral values up to 2^53
  double beta = 0.0;
  long long b = 1;      // truncation order B
};

struct RegimeReport {
  bool in_regime = false;
  bool n_ok = false, beta_ok = false, b_range_ok = false, b_odd = false;
  double n_min = 0, beta_max = 0, b_lo = 0, b_hi = 0;
  // Derived smallness ratios: 2 d N beta / B and d B / N.
  double coupling_ratio = 0, truncation_ratio = 0;
};

RegimeReport validate_parameters(const ModelParams& p);

// Partial sum with compensated summation; relative error below 1e-12 for
// |x| <= 1.  Terms past machine precision are skipped once negligible.
double exp_trunc(double x, long long k);
// exp(x) - exp_k(x) as an explicit series starting at j = k+1.
double exp_tail(double x, long long k);

struct LemmaCheckOptions {
  int grid_points = 1000;
  int precision_bits = 256;
  // Waives the regime requirement; inequality checks then run only at grid
  // points where B >= 10 and B+1 >= 2e|x|, which is where the truncation
  // bounds are provable at all.
  bool demo_mode = false;
  int k_samples = 16;  // number of k values sampled for inequality (3)
};

struct LemmaViolation {
  int inequality = 0;  // 1, 2, or 3
  double x = 0;
  long long k = -1;    // set for inequality (3)
  std::string detail;
};

struct LemmaCheckReport {
  RegimeReport regime;
  bool checked = false;  // regime (or demo mode) admitted the run
  long long points_checked[3] = {0, 0, 0};
  long long points_skipped = 0;  // demo-mode points outside the provable range
  std::vector<LemmaViolation> violations;
  bool passed() const { return checked && violations.empty(); }
};

// Evaluates the three inequalities on a symmetric grid of `grid_points`
// values of x across [-2 N beta, 2 N beta].
LemmaCheckReport check_lemma_bounds(const ModelParams& p,
                                    const LemmaCheckOptions& opts = {});

}  // namespace loopeq
