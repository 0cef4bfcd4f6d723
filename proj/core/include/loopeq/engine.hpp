#pragma once

#include <complex>
#include <vector>

#include "loopeq/state_space.hpp"
#include "loopeq/trunc_exp.hpp"

// The loop-equation operator on a finite state space, weighted sup norms,
// and fixed-point solving.  Values are indexed by state position; boundary
// vectors supply the injected values at every non-interior state (entries at
// interior positions are ignored).

namespace loopeq {

using Complex = std::complex<double>;

// Weights of the contraction norm.  lambda grades splitting complexity, rho
// grades the truncation deficit.  gamma grades the spanning area in the
// truncated model (gamma >= 1) and the deficit support in the modified model
// (gamma <= 1).
struct NormParams {
  double lambda = 1.0;
  double gamma = 1.0;
  double rho = 1.0;
};

// One application of the operator at state i: interior states take the
// signed weighted sum over successors, every other state takes the supplied
// value.  In particular null states reproduce their injected value.
Complex apply_m_state(const StateSpace& sp, int i,
                      const std::vector<Complex>& f,
                      const std::vector<Complex>& boundary);

std::vector<Complex> apply_m(const StateSpace& sp,
                             const std::vector<Complex>& f,
                             const std::vector<Complex>& boundary);

// Weighted sup norm of a state function, accumulated in the log domain.
// Exterior states do not belong to the space and are skipped.
double norm_eval(const StateSpace& sp, const std::vector<Complex>& values,
                 const NormParams& np);

// Closed-form bound on the operator norm of the interior part of M:
//   truncated: 2dB lambda + 2dB/(lambda N^2) + 4d beta gamma/(lambda rho N)
//   modified:  2dB lambda + 2dB/(lambda N^2) + 4d beta/(lambda gamma rho N)
//              + exp(-10^-3 B)
double contraction_factor(const ModelParams& p, const NormParams& np,
                          ModelKind model);

struct SolveOptions {
  int max_iterations = 20'000;
  double tolerance = 1e-15;  // weighted norm of the final update
  bool allow_direct = true;  // sparse direct solve when iteration stalls
  NormParams norm;
};

struct SolveResult {
  std::vector<Complex> f;
  int iterations = 0;
  bool converged = false;
  bool used_direct = false;
  // Weighted-norm picture of the run.
  double factor = -1.0;        // closed-form contraction factor
  bool certified = false;      // factor < 1, so the error bounds are rigorous
  double g_norm = 0.0;         // weighted norm of the boundary injection
  double final_update_norm = 0.0;
  double apriori_error = -1.0;      // factor^n/(1-factor) * g_norm
  double aposteriori_error = -1.0;  // factor/(1-factor) * final update norm
  double residual_sup = 0.0;        // unweighted sup |f - Mf|
  std::vector<double> update_ratios;  // successive weighted update ratios
};

// Solves f = Mf with pinned boundary values by iterating from the boundary
// injection.  With a certified factor < 1 the returned error bounds are
// rigorous in the weighted norm; otherwise convergence is empirical and the
// measured update ratios stand in for the factor.  When iteration fails to
// meet the tolerance and options allow, a sparse direct solve of the linear
// system takes over and the result is marked used_direct.
SolveResult neumann_solve(const StateSpace& sp,
                          const std::vector<Complex>& boundary,
                          const SolveOptions& opt = {});

// Pointwise defect of the fixed-point equation: interior states report
// f - (sum of coeff * f(target)), other states report f - boundary.
std::vector<Complex> equation_residuals(const StateSpace& sp,
                                        const std::vector<Complex>& f,
                                        const std::vector<Complex>& boundary);

struct ResidualStat {
  Complex mean;
  double se = 0.0;
};

// Residual statistics from per-batch value tables (values[state][batch]),
// as produced by the Monte Carlo oracle with shared samples per batch.
// Batch correlations propagate through the linear combination exactly.
std::vector<ResidualStat> equation_residual_stats(
    const StateSpace& sp, const std::vector<std::vector<Complex>>& values);

struct BoundaryCheck {
  bool ok = true;
  double worst = 0.0;  // max over null states of e^{-deficit} |phi| / phi_full
  int checked = 0;
};

// Null-state boundary inequality of the truncated model: every null state
// must satisfy e^{-total deficit} |phi(null, K)| <= phi_full, where phi_full
// is the value at zero deficit.  `slack` absorbs floating-point error in the
// supplied data.
BoundaryCheck check_null_boundary_bound(const StateSpace& sp,
                                        const std::vector<Complex>& boundary,
                                        double phi_full, double slack = 1e-9);

}  // namespace loopeq
