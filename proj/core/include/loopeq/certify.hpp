#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "loopeq/strings.hpp"
#include "loopeq/trunc_exp.hpp"

// Closed-form area-law certificates.  Each bound is evaluated at any
// parameters; the rigorous flag records whether the parameters sit inside
// the proven regime, outside of which the numbers are arithmetic only.

namespace loopeq {

struct CertBound {
  double value = 0.0;  // may underflow to 0; log10_value stays meaningful
  double log10_value = 0.0;
  bool rigorous = false;
  double alpha = 0.0;  // per-plaquette decay rate (area-law bound only)
};

// Side lengths of a rectangular loop (two axes, four straight runs), or
// nullopt for any other shape.  Throws std::invalid_argument on walks that
// are not closed backtrack-free loops on the lattice.
std::optional<std::pair<int, int>> rectangle_dims(const Lattice& lat,
                                                  const Loop& loop);

// Wilson expectation bound for the truncated model on an r x s rectangle:
//   2 N^{(r+s)/2 - 1} (10^3 d beta)^{r s}
CertBound certify_truncated_bound(int r, int s, const ModelParams& p);
CertBound certify_truncated_bound(const Lattice& lat, const Loop& loop,
                                  const ModelParams& p);

// Full-model area-law bound on an r x s rectangle, perimeter 2(r+s):
//   2 * 2(r+s) * N^{(r+s)/2 - 1} * alpha^{r s}
//   alpha = 2 * 10^{3d} * max(10^3 d beta, exp(-10^-7 d^-2 N))
CertBound certify_area_law_bound(int r, int s, const ModelParams& p);
CertBound certify_area_law_bound(const Lattice& lat, const Loop& loop,
                                 const ModelParams& p);

// Right-hand side of the reduction from the full model to a fixed bad set:
//   c1 e^{2d |l|} 50^{d A} 2^{A} max(e^{-c2}, e^{-10^-3 B / d})^{A}
// with |l| the perimeter and A the area.
CertBound reduction_rhs(double c1, double c2, int perimeter, int64_t area,
                        const ModelParams& p);

}  // namespace loopeq
