#pragma once

#include <complex>
#include <vector>

#include "loopeq/rng.hpp"
#include "loopeq/string_ops.hpp"
#include "loopeq/strings.hpp"

// Ground-truth evaluators that bypass the loop-equation machinery entirely:
// plain product-Haar Monte Carlo for any matrix dimension, and an exact
// Fourier evaluator for N = 1, where each edge integral reduces to counting
// phase exponents.  Both exist so that the engine can be checked against
// values obtained by an independent route.

namespace loopeq {

using Complex = std::complex<double>;

// Dense row-major square complex matrix, sized for desk-scale N.
struct CMatrix {
  int n = 0;
  std::vector<Complex> a;

  CMatrix() = default;
  explicit CMatrix(int dim) : n(dim), a(static_cast<size_t>(dim) * dim) {}
  static CMatrix identity(int dim);
  Complex& at(int r, int c) { return a[static_cast<size_t>(r) * n + c]; }
  Complex at(int r, int c) const { return a[static_cast<size_t>(r) * n + c]; }
};

CMatrix matmul(const CMatrix& x, const CMatrix& y);
CMatrix adjoint(const CMatrix& x);
Complex trace(const CMatrix& x);
// max entry magnitude of U*U - I.
double unitarity_defect(const CMatrix& u);

// Haar-distributed unitary: i.i.d. complex Gaussian matrix, QR
// factorization, then the column phase correction R_jj/|R_jj| that fixes the
// factorization ambiguity; without it the distribution is not invariant.
CMatrix sample_haar_unitary(int n, CounterRng& rng);

// One unitary per positive lattice edge; the reverse orientation acts by the
// adjoint.
struct GaugeConfig {
  int n = 0;
  std::vector<CMatrix> u;  // indexed by EdgeId::v

  const CMatrix& at(EdgeId e) const { return u[e.v]; }
  CMatrix oriented(OriEdge e) const;
};

GaugeConfig sample_gauge_config(const Lattice& lat, int n, CounterRng& rng);

// Local gauge transformation at x: edges leaving x premultiply by g, edges
// entering x postmultiply by the adjoint.  Wilson values and plaquette
// actions are invariant.
void gauge_transform(const Lattice& lat, GaugeConfig& cfg, SiteId x,
                     const CMatrix& g);

// Normalized trace of the ordered edge product; a string takes the product
// over its loops and the null string is 1.  |value| <= 1 always.
Complex wilson_loop_value(const Lattice& lat, const GaugeConfig& cfg,
                          const Loop& loop);
Complex wilson_string_value(const Lattice& lat, const GaugeConfig& cfg,
                            const LatticeString& s);

// 2 beta Re Tr(U_p) for every positive plaquette, indexed by PlaqId::v.
std::vector<double> plaquette_actions(const Lattice& lat,
                                      const GaugeConfig& cfg, double beta);

// Per-plaquette weight: exp everywhere when full, otherwise exp_{k(p)} on
// good plaquettes (absent entry means degree 0) and the tail exp - exp_b on
// the bad set.
struct ActionWeights {
  bool full = true;
  PlaquetteCountPos k;
  PlaquetteSet bad;
  long long b = 0;
};

double action_weight(const Lattice& lat, const ActionWeights& w,
                     const std::vector<double>& x);

struct McEstimate {
  Complex mean{0.0, 0.0};
  double se = 0.0;  // spread of independent batch means
  long long samples = 0;
};

struct McOptions {
  long long samples = 100'000;
  uint64_t seed = 1;
  int batches = 100;         // independent generator streams
  int threads = 1;           // batch results merge in stream order
  uint64_t stream_base = 0;  // offset into the stream space
};

// Batch means for several observables evaluated on shared samples, so that
// linear combinations keep their sampling correlations.
struct McBatchTable {
  std::vector<std::vector<Complex>> batch_means;  // [observable][batch]
  long long samples_per_batch = 0;

  McEstimate estimate(size_t obs) const;
};

McBatchTable mc_string_integrals(const Lattice& lat, int n, double beta,
                                 const std::vector<LatticeString>& obs,
                                 const std::vector<ActionWeights>& weights,
                                 const McOptions& opt);

// Haar average of W_s times the action weight.
McEstimate mc_phi(const Lattice& lat, const LatticeString& s,
                  const ActionWeights& w, int n, double beta,
                  const McOptions& opt);

// Ratio estimator E[W_l w]/E[w] under the full exponential weight, with the
// delete-one-batch jackknife error.
McEstimate mc_wilson_expectation(const Lattice& lat, const Loop& l, int n,
                                 double beta, const McOptions& opt);

// Residual of the single-location loop identity under the full exponential
// weight.  Every term is estimated on the same samples, so the per-batch
// residuals carry the term correlations and the error bar applies to the
// residual itself.
struct McResidual {
  Complex mean{0.0, 0.0};
  double se = 0.0;
  McEstimate lhs;
  int term_count = 0;
  long long samples = 0;
};

McResidual mc_loop_equation_residual(const Lattice& lat,
                                     const LatticeString& s, EdgePos pos,
                                     int n, double beta, const McOptions& opt);

// --- Exact N = 1 evaluators ---

// 1 when (s, J) is balanced, else 0.  Each edge phase integrates to zero
// unless its net exponent vanishes; the tally here is built directly from
// the traversals and is kept independent of is_balanced.
int exact_u1_monomial(const Lattice& lat, const LatticeString& s,
                      const PlaquetteCountOri& j);

// Weight assignment for the exact evaluator, mirroring ActionWeights.
struct U1Weights {
  PlaquetteCountPos k;
  PlaquetteSet bad;
  long long b = 0;
};

struct U1Options {
  long long work_cap = 10'000'000;  // search nodes before giving up
  int tail_flow_cap = 220;          // net-flow cutoff on tail plaquettes
};

// phi(s, K) for N = 1: expanding every per-plaquette weight into phase
// monomials and integrating leaves a sum over integer plaquette flows m with
// boundary matching the string's edge flux,
//
//   phi = sum_m prod_p c_p(m(p)),
//   c_p(v) = sum over degrees of the weight series at p with net exponent v,
//
// enumerated by a depth-first sweep that closes each edge at its last
// incident plaquette.  exp_k gives the finite coefficient
// c(v) = sum_{2j+|v| <= k} beta^{2j+|v|} / ((j+|v|)! j!); the tail weight
// sums the complementary degrees.  Throws CapacityError past work_cap.
double exact_u1_phi(const Lattice& lat, const LatticeString& s,
                    const U1Weights& w, double beta,
                    const U1Options& opt = {});
double exact_u1_phi(const Lattice& lat, const LatticeString& s,
                    const PlaquetteCountPos& k, double beta,
                    const U1Options& opt = {});

// Modified Bessel function of integer order by its ascending series
// sum_j (x/2)^{2j+nu} / (j! (j+nu)!); relative error ~1e-15 at the small
// arguments used here.
double bessel_i(int nu, double x);

// Free-boundary two-dimensional U(1) Wilson expectation
// (I_1(2 beta)/I_0(2 beta))^area from the character expansion.
double u1_wilson_2d(long long area, double beta);

}  // namespace loopeq
