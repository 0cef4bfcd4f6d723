#include "loopeq/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>

#include "loopeq/parallel.hpp"
#include "loopeq/trunc_exp.hpp"

namespace loopeq {

CMatrix CMatrix::identity(int dim) {
  CMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
  return m;
}

CMatrix matmul(const CMatrix& x, const CMatrix& y) {
  if (x.n != y.n) throw std::invalid_argument("matmul: dimension mismatch");
  CMatrix z(x.n);
  for (int r = 0; r < x.n; ++r)
    for (int k = 0; k < x.n; ++k) {
      Complex f = x.at(r, k);
      if (f == Complex{}) continue;
      for (int c = 0; c < x.n; ++c) z.at(r, c) += f * y.at(k, c);
    }
  return z;
}

CMatrix adjoint(const CMatrix& x) {
  CMatrix z(x.n);
  for (int r = 0; r < x.n; ++r)
    for (int c = 0; c < x.n; ++c) z.at(r, c) = std::conj(x.at(c, r));
  return z;
}

Complex trace(const CMatrix& x) {
  Complex t;
  for (int i = 0; i < x.n; ++i) t += x.at(i, i);
  return t;
}

double unitarity_defect(const CMatrix& u) {
  CMatrix g = matmul(adjoint(u), u);
  double worst = 0.0;
  for (int r = 0; r < g.n; ++r)
    for (int c = 0; c < g.n; ++c) {
      Complex want = (r == c) ? Complex{1.0, 0.0} : Complex{};
      worst = std::max(worst, std::abs(g.at(r, c) - want));
    }
  return worst;
}

CMatrix sample_haar_unitary(int n, CounterRng& rng) {
  if (n < 1) throw std::invalid_argument("sample_haar_unitary: n must be >= 1");
  if (n == 1) {
    // A normalized complex Gaussian is a uniform phase.
    for (;;) {
      Complex z{rng.gaussian(), rng.gaussian()};
      double r = std::abs(z);
      if (r > 0) {
        CMatrix m(1);
        m.at(0, 0) = z / r;
        return m;
      }
    }
  }
  Eigen::MatrixXcd g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      double re = rng.gaussian();
      double im = rng.gaussian();
      g(r, c) = Complex{re, im};
    }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    Complex d = r(j, j);
    double m = std::abs(d);
    if (m > 0) q.col(j) *= d / m;
  }
  CMatrix out(n);
  for (int rr = 0; rr < n; ++rr)
    for (int c = 0; c < n; ++c) out.at(rr, c) = q(rr, c);
  return out;
}

CMatrix GaugeConfig::oriented(OriEdge e) const {
  return e.is_forward() ? u[e.edge().v] : adjoint(u[e.edge().v]);
}

GaugeConfig sample_gauge_config(const Lattice& lat, int n, CounterRng& rng) {
  GaugeConfig cfg;
  cfg.n = n;
  cfg.u.resize(lat.site_count() * lat.d());
  for (EdgeId e : lat.edges()) cfg.u[e.v] = sample_haar_unitary(n, rng);
  return cfg;
}

void gauge_transform(const Lattice& lat, GaugeConfig& cfg, SiteId x,
                     const CMatrix& g) {
  CMatrix gdag = adjoint(g);
  for (EdgeId e : lat.edges()) {
    SiteId tail = lat.edge_tail(e);
    SiteId head = *lat.step(tail, lat.edge_axis(e), +1);
    if (tail == x) cfg.u[e.v] = matmul(g, cfg.u[e.v]);
    if (head == x) cfg.u[e.v] = matmul(cfg.u[e.v], gdag);
  }
}

Complex wilson_loop_value(const Lattice&, const GaugeConfig& cfg,
                          const Loop& loop) {
  CMatrix m = CMatrix::identity(cfg.n);
  for (OriEdge e : loop) m = matmul(m, cfg.oriented(e));
  return trace(m) / static_cast<double>(cfg.n);
}

Complex wilson_string_value(const Lattice& lat, const GaugeConfig& cfg,
                            const LatticeString& s) {
  Complex v{1.0, 0.0};
  for (const Loop& loop : s.loops()) v *= wilson_loop_value(lat, cfg, loop);
  return v;
}

std::vector<double> plaquette_actions(const Lattice& lat,
                                      const GaugeConfig& cfg, double beta) {
  std::vector<double> x(static_cast<size_t>(lat.site_count()) *
                        lat.axis_pairs());
  for (PlaqId p : lat.plaqs()) {
    CMatrix m = CMatrix::identity(cfg.n);
    for (OriEdge e : lat.boundary(OriPlaq::positive(p)))
      m = matmul(m, cfg.oriented(e));
    x[p.v] = 2.0 * beta * trace(m).real();
  }
  return x;
}

double action_weight(const Lattice& lat, const ActionWeights& w,
                     const std::vector<double>& x) {
  if (w.full) {
    double sum = 0.0;
    for (PlaqId p : lat.plaqs()) sum += x[p.v];
    return std::exp(sum);
  }
  double prod = 1.0;
  for (PlaqId p : lat.plaqs()) {
    if (w.bad.contains(p))
      prod *= exp_tail(x[p.v], w.b);
    else
      prod *= exp_trunc(x[p.v], w.k.at(p));
  }
  return prod;
}

McEstimate McBatchTable::estimate(size_t obs) const {
  const auto& means = batch_means.at(obs);
  int b = static_cast<int>(means.size());
  McEstimate est;
  est.samples = samples_per_batch * b;
  Complex sum;
  for (const Complex& m : means) sum += m;
  est.mean = sum / static_cast<double>(b);
  if (b > 1) {
    double ss = 0.0;
    for (const Complex& m : means) ss += std::norm(m - est.mean);
    est.se = std::sqrt(ss / (static_cast<double>(b) * (b - 1)));
  }
  return est;
}

McBatchTable mc_string_integrals(const Lattice& lat, int n, double beta,
                                 const std::vector<LatticeString>& obs,
                                 const std::vector<ActionWeights>& weights,
                                 const McOptions& opt) {
  if (obs.size() != weights.size())
    throw std::invalid_argument("mc_string_integrals: one weight per string");
  if (opt.batches < 1 || opt.samples < 1)
    throw std::invalid_argument("mc_string_integrals: bad sampling options");
  // Equal batch sizes keep the batch means identically distributed; the
  // requested sample count rounds up to a multiple of the batch count.
  long long per_batch =
      std::max<long long>(1, (opt.samples + opt.batches - 1) / opt.batches);

  // Observables sharing an identical weight reuse one evaluation per sample.
  std::vector<size_t> weight_slot(obs.size());
  std::vector<size_t> unique_weights;
  for (size_t o = 0; o < weights.size(); ++o) {
    size_t found = unique_weights.size();
    for (size_t u = 0; u < unique_weights.size(); ++u) {
      const ActionWeights& a = weights[unique_weights[u]];
      const ActionWeights& w = weights[o];
      if (a.full == w.full && a.k == w.k && a.bad == w.bad && a.b == w.b) {
        found = u;
        break;
      }
    }
    if (found == unique_weights.size()) unique_weights.push_back(o);
    weight_slot[o] = found;
  }

  McBatchTable table;
  table.samples_per_batch = per_batch;
  table.batch_means.assign(obs.size(),
                           std::vector<Complex>(opt.batches, Complex{}));
  parallel_for(opt.batches, opt.threads, [&](int b) {
    CounterRng rng(opt.seed, opt.stream_base + b);
    std::vector<Complex> acc(obs.size(), Complex{});
    std::vector<double> wval(unique_weights.size());
    for (long long t = 0; t < per_batch; ++t) {
      GaugeConfig cfg = sample_gauge_config(lat, n, rng);
      std::vector<double> x = plaquette_actions(lat, cfg, beta);
      for (size_t u = 0; u < unique_weights.size(); ++u)
        wval[u] = action_weight(lat, weights[unique_weights[u]], x);
      for (size_t o = 0; o < obs.size(); ++o)
        acc[o] += wilson_string_value(lat, cfg, obs[o]) * wval[weight_slot[o]];
    }
    for (size_t o = 0; o < obs.size(); ++o)
      table.batch_means[o][b] = acc[o] / static_cast<double>(per_batch);
  });
  return table;
}

McEstimate mc_phi(const Lattice& lat, const LatticeString& s,
                  const ActionWeights& w, int n, double beta,
                  const McOptions& opt) {
  McBatchTable t = mc_string_integrals(lat, n, beta, {s}, {w}, opt);
  return t.estimate(0);
}

McEstimate mc_wilson_expectation(const Lattice& lat, const Loop& l, int n,
                                 double beta, const McOptions& opt) {
  LatticeString ls = LatticeString::from_loops(lat, {l});
  LatticeString null = LatticeString::null_at(lat.tail(l.front()));
  McBatchTable t =
      mc_string_integrals(lat, n, beta, {ls, null}, {{}, {}}, opt);
  const auto& num = t.batch_means[0];
  const auto& den = t.batch_means[1];
  int b = opt.batches;
  Complex snum, sden;
  for (int i = 0; i < b; ++i) {
    snum += num[i];
    sden += den[i];
  }
  McEstimate est;
  est.samples = t.samples_per_batch * b;
  est.mean = snum / sden;
  if (b > 1) {
    std::vector<Complex> loo(b);
    Complex bar;
    for (int i = 0; i < b; ++i) {
      loo[i] = (snum - num[i]) / (sden - den[i]);
      bar += loo[i];
    }
    bar /= static_cast<double>(b);
    double ss = 0.0;
    for (int i = 0; i < b; ++i) ss += std::norm(loo[i] - bar);
    est.se = std::sqrt(ss * (b - 1) / static_cast<double>(b));
  }
  return est;
}

McResidual mc_loop_equation_residual(const Lattice& lat,
                                     const LatticeString& s, EdgePos pos,
                                     int n, double beta,
                                     const McOptions& opt) {
  if (s.is_null())
    throw std::invalid_argument("mc_loop_equation_residual: null string");
  std::vector<OpResult> terms;
  for (auto& r : splittings(lat, s, pos)) terms.push_back(std::move(r));
  for (auto& r : mergers(lat, s, pos, n)) terms.push_back(std::move(r));
  for (auto& r : deformations(lat, s, pos, n, beta))
    terms.push_back(std::move(r));

  std::vector<LatticeString> obs{s};
  std::vector<ActionWeights> weights{{}};
  for (const OpResult& r : terms) {
    obs.push_back(r.str);
    weights.push_back({});
  }
  McBatchTable t = mc_string_integrals(lat, n, beta, obs, weights, opt);

  McResidual out;
  out.lhs = t.estimate(0);
  out.term_count = static_cast<int>(terms.size());
  out.samples = t.samples_per_batch * opt.batches;
  std::vector<Complex> resid(opt.batches);
  for (int b = 0; b < opt.batches; ++b) {
    Complex rhs;
    for (size_t i = 0; i < terms.size(); ++i)
      rhs += terms[i].coeff * t.batch_means[i + 1][b];
    resid[b] = t.batch_means[0][b] - rhs;
  }
  Complex sum;
  for (const Complex& r : resid) sum += r;
  out.mean = sum / static_cast<double>(opt.batches);
  if (opt.batches > 1) {
    double ss = 0.0;
    for (const Complex& r : resid) ss += std::norm(r - out.mean);
    out.se = std::sqrt(ss / (static_cast<double>(opt.batches) *
                             (opt.batches - 1)));
  }
  return out;
}

// --- Exact N = 1 evaluators ---

int exact_u1_monomial(const Lattice& lat, const LatticeString& s,
                      const PlaquetteCountOri& j) {
  std::map<int32_t, int64_t> tally;  // EdgeId::v -> net phase exponent
  for (const Loop& loop : s.loops())
    for (OriEdge e : loop) tally[e.edge().v] += e.is_forward() ? 1 : -1;
  for (const auto& [p, count] : j.entries())
    for (OriEdge e : lat.boundary(p))
      tally[e.edge().v] +=
          static_cast<int64_t>(count) * (e.is_forward() ? 1 : -1);
  for (const auto& [e, net] : tally)
    if (net != 0) return 0;
  return 1;
}

namespace {

// Coefficient of the net phase exponent v in the expansion of
// exp_k(beta(z + 1/z)) as a Laurent series in the edge phase z:
// sum_{j >= 0, 2j+|v| <= k} beta^{2j+|v|} / ((j+|v|)! j!).
std::vector<double> trunc_coef_table(long long k, double beta, int* cap_out) {
  if (k < 0) throw std::invalid_argument("negative truncation degree");
  if (k > 4096) throw CapacityError("exact evaluator: truncation degree too large");
  int cap = static_cast<int>(k);
  std::vector<double> table(2 * cap + 1, 0.0);
  for (int v = 0; v <= cap; ++v) {
    double term = 1.0;
    for (int i = 1; i <= v; ++i) term *= beta / i;
    double sum = 0.0;
    for (int j = 0; 2 * j + v <= cap; ++j) {
      sum += term;
      term *= beta * beta / ((j + 1.0) * (j + 1.0 + v));
    }
    table[cap + v] = sum;
    table[cap - v] = sum;
  }
  *cap_out = cap;
  return table;
}

// Same for the tail weight exp - exp_b: degrees with 2j + |v| > b.
std::vector<double> tail_coef_table(long long b, double beta, int flow_cap,
                                    int* cap_out) {
  int cap = flow_cap;
  std::vector<double> table(2 * cap + 1, 0.0);
  for (int v = 0; v <= cap; ++v) {
    double term = 1.0;
    for (int i = 1; i <= v; ++i) term *= beta / i;
    double sum = 0.0;
    for (int j = 0;; ++j) {
      if (2LL * j + v > b) {
        sum += term;
        if (term <= sum * 1e-18 && 2LL * j + v > b + 4) break;
        if (term == 0.0) break;
      }
      term *= beta * beta / ((j + 1.0) * (j + 1.0 + v));
    }
    table[cap + v] = sum;
    table[cap - v] = sum;
  }
  // Values past the last nonzero coefficient cannot contribute.
  int trimmed = 0;
  for (int v = 0; v <= cap; ++v)
    if (table[cap + v] != 0.0) trimmed = v;
  if (trimmed < cap) {
    std::vector<double> t(table.begin() + (cap - trimmed),
                          table.begin() + (cap + trimmed + 1));
    table = std::move(t);
    cap = trimmed;
  }
  *cap_out = cap;
  return table;
}

struct FlowEnumerator {
  struct EdgeRec {
    std::vector<std::pair<int, int>> inc;  // (plaquette order index, sign)
    std::vector<long long> suffix_cap;     // capacity strictly after inc[i]
    long long residual = 0;
  };

  const Lattice& lat;
  long long work_cap;
  long long work = 0;
  std::vector<int> cap;
  std::vector<std::vector<double>> coef;
  std::vector<EdgeRec> edges;
  std::vector<std::array<int, 4>> plaq_edge_local;  // local edge per boundary slot
  std::vector<std::array<int, 4>> plaq_edge_sign;
  double total = 0.0;

  explicit FlowEnumerator(const Lattice& l, long long wc)
      : lat(l), work_cap(wc) {}

  void descend(int i, double partial) {
    if (i == static_cast<int>(cap.size())) {
      total += partial;
      return;
    }
    long long lo = -cap[i], hi = cap[i];
    for (int slot = 0; slot < 4; ++slot) {
      const EdgeRec& er = edges[plaq_edge_local[i][slot]];
      int sign = plaq_edge_sign[i][slot];
      // Position of plaquette i in this edge's incidence list.
      size_t pos = 0;
      while (er.inc[pos].first != i) ++pos;
      long long rem = er.suffix_cap[pos];
      // After adding v*sign the residual must vanish if this is the last
      // incident plaquette and otherwise stay coverable by the rest.
      long long blo = -rem - er.residual, bhi = rem - er.residual;
      if (sign > 0) {
        lo = std::max(lo, blo);
        hi = std::min(hi, bhi);
      } else {
        lo = std::max(lo, -bhi);
        hi = std::min(hi, -blo);
      }
    }
    for (long long v = lo; v <= hi; ++v) {
      if (++work > work_cap)
        throw CapacityError("exact_u1_phi: work cap exceeded");
      double c = coef[i][static_cast<size_t>(v + cap[i])];
      if (c == 0.0) continue;
      for (int slot = 0; slot < 4; ++slot)
        edges[plaq_edge_local[i][slot]].residual +=
            v * plaq_edge_sign[i][slot];
      descend(i + 1, partial * c);
      for (int slot = 0; slot < 4; ++slot)
        edges[plaq_edge_local[i][slot]].residual -=
            v * plaq_edge_sign[i][slot];
    }
  }
};

}  // namespace

double exact_u1_phi(const Lattice& lat, const LatticeString& s,
                    const U1Weights& w, double beta, const U1Options& opt) {
  if (beta < 0) throw std::invalid_argument("exact_u1_phi: negative beta");
  const auto& plaqs = lat.plaqs();
  int np = static_cast<int>(plaqs.size());

  FlowEnumerator fe(lat, opt.work_cap);
  fe.cap.resize(np);
  fe.coef.resize(np);
  for (int i = 0; i < np; ++i) {
    if (w.bad.contains(plaqs[i]))
      fe.coef[i] = tail_coef_table(w.b, beta, opt.tail_flow_cap, &fe.cap[i]);
    else
      fe.coef[i] = trunc_coef_table(w.k.at(plaqs[i]), beta, &fe.cap[i]);
  }

  std::vector<int> local(static_cast<size_t>(lat.site_count()) * lat.d(), -1);
  fe.plaq_edge_local.resize(np);
  fe.plaq_edge_sign.resize(np);
  for (int i = 0; i < np; ++i) {
    auto bd = lat.boundary(OriPlaq::positive(plaqs[i]));
    for (int slot = 0; slot < 4; ++slot) {
      EdgeId e = bd[slot].edge();
      if (local[e.v] < 0) {
        local[e.v] = static_cast<int>(fe.edges.size());
        fe.edges.emplace_back();
      }
      fe.plaq_edge_local[i][slot] = local[e.v];
      int sign = bd[slot].is_forward() ? 1 : -1;
      fe.plaq_edge_sign[i][slot] = sign;
      fe.edges[local[e.v]].inc.emplace_back(i, sign);
    }
  }
  for (auto& er : fe.edges) {
    er.suffix_cap.resize(er.inc.size());
    long long acc = 0;
    for (size_t j = er.inc.size(); j-- > 0;) {
      er.suffix_cap[j] = acc;
      acc += fe.cap[er.inc[j].first];
    }
  }
  // The flow must cancel the string's net traversal on every edge; edges
  // outside all plaquettes cannot be cancelled at all.
  for (const auto& [e, fx] : edge_flux(lat, s)) {
    if (fx == 0) continue;
    if (local[e.v] < 0) return 0.0;
    fe.edges[local[e.v]].residual = fx;
  }

  fe.descend(0, 1.0);
  return fe.total;
}

double exact_u1_phi(const Lattice& lat, const LatticeString& s,
                    const PlaquetteCountPos& k, double beta,
                    const U1Options& opt) {
  U1Weights w;
  w.k = k;
  return exact_u1_phi(lat, s, w, beta, opt);
}

double bessel_i(int nu, double x) {
  if (nu < 0 || x < 0)
    throw std::invalid_argument("bessel_i: needs nu >= 0, x >= 0");
  double h = x / 2.0;
  double term = 1.0;
  for (int i = 1; i <= nu; ++i) term *= h / i;
  double sum = 0.0;
  for (int j = 0;; ++j) {
    sum += term;
    term *= h * h / ((j + 1.0) * (j + 1.0 + nu));
    if (term <= sum * 1e-17) break;
  }
  return sum;
}

double u1_wilson_2d(long long area, double beta) {
  return std::pow(bessel_i(1, 2 * beta) / bessel_i(0, 2 * beta),
                  static_cast<double>(area));
}

}  // namespace loopeq
