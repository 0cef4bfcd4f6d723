#include "loopeq/engine.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace loopeq {

Complex apply_m_state(const StateSpace& sp, int i,
                      const std::vector<Complex>& f,
                      const std::vector<Complex>& boundary) {
  const StateRecord& r = sp.at(i);
  if (r.cls != StateClass::Interior) return boundary.at(i);
  Complex acc;
  for (const TransitionTerm& t : r.terms) acc += t.coeff * f.at(t.target);
  return acc;
}

std::vector<Complex> apply_m(const StateSpace& sp,
                             const std::vector<Complex>& f,
                             const std::vector<Complex>& boundary) {
  if (f.size() != sp.states.size() || boundary.size() != sp.states.size())
    throw std::invalid_argument("apply_m: vector size mismatch");
  std::vector<Complex> out(sp.states.size());
  for (int i = 0; i < sp.size(); ++i) out[i] = apply_m_state(sp, i, f, boundary);
  return out;
}

double norm_eval(const StateSpace& sp, const std::vector<Complex>& values,
                 const NormParams& np) {
  if (values.size() != sp.states.size())
    throw std::invalid_argument("norm_eval: vector size mismatch");
  if (!(np.lambda > 0) || !(np.gamma > 0) || !(np.rho > 0))
    throw std::invalid_argument("norm_eval: weights must be positive");
  double ll = std::log(np.lambda);
  double lg = std::log(np.gamma);
  double lr = std::log(np.rho);
  bool any = false;
  double best = 0.0;
  for (int i = 0; i < sp.size(); ++i) {
    const StateRecord& r = sp.at(i);
    if (r.cls == StateClass::Exterior) continue;
    double a = std::abs(values[i]);
    if (a == 0.0) continue;
    double logw = (r.iota_quarters / 4.0) * ll;
    if (sp.spec.model == ModelKind::Truncated) {
      logw += static_cast<double>(r.area) * lg +
              static_cast<double>(r.deficit.total()) * lr;
    } else {
      int gcount = 0;
      double rsum = 0.0;
      for (const auto& [p, v] : r.deficit.entries())
        if (!r.q_boundary.contains(p)) {
          ++gcount;
          rsum += v;
        }
      logw += gcount * lg + rsum * lr +
              1e-2 * static_cast<double>(sp.spec.b) * r.q.size();
    }
    double cand = logw + std::log(a);
    if (!any || cand > best) best = cand;
    any = true;
  }
  return any ? std::exp(best) : 0.0;
}

double contraction_factor(const ModelParams& p, const NormParams& np,
                          ModelKind model) {
  double d = p.d;
  double b = static_cast<double>(p.b);
  double base = 2.0 * d * b * np.lambda +
                2.0 * d * b / (np.lambda * p.n * p.n);
  if (model == ModelKind::Truncated)
    return base + 4.0 * d * p.beta * np.gamma / (np.lambda * np.rho * p.n);
  return base + 4.0 * d * p.beta / (np.lambda * np.gamma * np.rho * p.n) +
         std::exp(-1e-3 * b);
}

namespace {

// Direct solve of (I - T) x = g restricted to interior states.  Returns
// false when the factorization fails (the system may be singular).
bool direct_solve(const StateSpace& sp, const std::vector<Complex>& boundary,
                  std::vector<Complex>& f) {
  int m = sp.size();
  std::vector<int> row(m, -1);
  int interior = 0;
  for (int i = 0; i < m; ++i)
    if (sp.at(i).cls == StateClass::Interior) row[i] = interior++;
  if (interior == 0) return true;

  std::vector<Eigen::Triplet<Complex>> trip;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(interior);
  for (int i = 0; i < m; ++i) {
    if (row[i] < 0) continue;
    trip.emplace_back(row[i], row[i], Complex{1.0, 0.0});
    for (const TransitionTerm& t : sp.at(i).terms) {
      if (row[t.target] >= 0)
        trip.emplace_back(row[i], row[t.target], Complex{-t.coeff, 0.0});
      else
        rhs(row[i]) += t.coeff * boundary[t.target];
    }
  }
  Eigen::SparseMatrix<Complex> a(interior, interior);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) return false;
  Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) return false;
  for (int i = 0; i < m; ++i)
    if (row[i] >= 0) f[i] = x(row[i]);
  return true;
}

}  // namespace

SolveResult neumann_solve(const StateSpace& sp,
                          const std::vector<Complex>& boundary,
                          const SolveOptions& opt) {
  int m = sp.size();
  if (static_cast<int>(boundary.size()) != m)
    throw std::invalid_argument("neumann_solve: boundary size mismatch");

  SolveResult res;
  ModelParams mp{sp.lat.d(), sp.spec.n, sp.spec.beta, sp.spec.b};
  res.factor = contraction_factor(mp, opt.norm, sp.spec.model);
  res.certified = res.factor < 1.0;

  std::vector<Complex> f(m);
  bool any_interior = false;
  for (int i = 0; i < m; ++i) {
    if (sp.at(i).cls == StateClass::Interior)
      any_interior = true;
    else
      f[i] = boundary[i];
  }
  res.g_norm = norm_eval(sp, f, opt.norm);

  double prev = -1.0;
  if (any_interior) {
    for (int iter = 1; iter <= opt.max_iterations; ++iter) {
      std::vector<Complex> fn = apply_m(sp, f, boundary);
      std::vector<Complex> delta(m);
      for (int i = 0; i < m; ++i) delta[i] = fn[i] - f[i];
      double dn = norm_eval(sp, delta, opt.norm);
      if (prev > 0.0) res.update_ratios.push_back(dn / prev);
      f = std::move(fn);
      res.iterations = iter;
      res.final_update_norm = dn;
      prev = dn;
      if (dn <= opt.tolerance) {
        res.converged = true;
        break;
      }
    }
  } else {
    res.converged = true;
  }

  if (!res.converged && opt.allow_direct && direct_solve(sp, boundary, f)) {
    res.used_direct = true;
    res.converged = true;
  }

  if (res.certified) {
    res.apriori_error = std::pow(res.factor, res.iterations) /
                        (1.0 - res.factor) * res.g_norm;
    res.aposteriori_error =
        res.factor / (1.0 - res.factor) * res.final_update_norm;
  }
  std::vector<Complex> check = apply_m(sp, f, boundary);
  double worst = 0.0;
  for (int i = 0; i < m; ++i)
    worst = std::max(worst, std::abs(check[i] - f[i]));
  res.residual_sup = worst;
  res.f = std::move(f);
  return res;
}

std::vector<Complex> equation_residuals(const StateSpace& sp,
                                        const std::vector<Complex>& f,
                                        const std::vector<Complex>& boundary) {
  std::vector<Complex> out(sp.states.size());
  for (int i = 0; i < sp.size(); ++i)
    out[i] = f.at(i) - apply_m_state(sp, i, f, boundary);
  return out;
}

std::vector<ResidualStat> equation_residual_stats(
    const StateSpace& sp, const std::vector<std::vector<Complex>>& values) {
  if (values.size() != sp.states.size())
    throw std::invalid_argument("equation_residual_stats: size mismatch");
  size_t batches = values.empty() ? 0 : values.front().size();
  for (const auto& v : values)
    if (v.size() != batches)
      throw std::invalid_argument("equation_residual_stats: ragged batches");
  std::vector<ResidualStat> out(sp.states.size());
  if (batches < 2) return out;
  std::vector<Complex> resid(batches);
  for (int i = 0; i < sp.size(); ++i) {
    const StateRecord& r = sp.at(i);
    if (r.cls != StateClass::Interior) continue;
    for (size_t b = 0; b < batches; ++b) {
      Complex rhs;
      for (const TransitionTerm& t : r.terms)
        rhs += t.coeff * values[t.target][b];
      resid[b] = values[i][b] - rhs;
    }
    Complex sum;
    for (const Complex& x : resid) sum += x;
    Complex mean = sum / static_cast<double>(batches);
    double ss = 0.0;
    for (const Complex& x : resid) ss += std::norm(x - mean);
    out[i].mean = mean;
    out[i].se =
        std::sqrt(ss / (static_cast<double>(batches) * (batches - 1)));
  }
  return out;
}

BoundaryCheck check_null_boundary_bound(const StateSpace& sp,
                                        const std::vector<Complex>& boundary,
                                        double phi_full, double slack) {
  if (!(phi_full > 0))
    throw std::invalid_argument(
        "check_null_boundary_bound: phi_full must be positive");
  BoundaryCheck out;
  for (int i = 0; i < sp.size(); ++i) {
    const StateRecord& r = sp.at(i);
    if (r.cls != StateClass::NullBoundary) continue;
    double lhs = std::exp(-static_cast<double>(r.deficit.total())) *
                 std::abs(boundary.at(i));
    double ratio = lhs / phi_full;
    out.worst = std::max(out.worst, ratio);
    if (ratio > 1.0 + slack) out.ok = false;
    ++out.checked;
  }
  return out;
}

}  // namespace loopeq
