#include "loopeq/certify.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace loopeq {

std::optional<std::pair<int, int>> rectangle_dims(const Lattice& lat,
                                                  const Loop& loop) {
  LatticeString::from_loops(lat, {loop});  // validates the walk
  int n = static_cast<int>(loop.size());
  auto dir = [&](int i) {
    OriEdge e = loop[i];
    int axis = lat.edge_axis(e.edge());
    return std::pair<int, int>{axis, e.is_forward() ? 1 : -1};
  };
  // Rotate to a run boundary, then run-length encode the directions.
  int start = -1;
  for (int i = 0; i < n; ++i)
    if (dir(i) != dir((i + n - 1) % n)) {
      start = i;
      break;
    }
  if (start < 0) return std::nullopt;  // single direction cannot close
  std::vector<std::pair<std::pair<int, int>, int>> runs;
  for (int k = 0; k < n; ++k) {
    auto d = dir((start + k) % n);
    if (!runs.empty() && runs.back().first == d)
      ++runs.back().second;
    else
      runs.push_back({d, 1});
  }
  if (runs.size() != 4) return std::nullopt;
  auto [d0, l0] = runs[0];
  auto [d1, l1] = runs[1];
  auto [d2, l2] = runs[2];
  auto [d3, l3] = runs[3];
  if (d0.first == d1.first) return std::nullopt;
  if (d2 != std::pair{d0.first, -d0.second}) return std::nullopt;
  if (d3 != std::pair{d1.first, -d1.second}) return std::nullopt;
  if (l0 != l2 || l1 != l3) return std::nullopt;
  return std::pair{l0, l1};
}

namespace {

CertBound from_log(double ln_value, bool rigorous, double alpha) {
  CertBound b;
  b.log10_value = ln_value / std::log(10.0);
  b.value = std::exp(ln_value);
  b.rigorous = rigorous;
  b.alpha = alpha;
  return b;
}

void require_rect(int r, int s) {
  if (r < 1 || s < 1)
    throw std::invalid_argument("certify: rectangle sides must be >= 1");
}

std::pair<int, int> dims_or_throw(const Lattice& lat, const Loop& loop) {
  auto d = rectangle_dims(lat, loop);
  if (!d) throw std::invalid_argument("certify: loop is not a rectangle");
  return *d;
}

}  // namespace

CertBound certify_truncated_bound(int r, int s, const ModelParams& p) {
  require_rect(r, s);
  bool rigorous = validate_parameters(p).in_regime;
  double base = 1e3 * p.d * p.beta;
  if (base <= 0) {
    CertBound b;
    b.value = 0.0;
    b.log10_value = -HUGE_VAL;
    b.rigorous = rigorous;
    return b;
  }
  double ln = std::log(2.0) + ((r + s) / 2.0 - 1.0) * std::log(p.n) +
              static_cast<double>(r) * s * std::log(base);
  return from_log(ln, rigorous, 0.0);
}

CertBound certify_truncated_bound(const Lattice& lat, const Loop& loop,
                                  const ModelParams& p) {
  auto [r, s] = dims_or_throw(lat, loop);
  return certify_truncated_bound(r, s, p);
}

CertBound certify_area_law_bound(int r, int s, const ModelParams& p) {
  require_rect(r, s);
  bool rigorous = validate_parameters(p).in_regime;
  double alpha = 2.0 * std::pow(10.0, 3.0 * p.d) *
                 std::max(1e3 * p.d * p.beta,
                          std::exp(-1e-7 / (static_cast<double>(p.d) * p.d) *
                                   p.n));
  double perimeter = 2.0 * (r + s);
  double ln = std::log(2.0 * perimeter) +
              ((r + s) / 2.0 - 1.0) * std::log(p.n) +
              static_cast<double>(r) * s * std::log(alpha);
  return from_log(ln, rigorous, alpha);
}

CertBound certify_area_law_bound(const Lattice& lat, const Loop& loop,
                                 const ModelParams& p) {
  auto [r, s] = dims_or_throw(lat, loop);
  return certify_area_law_bound(r, s, p);
}

CertBound reduction_rhs(double c1, double c2, int perimeter, int64_t area,
                        const ModelParams& p) {
  if (!(c1 > 0)) throw std::invalid_argument("reduction_rhs: c1 must be > 0");
  if (perimeter < 0 || area < 0)
    throw std::invalid_argument("reduction_rhs: negative geometry");
  double decay =
      std::max(-c2, -1e-3 * static_cast<double>(p.b) / p.d);
  double ln = std::log(c1) + 2.0 * p.d * perimeter +
              static_cast<double>(area) *
                  (p.d * std::log(50.0) + std::log(2.0) + decay);
  return from_log(ln, validate_parameters(p).in_regime, 0.0);
}

}  // namespace loopeq
