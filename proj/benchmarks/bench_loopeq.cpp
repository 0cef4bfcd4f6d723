// Microbenchmarks for the hot paths: canonical keys, the area branch and
// bound, state-space construction, the operator sweep, and both oracles.

#include <benchmark/benchmark.h>

#include <loopeq/area.hpp>
#include <loopeq/engine.hpp>
#include <loopeq/oracle.hpp>
#include <loopeq/state_space.hpp>
#include <vector>

using namespace loopeq;

namespace {

Loop rect_loop(const Lattice& lat, std::vector<int> corner, int r, int s) {
  Loop out;
  SiteId cur = lat.site(corner);
  auto push = [&](int axis, int dir) {
    SiteId next = *lat.step(cur, axis, dir);
    EdgeId e = lat.edge_at(dir > 0 ? cur : next, axis);
    out.push_back(dir > 0 ? OriEdge::forward(e) : OriEdge::backward(e));
    cur = next;
  };
  for (int i = 0; i < r; ++i) push(0, +1);
  for (int i = 0; i < s; ++i) push(1, +1);
  for (int i = 0; i < r; ++i) push(0, -1);
  for (int i = 0; i < s; ++i) push(1, -1);
  return out;
}

StateSpace plaquette_space(long long b) {
  Lattice lat(2, 2);
  ModelSpec spec;
  spec.n = 1.0;
  spec.beta = 0.1;
  spec.b = b;
  return build_reachable(lat, rect_loop(lat, {0, 0}, 1, 1), spec);
}

void BM_CanonicalKey(benchmark::State& state) {
  Lattice lat(2, 2);
  Loop l = rect_loop(lat, {-1, -1}, static_cast<int>(state.range(0)),
                     static_cast<int>(state.range(0)));
  LatticeString s = LatticeString::from_loops(lat, {l});
  for (auto _ : state) benchmark::DoNotOptimize(canonical_key(s));
}
BENCHMARK(BM_CanonicalKey)->Arg(1)->Arg(2)->Arg(3);

void BM_AreaBranchBound(benchmark::State& state) {
  Lattice lat(3, 2);
  int side = static_cast<int>(state.range(0));
  Loop l = rect_loop(lat, {0, 0}, side, side);
  LatticeString s = LatticeString::from_loops(lat, {l});
  for (auto _ : state) {
    AreaResult r = area(lat, s, 64);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_AreaBranchBound)->Arg(1)->Arg(2)->Arg(3);

void BM_BuildReachable(benchmark::State& state) {
  long long b = state.range(0);
  for (auto _ : state) {
    StateSpace sp = plaquette_space(b);
    benchmark::DoNotOptimize(sp.size());
  }
}
BENCHMARK(BM_BuildReachable)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_OperatorSweep(benchmark::State& state) {
  StateSpace sp = plaquette_space(state.range(0));
  std::vector<Complex> f(sp.states.size(), Complex(0.5, 0.0));
  std::vector<Complex> boundary(sp.states.size(), Complex(1.0, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(apply_m(sp, f, boundary));
}
BENCHMARK(BM_OperatorSweep)->Arg(1)->Arg(2);

void BM_NeumannSolve(benchmark::State& state) {
  StateSpace sp = plaquette_space(state.range(0));
  std::vector<Complex> boundary(sp.states.size());
  for (int i = 0; i < sp.size(); ++i)
    if (sp.at(i).cls != StateClass::Interior) boundary[i] = Complex(1.0, 0.0);
  for (auto _ : state) {
    SolveResult res = neumann_solve(sp, boundary);
    benchmark::DoNotOptimize(res.f[sp.root]);
  }
}
BENCHMARK(BM_NeumannSolve)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ExactU1Phi(benchmark::State& state) {
  Lattice lat(1, 2);
  Loop l = rect_loop(lat, {0, 0}, 1, 1);
  LatticeString s = LatticeString::from_loops(lat, {l});
  PlaquetteCountPos k;
  for (PlaqId p : lat.plaqs())
    k.set(p, static_cast<uint32_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(exact_u1_phi(lat, s, k, 0.1));
}
BENCHMARK(BM_ExactU1Phi)->Arg(1)->Arg(2)->Arg(3);

void BM_McPhi(benchmark::State& state) {
  Lattice lat(1, 2);
  Loop l = rect_loop(lat, {0, 0}, 1, 1);
  LatticeString s = LatticeString::from_loops(lat, {l});
  ActionWeights w;  // full exponential action
  McOptions opt;
  opt.samples = state.range(0);
  opt.batches = 10;
  for (auto _ : state) {
    McEstimate est = mc_phi(lat, s, w, 2, 0.1, opt);
    benchmark::DoNotOptimize(est.mean);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McPhi)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_HaarSample(benchmark::State& state) {
  CounterRng rng(11, 0);
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_haar_unitary(n, rng));
}
BENCHMARK(BM_HaarSample)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
