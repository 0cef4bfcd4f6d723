// Command line front end.  A single JSON config (plus flag overrides) drives
// every subcommand; results go to stdout as a JSON summary that embeds the
// resolved config and an FNV-1a hash of each CSV artifact.  Exit codes:
// 0 success, 2 config or argument error, 3 capacity error, 4 failed check.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <loopeq/area.hpp>
#include <loopeq/certify.hpp>
#include <loopeq/engine.hpp>
#include <loopeq/invariants.hpp>
#include <loopeq/oracle.hpp>
#include <loopeq/state_space.hpp>
#include <loopeq/trunc_exp.hpp>
#include <limits>
#include <optional>
#include <string>
#include <vector>

using nlohmann::json;
using namespace loopeq;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitCheck = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resolved experiment configuration: defaults, then the config file, then
// command line overrides.
struct Config {
  int l = 1, d = 2;
  std::vector<int> corner;  // empty = lowest corner of the box
  int ax0 = 0, ax1 = 1;
  int r = 1, s = 1;
  double n = 1.0;
  double beta = 0.0;
  long long b = 1;
  std::string model = "truncated";
  json bad = json::array();  // [{"corner": [...], "axes": [mu, nu]}, ...]
  double lambda = 1.0, gamma = 1.0, rho = 1.0;
  std::string solver = "empirical";  // or "certified"
  std::string boundary = "exact";    // or "zero" / "one"
  std::string action = "full";       // or "truncated"
  long long samples = 100'000;
  uint64_t seed = 1;
  int batches = 100;
  int threads = 1;
  size_t max_states = 200'000;
  int max_perimeter = 4096;
  int64_t max_iota_quarters = 4096;
  int area_cap = 64;
  size_t revival_cap = 1'000'000;
  bool frontier_exterior = false;
  long long cases = 1000;
  uint64_t inv_seed = 7;
  int max_cluster_size = 1;
  long long cluster_cap = 2'000'000;
  double c1 = 1.0, c2 = 20.0;
  int grid_points = 1000;
  bool demo = false;
  bool check_bounds = false;
  double solver_tol = 1e-15;
  int max_iterations = 20'000;
  double residual_tol = 1e-9;
  double sigma = 3.0;
  std::string out_dir;
};

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown config key: " + path + it.key());
  }
}

Config load_config(const std::string& file) {
  Config c;
  if (file.empty()) return c;
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file);
  json j = json::parse(in);
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(j, "",
                 {"lattice", "loop", "parameters", "norm", "model", "bad",
                  "mode", "action", "sampling", "caps", "invariants",
                  "clusters", "reduction", "lemma_grid", "tolerances",
                  "output"});
  if (j.contains("lattice")) {
    const json& o = j.at("lattice");
    reject_unknown(o, "lattice.", {"l", "d"});
    c.l = o.value("l", c.l);
    c.d = o.value("d", c.d);
  }
  if (j.contains("loop")) {
    const json& o = j.at("loop");
    reject_unknown(o, "loop.", {"corner", "axes", "r", "s"});
    if (o.contains("corner")) c.corner = o.at("corner").get<std::vector<int>>();
    if (o.contains("axes")) {
      auto axes = o.at("axes").get<std::vector<int>>();
      if (axes.size() != 2) throw ConfigError("loop.axes must be a pair");
      c.ax0 = axes[0];
      c.ax1 = axes[1];
    }
    c.r = o.value("r", c.r);
    c.s = o.value("s", c.s);
  }
  if (j.contains("parameters")) {
    const json& o = j.at("parameters");
    reject_unknown(o, "parameters.", {"n", "beta", "b"});
    c.n = o.value("n", c.n);
    c.beta = o.value("beta", c.beta);
    c.b = o.value("b", c.b);
  }
  if (j.contains("norm")) {
    const json& o = j.at("norm");
    reject_unknown(o, "norm.", {"lambda", "gamma", "rho"});
    c.lambda = o.value("lambda", c.lambda);
    c.gamma = o.value("gamma", c.gamma);
    c.rho = o.value("rho", c.rho);
  }
  if (j.contains("model")) c.model = j.at("model").get<std::string>();
  if (j.contains("bad")) {
    if (!j.at("bad").is_array()) throw ConfigError("bad must be an array");
    c.bad = j.at("bad");
  }
  if (j.contains("mode")) {
    const json& o = j.at("mode");
    reject_unknown(o, "mode.", {"solver", "boundary"});
    c.solver = o.value("solver", c.solver);
    c.boundary = o.value("boundary", c.boundary);
  }
  if (j.contains("action")) c.action = j.at("action").get<std::string>();
  if (j.contains("sampling")) {
    const json& o = j.at("sampling");
    reject_unknown(o, "sampling.", {"samples", "seed", "batches", "threads"});
    c.samples = o.value("samples", c.samples);
    c.seed = o.value("seed", c.seed);
    c.batches = o.value("batches", c.batches);
    c.threads = o.value("threads", c.threads);
  }
  if (j.contains("caps")) {
    const json& o = j.at("caps");
    reject_unknown(o, "caps.",
                   {"max_states", "max_perimeter", "max_iota_quarters",
                    "area", "revival", "frontier_exterior", "clusters"});
    c.max_states = o.value("max_states", c.max_states);
    c.max_perimeter = o.value("max_perimeter", c.max_perimeter);
    c.max_iota_quarters = o.value("max_iota_quarters", c.max_iota_quarters);
    c.area_cap = o.value("area", c.area_cap);
    c.revival_cap = o.value("revival", c.revival_cap);
    c.frontier_exterior = o.value("frontier_exterior", c.frontier_exterior);
    c.cluster_cap = o.value("clusters", c.cluster_cap);
  }
  if (j.contains("invariants")) {
    const json& o = j.at("invariants");
    reject_unknown(o, "invariants.", {"cases", "seed"});
    c.cases = o.value("cases", c.cases);
    c.inv_seed = o.value("seed", c.inv_seed);
  }
  if (j.contains("clusters")) {
    const json& o = j.at("clusters");
    reject_unknown(o, "clusters.", {"max_size"});
    c.max_cluster_size = o.value("max_size", c.max_cluster_size);
  }
  if (j.contains("reduction")) {
    const json& o = j.at("reduction");
    reject_unknown(o, "reduction.", {"c1", "c2"});
    c.c1 = o.value("c1", c.c1);
    c.c2 = o.value("c2", c.c2);
  }
  if (j.contains("lemma_grid")) {
    const json& o = j.at("lemma_grid");
    reject_unknown(o, "lemma_grid.", {"points", "demo"});
    c.grid_points = o.value("points", c.grid_points);
    c.demo = o.value("demo", c.demo);
  }
  if (j.contains("tolerances")) {
    const json& o = j.at("tolerances");
    reject_unknown(o, "tolerances.",
                   {"solver", "max_iterations", "residual", "sigma"});
    c.solver_tol = o.value("solver", c.solver_tol);
    c.max_iterations = o.value("max_iterations", c.max_iterations);
    c.residual_tol = o.value("residual", c.residual_tol);
    c.sigma = o.value("sigma", c.sigma);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, "output.", {"dir"});
    c.out_dir = o.value("dir", c.out_dir);
  }
  return c;
}

json config_json(const Config& c) {
  return json{
      {"lattice", {{"l", c.l}, {"d", c.d}}},
      {"loop",
       {{"corner", c.corner},
        {"axes", {c.ax0, c.ax1}},
        {"r", c.r},
        {"s", c.s}}},
      {"parameters", {{"n", c.n}, {"beta", c.beta}, {"b", c.b}}},
      {"norm",
       {{"lambda", c.lambda}, {"gamma", c.gamma}, {"rho", c.rho}}},
      {"model", c.model},
      {"bad", c.bad},
      {"mode", {{"solver", c.solver}, {"boundary", c.boundary}}},
      {"action", c.action},
      {"sampling",
       {{"samples", c.samples},
        {"seed", c.seed},
        {"batches", c.batches},
        {"threads", c.threads}}},
      {"caps",
       {{"max_states", c.max_states},
        {"max_perimeter", c.max_perimeter},
        {"max_iota_quarters", c.max_iota_quarters},
        {"area", c.area_cap},
        {"revival", c.revival_cap},
        {"frontier_exterior", c.frontier_exterior},
        {"clusters", c.cluster_cap}}},
      {"invariants", {{"cases", c.cases}, {"seed", c.inv_seed}}},
      {"clusters", {{"max_size", c.max_cluster_size}}},
      {"reduction", {{"c1", c.c1}, {"c2", c.c2}}},
      {"lemma_grid", {{"points", c.grid_points}, {"demo", c.demo}}},
      {"tolerances",
       {{"solver", c.solver_tol},
        {"max_iterations", c.max_iterations},
        {"residual", c.residual_tol},
        {"sigma", c.sigma}}},
      {"output", {{"dir", c.out_dir}}},
  };
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Collects artifact contents, records byte counts and content hashes, and
// materializes files when an output directory is configured.
struct Artifacts {
  std::string dir;
  json table = json::object();

  void add(const std::string& name, const std::string& content) {
    char hex[19];
    std::snprintf(hex, sizeof hex, "0x%016" PRIx64, fnv1a64(content));
    table[name] = json{{"bytes", content.size()}, {"fnv1a64", hex}};
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
  }
};

void emit_summary(const std::string& command, const Config& cfg,
                  const json& results, const Artifacts& art) {
  json summary{{"command", command},
               {"config", config_json(cfg)},
               {"results", results},
               {"artifacts", art.table}};
  std::string text = summary.dump(2);
  text.push_back('\n');
  if (!art.dir.empty()) {
    std::filesystem::create_directories(art.dir);
    std::ofstream out(art.dir + "/summary.json", std::ios::binary);
    out << text;
  }
  std::fputs(text.c_str(), stdout);
}

ModelParams model_params(const Config& c) {
  ModelParams p;
  p.d = c.d;
  p.n = c.n;
  p.beta = c.beta;
  p.b = c.b;
  return p;
}

NormParams norm_params(const Config& c) { return {c.lambda, c.gamma, c.rho}; }

ModelKind model_kind(const Config& c) {
  if (c.model == "truncated") return ModelKind::Truncated;
  if (c.model == "modified") return ModelKind::Modified;
  throw ConfigError("model must be \"truncated\" or \"modified\"");
}

BuildCaps build_caps(const Config& c) {
  BuildCaps caps;
  caps.max_states = c.max_states;
  caps.max_perimeter = c.max_perimeter;
  caps.max_iota_quarters = c.max_iota_quarters;
  caps.area_cap = c.area_cap;
  caps.revival_cap = c.revival_cap;
  caps.frontier_exterior = c.frontier_exterior;
  return caps;
}

int required_int_n(const Config& c) {
  int n = static_cast<int>(c.n);
  if (c.n != n || n < 1)
    throw ConfigError("Monte Carlo requires a positive integer n");
  return n;
}

McOptions mc_options(const Config& c) {
  McOptions o;
  o.samples = c.samples;
  o.seed = c.seed;
  o.batches = c.batches;
  o.threads = c.threads;
  return o;
}

SiteId resolve_corner(const Lattice& lat, const std::vector<int>& corner) {
  std::vector<int> coords =
      corner.empty() ? std::vector<int>(lat.d(), -lat.L()) : corner;
  if (static_cast<int>(coords.size()) != lat.d())
    throw ConfigError("loop.corner needs one coordinate per axis");
  if (!lat.in_box(coords)) throw ConfigError("loop.corner outside the box");
  return lat.site(coords);
}

Loop rect_loop(const Lattice& lat, const Config& c) {
  if (c.ax0 < 0 || c.ax0 >= lat.d() || c.ax1 < 0 || c.ax1 >= lat.d() ||
      c.ax0 == c.ax1)
    throw ConfigError("loop.axes must be two distinct axes");
  if (c.r < 1 || c.s < 1) throw ConfigError("loop sides must be >= 1");
  Loop out;
  SiteId cur = resolve_corner(lat, c.corner);
  auto push = [&](int axis, int dir) {
    std::optional<SiteId> next = lat.step(cur, axis, dir);
    if (!next) throw ConfigError("loop leaves the box");
    EdgeId e = lat.edge_at(dir > 0 ? cur : *next, axis);
    out.push_back(dir > 0 ? OriEdge::forward(e) : OriEdge::backward(e));
    cur = *next;
  };
  for (int i = 0; i < c.r; ++i) push(c.ax0, +1);
  for (int i = 0; i < c.s; ++i) push(c.ax1, +1);
  for (int i = 0; i < c.r; ++i) push(c.ax0, -1);
  for (int i = 0; i < c.s; ++i) push(c.ax1, -1);
  return out;
}

PlaqId parse_plaq(const Lattice& lat, const json& o) {
  if (!o.is_object()) throw ConfigError("bad[] entries must be objects");
  reject_unknown(o, "bad[].", {"corner", "axes"});
  auto corner = o.at("corner").get<std::vector<int>>();
  auto axes = o.at("axes").get<std::vector<int>>();
  if (axes.size() != 2) throw ConfigError("bad[].axes must be a pair");
  if (static_cast<int>(corner.size()) != lat.d() || !lat.in_box(corner))
    throw ConfigError("bad[].corner outside the box");
  PlaqId p = lat.plaq_at(lat.site(corner), axes[0], axes[1]);
  if (p.v < 0) throw ConfigError("bad[] plaquette leaves the box");
  return p;
}

PlaquetteSet parse_bad(const Lattice& lat, const Config& c) {
  PlaquetteSet out;
  for (const json& o : c.bad) out.insert(parse_plaq(lat, o));
  return out;
}

json plaq_json(const Lattice& lat, PlaqId p) {
  auto [mu, nu] = lat.plaq_axes(p);
  return json{{"corner", lat.coords(lat.plaq_corner(p))},
              {"axes", {mu, nu}}};
}

ModelSpec model_spec(const Lattice& lat, const Config& c) {
  ModelSpec spec;
  spec.model = model_kind(c);
  spec.n = c.n;
  spec.beta = c.beta;
  spec.b = c.b;
  spec.bad = parse_bad(lat, c);
  return spec;
}

PlaquetteCountPos uniform_budget(const Lattice& lat, long long b,
                                 const PlaquetteSet& bad) {
  if (b < 0 || b > std::numeric_limits<uint32_t>::max())
    throw ConfigError("b out of range for exact evaluation");
  PlaquetteCountPos k;
  for (PlaqId p : lat.plaqs())
    if (!bad.contains(p)) k.set(p, static_cast<uint32_t>(b));
  return k;
}

// Exact U(1) value of a state under its remaining budget.
double exact_state_value(const StateSpace& sp, const StateRecord& rec) {
  PlaquetteCountPos k = sp.budget_from_deficit(rec.deficit);
  if (sp.spec.bad.empty())
    return exact_u1_phi(sp.lat, rec.s, k, sp.spec.beta);
  U1Weights w{k, sp.spec.bad, sp.spec.b};
  return exact_u1_phi(sp.lat, rec.s, w, sp.spec.beta);
}

std::vector<Complex> make_boundary(const StateSpace& sp, const Config& c) {
  std::vector<Complex> boundary(sp.size());
  if (c.boundary != "exact" && c.boundary != "zero" && c.boundary != "one")
    throw ConfigError("mode.boundary must be \"exact\", \"zero\" or \"one\"");
  if (c.boundary == "exact" && c.n != 1.0)
    throw ConfigError("the exact boundary requires n = 1");
  for (int i = 0; i < sp.size(); ++i) {
    const StateRecord& rec = sp.at(i);
    if (rec.cls == StateClass::Interior) continue;
    if (rec.cls == StateClass::Boundary0) continue;  // provably zero
    if (c.boundary == "zero")
      boundary[i] = Complex(0.0, 0.0);
    else if (c.boundary == "one")
      boundary[i] = Complex(1.0, 0.0);
    else
      boundary[i] = Complex(exact_state_value(sp, rec), 0.0);
  }
  return boundary;
}

std::string states_csv(const StateSpace& sp, const std::vector<Complex>& f,
                       const std::vector<Complex>& resid,
                       const std::vector<double>& se) {
  std::string csv = "state,key,class,iota_quarters,area,value_re,value_im,"
                    "residual,se\n";
  for (int i = 0; i < sp.size(); ++i) {
    const StateRecord& rec = sp.at(i);
    csv += std::to_string(i);
    csv += ',';
    csv += key_to_hex(state_key(rec.s, rec.deficit, rec.q));
    csv += ',';
    csv += state_class_name(rec.cls);
    csv += ',';
    csv += std::to_string(rec.iota_quarters);
    csv += ',';
    csv += std::to_string(rec.area);
    csv += ',';
    csv += fmt(f[i].real());
    csv += ',';
    csv += fmt(f[i].imag());
    csv += ',';
    csv += fmt(std::abs(resid[i]));
    csv += ',';
    csv += fmt(se.empty() ? 0.0 : se[i]);
    csv += '\n';
  }
  return csv;
}

std::string mc_csv_row(const std::string& obs, Complex mean, double se,
                       long long samples, uint64_t seed) {
  std::string row = obs;
  row += ',';
  row += fmt(mean.real());
  row += ',';
  row += fmt(mean.imag());
  row += ',';
  row += fmt(se);
  row += ',';
  row += std::to_string(samples);
  row += ',';
  row += std::to_string(seed);
  row += '\n';
  return row;
}

constexpr const char* kMcHeader = "observable,mean_re,mean_im,se,samples,seed\n";

json regime_json(const RegimeReport& r) {
  return json{{"in_regime", r.in_regime},
              {"n_ok", r.n_ok},
              {"beta_ok", r.beta_ok},
              {"b_range_ok", r.b_range_ok},
              {"b_odd", r.b_odd},
              {"n_min", r.n_min},
              {"beta_max", r.beta_max},
              {"b_lo", r.b_lo},
              {"b_hi", r.b_hi},
              {"coupling_ratio", r.coupling_ratio},
              {"truncation_ratio", r.truncation_ratio}};
}

json cert_json(const CertBound& b) {
  return json{{"value", b.value},
              {"log10_value", b.log10_value},
              {"rigorous", b.rigorous},
              {"alpha", b.alpha}};
}

// --- Subcommand runners ---

int run_check_params(const Config& c) {
  Artifacts art{c.out_dir};
  RegimeReport rep = validate_parameters(model_params(c));
  json results{{"regime", regime_json(rep)}};
  bool ok = true;
  if (c.check_bounds) {
    LemmaCheckOptions opts;
    opts.grid_points = c.grid_points;
    opts.demo_mode = c.demo;
    LemmaCheckReport lr = check_lemma_bounds(model_params(c), opts);
    json v = json::array();
    for (const auto& viol : lr.violations)
      v.push_back(json{{"inequality", viol.inequality},
                       {"x", viol.x},
                       {"k", viol.k},
                       {"detail", viol.detail}});
    results["lemma_bounds"] =
        json{{"checked", lr.checked},
             {"points_checked",
              {lr.points_checked[0], lr.points_checked[1],
               lr.points_checked[2]}},
             {"points_skipped", lr.points_skipped},
             {"violations", v},
             {"passed", lr.passed()}};
    ok = lr.passed();
  }
  emit_summary("check-params", c, results, art);
  return ok ? 0 : kExitCheck;
}

int run_area(const Config& c) {
  Artifacts art{c.out_dir};
  Lattice lat(c.l, c.d);
  Loop loop = rect_loop(lat, c);
  LatticeString str = LatticeString::from_loops(lat, {loop});
  AreaResult a = area(lat, str, c.area_cap);
  AreaResult sa = support_area(lat, str, c.area_cap);
  json results{{"perimeter", str.total_length()},
               {"area",
                {{"bounded", a.bounded}, {"value", a.value}, {"cap", a.cap}}},
               {"support_area",
                {{"bounded", sa.bounded},
                 {"value", sa.value},
                 {"cap", sa.cap}}}};
  emit_summary("area", c, results, art);
  return 0;
}

int run_clusters(const Config& c) {
  Artifacts art{c.out_dir};
  Lattice lat(c.l, c.d);
  Loop loop = rect_loop(lat, c);
  std::vector<EdgeId> edges;
  for (OriEdge e : loop) edges.push_back(e.edge());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<PlaquetteSet> clusters = enumerate_clusters(
      lat, edges, c.max_cluster_size, static_cast<size_t>(c.cluster_cap));

  json dump = json::array();
  for (const PlaquetteSet& cl : clusters) {
    json entry = json::array();
    for (PlaqId p : cl) entry.push_back(plaq_json(lat, p));
    dump.push_back(std::move(entry));
  }
  std::string dump_text = dump.dump(2);
  dump_text.push_back('\n');
  art.add("clusters.json", dump_text);

  // Cumulative count per size against e^{2d|l|} 50^{dM}.
  json per_size = json::array();
  bool ok = true;
  for (int m = 0; m <= c.max_cluster_size; ++m) {
    long long count = 0;
    for (const PlaquetteSet& cl : clusters)
      if (static_cast<int>(cl.size()) <= m) ++count;
    double bound = std::exp(2.0 * c.d * static_cast<double>(loop.size())) *
                   std::pow(50.0, static_cast<double>(c.d) * m);
    ok = ok && static_cast<double>(count) <= bound;
    per_size.push_back(json{{"max_size", m},
                            {"count", count},
                            {"bound", bound}});
  }
  json results{{"total", clusters.size()}, {"per_size", per_size},
               {"bound_ok", ok}};
  emit_summary("clusters", c, results, art);
  return ok ? 0 : kExitCheck;
}

json solve_json(const StateSpace& sp, const SolveResult& res) {
  json cls = json::object();
  for (StateClass k :
       {StateClass::Interior, StateClass::NullBoundary, StateClass::Boundary0,
        StateClass::Boundary1, StateClass::Exterior})
    cls[state_class_name(k)] = sp.count_class(k);
  return json{{"states", sp.size()},
              {"classes", cls},
              {"iterations", res.iterations},
              {"converged", res.converged},
              {"used_direct", res.used_direct},
              {"factor", res.factor},
              {"certified", res.certified},
              {"g_norm", res.g_norm},
              {"final_update_norm", res.final_update_norm},
              {"apriori_error", res.apriori_error},
              {"aposteriori_error", res.aposteriori_error},
              {"residual_sup", res.residual_sup},
              {"root_value_re", res.f[sp.root].real()},
              {"root_value_im", res.f[sp.root].imag()}};
}

int run_solve(const Config& c) {
  Artifacts art{c.out_dir};
  if (c.solver != "empirical" && c.solver != "certified")
    throw ConfigError("mode.solver must be \"empirical\" or \"certified\"");
  Lattice lat(c.l, c.d);
  Loop root = rect_loop(lat, c);
  StateSpace sp = build_reachable(lat, root, model_spec(lat, c),
                                  build_caps(c));
  std::vector<Complex> boundary = make_boundary(sp, c);

  SolveOptions opt;
  opt.max_iterations = c.max_iterations;
  opt.tolerance = c.solver_tol;
  opt.norm = norm_params(c);
  SolveResult res = neumann_solve(sp, boundary, opt);
  std::vector<Complex> resid = equation_residuals(sp, res.f, boundary);

  art.add("states.csv", states_csv(sp, res.f, resid, {}));
  json results = solve_json(sp, res);
  bool ok = res.converged;
  if (c.solver == "certified") ok = ok && res.certified;
  results["ok"] = ok;
  emit_summary("solve-truncated", c, results, art);
  return ok ? 0 : kExitCheck;
}

int run_residual(const Config& c) {
  Artifacts art{c.out_dir};
  Lattice lat(c.l, c.d);
  Loop root = rect_loop(lat, c);
  StateSpace sp = build_reachable(lat, root, model_spec(lat, c),
                                  build_caps(c));
  json results;
  bool ok = true;

  if (c.n == 1.0) {
    // Exact U(1) values satisfy the equations to rounding error.
    std::vector<Complex> phi(sp.size());
    for (int i = 0; i < sp.size(); ++i)
      phi[i] = Complex(exact_state_value(sp, sp.at(i)), 0.0);
    std::vector<Complex> resid = equation_residuals(sp, phi, phi);
    double worst = 0.0;
    for (int i = 0; i < sp.size(); ++i)
      if (sp.at(i).cls == StateClass::Interior)
        worst = std::max(worst, std::abs(resid[i]));
    art.add("residual.csv", states_csv(sp, phi, resid, {}));
    ok = worst <= c.residual_tol;
    results = json{{"source", "exact"},
                   {"states", sp.size()},
                   {"residual_sup", worst},
                   {"tolerance", c.residual_tol},
                   {"ok", ok}};
  } else {
    // Monte Carlo values per state on shared samples; the batch spread
    // propagates through the equation's linear combination.
    int n = required_int_n(c);
    std::vector<LatticeString> obs;
    std::vector<ActionWeights> weights;
    for (int i = 0; i < sp.size(); ++i) {
      const StateRecord& rec = sp.at(i);
      ActionWeights w;
      w.full = false;
      w.k = sp.budget_from_deficit(rec.deficit);
      w.bad = sp.spec.bad;
      w.b = sp.spec.b;
      obs.push_back(rec.s);
      weights.push_back(std::move(w));
    }
    McBatchTable table =
        mc_string_integrals(lat, n, c.beta, obs, weights, mc_options(c));
    std::vector<ResidualStat> stats =
        equation_residual_stats(sp, table.batch_means);
    std::vector<Complex> values(sp.size()), resid(sp.size());
    std::vector<double> se(sp.size());
    int flagged = 0;
    for (int i = 0; i < sp.size(); ++i) {
      values[i] = table.estimate(i).mean;
      resid[i] = stats[i].mean;
      se[i] = stats[i].se;
      if (sp.at(i).cls == StateClass::Interior &&
          std::abs(stats[i].mean) > c.sigma * stats[i].se + 1e-12)
        ++flagged;
    }
    art.add("residual.csv", states_csv(sp, values, resid, se));
    ok = flagged == 0;
    results = json{{"source", "monte_carlo"},
                   {"states", sp.size()},
                   {"samples", table.samples_per_batch * c.batches},
                   {"sigma", c.sigma},
                   {"flagged", flagged},
                   {"ok", ok}};
  }
  emit_summary("residual", c, results, art);
  return ok ? 0 : kExitCheck;
}

int run_certify(const Config& c) {
  Artifacts art{c.out_dir};
  if (c.r < 1 || c.s < 1) throw ConfigError("loop sides must be >= 1");
  ModelParams p = model_params(c);
  CertBound tb = certify_truncated_bound(c.r, c.s, p);
  CertBound ab = certify_area_law_bound(c.r, c.s, p);
  CertBound red = reduction_rhs(c.c1, c.c2, 2 * (c.r + c.s),
                                static_cast<int64_t>(c.r) * c.s, p);
  json results{{"rectangle", {{"r", c.r}, {"s", c.s}}},
               {"truncated_bound", cert_json(tb)},
               {"area_law_bound", cert_json(ab)},
               {"reduction_rhs", cert_json(red)}};
  emit_summary("certify", c, results, art);
  return 0;
}

int run_contraction(const Config& c) {
  Artifacts art{c.out_dir};
  ModelParams p = model_params(c);
  NormParams np = norm_params(c);
  double ft = contraction_factor(p, np, ModelKind::Truncated);
  double fm = contraction_factor(p, np, ModelKind::Modified);
  json results{
      {"truncated", {{"factor", ft}, {"contracting", ft < 1.0}}},
      {"modified", {{"factor", fm}, {"contracting", fm < 1.0}}}};
  emit_summary("contraction", c, results, art);
  return 0;
}

int run_mc_wilson(const Config& c) {
  Artifacts art{c.out_dir};
  int n = required_int_n(c);
  Lattice lat(c.l, c.d);
  Loop loop = rect_loop(lat, c);
  McEstimate est = mc_wilson_expectation(lat, loop, n, c.beta, mc_options(c));
  std::string name =
      "wilson_" + std::to_string(c.r) + "x" + std::to_string(c.s);
  art.add("estimates.csv",
          kMcHeader + mc_csv_row(name, est.mean, est.se, est.samples, c.seed));
  json results{{"observable", name},
               {"mean_re", est.mean.real()},
               {"mean_im", est.mean.imag()},
               {"se", est.se},
               {"samples", est.samples}};
  if (c.d == 2 && n == 1)
    results["reference_u1_2d"] =
        u1_wilson_2d(static_cast<long long>(c.r) * c.s, c.beta);
  emit_summary("mc-wilson", c, results, art);
  return 0;
}

int run_mc_phi(const Config& c) {
  Artifacts art{c.out_dir};
  int n = required_int_n(c);
  Lattice lat(c.l, c.d);
  Loop loop = rect_loop(lat, c);
  LatticeString str = LatticeString::from_loops(lat, {loop});
  ActionWeights w;
  if (c.action == "full") {
    w.full = true;
  } else if (c.action == "truncated") {
    w.full = false;
    w.bad = parse_bad(lat, c);
    w.k = uniform_budget(lat, c.b, w.bad);
    w.b = c.b;
  } else {
    throw ConfigError("action must be \"full\" or \"truncated\"");
  }
  McEstimate est = mc_phi(lat, str, w, n, c.beta, mc_options(c));
  art.add("estimates.csv",
          kMcHeader +
              mc_csv_row("phi", est.mean, est.se, est.samples, c.seed));
  json results{{"observable", "phi"},
               {"action", c.action},
               {"mean_re", est.mean.real()},
               {"mean_im", est.mean.imag()},
               {"se", est.se},
               {"samples", est.samples}};
  emit_summary("mc-phi", c, results, art);
  return 0;
}

int run_u1_exact(const Config& c) {
  Artifacts art{c.out_dir};
  Lattice lat(c.l, c.d);
  Loop loop = rect_loop(lat, c);
  LatticeString str = LatticeString::from_loops(lat, {loop});
  PlaquetteSet bad = parse_bad(lat, c);
  double value;
  if (bad.empty()) {
    value = exact_u1_phi(lat, str, uniform_budget(lat, c.b, bad), c.beta);
  } else {
    U1Weights w{uniform_budget(lat, c.b, bad), bad, c.b};
    value = exact_u1_phi(lat, str, w, c.beta);
  }
  art.add("estimates.csv",
          kMcHeader + mc_csv_row("u1_phi", Complex(value, 0.0), 0.0, 0, 0));
  json results{{"observable", "u1_phi"}, {"value", value}};
  emit_summary("u1-exact", c, results, art);
  return 0;
}

int run_verify_lemmas(const Config& c) {
  Artifacts art{c.out_dir};
  if (c.cases < 1) throw ConfigError("invariants.cases must be >= 1");
  InvariantSuiteOptions opt;
  opt.cases = c.cases;
  opt.seed = c.inv_seed;
  InvariantReport rep = run_invariant_suite(opt);
  art.add("lemmas.csv", rep.to_csv());
  json lemmas = json::object();
  for (const auto& [name, counts] : rep.lemmas)
    lemmas[name] = json{{"cases", counts.cases},
                        {"checks", counts.checks},
                        {"violations", counts.violations}};
  json witnesses = json::array();
  for (const InvariantWitness& w : rep.witnesses)
    witnesses.push_back(json{{"lemma", w.lemma}, {"detail", w.detail}});
  json results{{"lemmas", lemmas},
               {"generation_attempts", rep.generation_attempts},
               {"total_checks", rep.total_checks()},
               {"total_violations", rep.total_violations()},
               {"witnesses", witnesses},
               {"passed", rep.passed()}};
  emit_summary("verify-lemmas", c, results, art);
  return rep.passed() ? 0 : kExitCheck;
}

// Flag overrides; only values the user actually passed are applied.
struct Overrides {
  std::optional<int> l, d, r, s, ax0, ax1, threads, batches, grid_points,
      max_cluster_size, max_iterations;
  std::optional<long long> b, samples, cases;
  std::optional<double> n, beta, lambda, gamma, rho, c1, c2, sigma,
      residual_tol;
  std::optional<uint64_t> seed, inv_seed;
  std::optional<std::string> model, solver, boundary, action, out;
  std::optional<std::vector<int>> corner;
  bool demo = false, check_bounds = false, frontier = false;
};

void apply_overrides(Config& c, const Overrides& o) {
  if (o.l) c.l = *o.l;
  if (o.d) c.d = *o.d;
  if (o.r) c.r = *o.r;
  if (o.s) c.s = *o.s;
  if (o.ax0) c.ax0 = *o.ax0;
  if (o.ax1) c.ax1 = *o.ax1;
  if (o.corner) c.corner = *o.corner;
  if (o.n) c.n = *o.n;
  if (o.beta) c.beta = *o.beta;
  if (o.b) c.b = *o.b;
  if (o.model) c.model = *o.model;
  if (o.lambda) c.lambda = *o.lambda;
  if (o.gamma) c.gamma = *o.gamma;
  if (o.rho) c.rho = *o.rho;
  if (o.solver) c.solver = *o.solver;
  if (o.boundary) c.boundary = *o.boundary;
  if (o.action) c.action = *o.action;
  if (o.samples) c.samples = *o.samples;
  if (o.seed) c.seed = *o.seed;
  if (o.batches) c.batches = *o.batches;
  if (o.threads) c.threads = *o.threads;
  if (o.cases) c.cases = *o.cases;
  if (o.inv_seed) c.inv_seed = *o.inv_seed;
  if (o.max_cluster_size) c.max_cluster_size = *o.max_cluster_size;
  if (o.c1) c.c1 = *o.c1;
  if (o.c2) c.c2 = *o.c2;
  if (o.grid_points) c.grid_points = *o.grid_points;
  if (o.sigma) c.sigma = *o.sigma;
  if (o.residual_tol) c.residual_tol = *o.residual_tol;
  if (o.max_iterations) c.max_iterations = *o.max_iterations;
  if (o.out) c.out_dir = *o.out;
  if (o.demo) c.demo = true;
  if (o.check_bounds) c.check_bounds = true;
  if (o.frontier) c.frontier_exterior = true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Master loop equation toolkit for U(N) lattice gauge theory"};
  app.require_subcommand(1);

  std::string config_file;
  Overrides ov;
  app.add_option("--config", config_file, "JSON experiment config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", ov.out, "Artifact output directory");

  auto add_lattice = [&](CLI::App* sub) {
    sub->add_option("--l", ov.l, "Box radius L");
    sub->add_option("--d", ov.d, "Dimension");
  };
  auto add_loop = [&](CLI::App* sub) {
    sub->add_option("--corner", ov.corner,
                    "Rectangle corner coordinates (default lowest corner)");
    sub->add_option("--ax0", ov.ax0, "First rectangle axis");
    sub->add_option("--ax1", ov.ax1, "Second rectangle axis");
    sub->add_option("--r", ov.r, "Rectangle side along ax0");
    sub->add_option("--s", ov.s, "Rectangle side along ax1");
  };
  auto add_params = [&](CLI::App* sub) {
    sub->add_option("--n", ov.n, "Gauge group dimension N");
    sub->add_option("--beta", ov.beta, "Inverse coupling beta");
    sub->add_option("--b", ov.b, "Weight truncation degree B");
  };
  auto add_norm = [&](CLI::App* sub) {
    sub->add_option("--lambda", ov.lambda, "Norm weight for iota");
    sub->add_option("--gamma", ov.gamma, "Norm weight for area or support");
    sub->add_option("--rho", ov.rho, "Norm weight for the deficit");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", ov.model, "truncated or modified");
  };
  auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--samples", ov.samples, "Monte Carlo samples");
    sub->add_option("--seed", ov.seed, "Monte Carlo seed");
    sub->add_option("--batches", ov.batches, "Monte Carlo batches");
    sub->add_option("--threads", ov.threads, "Worker threads");
  };

  CLI::App* sub_check =
      app.add_subcommand("check-params", "Parameter regime report");
  add_params(sub_check);
  sub_check->add_option("--d", ov.d, "Dimension");
  sub_check->add_flag("--check-bounds", ov.check_bounds,
                      "Also grid-check the truncated-exponential bounds");
  sub_check->add_option("--grid-points", ov.grid_points,
                        "Grid points per inequality");
  sub_check->add_flag("--demo", ov.demo,
                      "Demo mode for out-of-regime parameters");

  CLI::App* sub_area =
      app.add_subcommand("area", "Minimal balancing area of a loop");
  add_lattice(sub_area);
  add_loop(sub_area);

  CLI::App* sub_clusters =
      app.add_subcommand("clusters", "Enumerate clusters touching a loop");
  add_lattice(sub_clusters);
  add_loop(sub_clusters);
  sub_clusters->add_option("--max-size", ov.max_cluster_size,
                           "Largest cluster size");

  CLI::App* sub_solve = app.add_subcommand(
      "solve-truncated", "Fixed point of the loop equations on a state space");
  add_lattice(sub_solve);
  add_loop(sub_solve);
  add_params(sub_solve);
  add_norm(sub_solve);
  add_model(sub_solve);
  sub_solve->add_option("--solver", ov.solver, "certified or empirical");
  sub_solve->add_option("--boundary", ov.boundary, "exact, zero or one");
  sub_solve->add_option("--max-iterations", ov.max_iterations,
                        "Iteration cap");
  sub_solve->add_flag("--frontier-exterior", ov.frontier,
                      "Clip capacity overruns to exterior leaves");

  CLI::App* sub_residual = app.add_subcommand(
      "residual", "Per-state loop equation residuals from an oracle");
  add_lattice(sub_residual);
  add_loop(sub_residual);
  add_params(sub_residual);
  add_model(sub_residual);
  add_sampling(sub_residual);
  sub_residual->add_option("--sigma", ov.sigma,
                           "Allowed residual in standard errors");
  sub_residual->add_option("--residual-tol", ov.residual_tol,
                           "Absolute tolerance for exact residuals");

  CLI::App* sub_certify = app.add_subcommand(
      "certify", "Closed-form Wilson loop bounds for a rectangle");
  add_params(sub_certify);
  sub_certify->add_option("--d", ov.d, "Dimension");
  sub_certify->add_option("--r", ov.r, "Rectangle side along ax0");
  sub_certify->add_option("--s", ov.s, "Rectangle side along ax1");
  sub_certify->add_option("--c1", ov.c1, "Reduction constant C1");
  sub_certify->add_option("--c2", ov.c2, "Reduction constant C2");

  CLI::App* sub_contraction = app.add_subcommand(
      "contraction", "Closed-form contraction factors for both models");
  add_params(sub_contraction);
  sub_contraction->add_option("--d", ov.d, "Dimension");
  add_norm(sub_contraction);

  CLI::App* sub_wilson = app.add_subcommand(
      "mc-wilson", "Monte Carlo Wilson loop expectation");
  add_lattice(sub_wilson);
  add_loop(sub_wilson);
  add_params(sub_wilson);
  add_sampling(sub_wilson);

  CLI::App* sub_phi = app.add_subcommand(
      "mc-phi", "Monte Carlo string integral under a chosen action weight");
  add_lattice(sub_phi);
  add_loop(sub_phi);
  add_params(sub_phi);
  add_sampling(sub_phi);
  sub_phi->add_option("--action", ov.action, "full or truncated");

  CLI::App* sub_u1 = app.add_subcommand(
      "u1-exact", "Exact U(1) string integral under truncated weights");
  add_lattice(sub_u1);
  add_loop(sub_u1);
  add_params(sub_u1);

  CLI::App* sub_lemmas = app.add_subcommand(
      "verify-lemmas", "Randomized sweep over the operation lemmas");
  sub_lemmas->add_option("--cases", ov.cases, "Cases per lemma and lattice");
  sub_lemmas->add_option("--seed", ov.inv_seed, "Sweep seed");

  // --config and --out live on the parent; let them appear after the
  // subcommand name as well.
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    Config cfg = load_config(config_file);
    apply_overrides(cfg, ov);
    if (sub_check->parsed()) return run_check_params(cfg);
    if (sub_area->parsed()) return run_area(cfg);
    if (sub_clusters->parsed()) return run_clusters(cfg);
    if (sub_solve->parsed()) return run_solve(cfg);
    if (sub_residual->parsed()) return run_residual(cfg);
    if (sub_certify->parsed()) return run_certify(cfg);
    if (sub_contraction->parsed()) return run_contraction(cfg);
    if (sub_wilson->parsed()) return run_mc_wilson(cfg);
    if (sub_phi->parsed()) return run_mc_phi(cfg);
    if (sub_u1->parsed()) return run_u1_exact(cfg);
    if (sub_lemmas->parsed()) return run_verify_lemmas(cfg);
    std::fprintf(stderr, "no subcommand\n");
    return kExitParse;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitParse;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitParse;
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return kExitCapacity;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kExitParse;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
