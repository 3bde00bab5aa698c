#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"

#include "inheritlab/beltrami.hpp"
#include "inheritlab/carleman.hpp"
#include "inheritlab/em_check.hpp"
#include "inheritlab/frequency.hpp"
#include "inheritlab/geometry.hpp"
#include "inheritlab/parallel.hpp"
#include "inheritlab/shell.hpp"
#include "inheritlab/spec_parse.hpp"

#ifndef INHERITLAB_VERSION
#define INHERITLAB_VERSION "dev"
#endif

namespace inheritlab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

json stats_json(const ResidualStats& s) {
  return json{{"max", s.max}, {"mean", s.mean}};
}

json norm_json(const RemainderNorm& n) {
  return json{{"total", n.total}, {"boundary", n.boundary}};
}

json study_json(const RefinementStudy& st) {
  return json{{"sizes", st.sizes}, {"values", st.values}, {"max_change", st.max_change}, {"stable", st.stable}};
}

// ---- run context: output directory, manifest, config echo -------------------

struct Context {
  std::string command;
  CLI::App* sub = nullptr;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::ostream* out = nullptr;

  fs::path path(const std::string& name) const { return fs::path(out_dir) / name; }

  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream f(path(name));
    if (!f) throw std::runtime_error("cannot write " + path(name).string());
    f << text;
  }

  std::vector<std::pair<std::string, std::string>> config_echo() const {
    static const std::set<std::string> skip{"help", "config", "out"};
    std::vector<std::pair<std::string, std::string>> kv;
    for (const CLI::Option* opt : sub->get_options()) {
      std::string key = opt->get_single_name();
      if (skip.count(key) || opt->get_lnames().empty()) continue;
      std::string value;
      if (opt->get_expected_max() == 0) {
        value = opt->count() > 0 ? "true" : "false";
      } else if (opt->count() > 0) {
        const auto& r = opt->results();
        if (r.size() == 1) {
          value = r.front();
        } else {
          value = "[";
          for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
          value += "]";
        }
      } else {
        value = opt->get_default_str();
      }
      kv.emplace_back(key, value);
    }
    return kv;
  }

  void finish(const json& report, double seconds) const {
    fs::create_directories(out_dir);
    write_text("report.json", report.dump(2) + "\n");
    std::ostringstream cfg;
    json config = json::object();
    for (const auto& [k, v] : config_echo()) {
      cfg << k << '=' << v << '\n';
      config[k] = v;
    }
    write_text("config.txt", cfg.str());
    json manifest{{"command", command},
                  {"version", INHERITLAB_VERSION},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"seed", seed},
                  {"threads", thread_count()},
                  {"runtime_seconds", seconds},
                  {"config", config}};
    write_text("manifest.json", manifest.dump(2) + "\n");
    *out << report.dump(2) << '\n';
  }
};

// ---- points -----------------------------------------------------------------

// "shell:r=2..50:n=200" or "box:L=5:n=500".
std::vector<Eigen::Vector3d> parse_points(const std::string& spec, std::uint64_t seed) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty()) throw InvalidInput("empty point spec");
  std::map<std::string, std::string> kv;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw InvalidInput("malformed point spec '" + spec + "'");
    kv[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
  }
  auto num = [&](const std::string& k, double fb) { return kv.count(k) ? std::stod(kv[k]) : fb; };
  int n = static_cast<int>(num("n", 200));
  if (n < 1) throw InvalidInput("point count must be positive");
  if (parts[0] == "shell") {
    double lo = 2.0, hi = 50.0;
    if (kv.count("r")) {
      auto dots = kv["r"].find("..");
      if (dots == std::string::npos) throw InvalidInput("shell range must read r=lo..hi");
      lo = std::stod(kv["r"].substr(0, dots));
      hi = std::stod(kv["r"].substr(dots + 2));
    }
    return random_shell_points(seed, n, lo, hi);
  }
  if (parts[0] == "box") return random_box_points(seed, n, num("L", 5.0));
  throw InvalidInput("unknown point set '" + parts[0] + "'");
}

// ---- verify-solution --------------------------------------------------------

struct VerifyOpts {
  std::string name;
  double b = std::numeric_limits<double>::quiet_NaN();
  std::string f = "sin";
  int points = 200;
  double tol = 1e-9;
  double einstein_tol = 1e-8;
};

int cmd_verify_solution(const VerifyOpts& o, Context& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  std::string spec;
  if (o.name == "minkowski") {
    spec = "minkowski";
  } else if (o.name == "mc") {
    spec = "mc:b=" + std::to_string(std::isnan(o.b) ? 0.3 : o.b);
  } else if (o.name == "ppwave") {
    spec = "ppwave:f=" + o.f + ",b=" + std::to_string(std::isnan(o.b) ? 1.0 : o.b);
  } else {
    throw UsageFailure("unknown solution '" + o.name + "'");
  }
  if (o.points < 10) throw UsageFailure("--points must be at least 10");
  ExactSolution sol = make_solution(spec);
  auto pts = sol.sampler(ctx.seed, o.points);

  MaxwellReport mx = maxwell_residual(sol, pts);
  StressAudit st = einstein_proportionality(sol, pts);
  json report{{"solution", sol.name}, {"params", sol.params}, {"points", o.points}, {"seed", ctx.seed}};
  bool maxwell_ok = mx.closure.max <= o.tol && mx.coclosure.max <= o.tol;
  report["maxwell"] = {{"closure", stats_json(mx.closure)}, {"coclosure", stats_json(mx.coclosure)}, {"pass", maxwell_ok}};
  bool einstein_ok = st.vacuum || st.max_relative_residual <= o.einstein_tol;
  report["einstein"] = {{"kappa", st.kappa},
                        {"max_relative_residual", st.max_relative_residual},
                        {"max_abs_residual", st.max_abs_residual},
                        {"max_trace", st.max_trace},
                        {"vacuum", st.vacuum},
                        {"pass", einstein_ok}};
  bool inherit_ok = true;
  if (!sol.symmetries.empty()) {
    const Symmetry& sym = sol.symmetries.front();
    InheritanceReport ih = inheritance_defect(sol, pts);
    ResidualStats kill = killing_audit(sol.metric, sym.K, pts);
    inherit_ok = ih.first.max <= o.tol && ih.second.max <= o.tol && kill.max <= o.tol;
    report["inheritance"] = {{"symmetry", sym.name},
                             {"a_at_first_point", sym.a(pts.front())},
                             {"first", stats_json(ih.first)},
                             {"second", stats_json(ih.second)},
                             {"killing", stats_json(kill)},
                             {"pass", inherit_ok}};
  }
  bool pass = maxwell_ok && einstein_ok && inherit_ok;
  report["pass"] = pass;
  ctx.finish(report, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return pass ? Pass : ToleranceFailure;
}

// ---- frequency-scan ---------------------------------------------------------

struct FrequencyOpts {
  std::string field = "ck:l=1,a=1.0";
  std::string synth;
  std::string metric = "flat";
  double r_lo = 10.0, r_hi = 200.0, ratio = 1.05;
  double R0 = 0.0;
  double k = 0.0;
  double delta = 0.0;
  int n_theta = 64, n_phi = 128;
  std::string levels = "coordinate";
  double distance_R = 10.0;
  double window_lo = 50.0, window_hi = 200.0;
  double margin = 0.05;
};

int cmd_frequency_scan(const FrequencyOpts& o, Context& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  Metric3 metric = make_metric3(o.metric);
  FrequencyConfig cfg = default_frequency_config(metric, geometric_schedule(o.r_lo, o.r_hi, o.ratio));
  cfg.R0 = o.R0;
  if (o.k > 0.0) cfg.k = o.k;
  if (o.delta > 0.0) cfg.delta = o.delta;
  cfg.n_theta = o.n_theta;
  cfg.n_phi = o.n_phi;
  cfg.distance_R = o.distance_R;
  if (o.levels == "coordinate")
    cfg.level_sets = LevelSets::Coordinate;
  else if (o.levels == "geodesic")
    cfg.level_sets = LevelSets::Geodesic;
  else
    throw UsageFailure("unknown level sets '" + o.levels + "'");
  validate(cfg);

  RadialProfile prof;
  std::string source;
  if (!o.synth.empty()) {
    ParsedSpec ps = parse_spec(o.synth);
    if (ps.name != "power") throw UsageFailure("unknown synthetic profile '" + o.synth + "'");
    double e = ps.number("exp", 4.0);
    double R0 = cfg.R0;
    SynthSpec sp;
    sp.X = [e, R0](double r) { return std::pow(r + R0, -e); };
    sp.dX = [e, R0](double r) { return -e * std::pow(r + R0, -e - 1.0); };
    prof = synth_profile(sp, cfg);
    source = o.synth;
  } else {
    prof = compute_profile(make_field(o.field), metric, cfg);
    source = o.field;
  }
  bool any = false;
  for (bool d : prof.defined) any = any || d;
  if (!any) throw FrequencyUndefined("X vanishes on every sphere of the schedule");

  L2Options lo;
  lo.r_lo = o.window_lo;
  lo.r_hi = o.window_hi;
  lo.margin = o.margin;
  L2Classification cls = classify_L2(prof, cfg, lo);
  DerivativeIdentityReport id = check_derivative_identity(prof, cfg);
  MonotonicityReport mono = monotonicity_scan(prof, cfg);

  fs::create_directories(ctx.out_dir);
  ctx.write_text("profile.csv", profile_csv(prof, &id));
  ctx.write_text("profile.svg", profile_svg(prof, &cls.fit, cfg.R0));

  json report{{"source", source},
              {"metric", metric.name},
              {"schedule", {{"r_lo", o.r_lo}, {"r_hi", o.r_hi}, {"ratio", o.ratio}, {"radii", prof.r.size()}}},
              {"R0", cfg.R0},
              {"delta", cfg.delta},
              {"k", cfg.k}};
  report["classification"] = {{"verdict", to_string(cls.verdict)},
                              {"p", cls.fit.p},
                              {"stderr_p", cls.fit.stderr_p},
                              {"fit_residual", cls.fit.residual},
                              {"samples", cls.fit.samples},
                              {"below_L2_threshold", cls.fit.p < 1.5},
                              {"linear_r2", cls.linear_r2},
                              {"growth_exponent", cls.growth_exponent},
                              {"tail_fraction", cls.tail_fraction},
                              {"note", cls.note}};
  report["derivative_identity"] = {{"c2", id.c2}};
  report["monotonicity"] = {{"k_used", mono.k_used},
                            {"k_raised", mono.k_raised},
                            {"non_increasing", mono.non_increasing},
                            {"increases", mono.increases.size()}};
  report["outputs"] = {"profile.csv", "profile.svg", "report.json"};
  ctx.finish(report, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return Pass;
}

// ---- carleman ---------------------------------------------------------------

struct CarlemanOpts {
  std::string check = "mourre";
  double lambda = 1.0;
  int grid = 2048;
  int refinements = 3;
  double r_max = 40.0;
  double x1 = 0.5;
  std::string spacing = "uniform-r";
  double delta = 1.0;
  double amplitude = 0.0;
  int ell = 0;
  double alpha = 1.0, beta = 1.0, gamma = 1.0;
  std::vector<double> betas{1.0, 4.0, 16.0};
  double s = 2.0, k = 1.0;
  std::vector<double> ts{0.0, 0.01, 0.1, 1.0};
  int vectors = 100;
  double tol = 1e-12;
  double stability = 0.2;
  bool bound_state = false;
  std::vector<int> probe_sizes{256, 512, 1024, 2048};
  double probe_h = 0.05;
  std::vector<double> alphas{4.0, 8.0, 16.0, 32.0};
  std::string op = "H";
};

int cmd_carleman(const CarlemanOpts& o, Context& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  static const std::set<std::string> checks{"mourre", "fh3", "poly", "squared-identity", "weights",
                                            "probe", "semiclassical", "export"};
  if (!checks.count(o.check)) throw UsageFailure("unknown carleman check '" + o.check + "'");
  Spacing spacing;
  if (o.spacing == "uniform-r")
    spacing = Spacing::UniformInverseX;
  else if (o.spacing == "uniform-x")
    spacing = Spacing::UniformX;
  else
    throw UsageFailure("unknown spacing '" + o.spacing + "'");
  if (o.refinements < 1 || o.grid < 16) throw UsageFailure("need --grid >= 16 and --refinements >= 1");
  const double x_min = 1.0 / o.r_max;
  std::vector<int> sizes;
  for (int i = o.refinements; i >= 0; --i) sizes.push_back(o.grid >> i);
  RadialModel model = o.amplitude == 0.0 ? flat_model(o.ell) : perturbed_model(o.delta, o.amplitude, o.ell);

  json report{{"check", o.check}, {"lambda", o.lambda}};
  report["model"] = {{"delta", o.delta}, {"amplitude", o.amplitude}, {"ell", o.ell}};
  report["grid"] = {{"finest", o.grid}, {"r1", 1.0 / o.x1}, {"r_max", o.r_max}, {"spacing", o.spacing}};
  bool pass = true;

  auto stable = [&](RefinementStudy st) {
    st.stable = st.max_change < o.stability;
    pass = pass && st.stable;
    return study_json(st);
  };

  if (o.check == "mourre") {
    auto K = refinement_study([&](const RadialGrid& g) { return mourre_decomposition_check(g, model, o.lambda).K.total; },
                              sizes, x_min, o.x1, spacing);
    auto Kt = refinement_study(
        [&](const RadialGrid& g) { return mourre_decomposition_check(g, model, o.lambda).K_tilde.total; }, sizes, x_min,
        o.x1, spacing);
    report["K"] = stable(K);
    report["K_tilde"] = stable(Kt);
    MourreReport fin = mourre_decomposition_check(make_grid(o.grid, x_min, o.x1, spacing), model, o.lambda);
    report["finest"] = {{"K", norm_json(fin.K)}, {"K_tilde", norm_json(fin.K_tilde)}};
    if (o.lambda == 0.0) report["note"] = "λ = 0: the 2λx term vanishes";
  } else if (o.check == "fh3") {
    json per = json::array();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double b : o.betas) {
      WeightFamily w{o.alpha, b, o.gamma, std::nullopt};
      auto st = refinement_study(
          [&](const RadialGrid& g) {
            OperatorMatrix H = build_H(g, model);
            return commutator_audit(conjugate(H, g, w, o.lambda, o.delta), H, g, o.delta).remainder.total;
          },
          sizes, x_min, o.x1, spacing);
      lo = std::min(lo, st.values.back());
      hi = std::max(hi, st.values.back());
      json e = stable(st);
      e["beta"] = b;
      per.push_back(e);
    }
    report["weight"] = {{"alpha", o.alpha}, {"gamma", o.gamma}};
    report["per_beta"] = per;
    report["beta_spread"] = hi / lo;
  } else if (o.check == "poly") {
    auto st = refinement_study(
        [&](const RadialGrid& g) { return poly_weight_check(g, model, o.s, o.k, o.ts, o.lambda).remainder_max; }, sizes,
        x_min, o.x1, spacing);
    PolyWeightReport fin = poly_weight_check(make_grid(o.grid, x_min, o.x1, spacing), model, o.s, o.k, o.ts, o.lambda);
    json pts = json::array();
    for (const auto& p : fin.points) {
      pts.push_back({{"t", p.t},
                     {"factor_min", p.factor_min},
                     {"factor_max", p.factor_max},
                     {"positive", p.positive},
                     {"remainder", norm_json(p.remainder)}});
      pass = pass && p.positive;
    }
    report["s"] = o.s;
    report["k"] = o.k;
    report["remainder_max"] = stable(st);
    report["points"] = pts;
  } else if (o.check == "squared-identity") {
    RadialGrid g = make_grid(o.grid, x_min, o.x1, spacing);
    OperatorMatrix H = build_H(g, model);
    Conjugated c = conjugate(H, g, WeightFamily{o.alpha, o.beta, o.gamma, std::nullopt}, o.lambda, o.delta);
    double worst = 0.0;
    for (int i = 0; i < o.vectors; ++i) {
      auto s = squared_norm_identity(c, g, random_grid_vector(g.size(), ctx.seed + static_cast<std::uint64_t>(i)));
      worst = std::max(worst, s.relative_defect);
    }
    pass = worst <= o.tol;
    report["vectors"] = o.vectors;
    report["max_relative_defect"] = worst;
    report["tolerance"] = o.tol;
  } else if (o.check == "weights") {
    RadialGrid g = make_grid(o.grid, x_min, o.x1, spacing);
    json audits = json::array();
    double worst = 0.0;
    for (double a : {0.0, 1.0, 4.0})
      for (double b : o.betas)
        for (double gm : {0.0, 0.5, 1.0}) {
          WeightAudit wa = weight_bound_audit(WeightFamily{a, b, gm, std::nullopt}, g);
          worst = std::max(worst, wa.max_violation);
          audits.push_back({{"alpha", a}, {"beta", b}, {"gamma", gm}, {"violation", wa.max_violation}});
        }
    double mono = weight_monotonicity_defect(o.alpha, o.gamma, o.betas, g);
    pass = worst == 0.0 && mono <= 0.0;
    report["bound_audits"] = audits;
    report["max_bound_violation"] = worst;
    report["monotonicity_defect"] = mono;
  } else if (o.check == "probe") {
    ProbeConfig pc;
    pc.lambda = o.lambda;
    pc.model = model;
    pc.sizes = o.probe_sizes;
    pc.h = o.probe_h;
    pc.r1 = 1.0 / o.x1;
    if (o.bound_state) {
      if (!(o.lambda < 0.0)) throw UsageFailure("--bound-state needs --lambda < 0");
      double c = bound_state_coupling(pc.r1, o.lambda);
      pc.model = perturbed_model(1.0, -c, 0);
      ProbeConfig ref = pc;
      ref.lambda = 1.0;
      ref.model = flat_model(0);
      ref.dense_oracles = 0;
      ProbeReport rr = no_embedded_eigenvalue_probe(ref);
      ProbeReport pr = no_embedded_eigenvalue_probe(pc);
      double rel = pr.sigma.back() / rr.sigma.back();
      pass = rel < 1e-3;
      report["coupling"] = c;
      report["sigma"] = pr.sigma;
      report["dense_sigma"] = pr.dense_sigma;
      report["reference_sigma"] = rr.sigma;
      report["relative_to_reference"] = rel;
      report["detected"] = pass;
    } else {
      ProbeReport pr = no_embedded_eigenvalue_probe(pc);
      report["sizes"] = pr.sizes;
      report["r_max"] = pr.r_max;
      report["sigma"] = pr.sigma;
      report["dense_sigma"] = pr.dense_sigma;
      report["slope"] = pr.slope;
      report["min_ratio"] = pr.min_ratio;
      report["dense_agreement"] = pr.dense_agreement;
      report["verdict"] = to_string(pr.verdict);
      report["note"] = pr.note;
      pass = pr.verdict != ProbeVerdict::Decaying && pr.dense_agreement <= 1e-6;
    }
  } else if (o.check == "semiclassical") {
    RadialGrid g = make_grid(o.grid, x_min, o.x1, spacing);
    RadialModel m = model;
    if (m.ell == 0) m.ell = 1;
    json pts = json::array();
    for (const auto& p : semiclassical_sweep(g, m, o.lambda, o.alphas)) {
      pts.push_back({{"alpha", p.alpha}, {"h", p.h}, {"min_ratio", p.min_ratio}, {"max_ratio", p.max_ratio}});
      pass = pass && p.min_ratio >= 2.0;
    }
    report["ell"] = m.ell;
    report["points"] = pts;
  } else {
    RadialGrid g = make_grid(o.grid, x_min, o.x1, spacing);
    OperatorMatrix H = build_H(g, model);
    SparseC m;
    if (o.op == "H") {
      m = H.m;
    } else if (o.op == "B") {
      m = build_B(g).m;
    } else if (o.op == "A") {
      m = build_A(g).m;
    } else if (o.op == "x2Dx") {
      m = radial_vector_field(g).m;
    } else if (o.op == "P" || o.op == "ReP" || o.op == "ImP") {
      Conjugated c = conjugate(H, g, WeightFamily{o.alpha, o.beta, o.gamma, std::nullopt}, o.lambda, o.delta);
      m = o.op == "P" ? c.P.m : o.op == "ReP" ? c.ReP.m : c.ImP.m;
    } else {
      throw UsageFailure("unknown operator '" + o.op + "'");
    }
    fs::create_directories(ctx.out_dir);
    std::ofstream f(ctx.path("matrix.txt"));
    write_triplets(f, m);
    report["operator"] = o.op;
    report["rows"] = m.rows();
    report["nonzeros"] = m.nonZeros();
    report["file"] = "matrix.txt";
  }
  report["pass"] = pass;
  ctx.finish(report, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return pass ? Pass : ToleranceFailure;
}

// ---- residual ---------------------------------------------------------------

struct ResidualOpts {
  std::string problem = "beltrami";
  std::string field = "abc";
  std::string metric = "flat";
  double a = std::numeric_limits<double>::quiet_NaN();
  std::string points = "box:L=5:n=500";
  double tol = 1e-8;
};

int cmd_residual(const ResidualOpts& o, Context& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  if (o.problem != "beltrami") throw UsageFailure("unknown problem '" + o.problem + "'");
  BeltramiProblem pr{make_metric3(o.metric), std::isnan(o.a) ? field_eigenvalue(o.field) : o.a, make_field(o.field)};
  auto pts = parse_points(o.points, ctx.seed);
  BeltramiReport r = beltrami_residual(pr, pts);
  bool pass = r.curl.max <= o.tol && r.codiff.max <= o.tol && r.laplacian.max <= o.tol;
  json report{{"problem", o.problem},
              {"field", o.field},
              {"metric", o.metric},
              {"a", pr.a},
              {"points", pts.size()},
              {"curl", stats_json(r.curl)},
              {"codifferential", stats_json(r.codiff)},
              {"laplacian", stats_json(r.laplacian)},
              {"trivial_field", r.trivial_field},
              {"tolerance", o.tol},
              {"pass", pass}};
  ctx.finish(report, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return pass ? Pass : ToleranceFailure;
}

// ---- audit-metric -----------------------------------------------------------

struct AuditOpts {
  std::string metric = "conformal:m=1";
  std::vector<double> radii{10.0, 20.0, 40.0, 80.0};
  int directions = 64;
};

int cmd_audit_metric(const AuditOpts& o, Context& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  if (o.radii.empty()) throw UsageFailure("--radii needs at least one value");
  AsymptoticAudit a = audit_asymptotic_flatness(make_metric3(o.metric), o.radii, o.directions);
  json report{{"metric", a.metric},
              {"R", *std::min_element(o.radii.begin(), o.radii.end())},
              {"delta", a.delta},
              {"Cstar", a.c_star},
              {"max_weighted_deviation", a.max_weighted_deviation},
              {"pass", a.pass}};
  ctx.finish(report, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return a.pass ? Pass : ToleranceFailure;
}

// ---- shell-probe ------------------------------------------------------------

struct ShellOpts {
  double a = 1.0;
  double R0 = 2.0;
  std::vector<double> r_max{20.0, 40.0, 80.0};
  double nodes_per_wavelength = 16.0;
  int l_max = 4;
  std::string outer = "outgoing";
  double weight_power = 1.0;
  bool export_matrix = false;
};

int cmd_shell_probe(const ShellOpts& o, Context& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  if (o.r_max.size() < 2) throw UsageFailure("--r-max needs at least two values");
  ShellDiscretization d;
  d.R0 = o.R0;
  d.nodes_per_wavelength = o.nodes_per_wavelength;
  d.l_max = o.l_max;
  d.weight_power = o.weight_power;
  if (o.outer == "outgoing")
    d.outer = OuterBoundary::Outgoing;
  else if (o.outer == "dirichlet")
    d.outer = OuterBoundary::Dirichlet;
  else
    throw UsageFailure("unknown outer boundary '" + o.outer + "'");
  std::vector<double> sigma;
  double dense = std::numeric_limits<double>::quiet_NaN();
  bool non_decreasing = true;
  for (std::size_t i = 0; i < o.r_max.size(); ++i) {
    d.R_max = o.r_max[i];
    ShellOperator op = assemble_shell_operator(d, flat_metric3(), o.a);
    sigma.push_back(smallest_singular_value(op, SingularMethod::Sparse).sigma_min);
    if (i == 0) {
      dense = smallest_singular_value(op, SingularMethod::Dense).sigma_min;
      if (o.export_matrix) {
        fs::create_directories(ctx.out_dir);
        std::ofstream f(ctx.path("matrix.txt"));
        write_triplets(f, op.matrix);
      }
    }
    if (i > 0 && sigma[i] < 0.9 * sigma[i - 1]) non_decreasing = false;
  }
  double agreement = std::abs(sigma.front() - dense) / dense;
  bool pass = non_decreasing && agreement <= 1e-6;
  json report{{"a", o.a},
              {"R0", o.R0},
              {"r_max", o.r_max},
              {"outer", o.outer},
              {"sigma", sigma},
              {"dense_sigma_smallest", dense},
              {"dense_agreement", agreement},
              {"non_decreasing", non_decreasing},
              {"pass", pass}};
  ctx.finish(report, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return pass ? Pass : ToleranceFailure;
}

// Appends config entries for options not already on the command line.
void apply_config(std::vector<std::string>& args, CLI::App* sub) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return;
  if (std::next(it) == args.end()) throw UsageFailure("--config needs a file");
  std::string file = *std::next(it);
  args.erase(it, std::next(it, 2));
  std::set<std::string> given;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  for (const auto& [key, values] : read_config(file)) {
    if (given.count(key)) continue;
    const CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw UsageFailure("unknown config key '" + key + "'");
    }
    if (opt->get_expected_max() == 0) {
      if (!values.empty() && (values.front() == "true" || values.front() == "1")) args.push_back("--" + key);
      continue;
    }
    args.push_back("--" + key);
    for (const auto& v : values) args.push_back(v);
  }
}

}  // namespace

std::vector<std::pair<std::string, std::vector<std::string>>> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageFailure("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  std::string line;
  int n = 0;
  while (std::getline(f, line)) {
    ++n;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageFailure("config line " + std::to_string(n) + " is not key=value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    std::vector<std::string> values;
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
      std::stringstream ss(value.substr(1, value.size() - 2));
      for (std::string v; std::getline(ss, v, ',');)
        if (!trim(v).empty()) values.push_back(unquote(v));
    } else {
      values.push_back(unquote(value));
    }
    out.emplace_back(key, values);
  }
  return out;
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"inheritlab: numerical audits for non-inheriting Einstein-Maxwell fields"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", INHERITLAB_VERSION);

  Context ctx;
  ctx.out = &out;
  auto common = [&](CLI::App* s) {
    s->add_option("--out", ctx.out_dir, "output directory");
    s->add_option("--seed", ctx.seed, "random seed");
    s->add_option("--config", "key=value file; command-line flags take precedence");
  };

  VerifyOpts vo;
  auto* verify = app.add_subcommand("verify-solution", "Maxwell, Einstein and inheritance audits of an exact solution");
  verify->add_option("--name", vo.name, "minkowski | mc | ppwave")->required();
  verify->add_option("--b", vo.b, "solution parameter b");
  verify->add_option("--f", vo.f, "plane-wave profile: sin | u2 | bump");
  verify->add_option("--points", vo.points, "random sample points");
  verify->add_option("--tol", vo.tol, "Maxwell and inheritance tolerance");
  verify->add_option("--einstein-tol", vo.einstein_tol, "relative Einstein tolerance");
  common(verify);

  FrequencyOpts fo;
  auto* freq = app.add_subcommand("frequency-scan", "radial frequency profile, decay fit and L² classification");
  freq->add_option("--field", fo.field, "field spec, e.g. ck:l=1,a=1.0");
  freq->add_option("--synth", fo.synth, "synthetic profile instead of a field, e.g. power:exp=4");
  freq->add_option("--metric", fo.metric, "metric spec");
  freq->add_option("--r-lo", fo.r_lo);
  freq->add_option("--r-hi", fo.r_hi);
  freq->add_option("--ratio", fo.ratio, "geometric schedule ratio");
  freq->add_option("--R0", fo.R0);
  freq->add_option("--k", fo.k, "weight constant (0: derive from the metric)");
  freq->add_option("--delta", fo.delta, "decay rate (0: from the metric)");
  freq->add_option("--n-theta", fo.n_theta);
  freq->add_option("--n-phi", fo.n_phi);
  freq->add_option("--levels", fo.levels, "coordinate | geodesic");
  freq->add_option("--distance-R", fo.distance_R);
  freq->add_option("--window-lo", fo.window_lo, "fit window (0: whole schedule)");
  freq->add_option("--window-hi", fo.window_hi);
  freq->add_option("--margin", fo.margin);
  common(freq);

  CarlemanOpts co;
  auto* carl = app.add_subcommand("carleman", "radial conjugated-operator audits");
  carl->add_option("--check", co.check, "mourre | fh3 | poly | squared-identity | weights | probe | semiclassical | export");
  carl->add_option("--lambda", co.lambda);
  carl->add_option("--grid", co.grid, "finest node count");
  carl->add_option("--refinements", co.refinements, "grid doublings up to --grid");
  carl->add_option("--r-max", co.r_max);
  carl->add_option("--x1", co.x1);
  carl->add_option("--spacing", co.spacing, "uniform-r | uniform-x");
  carl->add_option("--delta", co.delta);
  carl->add_option("--amplitude", co.amplitude);
  carl->add_option("--ell", co.ell);
  carl->add_option("--alpha", co.alpha);
  carl->add_option("--beta", co.beta);
  carl->add_option("--gamma", co.gamma);
  carl->add_option("--betas", co.betas)->delimiter(',');
  carl->add_option("--s", co.s);
  carl->add_option("--k", co.k);
  carl->add_option("--t", co.ts, "poly-weight t schedule")->delimiter(',');
  carl->add_option("--vectors", co.vectors);
  carl->add_option("--tol", co.tol);
  carl->add_option("--stability", co.stability, "max relative change per doubling");
  carl->add_flag("--bound-state", co.bound_state, "probe the attractive Coulomb control at its bound-state coupling");
  carl->add_option("--probe-sizes", co.probe_sizes)->delimiter(',');
  carl->add_option("--probe-h", co.probe_h);
  carl->add_option("--alphas", co.alphas)->delimiter(',');
  carl->add_option("--op", co.op, "operator for --check export: H | B | A | x2Dx | P | ReP | ImP");
  common(carl);

  ResidualOpts ro;
  auto* resid = app.add_subcommand("residual", "pointwise residuals of a named problem");
  resid->add_option("--problem", ro.problem, "beltrami");
  resid->add_option("--field", ro.field);
  resid->add_option("--metric", ro.metric);
  resid->add_option("--a", ro.a, "eigenvalue (default: the field's own)");
  resid->add_option("--points", ro.points, "shell:r=lo..hi:n=N | box:L=5:n=N");
  resid->add_option("--tol", ro.tol);
  common(resid);

  AuditOpts ao;
  auto* audit = app.add_subcommand("audit-metric", "asymptotic flatness audit of a registered metric");
  audit->add_option("--metric", ao.metric);
  audit->add_option("--radii", ao.radii)->delimiter(',');
  audit->add_option("--directions", ao.directions);
  common(audit);

  ShellOpts so;
  auto* shell = app.add_subcommand("shell-probe", "smallest singular value of Δ_H − a² on flat shells");
  shell->add_option("--a", so.a);
  shell->add_option("--R0", so.R0);
  shell->add_option("--r-max", so.r_max)->delimiter(',');
  shell->add_option("--nodes-per-wavelength", so.nodes_per_wavelength);
  shell->add_option("--l-max", so.l_max);
  shell->add_option("--outer", so.outer, "outgoing | dirichlet");
  shell->add_option("--weight", so.weight_power);
  shell->add_flag("--export", so.export_matrix, "write the smallest operator as triplets");
  common(shell);

  try {
    std::string name;
    for (const auto& a : args)
      if (!a.empty() && a[0] != '-') {
        name = a;
        break;
      }
    CLI::App* sub = nullptr;
    try {
      sub = app.get_subcommand(name);
    } catch (const CLI::OptionNotFound&) {
    }
    if (sub) apply_config(args, sub);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    sub = app.get_subcommands().front();
    ctx.sub = sub;
    ctx.command = sub->get_name();
    if (ctx.out_dir.empty()) ctx.out_dir = "inheritlab-out/" + ctx.command;
    if (sub == verify) return cmd_verify_solution(vo, ctx);
    if (sub == freq) return cmd_frequency_scan(fo, ctx);
    if (sub == carl) return cmd_carleman(co, ctx);
    if (sub == resid) return cmd_residual(ro, ctx);
    if (sub == audit) return cmd_audit_metric(ao, ctx);
    return cmd_shell_probe(so, ctx);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Pass;
  } catch (const CLI::CallForVersion&) {
    out << INHERITLAB_VERSION << '\n';
    return Pass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return UsageError;
  } catch (const UsageFailure& e) {
    err << "usage error: " << e.what() << '\n';
    return UsageError;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return UsageError;
  } catch (const FrequencyUndefined& e) {
    err << "frequency undefined: " << e.what() << '\n';
    return UsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ToleranceFailure;
  }
}

}  // namespace inheritlab::cli
