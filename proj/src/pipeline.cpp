#include "heatcert/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace heatcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void usage_fail(const std::string& msg) {
  throw PipelineError(msg);
}

std::vector<double> geometric_samples(double lo, double hi, int k) {
  if (!(lo > 0.0) || hi < lo) usage_fail("bad sample range");
  if (k <= 1) return {hi};
  std::vector<double> out;
  for (int i = 0; i < k; ++i)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (k - 1)));
  out.back() = hi;
  return out;
}

std::vector<double> linear_samples(double lo, double hi, int k) {
  if (!(lo > 0.0) || hi < lo) usage_fail("bad sample range");
  if (k <= 1) return {hi};
  std::vector<double> out;
  for (int i = 0; i < k; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / (k - 1));
  out.back() = hi;
  return out;
}

int resolve_center(const WeightedGraph& g, const PipelineConfig& cfg) {
  if (cfg.center.empty()) return 0;
  return g.index_of(cfg.center);
}

// capped center list for measuring phi*: the optimizer cost dominates, and
// the certificates themselves are still checked on the full center set
std::vector<int> measurement_centers(const WeightedGraph& g, int center,
                                     const PipelineConfig& cfg) {
  if (cfg.vertex_transitive) return {center};
  std::vector<int> out{center};
  int stride = std::max(1, g.size() / std::max(1, cfg.sample_centers));
  for (int i = 0; i < g.size() && (int)out.size() < cfg.sample_centers;
       i += stride)
    if (i != center) out.push_back(i);
  return out;
}

std::vector<int> pick_centers(const WeightedGraph& g, int center,
                              const PipelineConfig& cfg, Certificate* flag_to) {
  if (cfg.vertex_transitive) {
    if (flag_to != nullptr) flag_to->add_flag("vertex_transitive_reduction");
    return {center};
  }
  if (cfg.full_centers || g.size() <= cfg.sample_centers)
    return [&] {
      std::vector<int> all(g.size());
      for (int i = 0; i < g.size(); ++i) all[i] = i;
      return all;
    }();
  std::vector<int> out{center};
  int stride = std::max(1, g.size() / cfg.sample_centers);
  for (int i = 0; i < g.size() && (int)out.size() < cfg.sample_centers;
       i += stride)
    if (i != center) out.push_back(i);
  if (flag_to != nullptr) flag_to->add_flag("centers_sampled");
  return out;
}

// best ratio over the given centers and radii with a fixed dimension value
struct PhiMeasurement {
  double phi_star = 0.0;
  int at_center = -1;
  double at_radius = 0.0;
};

PhiMeasurement measure_phi_star(const WeightedGraph& g,
                                const MetricStructure& metric,
                                const std::vector<int>& centers,
                                const std::vector<double>& radii, double n,
                                const PipelineConfig& cfg) {
  PhiMeasurement best;
  OptimizerBudget budget{cfg.restarts, cfg.max_iterations, cfg.tolerance,
                         cfg.seed};
  for (int c : centers) {
    for (double r : radii) {
      SobolevProblem prob{&g, metric.ball(c, r), r, n};
      OptimizationResult res =
          minimal_sobolev_constant(prob, budget, &metric);
      if (res.phi_star > best.phi_star) {
        best.phi_star = res.phi_star;
        best.at_center = c;
        best.at_radius = r;
      }
    }
  }
  return best;
}

double measure_phi_at(const WeightedGraph& g, const MetricStructure& metric,
                      int o, double r, double n, const PipelineConfig& cfg) {
  SobolevProblem prob{&g, metric.ball(o, r), r, n};
  OptimizerBudget budget{cfg.restarts, cfg.max_iterations, cfg.tolerance,
                         cfg.seed};
  return minimal_sobolev_constant(prob, budget, &metric).phi_star;
}

double find_constant(const Report& rep, const std::string& name) {
  for (const auto& row : rep.constants)
    if (row.at("quantity").get<std::string>() == name)
      return row.at("log_value").get<double>();
  usage_fail("report lacks constant '" + name + "'");
}

double auto_t_max(const PipelineConfig& cfg) {
  if (cfg.t_max > 0.0) return cfg.t_max;
  return std::max(1e6, 4.0 * cfg.r2 * cfg.r2);
}

Json graph_summary(const WeightedGraph& g, const MetricStructure& metric) {
  return Json{{"vertices", g.size()},
              {"edges", g.edges().size()},
              {"measure_mode", to_string(g.mode())},
              {"diameter", metric.diameter()},
              {"jump_size", metric.global_jump_size()}};
}

}  // namespace

// ---------------------------------------------------------------------------
// config plumbing

Json PipelineConfig::to_json() const {
  Json j;
  j["graph"] = graph_file;
  j["family"] = family;
  j["measure"] = to_string(measure);
  j["metric"] = metric_choice;
  j["r1"] = r1;
  j["r2"] = r2;
  j["n"] = n;
  j["dim_thresholds"] = dim_thresholds;
  j["dim_values"] = dim_values;
  j["phi"] = phi_seed;
  j["gamma"] = gamma_spec;
  j["tgrid_per_decade"] = tgrid_per_decade;
  j["t_max"] = t_max;
  j["restarts"] = restarts;
  j["max_iterations"] = max_iterations;
  j["tolerance"] = tolerance;
  j["seed"] = seed;
  j["relaxed_guards"] = relaxed_guards;
  j["out"] = out_dir;
  j["center"] = center;
  j["sample_radii"] = sample_radii;
  j["sample_centers"] = sample_centers;
  j["full_centers"] = full_centers;
  j["vertex_transitive"] = vertex_transitive;
  return j;
}

PipelineConfig PipelineConfig::from_json(const Json& j) {
  PipelineConfig c;
  auto get = [&j](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  get("graph", c.graph_file);
  get("family", c.family);
  if (j.contains("measure"))
    c.measure = measure_mode_from_string(j.at("measure").get<std::string>());
  get("metric", c.metric_choice);
  get("r1", c.r1);
  get("r2", c.r2);
  get("n", c.n);
  get("dim_thresholds", c.dim_thresholds);
  get("dim_values", c.dim_values);
  get("phi", c.phi_seed);
  get("gamma", c.gamma_spec);
  get("tgrid_per_decade", c.tgrid_per_decade);
  get("t_max", c.t_max);
  get("restarts", c.restarts);
  get("max_iterations", c.max_iterations);
  get("tolerance", c.tolerance);
  get("seed", c.seed);
  get("relaxed_guards", c.relaxed_guards);
  get("out", c.out_dir);
  get("center", c.center);
  get("sample_radii", c.sample_radii);
  get("sample_centers", c.sample_centers);
  get("full_centers", c.full_centers);
  get("vertex_transitive", c.vertex_transitive);
  return c;
}

WeightedGraph PipelineConfig::make_graph() const {
  if (!family.empty() && !graph_file.empty())
    usage_fail("give either a family or a graph file, not both");
  if (!family.empty()) return generate_family(family, measure);
  if (graph_file.empty()) usage_fail("no graph given (need --graph or family)");
  WeightedGraph loaded = load_graph(graph_file);
  if (measure == MeasureMode::custom) return loaded;
  std::vector<std::tuple<std::string, std::string, double>> edges;
  for (const Edge& e : loaded.edges())
    edges.emplace_back(loaded.id(e.u), loaded.id(e.v), e.b);
  return build_graph(edges, measure);
}

EdgeWeights PipelineConfig::make_weights(const WeightedGraph& g) const {
  if (metric_choice == "default") return default_intrinsic_weights(g);
  if (metric_choice == "combinatorial") return combinatorial_weights(g);
  return load_metric_weights(g, metric_choice);
}

DimensionSpec PipelineConfig::make_dimension() const {
  if (dim_thresholds.empty()) return DimensionSpec::constant(n);
  return DimensionSpec::step(dim_thresholds, dim_values);
}

// ---------------------------------------------------------------------------
// report plumbing

const Certificate* Report::find(const std::string& condition) const {
  for (const Certificate& c : certificates)
    if (c.condition == condition) return &c;
  return nullptr;
}

void Report::add_constant(const std::string& quantity, const std::string& x,
                          double r, double R, double log_value) {
  constants.push_back(Json{{"quantity", quantity},
                           {"x", x},
                           {"r", r},
                           {"R", R},
                           {"log_value", log_value}});
}

void Report::finish() {
  if (certificates.empty()) {
    all_pass = true;
    summary = "vacuous";
    return;
  }
  size_t passed = 0;
  for (const Certificate& c : certificates) passed += c.pass ? 1 : 0;
  all_pass = passed == certificates.size();
  summary = std::to_string(passed) + "/" + std::to_string(certificates.size()) +
            " certificates pass";
}

Json Report::to_json() const {
  Json j;
  j["metadata"] = metadata;
  j["constants"] = constants;
  Json certs = Json::array();
  for (const Certificate& c : certificates) certs.push_back(c.to_json());
  j["certificates"] = certs;
  j["pass_summary"] =
      Json{{"all_pass", all_pass}, {"summary", summary},
           {"count", certificates.size()}};
  return j;
}

// ---------------------------------------------------------------------------
// forward: normalizing measure

Report run_forward_normalizing(const PipelineConfig& cfg) {
  if (cfg.measure != MeasureMode::normalizing)
    usage_fail("forward-normalizing needs --measure normalizing (m = deg)");
  WeightedGraph g = cfg.make_graph();
  MetricStructure metric =
      MetricStructure::all_pairs_distances(g, combinatorial_weights(g));

  if (!(cfg.r1 > 0.0)) usage_fail("guard violated: R1 > 0");
  if (cfg.r2 < 8.0 * cfg.r1)
    usage_fail("guard violated: R2 >= 8 R1 (R2 = " + fmt17(cfg.r2) +
               ", R1 = " + fmt17(cfg.r1) + ")");
  if (cfg.r2 > metric.diameter() / 2.0)
    usage_fail("guard violated: R2 <= diam/2 (diam = " +
               fmt17(metric.diameter()) + ")");
  bool theorem_regime = 8.0 * cfg.r1 >= 512.0;
  if (!theorem_regime && !cfg.relaxed_guards)
    usage_fail("guard violated: 8 R1 >= 512; pass --relaxed-guards to explore "
               "below theorem scale");

  Report rep;
  rep.metadata["mode"] = "forward-normalizing";
  rep.metadata["config"] = cfg.to_json();
  rep.metadata["graph"] = graph_summary(g, metric);
  if (!theorem_regime) rep.metadata["watermark"] = "non-theorem regime";
  if (cfg.vertex_transitive)
    rep.metadata["notes"] =
        Json::array({"vertex-transitive family: one center represents all"});

  SpectralDecomposition dec = decompose(g);
  double Lambda = std::max(0.0, dec.lambda_bottom());
  int o = resolve_center(g, cfg);
  const double n = cfg.n;

  Certificate centers_flag_holder;
  std::vector<int> centers = pick_centers(g, o, cfg, &centers_flag_holder);
  std::vector<double> radii = geometric_samples(cfg.r1, cfg.r2, cfg.sample_radii);

  double phi;
  if (cfg.phi_seed > 0.0) {
    phi = cfg.phi_seed;
    rep.add_constant("phi_seed", "", 0, 0, std::log(phi));
  } else {
    PhiMeasurement meas = measure_phi_star(
        g, metric, measurement_centers(g, o, cfg), radii, n, cfg);
    rep.add_constant("phi_star_measured", g.id(meas.at_center), meas.at_radius,
                     0, std::log(meas.phi_star));
    phi = std::max(1.0, std::ceil(meas.phi_star));
  }
  rep.add_constant("phi", "", 0, 0, std::log(phi));
  rep.add_constant("Lambda", "", 0, 0, Lambda);

  // V with the normalizing-measure constant Phi = 2^{10 n^2} phi^{2n}
  double log_Phi = 10.0 * n * n * kLn2 + 2.0 * n * std::log(phi);
  rep.add_constant("log_Phi", "", cfg.r1, cfg.r2, log_Phi);
  DimFn nfn = [n](int, double) { return n; };
  LogPhiFn phifn = [log_Phi](int, double, double) { return log_Phi; };
  std::vector<int> vd_set = centers;
  Certificate v = check_volume_doubling(g, metric, vd_set, nfn, phifn, cfg.r1,
                                        cfg.r2);
  for (const std::string& f : centers_flag_holder.flags) v.add_flag(f);
  if (!theorem_regime) v.add_flag("non-theorem-regime");
  rep.certificates.push_back(std::move(v));

  // G with the Theorem-3.5 constants for S = 1
  bool relaxed = !theorem_regime;
  LogPsiFn psifn = [&g, &metric, n, phi, relaxed](int z, double tau) {
    double M = metric.ball_measure(z, tau) / g.measure(z);
    return log_psi_normalizing(tau, M, n, phi, relaxed);
  };
  std::vector<int> all(g.size());
  for (int i = 0; i < g.size(); ++i) all[i] = i;
  TimeGrid grid{16.0 * cfg.r1 * cfg.r1, auto_t_max(cfg), cfg.tgrid_per_decade};
  GaussianRowSink sink = [&rep, &g, o](int x, int y, double t, double lp,
                                       double lb) {
    if (x == o) rep.gaussian_profile.push_back({g.id(x), g.id(y), t, lp, lb});
  };
  Certificate gc = check_gaussian(g, dec, metric, all, centers, nfn, psifn,
                                  4.0 * cfg.r1, cfg.r2, grid, Lambda, sink);
  gc.grid["profile_points"] = rep.gaussian_profile.size();
  if (cfg.vertex_transitive) {
    std::erase(gc.flags, "centers_sampled");
    gc.add_flag("vertex_transitive_reduction");
  }
  rep.add_constant("log_Psi", g.id(o), cfg.r2, cfg.r2, psifn(o, cfg.r2));
  if (!theorem_regime) gc.add_flag("non-theorem-regime");
  rep.certificates.push_back(std::move(gc));

  rep.finish();
  return rep;
}

// ---------------------------------------------------------------------------
// reverse: normalizing measure

Report run_reverse_normalizing(const PipelineConfig& cfg, const Report* fwd) {
  Report local;
  if (fwd == nullptr) {
    local = run_forward_normalizing(cfg);
    fwd = &local;
  }
  const Certificate* v = fwd->find("V");
  if (v == nullptr || !v->pass)
    usage_fail("reverse-normalizing refused: no verified V certificate");
  const Certificate* gc = fwd->find("G");
  if (gc == nullptr || !gc->pass)
    usage_fail("reverse-normalizing refused: no verified G certificate");

  WeightedGraph g = cfg.make_graph();
  MetricStructure metric =
      MetricStructure::all_pairs_distances(g, combinatorial_weights(g));
  int o = resolve_center(g, cfg);
  const double n = cfg.n;
  double phi = std::exp(find_constant(*fwd, "phi"));
  double log_Phi = find_constant(*fwd, "log_Phi");
  bool relaxed = fwd->metadata.contains("watermark");

  Report rep;
  rep.metadata["mode"] = "reverse-normalizing";
  rep.metadata["config"] = cfg.to_json();
  rep.metadata["graph"] = graph_summary(g, metric);
  if (relaxed) rep.metadata["watermark"] = "non-theorem regime";

  // Theorem-5.5 jump guard: 8 ||s(R2/4)||_{B(R2)} <= R2
  {
    std::vector<int> ball2 = metric.ball(o, cfg.r2);
    double s = metric.jump_sup_over_set(ball2, cfg.r2 / 4.0);
    if (8.0 * s > cfg.r2) {
      if (!cfg.relaxed_guards && !relaxed)
        usage_fail("guard violated: 8 ||s(R2/4)||_{B(R2)} <= R2 (||s|| = " +
                   fmt17(s) + ")");
      relaxed = true;
      rep.metadata["watermark"] = "non-theorem regime";
    }
  }

  // mu = sup_x m(B_x(R1))/deg(x), computed rather than assumed
  double mu = 0.0;
  int mu_arg = 0;
  for (int x = 0; x < g.size(); ++x) {
    double v_ = metric.ball_measure(x, cfg.r1) / g.degree(x);
    if (v_ > mu) {
      mu = v_;
      mu_arg = x;
    }
  }
  rep.add_constant("mu", g.id(mu_arg), cfg.r1, 0, std::log(mu));

  // part (ii) only uses the on-diagonal bounds; certify them on [R1, R2]
  SpectralDecomposition dec = decompose(g);
  LogPsiFn psifn = [&g, &metric, n, phi, relaxed](int z, double tau) {
    double M = metric.ball_measure(z, tau) / g.measure(z);
    return log_psi_normalizing(tau, M, n, phi, relaxed);
  };
  {
    Certificate oc = check_on_diagonal(g, dec, metric, metric.ball(o, cfg.r2),
                                       psifn, cfg.r1, cfg.r2);
    if (relaxed) oc.add_flag("non-theorem-regime");
    rep.certificates.push_back(std::move(oc));
  }

  Certificate cert;
  cert.condition = "S";
  cert.params = {{"theorem", "reverse normalizing"},
                 {"n", n},
                 {"R1", cfg.r1},
                 {"R2", cfg.r2},
                 {"o", g.id(o)}};
  std::vector<double> radii =
      linear_samples(4.0 * cfg.r1, cfg.r2, cfg.sample_radii);
  for (double r : radii) {
    std::vector<int> ballo = metric.ball(o, r);
    // ||Psi||_{Q(R1,r)}: evaluated on breakpoints, the floor-jump radii of
    // the exponent count, and both interval ends
    double log_psi_sup = -kInf;
    for (int z : ballo) {
      std::set<double> sigmas{cfg.r1, r};
      for (double bp : metric.breakpoints(z))
        if (bp > cfg.r1 && bp < r) sigmas.insert(bp);
      for (double s = 32.0; s < r; s *= 4.0)
        if (s > cfg.r1) sigmas.insert(s);
      for (double s : sigmas) {
        double M = metric.ball_measure(z, s) / g.measure(z);
        log_psi_sup =
            std::max(log_psi_sup, log_psi_normalizing(s, M, n, phi, relaxed));
      }
    }
    double inv_m = 0.0;
    for (int z : ballo) inv_m = std::max(inv_m, 1.0 / g.measure(z));
    double term1 = 10.0 * (log_psi_sup + log_Phi);
    double term2 = n * std::log(cfg.r1) + std::log(metric.ball_measure(o, r)) -
                   n * std::log(r) + std::log(inv_m);
    double log_phi_thm = (44.0 + 2.0 * n / (n - 2.0)) * kLn2 +
                         (2.0 / n) * std::max(term1, term2);
    rep.add_constant("phi_theorem", g.id(o), r, cfg.r2, log_phi_thm);

    double phi_star = measure_phi_at(g, metric, o, r, n, cfg);
    rep.add_constant("phi_star", g.id(o), r, cfg.r2, std::log(phi_star));
    cert.offer(log_phi_thm - std::log(phi_star),
               Json{{"o", g.id(o)}, {"r", r}});
  }
  cert.grid = {{"type", "sampled-radii"}, {"points", radii.size()}};
  if (relaxed) cert.add_flag("non-theorem-regime");
  cert.finalize();
  rep.certificates.push_back(std::move(cert));
  rep.finish();
  return rep;
}

// ---------------------------------------------------------------------------
// counting measure, forward + reverse

Report run_counting(const PipelineConfig& cfg) {
  if (cfg.measure != MeasureMode::counting)
    usage_fail("counting pipeline needs --measure counting (m = 1)");
  WeightedGraph g = cfg.make_graph();
  MetricStructure metric =
      MetricStructure::all_pairs_distances(g, cfg.make_weights(g));
  double S = metric.global_jump_size();

  if (!(cfg.r1 > 0.0)) usage_fail("guard violated: R1 > 0");
  if (cfg.r2 < 16.0 * cfg.r1)
    usage_fail("guard violated: R2 >= 16 R1");
  if (cfg.r2 > metric.diameter() / 2.0)
    usage_fail("guard violated: R2 <= diam/2 (diam = " +
               fmt17(metric.diameter()) + ")");
  bool theorem_regime = 16.0 * cfg.r1 >= 2048.0 * S;
  if (!theorem_regime && !cfg.relaxed_guards)
    usage_fail("guard violated: 16 R1 >= 2048 S (S = " + fmt17(S) +
               "); pass --relaxed-guards to explore below theorem scale");
  bool relaxed = !theorem_regime;

  Report rep;
  rep.metadata["mode"] = "counting";
  rep.metadata["config"] = cfg.to_json();
  rep.metadata["graph"] = graph_summary(g, metric);
  if (relaxed) rep.metadata["watermark"] = "non-theorem regime";

  SpectralDecomposition dec = decompose(g);
  double Lambda = std::max(0.0, dec.lambda_bottom());
  int o = resolve_center(g, cfg);
  const double n = cfg.n;

  Certificate flag_holder;
  std::vector<int> centers = pick_centers(g, o, cfg, &flag_holder);
  std::vector<double> radii = geometric_samples(cfg.r1, cfg.r2, cfg.sample_radii);

  double phi;
  if (cfg.phi_seed > 0.0) {
    phi = cfg.phi_seed;
  } else {
    PhiMeasurement meas = measure_phi_star(
        g, metric, measurement_centers(g, o, cfg), radii, n, cfg);
    rep.add_constant("phi_star_measured", g.id(meas.at_center), meas.at_radius,
                     0, std::log(meas.phi_star));
    phi = std::max(1.0, std::ceil(meas.phi_star));
  }
  rep.add_constant("phi", "", 0, 0, std::log(phi));
  rep.add_constant("Lambda", "", 0, 0, Lambda);
  double log_A = 43.0 * n * n * n * kLn2 + 8.0 * n * n * std::log(phi);
  rep.add_constant("log_A", "", 0, 0, log_A);

  DimFn nfn = [n](int, double) { return n; };
  bool saw_negative_floor = false;

  // forward: L via the Sobolev consequence, then V and G with the
  // counting-measure correction blocks
  Certificate lc =
      check_local_regularity(g, metric, centers, nfn, phi, cfg.r1, cfg.r2);
  for (const std::string& f : flag_holder.flags) lc.add_flag(f);
  if (relaxed) lc.add_flag("non-theorem-regime");
  rep.certificates.push_back(std::move(lc));

  LogPhiFn phifn = [&g, n, S, log_A, relaxed, &saw_negative_floor](
                       int x, double r1, double r2) {
    CountingCorrections cc =
        counting_corrections(r1, r2, g.degree(x), n, S, relaxed);
    saw_negative_floor |= cc.negative_floor;
    return log_A + cc.Phi.log_mag;
  };
  Certificate vc =
      check_volume_doubling(g, metric, centers, nfn, phifn, cfg.r1, cfg.r2);
  for (const std::string& f : flag_holder.flags) vc.add_flag(f);
  if (relaxed) vc.add_flag("non-theorem-regime");
  if (saw_negative_floor) vc.add_flag("negative_floor_exponent");
  rep.certificates.push_back(std::move(vc));

  saw_negative_floor = false;
  LogPsiFn psifn = [&g, n, S, log_A, relaxed, &saw_negative_floor](int z,
                                                                   double tau) {
    CountingCorrections cc =
        counting_corrections(tau, tau, g.degree(z), n, S, relaxed);
    saw_negative_floor |= cc.negative_floor;
    return log_A + cc.Psi.log_mag;
  };
  std::vector<int> all(g.size());
  for (int i = 0; i < g.size(); ++i) all[i] = i;
  TimeGrid grid{16.0 * cfg.r1 * cfg.r1, auto_t_max(cfg), cfg.tgrid_per_decade};
  GaussianRowSink sink = [&rep, &g, o](int x, int y, double t, double lp,
                                       double lb) {
    if (x == o) rep.gaussian_profile.push_back({g.id(x), g.id(y), t, lp, lb});
  };
  Certificate gc = check_gaussian(g, dec, metric, all, centers, nfn, psifn,
                                  4.0 * cfg.r1, cfg.r2, grid, Lambda, sink);
  gc.grid["profile_points"] = rep.gaussian_profile.size();
  if (cfg.vertex_transitive) {
    std::erase(gc.flags, "centers_sampled");
    gc.add_flag("vertex_transitive_reduction");
  }
  if (relaxed) gc.add_flag("non-theorem-regime");
  if (saw_negative_floor) gc.add_flag("negative_floor_exponent");
  rep.certificates.push_back(std::move(gc));

  // reverse: consume L (plus V, G) and certify S_{phi'}(n', 4R1, R2) at o
  bool forward_ok = true;
  for (const Certificate& c : rep.certificates) forward_ok &= c.pass;
  if (forward_ok) {
    Certificate sc;
    sc.condition = "S";
    sc.params = {{"theorem", "reverse counting"},
                 {"o", g.id(o)},
                 {"R1", cfg.r1},
                 {"R2", cfg.r2}};
    double log_phi_p = log_phi_prime(n, phi);
    rep.add_constant("log_phi_prime", "", 0, 0, log_phi_p);
    std::vector<double> rev_radii =
        linear_samples(4.0 * cfg.r1, cfg.r2, cfg.sample_radii);
    for (double r : rev_radii) {
      double deg_sup = 0.0;
      for (int z : metric.ball(o, r))
        deg_sup = std::max(deg_sup, g.weighted_degree(z));
      VariableDimension vd =
          variable_dimension_counting(r, cfg.r1, n, S, deg_sup, relaxed);
      if (vd.negative_floor) sc.add_flag("negative_floor_exponent");
      rep.add_constant("r_prime", g.id(o), r, 0, std::log(vd.r_prime));
      rep.add_constant("p", g.id(o), r, 0, std::log(vd.p));
      rep.add_constant("nu", g.id(o), r, 0, std::log(vd.nu));
      rep.add_constant("n_prime", g.id(o), r, 0, std::log(vd.n_prime));
      double phi_star = measure_phi_at(g, metric, o, r, vd.n_prime, cfg);
      rep.add_constant("phi_star", g.id(o), r, 0, std::log(phi_star));
      sc.offer(log_phi_p - std::log(phi_star),
               Json{{"o", g.id(o)}, {"r", r}, {"n_prime", vd.n_prime}});
    }
    sc.grid = {{"type", "sampled-radii"}, {"points", rev_radii.size()}};
    if (relaxed) sc.add_flag("non-theorem-regime");
    sc.finalize();
    rep.certificates.push_back(std::move(sc));
  }

  rep.finish();
  return rep;
}

// ---------------------------------------------------------------------------
// general locally regular case, forward + reverse

namespace {

// checks r >= mult * ||s(r)||_B for all r in [lo, hi] by piecewise reduction
bool jump_guard_holds(const MetricStructure& metric, const std::vector<int>& B,
                      double lo, double hi, double mult, std::string* detail) {
  std::set<double> probes{lo, hi};
  for (int x : B)
    for (double bp : metric.breakpoints(x))
      if (bp > lo && bp < hi) probes.insert(bp);
  for (double r : probes) {
    double s = metric.jump_sup_over_set(B, r);
    if (mult * s > r * (1.0 + 1e-12)) {
      *detail = "r = " + fmt17(r) + ", ||s(r)||_B = " + fmt17(s);
      return false;
    }
  }
  return true;
}

}  // namespace

Report run_general(const PipelineConfig& cfg) {
  WeightedGraph g = cfg.make_graph();
  MetricStructure metric =
      MetricStructure::all_pairs_distances(g, cfg.make_weights(g));

  if (!(cfg.r1 > 0.0)) usage_fail("guard violated: R1 > 0");
  if (cfg.r2 < 4.0 * cfg.r1) usage_fail("guard violated: R2 >= 4 R1");
  if (cfg.r2 > metric.diameter() / 2.0)
    usage_fail("guard violated: R2 <= diam/2 (diam = " +
               fmt17(metric.diameter()) + ")");

  Report rep;
  rep.metadata["mode"] = "general";
  rep.metadata["config"] = cfg.to_json();
  rep.metadata["graph"] = graph_summary(g, metric);

  SpectralDecomposition dec = decompose(g);
  double Lambda = std::max(0.0, dec.lambda_bottom());
  int o = resolve_center(g, cfg);
  DimensionSpec dim = cfg.make_dimension();

  Certificate flag_holder;
  std::vector<int> centers = pick_centers(g, o, cfg, &flag_holder);
  std::vector<int> all(g.size());
  for (int i = 0; i < g.size(); ++i) all[i] = i;

  // theorem jump guards (forward: r >= 1024 ||s(r)||_B; reverse:
  // 2 ||s(r)||_{B_o(4r)} <= r)
  std::string detail;
  bool fwd_guard = jump_guard_holds(metric, all, cfg.r1, cfg.r2, 1024.0, &detail);
  if (!fwd_guard && !cfg.relaxed_guards)
    usage_fail("guard violated: r >= 1024 ||s(r)||_B on [R1,R2] (" + detail +
               "); pass --relaxed-guards to explore below theorem scale");
  bool rev_guard = true;
  {
    std::set<double> probes{cfg.r1 / 4.0, cfg.r2 / 4.0};
    for (double bp : metric.breakpoints(o))
      if (bp / 4.0 > cfg.r1 / 4.0 && bp / 4.0 < cfg.r2 / 4.0)
        probes.insert(bp / 4.0);
    for (double r : probes) {
      double s = metric.jump_sup_over_set(metric.ball(o, 4.0 * r), r);
      if (2.0 * s > r * (1.0 + 1e-12)) rev_guard = false;
    }
  }
  if (!rev_guard && !cfg.relaxed_guards)
    usage_fail("guard violated: 2 ||s(r)||_{B_o(4r)} <= r on [R1/4,R2/4]; "
               "pass --relaxed-guards to explore below theorem scale");
  bool relaxed = !(fwd_guard && rev_guard);
  if (relaxed) rep.metadata["watermark"] = "non-theorem regime";

  std::vector<double> radii = geometric_samples(cfg.r1, cfg.r2, cfg.sample_radii);
  double phi;
  if (cfg.phi_seed > 0.0) {
    phi = cfg.phi_seed;
  } else {
    PhiMeasurement meas = measure_phi_star(
        g, metric, measurement_centers(g, o, cfg), radii, dim.at(cfg.r2), cfg);
    rep.add_constant("phi_star_measured", g.id(meas.at_center), meas.at_radius,
                     0, std::log(meas.phi_star));
    phi = std::max(1.0, std::ceil(meas.phi_star));
  }
  rep.add_constant("phi", "", 0, 0, std::log(phi));

  DimFn Nfn = [&dim](int, double r) { return dim.sup(r / 4.0, r); };
  bool saw_negative = false;

  Certificate lc =
      check_local_regularity(g, metric, centers, Nfn, phi, cfg.r1, cfg.r2);
  for (const std::string& f : flag_holder.flags) lc.add_flag(f);
  if (relaxed) lc.add_flag("non-theorem-regime");
  rep.certificates.push_back(std::move(lc));

  LogPhiFn phifn = [&g, &metric, &dim, phi, relaxed, &saw_negative](
                       int x, double r1, double r2) {
    GeneralCorrections gc =
        general_corrections(x, r1, r2, g, metric, dim, phi, relaxed);
    saw_negative |= gc.negative_floor;
    double NR = gc.N_R;
    double log_A = 43.0 * NR * NR * NR * kLn2 + 8.0 * NR * NR * std::log(phi);
    return log_A + gc.Phi.log_mag;
  };
  Certificate vc =
      check_volume_doubling(g, metric, centers, Nfn, phifn, cfg.r1, cfg.r2);
  for (const std::string& f : flag_holder.flags) vc.add_flag(f);
  if (relaxed) vc.add_flag("non-theorem-regime");
  if (saw_negative) vc.add_flag("negative_floor_exponent");
  rep.certificates.push_back(std::move(vc));

  saw_negative = false;
  LogPsiFn psifn = [&g, &metric, &dim, phi, relaxed, &saw_negative](int z,
                                                                    double tau) {
    GeneralCorrections gc =
        general_corrections(z, tau, tau, g, metric, dim, phi, relaxed);
    saw_negative |= gc.negative_floor;
    double N = gc.N_r;
    double log_A = 43.0 * N * N * N * kLn2 + 8.0 * N * N * std::log(phi);
    return log_A + gc.Psi.log_mag;
  };
  TimeGrid grid{16.0 * cfg.r1 * cfg.r1, auto_t_max(cfg), cfg.tgrid_per_decade};
  GaussianRowSink sink = [&rep, &g, o](int x, int y, double t, double lp,
                                       double lb) {
    if (x == o) rep.gaussian_profile.push_back({g.id(x), g.id(y), t, lp, lb});
  };
  Certificate gcert = check_gaussian(g, dec, metric, all, centers, Nfn, psifn,
                                     4.0 * cfg.r1, cfg.r2, grid, Lambda, sink);
  gcert.grid["profile_points"] = rep.gaussian_profile.size();
  if (cfg.vertex_transitive) {
    std::erase(gcert.flags, "centers_sampled");
    gcert.add_flag("vertex_transitive_reduction");
  }
  if (relaxed) gcert.add_flag("non-theorem-regime");
  if (saw_negative) gcert.add_flag("negative_floor_exponent");
  rep.certificates.push_back(std::move(gcert));

  bool forward_ok = true;
  for (const Certificate& c : rep.certificates) forward_ok &= c.pass;
  if (forward_ok) {
    Certificate sc;
    sc.condition = "S";
    sc.params = {{"theorem", "reverse general"},
                 {"o", g.id(o)},
                 {"R1", cfg.r1},
                 {"R2", cfg.r2},
                 {"gamma", cfg.gamma_spec}};
    std::vector<double> rev_radii =
        linear_samples(4.0 * cfg.r1, cfg.r2, cfg.sample_radii);
    for (double r : rev_radii) {
      std::vector<int> ballo = metric.ball(o, r);
      double deg_sup = 0.0;
      for (int z : ballo) deg_sup = std::max(deg_sup, g.weighted_degree(z));
      // N~ and r' interlock; two sweeps settle them (exact for constant n)
      double n_tilde = dim.sup(r / 16.0, r);
      double r_prime = r / 4.0;
      for (int pass = 0; pass < 2; ++pass) {
        VariableDimension probe = variable_dimension_general(
            r, cfg.r1, n_tilde, 1.0, deg_sup, true);
        r_prime = probe.r_prime;
        n_tilde = dim.sup(r_prime / 4.0, r);
      }
      double s_tilde = 0.0;
      for (int z : ballo)
        s_tilde = std::max(s_tilde, metric.annulus_jump_sup(z, r_prime, r));

      double n_used, log_phi_used;
      if (cfg.gamma_spec == "theorem-1.4") {
        VariableDimension vd = variable_dimension_general(
            r, cfg.r1, n_tilde, s_tilde, deg_sup, relaxed);
        if (vd.negative_floor) sc.add_flag("negative_floor_exponent");
        n_used = vd.n_prime;
        log_phi_used = log_phi_prime(n_tilde, phi);
        rep.add_constant("gamma", g.id(o), r, 0,
                         log_gamma_theorem_choice(n_tilde, phi));
        rep.add_constant("r_prime", g.id(o), r, 0, std::log(vd.r_prime));
        rep.add_constant("p", g.id(o), r, 0, std::log(vd.p));
        rep.add_constant("nu", g.id(o), r, 0, std::log(vd.nu));
      } else {
        std::string prefix = "explicit:";
        if (cfg.gamma_spec.rfind(prefix, 0) != 0)
          usage_fail("gamma spec must be 'theorem-1.4' or 'explicit:<value>'");
        double gamma_val = std::stod(cfg.gamma_spec.substr(prefix.size()));
        if (!(gamma_val >= 1.0)) usage_fail("explicit gamma must be >= 1");
        // Sobolev constant and dimension of the raw variable-dimension route
        log_phi_used = (49.0 + 2.0 * n_tilde / (n_tilde - 2.0)) * kLn2 +
                       (2.0 / n_tilde) * std::log(gamma_val);
        double log_T1 = -kInf;
        {
          double sup_psi = -kInf, sup_phi_r = -kInf;
          for (int z : ballo) {
            std::set<double> sigmas{r_prime, r};
            for (double bp : metric.breakpoints(z))
              if (bp > r_prime && bp < r) sigmas.insert(bp);
            for (double s : sigmas) {
              GeneralCorrections gc =
                  general_corrections(z, s, r, g, metric, dim, phi, true);
              double N = gc.N_r;
              double log_A =
                  43.0 * N * N * N * kLn2 + 8.0 * N * N * std::log(phi);
              GeneralCorrections gpsi =
                  general_corrections(z, s, s, g, metric, dim, phi, true);
              sup_psi = std::max(sup_psi, log_A + gpsi.Psi.log_mag);
              sup_phi_r = std::max(sup_phi_r, log_A + gc.Phi.log_mag);
            }
          }
          log_T1 = 10.0 * (sup_psi + sup_phi_r);
        }
        double inv_m = 0.0;
        for (int z : ballo) inv_m = std::max(inv_m, 1.0 / g.measure(z));
        double log_T2 = std::log(metric.ball_measure(o, r)) + std::log(inv_m);
        double iota = 1.0 / std::log(r / r_prime);
        double log_gamma = std::log(gamma_val);
        // ln(1 v e^a v e^b) = max(0, a, b)
        double cand = std::max({0.0, log_T1 - log_gamma,
                                iota * (log_T2 - log_gamma)});
        n_used = std::max(n_tilde, cand);
      }
      rep.add_constant("n_prime", g.id(o), r, 0, std::log(n_used));
      rep.add_constant("log_phi_prime", g.id(o), r, 0, log_phi_used);
      double phi_star = measure_phi_at(g, metric, o, r, n_used, cfg);
      rep.add_constant("phi_star", g.id(o), r, 0, std::log(phi_star));
      sc.offer(log_phi_used - std::log(phi_star),
               Json{{"o", g.id(o)}, {"r", r}, {"n_prime", n_used}});
    }
    sc.grid = {{"type", "sampled-radii"}, {"points", rev_radii.size()}};
    if (relaxed) sc.add_flag("non-theorem-regime");
    sc.finalize();
    rep.certificates.push_back(std::move(sc));
  }

  rep.finish();
  return rep;
}

// ---------------------------------------------------------------------------
// emission

void emit_report(const Report& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) usage_fail("cannot write report.json under '" + out_dir + "'");
    out << report.to_json().dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "certificates.csv");
    out << "condition,pass,min_log_margin,grid_points,flags,witness\n";
    for (const Certificate& c : report.certificates) {
      std::string flags;
      for (const std::string& f : c.flags) {
        if (!flags.empty()) flags += ';';
        flags += f;
      }
      long long pts =
          c.grid.contains("points") ? c.grid.at("points").get<long long>() : 0;
      out << c.condition << "," << (c.pass ? 1 : 0) << ","
          << fmt17(c.min_log_margin) << "," << pts << "," << flags << ",\""
          << c.witness.dump() << "\"\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "constants.csv");
    out << "quantity,x,r,R,log_value\n";
    for (const auto& row : report.constants)
      out << row.at("quantity").get<std::string>() << ","
          << row.at("x").get<std::string>() << ","
          << fmt17(row.at("r").get<double>()) << ","
          << fmt17(row.at("R").get<double>()) << ","
          << fmt17(row.at("log_value").get<double>()) << "\n";
  }
  if (!report.gaussian_profile.empty()) {
    std::ofstream out(fs::path(out_dir) / "profile_gaussian.csv");
    out << "t,x,y,log_p,log_bound\n";
    for (const ProfileRow& r : report.gaussian_profile)
      out << fmt17(r.t) << "," << r.x << "," << r.y << "," << fmt17(r.log_p)
          << "," << fmt17(r.log_bound) << "\n";
  }
}

}  // namespace heatcert
