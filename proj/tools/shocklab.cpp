// Batch front end: one subcommand per experiment, CSV + JSON outputs under
// <root>/<subcommand>/, resolved config stamped into every output directory.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "config.hpp"
#include "shocklab/acceptance.hpp"
#include "shocklab/errors.hpp"
#include "shocklab/evans.hpp"
#include "shocklab/evolution.hpp"
#include "shocklab/manifold.hpp"
#include "shocklab/models.hpp"
#include "shocklab/profile.hpp"
#include "shocklab/spectral.hpp"
#include "shocklab/templates.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shocklab;
using namespace shocklab::cli;

namespace {

struct Run {
  ExperimentConfig cfg;
  std::string subcommand;
  fs::path dir;
  json result = json::object();

  void csv(const std::string& name, const std::string& header, const std::vector<std::vector<double>>& rows) const {
    std::ofstream f(dir / name);
    if (!f) throw DomainError("cannot write " + (dir / name).string());
    f << header << '\n';
    char buf[64];
    for (const auto& r : rows) {
      for (size_t j = 0; j < r.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", r[j]);
        f << (j ? "," : "") << buf;
      }
      f << '\n';
    }
  }
  void write_json(const std::string& name, const json& j) const {
    std::ofstream f(dir / name);
    if (!f) throw DomainError("cannot write " + (dir / name).string());
    f << j.dump(2) << '\n';
  }
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

ShockProfile solve(const ExperimentConfig& c, const CatalogModel& model) {
  return solve_catalog_profile(model, Grid::make(c.X, c.m), c.profile_tol);
}

void cmd_models(Run& r) {
  std::ofstream f(r.dir / "models.csv");
  f << "name,n,form,type,ell,profile_solvable,hypotheses_passed\n";
  json list = json::array();
  for (const auto& m : catalog()) {
    const auto ends = classify(m.system, m.u_minus, m.u_plus);
    json entry{{"name", m.system.name},
               {"n", m.system.n},
               {"form", m.system.form == Form::conservation ? "conservation" : "general"},
               {"type", to_string(ends.classification)},
               {"ell", ends.ell},
               {"a_minus", ends.a_minus},
               {"a_plus", ends.a_plus},
               {"description", m.description},
               {"profile_solvable", m.profile_solvable}};
    SampleBox box;
    box.lo = m.u_minus.cwiseMin(m.u_plus).array() - 0.5;
    box.hi = m.u_minus.cwiseMax(m.u_plus).array() + 0.5;
    bool all = false;
    try {
      const auto rep = verify_hypotheses(m.system, ends, box, xi_grid(10.0, 41));
      json checks = json::object();
      for (const auto& c : rep.checks) checks[c.id] = {{"passed", c.passed}, {"witness", finite_or_null(c.witness)}};
      entry["hypotheses"] = checks;
      all = rep.all_passed();
    } catch (const Error& e) {
      entry["hypotheses_error"] = e.what();
    }
    f << m.system.name << ',' << m.system.n << ',' << entry["form"].get<std::string>() << ','
      << to_string(ends.classification) << ',' << ends.ell << ',' << m.profile_solvable << ',' << all << '\n';
    list.push_back(entry);
  }
  r.result["models"] = list;
}

void cmd_profile(Run& r) {
  const auto model = resolve_model(r.cfg);
  const auto p = solve(r.cfg, model);
  const int n = p.n;
  std::string header = "x";
  for (int c = 0; c < n; ++c) header += ",u" + std::to_string(c) + ",u" + std::to_string(c) + "_x";
  if (model.exact) header += ",exact";
  std::vector<std::vector<double>> rows;
  double err = 0.0;
  for (int i = 0; i < p.grid.m; ++i) {
    std::vector<double> row{p.grid.x(i)};
    for (int c = 0; c < n; ++c) {
      row.push_back(p.values()(i * n + c));
      row.push_back(p.derivative(1)(i * n + c));
    }
    if (model.exact) {
      row.push_back(model.exact(p.grid.x(i)));
      err = std::max(err, std::abs(p.values()(i * n) - row.back()));
    }
    rows.push_back(row);
  }
  r.csv("profile.csv", header, rows);
  const auto decay = measure_decay(p);
  json fits = json::array();
  for (const auto& t : decay.fits)
    fits.push_back({{"order", t.order}, {"side", t.side}, {"theta", t.theta}, {"r2", t.r2}, {"x_from", t.x_from},
                    {"x_to", t.x_to}, {"points", t.points}});
  r.result = {{"type", to_string(p.ends.classification)},
              {"residual", p.residual},
              {"iterations", p.iterations},
              {"tail_error", p.tail_error},
              {"theta", finite_or_null(decay.theta)},
              {"decay_inconclusive", decay.inconclusive},
              {"decay_fits", fits}};
  if (model.exact) r.result["sup_error_vs_closed_form"] = err;
}

void cmd_spectrum(Run& r) {
  const auto model = resolve_model(r.cfg);
  const auto p = solve(r.cfg, model);
  const auto op = assemble_L(model.system, p);
  const auto spec = unstable_spectrum(op, r.cfg.cutoff_re);
  std::vector<std::vector<double>> rows;
  for (size_t j = 0; j < spec.eigenvalues.size(); ++j)
    rows.push_back({spec.eigenvalues[j].real(), spec.eigenvalues[j].imag(), static_cast<double>(spec.ranks[j])});
  r.csv("unstable_eigenvalues.csv", "re,im,chain_length", rows);
  rows.clear();
  for (const auto& z : spec.located) rows.push_back({z.real(), z.imag()});
  r.csv("located_eigenvalues.csv", "re,im", rows);
  r.result = {{"p", spec.p},
              {"cutoff_re", r.cfg.cutoff_re},
              {"zero_eigenvalue", {spec.zero_eigenvalue.real(), spec.zero_eigenvalue.imag()}},
              {"zero_match", spec.zero_match},
              {"zero_mode_residual", zero_mode_residual(op)},
              {"beta", finite_or_null(spec.beta)},
              {"omega", finite_or_null(spec.omega)}};
}

void cmd_evans(Run& r) {
  const auto model = resolve_model(r.cfg);
  const auto p = solve(r.cfg, model);
  const EvansFunction D(model.system, p);
  const auto contour =
      Contour::right_region(r.cfg.contour_re_min, r.cfg.contour_radius, r.cfg.contour_hole, r.cfg.contour_samples);
  const auto w = winding_number(D, contour);
  write_evans_csv(w, (r.dir / "contour.csv").string());
  r.result = {{"contour", w.description},   {"samples", w.samples}, {"winding", w.winding},
              {"raw_winding", w.raw},       {"min_abs", w.min_abs}, {"min_relative", w.min_relative}};
  try {
    const auto z = zero_order_at_origin(D, r.cfg.origin_radius);
    r.result["origin_order"] = z.order;
    r.result["ell"] = z.ell;
    r.result["origin_order_matches_ell"] = z.matches_ell;
  } catch (const ContourError& e) {
    r.result["origin_order_error"] = e.what();
  }
  if (w.winding > 0) {
    const auto roots = evans_roots(D, contour);
    std::vector<std::vector<double>> rows;
    for (const auto& z : roots) rows.push_back({z.real(), z.imag()});
    r.csv("roots.csv", "re,im", rows);
    r.result["roots"] = rows;
  }
}

void cmd_manifold(Run& r) {
  const auto model = resolve_model(r.cfg);
  const auto p = solve(r.cfg, model);
  const PerturbationDynamics dyn(model.system, p);
  const auto spec = unstable_spectrum(dyn.op(), r.cfg.cutoff_re);
  if (spec.p == 0) throw UnsupportedError("model has no unstable eigenvalue above the cutoff; nothing to construct");
  ManifoldParams mp;
  mp.delta = r.cfg.delta;
  mp.dt = r.cfg.manifold_dt;
  if (r.cfg.eta) mp.eta = *r.cfg.eta;
  if (r.cfg.omega) mp.omega = *r.cfg.omega;
  if (r.cfg.beta) mp.beta = *r.cfg.beta;
  if (r.cfg.T_horizon) mp.T_horizon = *r.cfg.T_horizon;
  const CenterStableManifold M(dyn, spec, mp);
  // probe direction: a centred Gaussian in every component, projected onto the center-stable subspace
  const Norms nm(dyn.grid(), dyn.n());
  Vector probe(dyn.size());
  for (int i = 0; i < p.grid.m; ++i) probe.segment(i * dyn.n(), dyn.n()).setConstant(std::exp(-p.grid.x(i) * p.grid.x(i)));
  probe = apply_projector(spec, probe, Projector::cs);
  probe /= nm.h(probe, 2);

  const auto fp = M.fixed_point(mp.delta * probe);
  std::vector<std::vector<double>> rows;
  for (size_t j = 0; j < fp.differences.size(); ++j) rows.push_back({static_cast<double>(j + 1), fp.differences[j]});
  r.csv("fixed_point.csv", "iteration,difference", rows);
  const auto fit = tangency_fit(M, probe, r.cfg.eps_ladder);
  rows.clear();
  for (size_t j = 0; j < fit.eps.size(); ++j) rows.push_back({fit.eps[j], fit.phi_norms[j]});
  r.csv("tangency.csv", "eps,phi_h2", rows);

  ConditionalOptions o;
  o.T = r.cfg.conditional_T;
  o.record_every = 2;
  o.reproject_every = r.cfg.reproject_every;
  const Vector w0 = r.cfg.conditional_amplitude * probe;
  const auto on = conditional_run(M, w0, o);
  write_conditional_csv(on, (r.dir / "manifold_run.csv").string());
  json res{{"contraction", fp.contraction},
           {"iterations", fp.iterations},
           {"converged", fp.converged},
           {"tangency_slope", fit.slope},
           {"resolved", {{"eta", M.params().eta}, {"omega", M.params().omega}, {"beta", M.params().beta},
                         {"T_horizon", M.params().T_horizon}}},
           {"manifold_run", {{"stayed", on.stayed}, {"max_ratio", on.max_ratio}, {"escaped", on.escaped},
                             {"reprojections", on.reprojections}, {"max_correction", on.max_correction},
                             {"z_over_w2_max", on.z_over_w2_max}}}};
  if (r.cfg.offset != 0.0) {
    ConditionalOptions off = o;
    off.reproject_every = 0.0;
    off.offset = r.cfg.offset;
    const auto esc = conditional_run(M, w0, off);
    write_conditional_csv(esc, (r.dir / "offset_run.csv").string());
    json e{{"escaped", esc.escaped}, {"escape_time", finite_or_null(esc.escape_time)}};
    try {
      const auto rate = escape_rate(on, esc, 2.0 * std::abs(r.cfg.offset), 1e-2);
      e["rate"] = rate.rate;
      e["rate_window"] = {rate.t_from, rate.t_to};
    } catch (const DomainError& ex) {
      e["rate_error"] = ex.what();
    }
    res["offset_run"] = e;
  }
  r.result = res;
}

Vector make_v0(const ExperimentConfig& c, const ShockProfile& p, double amplitude) {
  const int n = p.n;
  Vector v(p.grid.m * n);
  for (int i = 0; i < p.grid.m; ++i) {
    const double y = (p.grid.x(i) - c.v0.center) / c.v0.width;
    const double s = c.v0.kind == "dipole" ? y * std::exp(-y * y / 2) : std::exp(-y * y);
    v.segment(i * n, n).setConstant(amplitude * s);
  }
  v.head(n).setZero();
  v.tail(n).setZero();
  return v;
}

void cmd_evolve(Run& r) {
  const auto model = resolve_model(r.cfg);
  const auto p = solve(r.cfg, model);
  const PerturbationDynamics dyn(model.system, p);
  const Norms nm(p.grid, p.n);
  std::optional<TemplateParams> tp;
  if (p.n == 1 && model.system.form == Form::conservation) tp = shock_template_params(model.system, p);
  // amplitudes: the E0 ladder rescales the v0 shape to the requested weighted H4 norm
  std::vector<double> amps;
  if (r.cfg.E0_ladder.empty()) {
    amps.push_back(r.cfg.v0.amplitude);
  } else {
    const double unit = nm.weighted_h4(make_v0(r.cfg, p, 1.0));
    for (double E : r.cfg.E0_ladder) amps.push_back(E / unit);
  }
  EvolutionOptions o;
  o.T = r.cfg.T;
  o.dt = r.cfg.dt;
  o.record_every = std::max(1, static_cast<int>(std::lround(r.cfg.record_dt / r.cfg.dt)));
  PhaseOptions po;
  if (r.cfg.phase == "kernel") {
    if (!tp) throw UnsupportedError("kernel phase needs a scalar conservation law");
    po.method = PhaseMethod::kernel;
    po.kernel = tp;
  }
  json runs = json::array();
  std::vector<double> E0s, sups;
  for (size_t k = 0; k < amps.size(); ++k) {
    const auto raw = evolve(dyn, make_v0(r.cfg, p, amps[k]), o);
    json run{{"amplitude", amps[k]}, {"E0", raw.E0}, {"diverged", raw.diverged},
             {"diverged_at", finite_or_null(raw.diverged_at)}, {"mass_drift", raw.mass_drift}};
    if (raw.diverged) {
      runs.push_back(run);
      continue;
    }
    auto tr = reframe(raw, dyn, track_phase(raw, dyn, po), tp);
    if (tp) {
      const auto z = zeta_monitor(tr, *tp);
      tr.zeta = z.zeta;
      run["zeta_final"] = z.final;
      const double sup = *std::max_element(tr.template_ratio.begin(), tr.template_ratio.end());
      run["template_ratio_sup"] = sup;
      E0s.push_back(raw.E0);
      sups.push_back(sup);
    }
    const auto d = damping_monitor(tr);
    run["damping"] = {{"C", d.C}, {"theta1", d.theta1}, {"theta2", d.theta2}, {"violation", d.violation},
                      {"admissible", d.admissible}};
    const double jump = (p.ends.u_minus - p.ends.u_plus).norm();
    const double alpha_inf = p.n == 1 ? raw.mass.front() / (p.ends.u_minus(0) - p.ends.u_plus(0)) : 0.0;
    std::vector<double> da, ad;
    for (size_t i = 0; i < tr.t.size(); ++i) {
      da.push_back(std::abs(tr.alpha[i] - alpha_inf));
      ad.push_back(std::abs(tr.alphadot[i]));
    }
    json fits = json::object();
    for (const auto& [name, y] : std::map<std::string, const std::vector<double>*>{
             {"linf", &tr.linf}, {"l2", &tr.l2}, {"alpha", &da}, {"alphadot", &ad}}) {
      try {
        const auto f = fit_exponent(tr.t, *y, r.cfg.fit_from, r.cfg.T, 400, r.cfg.seed);
        fits[name] = {{"exponent", -f.slope}, {"ci", {-f.ci_high, -f.ci_low}}, {"window", {f.t_from, f.t_to}},
                      {"points", f.points}};
      } catch (const DomainError& e) {
        fits[name] = {{"error", e.what()}};
      }
    }
    run["fits"] = fits;
    run["alpha_inf"] = alpha_inf;
    run["jump"] = jump;
    write_trace_csv(tr, (r.dir / ("trace_" + std::to_string(k) + ".csv")).string());
    runs.push_back(run);
  }
  r.result["runs"] = runs;
  if (E0s.size() >= 2) r.result["template_E0_slope"] = loglog_slope(E0s, sups);
}

int cmd_verify(Run& r, const std::vector<int>& only, const std::vector<int>& allow_fail, bool rerun) {
  const auto run1 = r.dir / "run1";
  fs::remove_all(run1);
  const auto results = run_acceptance(run1.string(), only);
  bool ok = true;
  auto tally = [&](int id, bool pass) {
    if (!pass && std::find(allow_fail.begin(), allow_fail.end(), id) == allow_fail.end()) ok = false;
  };
  json table = json::array();
  for (const auto& c : results) {
    std::cout << format_result(c) << std::endl;
    json m = json::object();
    for (const auto& [k, v] : c.metrics)
      if (k.find("seconds") == std::string::npos) m[k] = finite_or_null(v);
    table.push_back({{"criterion", c.id}, {"title", c.title}, {"pass", c.pass}, {"metrics", m}, {"note", c.note}});
    tally(c.id, c.pass);
  }
  if (rerun) {
    const auto run2 = r.dir / "run2";
    fs::remove_all(run2);
    run_acceptance(run2.string(), only);
    const auto cmp = compare_csv_trees(run1.string(), run2.string());
    std::cout << (cmp.identical() ? "PASS" : "FAIL") << " criterion 8 (determinism) csv_files=" << cmp.files
              << " mismatched=" << cmp.mismatched.size() << std::endl;
    table.push_back({{"criterion", 8}, {"title", "determinism"}, {"pass", cmp.identical()},
                     {"metrics", {{"csv_files", cmp.files}, {"mismatched", cmp.mismatched}}}, {"note", ""}});
    tally(8, cmp.identical());
  }
  r.result["criteria"] = table;
  r.result["allow_fail"] = allow_fail;
  return ok ? 0 : 1;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out.push_back({prefix, j.dump()});
  }
}

void cmd_report(Run& r, const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::vector<fs::path> dirs;
  if (fs::exists(root))
    for (const auto& e : fs::directory_iterator(root))
      if (e.is_directory() && fs::exists(e.path() / "result.json") && e.path() != r.dir) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  std::ofstream f(r.dir / "summary.csv");
  f << "source,key,value\n";
  for (const auto& d : dirs) {
    std::ifstream in(d / "result.json");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error&) {
      throw ConfigError("unreadable " + (d / "result.json").string());
    }
    std::vector<std::pair<std::string, std::string>> flat;
    flatten(j, "", flat);
    const std::string src = d.filename().string();
    for (const auto& [k, v] : flat) {
      std::string val = v;
      if (val.find(',') != std::string::npos || val.find('"') != std::string::npos) {
        std::string q = "\"";
        for (char ch : val) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        val = q + "\"";
      }
      f << src << ',' << k << ',' << val << '\n';
      std::cout << src << "  " << k << " = " << v << '\n';
    }
  }
  r.result["sources"] = dirs.size();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shocklab: numerical lab for viscous shock stability"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path, model_override, out_override;
  std::vector<int> only, allow_fail;
  app.add_option("--config", config_path, "JSON experiment config (schema version 1)");
  app.add_option("--model", model_override, "catalog model name, overrides the config");
  app.add_option("--out", out_override, "output root, overrides SHOCKLAB_OUTPUT_ROOT and the config");
  for (const char* name : {"models", "profile", "spectrum", "evans", "manifold", "evolve", "report"})
    app.add_subcommand(name);
  auto* verify = app.add_subcommand("verify", "run acceptance criteria 1-7");
  verify->add_option("--only", only, "subset of criteria");
  verify->add_option("--allow-fail", allow_fail, "criteria whose FAIL does not set the exit status");
  bool skip_rerun = false;
  verify->add_flag("--skip-rerun", skip_rerun, "skip the second run and the determinism comparison");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  Run r;
  r.subcommand = sub;
  try {
    json raw = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read config " + config_path);
      try {
        raw = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    if (!model_override.empty()) raw["model"] = model_override;
    r.cfg = parse_config(raw);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  std::string root = r.cfg.output_root;
  if (const char* env = std::getenv("SHOCKLAB_OUTPUT_ROOT"); env && *env) root = env;
  if (!out_override.empty()) root = out_override;
  r.dir = fs::path(root) / sub;

  int code = 0;
  try {
    fs::create_directories(r.dir);
    json stamp = to_json(r.cfg);
    stamp["output"]["root"] = root;
    r.write_json("resolved_config.json", {{"tool", kToolVersion}, {"subcommand", sub}, {"config", stamp}});
    if (sub == "models") cmd_models(r);
    else if (sub == "profile") cmd_profile(r);
    else if (sub == "spectrum") cmd_spectrum(r);
    else if (sub == "evans") cmd_evans(r);
    else if (sub == "manifold") cmd_manifold(r);
    else if (sub == "evolve") cmd_evolve(r);
    else if (sub == "verify") code = cmd_verify(r, only, allow_fail, !skip_rerun);
    else if (sub == "report") cmd_report(r, root);
    r.result["tool"] = kToolVersion;
    r.write_json("result.json", r.result);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << sub << " failed: " << e.what() << '\n';
    try {
      r.write_json("error.json", {{"tool", kToolVersion}, {"subcommand", sub}, {"error", e.what()}});
    } catch (const std::exception&) {
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << sub << " failed: " << e.what() << '\n';
    return 1;
  }
  if (sub != "verify" && sub != "report") std::cout << r.result.dump(2) << '\n';
  return code;
}
