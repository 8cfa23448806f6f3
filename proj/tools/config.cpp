#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "shocklab/errors.hpp"

namespace shocklab::cli {

using nlohmann::json;

namespace {

// Walks one JSON object, rejecting keys that nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + path(it.key()) + "'");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("wrong type for '" + path(key) + "'");
    }
  }
  void get(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    if (!j_.at(key).is_number()) throw ConfigError("wrong type for '" + path(key) + "'");
    out = j_.at(key).get<double>();
  }
  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void positive(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  {
    Reader r(j, "");
    r.get("schema", c.schema);
    if (c.schema != kSchemaVersion) throw ConfigError("unsupported schema version " + std::to_string(c.schema));
    if (const json* m = r.child("model")) {
      if (m->is_string()) {
        c.model = m->get<std::string>();
      } else {
        InlineModel im;
        Reader mr(*m, "model");
        mr.get("name", im.name);
        mr.get("form", im.form);
        mr.get("flux", im.flux);
        mr.get("p", im.p);
        mr.get("q", im.q);
        mr.get("viscosity", im.viscosity);
        mr.get("u_minus", im.u_minus);
        mr.get("u_plus", im.u_plus);
        mr.finish();
        if (im.form != "conservation" && im.form != "general") throw ConfigError("model.form must be conservation or general");
        if (im.u_minus.size() != 1 || im.u_plus.size() != 1) throw ConfigError("inline models are scalar: u_minus, u_plus need one entry");
        if (im.viscosity.empty()) throw ConfigError("model.viscosity must not be empty");
        c.model = im.name;
        c.inline_model = im;
      }
    }
    if (const json* g = r.child("grid")) {
      Reader gr(*g, "grid");
      gr.get("X", c.X);
      gr.get("m", c.m);
      gr.finish();
    }
    if (const json* t = r.child("tolerances")) {
      Reader tr(*t, "tolerances");
      tr.get("profile", c.profile_tol);
      tr.finish();
    }
    if (const json* s = r.child("spectrum")) {
      Reader sr(*s, "spectrum");
      sr.get("cutoff_re", c.cutoff_re);
      sr.finish();
    }
    if (const json* e = r.child("evans")) {
      Reader er(*e, "evans");
      er.get("re_min", c.contour_re_min);
      er.get("radius", c.contour_radius);
      er.get("hole", c.contour_hole);
      er.get("samples", c.contour_samples);
      er.get("origin_radius", c.origin_radius);
      er.finish();
    }
    if (const json* m = r.child("manifold")) {
      Reader mr(*m, "manifold");
      mr.get("delta", c.delta);
      mr.get("eta", c.eta);
      mr.get("omega", c.omega);
      mr.get("beta", c.beta);
      mr.get("T_horizon", c.T_horizon);
      mr.get("dt", c.manifold_dt);
      mr.get("eps_ladder", c.eps_ladder);
      mr.get("conditional_T", c.conditional_T);
      mr.get("conditional_amplitude", c.conditional_amplitude);
      mr.get("offset", c.offset);
      mr.get("reproject_every", c.reproject_every);
      mr.finish();
    }
    if (const json* e = r.child("evolution")) {
      Reader er(*e, "evolution");
      er.get("T", c.T);
      er.get("dt", c.dt);
      er.get("record_dt", c.record_dt);
      er.get("E0_ladder", c.E0_ladder);
      er.get("phase", c.phase);
      er.get("fit_from", c.fit_from);
      if (const json* v = er.child("v0")) {
        Reader vr(*v, "evolution.v0");
        vr.get("kind", c.v0.kind);
        vr.get("amplitude", c.v0.amplitude);
        vr.get("center", c.v0.center);
        vr.get("width", c.v0.width);
        vr.finish();
      }
      er.finish();
    }
    if (const json* o = r.child("output")) {
      Reader orr(*o, "output");
      orr.get("root", c.output_root);
      orr.finish();
    }
    r.get("seed", c.seed);
    r.finish();
  }
  positive(c.X, "grid.X");
  if (c.m < 11) throw ConfigError("grid.m must be at least 11");
  positive(c.profile_tol, "tolerances.profile");
  positive(c.contour_radius, "evans.radius");
  if (c.contour_hole < 0) throw ConfigError("evans.hole must be nonnegative");
  if (c.contour_samples < 8) throw ConfigError("evans.samples must be at least 8");
  positive(c.origin_radius, "evans.origin_radius");
  positive(c.delta, "manifold.delta");
  positive(c.manifold_dt, "manifold.dt");
  positive(c.conditional_T, "manifold.conditional_T");
  if (c.eps_ladder.size() < 2) throw ConfigError("manifold.eps_ladder needs two or more entries");
  for (double e : c.eps_ladder) positive(e, "manifold.eps_ladder entries");
  if (c.reproject_every < 0) throw ConfigError("manifold.reproject_every must be nonnegative");
  positive(c.T, "evolution.T");
  positive(c.dt, "evolution.dt");
  positive(c.record_dt, "evolution.record_dt");
  if (c.v0.kind != "dipole" && c.v0.kind != "gaussian") throw ConfigError("evolution.v0.kind must be dipole or gaussian");
  positive(c.v0.width, "evolution.v0.width");
  for (double e : c.E0_ladder) positive(e, "evolution.E0_ladder entries");
  if (c.phase != "least_squares" && c.phase != "kernel") throw ConfigError("evolution.phase must be least_squares or kernel");
  if (c.fit_from < 0 || c.fit_from >= c.T) throw ConfigError("evolution.fit_from must lie in [0, T)");
  if (c.output_root.empty()) throw ConfigError("output.root must not be empty");
  if (!c.inline_model) {
    bool known = false;
    for (const auto& m : catalog()) known = known || m.system.name == c.model;
    if (!known) throw ConfigError("unknown model '" + c.model + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["schema"] = c.schema;
  if (c.inline_model) {
    const auto& m = *c.inline_model;
    j["model"] = {{"name", m.name},         {"form", m.form},       {"flux", m.flux},
                  {"p", m.p},               {"q", m.q},             {"viscosity", m.viscosity},
                  {"u_minus", m.u_minus},   {"u_plus", m.u_plus}};
  } else {
    j["model"] = c.model;
  }
  j["grid"] = {{"X", c.X}, {"m", c.m}};
  j["tolerances"] = {{"profile", c.profile_tol}};
  j["spectrum"] = {{"cutoff_re", c.cutoff_re}};
  j["evans"] = {{"re_min", c.contour_re_min},
                {"radius", c.contour_radius},
                {"hole", c.contour_hole},
                {"samples", c.contour_samples},
                {"origin_radius", c.origin_radius}};
  j["manifold"] = {{"delta", c.delta},
                   {"eta", opt(c.eta)},
                   {"omega", opt(c.omega)},
                   {"beta", opt(c.beta)},
                   {"T_horizon", opt(c.T_horizon)},
                   {"dt", c.manifold_dt},
                   {"eps_ladder", c.eps_ladder},
                   {"conditional_T", c.conditional_T},
                   {"conditional_amplitude", c.conditional_amplitude},
                   {"offset", c.offset},
                   {"reproject_every", c.reproject_every}};
  j["evolution"] = {{"T", c.T},
                    {"dt", c.dt},
                    {"record_dt", c.record_dt},
                    {"E0_ladder", c.E0_ladder},
                    {"phase", c.phase},
                    {"fit_from", c.fit_from},
                    {"v0",
                     {{"kind", c.v0.kind}, {"amplitude", c.v0.amplitude}, {"center", c.v0.center}, {"width", c.v0.width}}}};
  j["output"] = {{"root", c.output_root}};
  j["seed"] = c.seed;
  return j;
}

CatalogModel resolve_model(const ExperimentConfig& c) {
  if (!c.inline_model) return catalog_model(c.model);
  const auto& m = *c.inline_model;
  CatalogModel out;
  out.system = m.form == "conservation" ? polynomial_conservation(m.name, m.flux, m.viscosity)
                                        : polynomial_general(m.name, m.p, m.q, m.viscosity);
  out.u_minus = Vector::Constant(1, m.u_minus[0]);
  out.u_plus = Vector::Constant(1, m.u_plus[0]);
  out.description = "inline polynomial model";
  return out;
}

}  // namespace shocklab::cli
