#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "shocklab/errors.hpp"
#include "shocklab/profile.hpp"

using namespace shocklab;

namespace {
double sup_error(const ShockProfile& p, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (int i = 0; i < p.grid.m; ++i) e = std::max(e, std::abs(p.values()(i) - exact(p.grid.x(i))));
  return e;
}
}  // namespace

TEST_CASE("Burgers profile against the closed form") {
  const auto model = catalog_model("burgers");
  const Grid g = Grid::make(20.0, 1601);
  const auto p = solve_catalog_profile(model, g);
  CHECK(sup_error(p, model.exact) <= 1e-6);
  CHECK(p.residual <= 1e-10);
  CHECK(p.tail_error < 1e-6);
  // monotone Lax profile
  CHECK(p.derivative(1).maxCoeff() < 0.0);
  const auto d = measure_decay(p);
  CHECK_FALSE(d.inconclusive);
  CHECK_FALSE(d.low_r2);
  CHECK(d.theta == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("quadratic pulse profile against the closed form") {
  const auto model = catalog_model("quadratic_pulse");
  const Grid g = Grid::make(20.0, 1601);
  const auto p = solve_catalog_profile(model, g);
  CHECK(sup_error(p, model.exact) <= 1e-6);
  CHECK(profile_residual(model.system, p) <= 1e-10);
  const auto d = measure_decay(p);
  CHECK(d.theta == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("profile error shrinks at the scheme order") {
  for (const char* name : {"burgers", "quadratic_pulse"}) {
    const auto model = catalog_model(name);
    const double e1 = sup_error(solve_catalog_profile(model, Grid::make(24.0, 161), 1e-12), model.exact);
    const double e2 = sup_error(solve_catalog_profile(model, Grid::make(24.0, 321), 1e-12), model.exact);
    INFO(name, " ", e1, " ", e2);
    CHECK(e1 / e2 > 12.0);
  }
}

TEST_CASE("profile is insensitive to guess perturbations") {
  const auto model = catalog_model("burgers");
  const Grid g = Grid::make(20.0, 401);
  const auto base = solve_catalog_profile(model, g);
  ProfileOptions o;
  o.guess = [&](double x) { return Vector::Constant(1, model.guess(x)(0) + 0.1 * std::sin(3 * x)); };
  const auto pert = solve_profile(model.system, base.ends, g, PhaseCondition::for_form(Form::conservation), o);
  CHECK((pert.values() - base.values()).lpNorm<Eigen::Infinity>() < 1e-9);

  const auto pm = catalog_model("quadratic_pulse");
  const auto pb = solve_catalog_profile(pm, g);
  ProfileOptions op;
  op.guess = [&](double x) { return Vector::Constant(1, pm.guess(x)(0) + 0.1 * std::exp(-x * x) * std::cos(x)); };
  const auto pp = solve_profile(pm.system, pb.ends, g, PhaseCondition::for_form(Form::general), op);
  CHECK((pp.values() - pb.values()).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("coincident end states give no connection") {
  const auto model = catalog_model("burgers");
  const auto e = classify(model.system, Vector::Constant(1, 0.5), Vector::Constant(1, 0.5));
  CHECK_THROWS_AS(solve_profile(model.system, e, Grid::make(10.0, 101), PhaseCondition::for_form(Form::conservation)),
                  NoConnectionError);
  const auto c = catalog_model("cubic");
  CHECK_THROWS_AS(solve_catalog_profile(c, Grid::make(10.0, 101)), UnsupportedError);
}

TEST_CASE("constant profile has inconclusive decay") {
  ShockProfile p;
  p.grid = Grid::make(10.0, 101);
  p.n = 1;
  for (auto& d : p.derivs) d = Vector::Zero(101);
  p.derivs[0].setConstant(2.0);
  CHECK(measure_decay(p).inconclusive);
}

TEST_CASE("translate family") {
  const auto model = catalog_model("burgers");
  const Grid g = Grid::make(20.0, 801);
  const auto p = solve_catalog_profile(model, g);
  CHECK(translate(p, 0.0).values() == p.values());
  const auto q = translate(p, 1.0);
  double err = 0.0;
  for (int i = 0; i < g.m; ++i) err = std::max(err, std::abs(q.values()(i) + std::tanh((g.x(i) - 1.0) / 2.0)));
  CHECK(err < 1e-7);
  const auto ab = translate(translate(p, 0.37), 0.81);
  const auto direct = translate(p, 1.18);
  CHECK((ab.values() - direct.values()).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK_THROWS_AS(translate(p, 10.0), DomainError);
  // residual survives translation within interpolation order
  CHECK(profile_residual(model.system, q) < 1e-7);
}

TEST_CASE("CSV round trip with checksum") {
  const auto model = catalog_model("burgers");
  const auto p = solve_catalog_profile(model, Grid::make(10.0, 201));
  const std::string path = "profile_roundtrip.csv";
  export_profile_csv(p, path);
  const auto q = import_profile_csv(path, model.system);
  CHECK(q.values() == p.values());
  CHECK(q.grid.m == p.grid.m);
  CHECK(q.ends.classification == ShockType::lax);
  CHECK_THROWS_AS(import_profile_csv(path, quadratic_pulse()), DomainError);
  std::remove(path.c_str());
}
