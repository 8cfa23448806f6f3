#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "shocklab/errors.hpp"
#include "shocklab/evolution.hpp"
#include "shocklab/models.hpp"
#include "shocklab/profile.hpp"

using namespace shocklab;

namespace {

struct Burgers {
  CatalogModel model = catalog_model("burgers");
  ShockProfile prof;
  PerturbationDynamics dyn;
  explicit Burgers(double X = 30.0, int m = 301)
      : prof(solve_catalog_profile(model, Grid::make(X, m))), dyn(model.system, prof) {}
  Vector bump(double E, double c) const {
    Vector v(prof.grid.m);
    for (int i = 0; i < prof.grid.m; ++i) {
      const double x = prof.grid.x(i) - c;
      v(i) = E * std::exp(-x * x);
    }
    v(0) = v(prof.grid.m - 1) = 0.0;
    return v;
  }
};

const Burgers& burgers_setup() {
  static const Burgers b;
  return b;
}

struct PulseSetup {
  PerturbationDynamics dyn;
  SpectralDecomposition spec;
  Vector phis;
  PulseSetup()
      : dyn(quadratic_pulse(), solve_catalog_profile(catalog_model("quadratic_pulse"), Grid::make(20.0, 201))),
        spec(unstable_spectrum(dyn.op(), 0.1)) {
    Norms nm(dyn.grid(), 1);
    const auto e = eigenpair_near(dyn.L(), -0.75);
    phis = e.vector / nm.h(e.vector, 2);
    phis -= spec.unstable.project(phis);
  }
};

const PulseSetup& pulse_setup() {
  static const PulseSetup p;
  return p;
}

}  // namespace

TEST_CASE("zero perturbation stays zero") {
  const auto& B = burgers_setup();
  EvolutionOptions o;
  o.T = 2.0;
  const auto tr = evolve(B.dyn, Vector::Zero(B.dyn.size()), o);
  CHECK(tr.snapshots.back().norm() < 1e-13);
  CHECK(tr.linf.back() < 1e-13);
  CHECK_FALSE(tr.diverged);
  CHECK(tr.t.back() == doctest::Approx(2.0));
  CHECK_THROWS_AS(evolve(B.dyn, Vector::Zero(3), o), DomainError);
}

TEST_CASE("translated profile is nearly stationary and mass is conserved") {
  const auto& B = burgers_setup();
  const double a = 0.2;
  const auto moved = translate(B.prof, a);
  Vector v0 = moved.values() - B.prof.values();
  EvolutionOptions o;
  o.T = 5.0;
  const auto tr = evolve(B.dyn, v0, o);
  CHECK((tr.snapshots.back() - v0).lpNorm<Eigen::Infinity>() < 1e-3);
  CHECK(tr.mass_drift < 1e-10);
  const auto ph = track_phase(tr, B.dyn);
  // translate moves the profile right by a, so u(x + a) = u_bar
  for (double al : ph.alpha) CHECK(al == doctest::Approx(a).epsilon(1e-3));
}

TEST_CASE("least-squares phase of an exact translate") {
  const auto& B = burgers_setup();
  for (double a : {-0.7, 0.05, 0.4}) {
    const Vector v = translate(B.prof, a).values() - B.prof.values();
    CHECK(least_squares_phase(B.dyn, v, 0.0) == doctest::Approx(a).epsilon(1e-6));
  }
}

TEST_CASE("phase ambiguity on a double bump") {
  const auto& P = pulse_setup();
  const auto& prof = P.dyn.profile();
  // two copies of the pulse; the objective has a minimum at each
  const Vector v = translate(prof, 3.0).values() + translate(prof, -3.0).values() - 2.0 * prof.values();
  PhaseOptions po;
  po.window = 5.0;
  po.scan_points = 101;
  CHECK_THROWS_AS(least_squares_phase(P.dyn, v, 0.0, po), PhaseAmbiguityError);
}

TEST_CASE("kernel phase agrees with least squares and carries the mass") {
  const auto& B = burgers_setup();
  const Vector v0 = B.bump(0.02, -2.0);
  EvolutionOptions o;
  o.T = 20.0;
  const auto raw = evolve(B.dyn, v0, o);
  const auto ls = track_phase(raw, B.dyn);
  PhaseOptions po;
  po.method = PhaseMethod::kernel;
  po.kernel = shock_template_params(B.model.system, B.prof);
  const auto kp = track_phase(raw, B.dyn, po);
  CHECK(kp.kernel_iterations >= 1);
  // asymptotic shift: mass / (u- - u+)
  const double a_inf = raw.mass.front() / 2.0;
  CHECK(ls.alpha.back() == doctest::Approx(a_inf).epsilon(1e-3));
  CHECK(kp.alpha.back() == doctest::Approx(a_inf).epsilon(1e-2));
  // the kernel phase approaches the limit monotonically from below
  for (size_t k = 1; k < kp.alpha.size(); ++k) CHECK(kp.alpha[k] >= kp.alpha[k - 1] - 1e-12);
  PhaseOptions missing;
  missing.method = PhaseMethod::kernel;
  CHECK_THROWS_AS(track_phase(raw, B.dyn, missing), ContractError);
}

TEST_CASE("reframe, zeta and damping monitors") {
  const auto& B = burgers_setup();
  const auto tp = shock_template_params(B.model.system, B.prof);
  CHECK(tp.a_minus[0] == doctest::Approx(1.0));
  CHECK(tp.a_plus[0] == doctest::Approx(-1.0));
  CHECK(tp.l.c_minus(0, 0) == doctest::Approx(-0.5));

  EvolutionOptions o;
  o.T = 10.0;
  const auto zero_raw = evolve(B.dyn, Vector::Zero(B.dyn.size()), o);
  const auto zero_tr = reframe(zero_raw, B.dyn, track_phase(zero_raw, B.dyn), tp);
  // the discrete profile is steady up to the solver tolerance
  CHECK(zeta_monitor(zero_tr, tp).final < 1e-9);
  CHECK(damping_monitor(zero_tr).admissible);

  const auto raw = evolve(B.dyn, B.bump(0.01, -3.0), o);
  const auto tr = reframe(raw, B.dyn, track_phase(raw, B.dyn), tp);
  CHECK(tr.shifted);
  CHECK(tr.template_ratio.size() == tr.t.size());
  CHECK(tr.linf.back() < tr.linf.front());
  const auto z = zeta_monitor(tr, tp);
  for (size_t k = 1; k < z.zeta.size(); ++k) CHECK(z.zeta[k] >= z.zeta[k - 1]);
  CHECK(std::isfinite(z.final));
  CHECK(z.final > 0.0);
  const auto d = damping_monitor(tr);
  CHECK(d.admissible);
  CHECK(d.theta1 > 0.0);
  CHECK(d.violation < 0.01);
  CHECK_THROWS_AS(zeta_monitor(raw, tp), ContractError);
}

TEST_CASE("exponent fits") {
  std::vector<double> t, y, c;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.5 * k);
    y.push_back(3.0 * std::pow(1 + t.back(), -0.5));
    c.push_back(2.0);
  }
  const auto f = fit_exponent(t, y, 5, 50);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(f.ci_low <= f.slope);
  CHECK(f.ci_high >= f.slope);
  CHECK(std::abs(fit_exponent(t, c, 5, 50).slope) < 1e-12);
  // same seed, same interval
  const auto g = fit_exponent(t, y, 5, 50);
  CHECK(g.ci_low == f.ci_low);
  y[20] = 0.0;
  CHECK_THROWS_AS(fit_exponent(t, y, 5, 50), DomainError);
  CHECK_THROWS_AS(fit_exponent(t, c, 60, 70), DomainError);
  CHECK(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}) == doctest::Approx(-1.0));
}

TEST_CASE("heat kernel sup norm decays like t^{-1/2}") {
  // sampled sup of the heat kernel from a unit Gaussian
  std::vector<double> t, y;
  for (int k = 1; k <= 200; ++k) {
    const double s = 0.5 * k;
    double m = 0.0;
    for (int i = -400; i <= 400; ++i) {
      const double x = 0.05 * i;
      m = std::max(m, std::exp(-x * x / (4 * (1 + s))) / std::sqrt(4 * M_PI * (1 + s)));
    }
    t.push_back(s);
    y.push_back(m);
  }
  CHECK(fit_exponent(t, y, 5, 100).slope == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("blow-up detection and decomposition identities") {
  const auto& P = pulse_setup();
  Norms nm(P.dyn.grid(), 1);
  Vector phi1 = P.spec.unstable.right.col(0).real();
  phi1 /= nm.h(phi1, 2);
  EvolutionOptions o;
  o.T = 20.0;
  const auto tr = evolve(P.dyn, 1e-5 * phi1, o);
  CHECK(tr.diverged);
  // growth by 1e3 at rate 1.25
  CHECK(tr.diverged_at == doctest::Approx(std::log(1e3) / 1.25).epsilon(0.1));

  const Vector v = 0.3 * phi1 + 0.2 * P.phis;
  const auto d = decompose(v, P.spec);
  CHECK((d.w + d.z - v).norm() < 1e-12);
  CHECK(P.spec.unstable.project(d.w).norm() < 1e-10);
  CHECK((d.w - 0.2 * P.phis).norm() < 1e-8);
}

TEST_CASE("conditional run on the pulse") {
  const auto& P = pulse_setup();
  ManifoldParams mp;
  mp.delta = 0.1;
  mp.dt = 0.05;
  const CenterStableManifold M(P.dyn, P.spec, mp);
  ConditionalOptions o;
  o.T = 15.0;
  o.record_every = 2;
  const auto a = conditional_run(M, 1e-2 * P.phis, o);
  CHECK(a.stayed);
  CHECK_FALSE(a.invariance_failure);
  CHECK(a.reprojections > 0);
  CHECK(a.z_over_w2_max < 1.0);
  o.reproject_every = 0;
  o.offset = 1e-4;
  const auto b = conditional_run(M, 1e-2 * P.phis, o);
  CHECK(b.escaped);
  const auto f = escape_rate(a, b, 2e-4, 1e-2);
  CHECK(f.rate == doctest::Approx(1.25).epsilon(0.04));

  const auto path = (std::filesystem::temp_directory_path() / "shocklab_cond.csv").string();
  write_conditional_csv(a, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,v_h2,w_h2,z_h2,z_over_w2,re_c1,im_c1");
  std::filesystem::remove(path);
}
