#include <cmath>
#include <random>

#include "doctest.h"
#include "shocklab/errors.hpp"
#include "shocklab/models.hpp"

using namespace shocklab;

namespace {
Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("eval on catalog models") {
  const auto b = burgers();
  CHECK(eval(b, v1(0.5)).f(0) == doctest::Approx(0.125));
  CHECK(eval(b, v1(-1.0)).df(0, 0) == doctest::Approx(-1.0));
  const auto c = cubic();
  const auto e = eval(c, v2(1.0, 0.0));
  CHECK(e.f(0) == doctest::Approx(1.0));
  CHECK(e.f(1) == doctest::Approx(0.0));
  // conservation h = f(u)_x
  const auto eh = eval(b, v1(0.3), v1(2.0));
  CHECK(eh.h(0) == doctest::Approx(0.6));
  CHECK(eh.h_ux(0, 0) == doctest::Approx(0.3));
  CHECK(eh.h_u(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
  const auto p = quadratic_pulse();
  CHECK_THROWS_AS(eval(p, v1(0.1)), DomainError);
  CHECK(eval(p, v1(0.5), v1(0.0)).h(0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(eval(b, v1(NAN)), DomainError);
}

TEST_CASE("derivatives agree with finite differences") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  for (const auto& m : catalog()) {
    const auto& s = m.system;
    for (int trial = 0; trial < 5; ++trial) {
      Vector u(s.n), ux(s.n);
      for (int k = 0; k < s.n; ++k) {
        u(k) = ud(rng);
        ux(k) = ud(rng);
      }
      const double e1 = derivative_mismatch(s, u, ux, 1e-3);
      const double e2 = derivative_mismatch(s, u, ux, 5e-4);
      CHECK(e1 < 1e-4);
      // second-order consistency: halving the step quarters the mismatch (or both are round-off)
      CHECK((e2 < 1e-9 || e1 / e2 > 3.0));
    }
  }
}

TEST_CASE("classification of catalog end states") {
  const auto b = catalog_model("burgers");
  const auto eb = classify(b.system, b.u_minus, b.u_plus);
  CHECK(eb.classification == ShockType::lax);
  CHECK(eb.ell == 1);
  CHECK(eb.a_minus[0] == doctest::Approx(1.0));
  CHECK(eb.a_plus[0] == doctest::Approx(-1.0));

  const auto c = catalog_model("cubic");
  const auto ec = classify(c.system, c.u_minus, c.u_plus);
  CHECK(ec.classification == ShockType::undercompressive);
  CHECK(ec.a_minus == std::vector<double>{1.0, 3.0});

  const auto same = classify(b.system, v1(0.5), v1(0.5));
  CHECK(same.classification == ShockType::none);

  // x -> -x with end states swapped
  for (const auto& m : {b, c}) {
    const auto e = classify(m.system, m.u_minus, m.u_plus);
    const auto r = classify(reflect(m.system), m.u_plus, m.u_minus);
    CHECK(r.classification == e.classification);
    CHECK(r.ell == e.ell);
  }
}

TEST_CASE("hypotheses on catalog models") {
  const auto xis = xi_grid(10.0, 201);
  const auto b = catalog_model("burgers");
  const auto eb = classify(b.system, b.u_minus, b.u_plus);
  SampleBox box1{v1(-1.5), v1(1.5), 9};
  const auto rb = verify_hypotheses(b.system, eb, box1, xis);
  CHECK(rb.all_passed());
  CHECK(rb.get("H3").witness == doctest::Approx(1.0));
  CHECK(rb.get("H5").detail == "lax");

  const auto p = catalog_model("quadratic_pulse");
  const auto ep = classify(p.system, p.u_minus, p.u_plus);
  const auto rp = verify_hypotheses(p.system, ep, box1, xis);
  CHECK(rp.get("H1").passed);
  CHECK(rp.get("H3").passed);
  CHECK(rp.get("RH").passed);
  CHECK_FALSE(rp.get("H5").passed);

  const auto same = classify(b.system, v1(1.0), v1(1.0));
  const auto rs = verify_hypotheses(b.system, same, box1, xis);
  CHECK(rs.get("RH").passed);
  CHECK_FALSE(rs.get("H5").passed);

  const auto c = catalog_model("cubic");
  const auto ec = classify(c.system, c.u_minus, c.u_plus);
  SampleBox box2{v2(-1.5, -1.5), v2(1.5, 1.5), 7};
  const auto rc = verify_hypotheses(c.system, ec, box2, xis);
  CHECK(rc.get("H1").passed);
  CHECK(rc.get("H2").passed);
  CHECK(rc.get("H3").passed);
  CHECK(rc.get("H5").detail == "undercompressive");
  CHECK_FALSE(rc.get("RH").passed);

  // degenerate eigenvalue at the origin fails (H2) with the gap as witness
  const auto deg = classify(b.system, v1(0.0), v1(-1.0));
  const auto rd = verify_hypotheses(b.system, deg, box1, xis);
  CHECK_FALSE(rd.get("H2").passed);
  CHECK(rd.get("H2").witness == doctest::Approx(0.0));
}

TEST_CASE("H3 margin is never violated on catalog models") {
  for (const auto& m : catalog()) {
    const auto e = classify(m.system, m.u_minus, m.u_plus);
    SampleBox box{m.u_minus, m.u_plus, 3};
    box.lo = m.u_minus.cwiseMin(m.u_plus);
    box.hi = m.u_minus.cwiseMax(m.u_plus);
    const auto r = verify_hypotheses(m.system, e, box, xi_grid(10.0, 401));
    CHECK(r.get("H3").passed);
    CHECK(r.get("H3").witness > 0.0);
  }
}

TEST_CASE("polynomial user models and finite-difference fallback") {
  const auto s = polynomial_conservation("poly", {0.0, 0.0, 0.5}, {1.0, 0.2});
  CHECK(eval(s, v1(2.0)).f(0) == doctest::Approx(2.0));
  CHECK(eval(s, v1(2.0)).b(0, 0) == doctest::Approx(1.4));
  CHECK(s.db(v1(2.0))[0](0, 0) == doctest::Approx(0.2));
  const auto g = polynomial_general("pg", {0.0, 1.0, -1.0}, {0.0}, {1.0});
  CHECK(g.h(v1(0.5), v1(0.0))(0) == doctest::Approx(0.25));

  ParabolicSystem bare;
  bare.name = "bare";
  bare.n = 1;
  bare.form = Form::conservation;
  bare.f = [](const Vector& u) { return Vector::Constant(1, std::sin(u(0))); };
  bare.b = [](const Vector& u) { return Matrix::Constant(1, 1, 1.0 + u(0) * u(0)); };
  const auto filled = with_fd_derivatives(bare);
  CHECK(filled.df(v1(0.3))(0, 0) == doctest::Approx(std::cos(0.3)).epsilon(1e-8));
  CHECK(filled.db(v1(0.3))[0](0, 0) == doctest::Approx(0.6).epsilon(1e-8));
}
