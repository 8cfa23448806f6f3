#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "shocklab/errors.hpp"
#include "shocklab/templates.hpp"

using namespace shocklab;

namespace {

TemplateParams lax_two() {
  TemplateParams p;
  p.a_minus = {-1.0, 2.0};
  p.a_plus = {-2.0, 1.0};
  p.beta_minus = {1.0, 0.5};
  p.beta_plus = {0.5, 1.0};
  p.l = LTable::ones(1, 2);
  return p;
}

}  // namespace

TEST_CASE("templates: support and shape") {
  const auto q = lax_two();
  for (double t : {0.5, 3.0, 40.0})
    for (double x : {-0.9 * t, 0.0, 0.9 * t}) {
      CHECK(chi(x, t, q) == 1.0);
      CHECK(psi2(x, t, q) == 0.0);
      CHECK(psi1(x, t, q) > 0.0);
    }
  // a compressive shock has no outgoing modes: only psi2 survives
  const auto p = TemplateParams::burgers();
  CHECK(chi(0.0, 1.0, p) == 0.0);
  CHECK(theta_template(1.0, 5.0, p) == 0.0);
  CHECK(psi1(0.0, 5.0, p) == 0.0);
  CHECK(psi2(10.0, 4.0, p) == doctest::Approx(std::pow(1 + 6.0 + 2.0, -1.5) + std::pow(1 + 14.0 + 2.0, -1.5)));

  for (double t : {1.0, 9.0, 100.0}) CHECK(theta_template(-t, t, q) >= std::pow(1 + t, -0.5));
  const double t = 4.0, x = 1.0;
  const double expect = std::pow(1 + 1.0 + t, -0.5) * std::pow(1 + std::abs(x + t), -0.5) +
                        std::pow(1 + 1.0 + t, -0.5) * std::pow(1 + std::abs(x - t), -0.5);
  CHECK(psi1(x, t, q) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(theta_template(0.0, 0.0, q), DomainError);
  CHECK(theta_template(0.5, 0.0, q) == 0.0);
}

TEST_CASE("templates: excited kernel limits and derivatives") {
  for (const auto& p : {TemplateParams::burgers(), lax_two()}) {
    CHECK(std::abs(excited_kernel(0, -400.0, 2.0, p).e) < 1e-12);
    for (double y : {-3.0, -0.2, 0.7, 4.0}) {
      const auto big = excited_kernel(0, y, 1e6, p);
      const auto lim = excited_kernel(0, y, std::numeric_limits<double>::infinity(), p);
      CHECK(std::abs(big.e - lim.e) < 1e-6);
    }
    const double h = 1e-3;
    for (double y : {-2.5, -0.4, 0.6, 3.0})
      for (double t : {0.3, 2.0, 7.0}) {
        auto E = [&](double yy, double tt) { return excited_kernel(0, yy, tt, p); };
        const auto k = E(y, t);
        const double et = (-E(y, t + 2 * h).e + 8 * E(y, t + h).e - 8 * E(y, t - h).e + E(y, t - 2 * h).e) / (12 * h);
        const double ey = (-E(y + 2 * h, t).e + 8 * E(y + h, t).e - 8 * E(y - h, t).e + E(y - 2 * h, t).e) / (12 * h);
        const double eyt =
            (-E(y, t + 2 * h).e_y + 8 * E(y, t + h).e_y - 8 * E(y, t - h).e_y + E(y, t - 2 * h).e_y) / (12 * h);
        CHECK(std::abs(et - k.e_t) < 1e-9);
        CHECK(std::abs(ey - k.e_y) < 1e-9);
        CHECK(std::abs(eyt - k.e_yt) < 1e-9);
      }
  }
  auto g = lax_two();
  g.gamma = 1;
  g.l.d_minus.setConstant(0.5);
  g.l.d_plus.setConstant(-0.25);
  const double h = 1e-3;
  for (double y : {-1.5, 2.0}) {
    auto E = [&](double yy) { return excited_kernel(0, yy, 3.0, g); };
    const double ey = (-E(y + 2 * h).e + 8 * E(y + h).e - 8 * E(y - h).e + E(y - 2 * h).e) / (12 * h);
    CHECK(std::abs(ey - E(y).e_y) < 1e-9);
  }
}

TEST_CASE("templates: kernel spot value from the closed form") {
  const auto p = TemplateParams::burgers();
  const double s = 2.0, r = std::sqrt(4 * s);
  const double expect = 0.5 * (std::erf(2.0 / r) - std::erf(-1.0 / r));
  CHECK(excited_kernel(0, 0.0, 1.0, p).e == doctest::Approx(expect).epsilon(1e-14));
  // mirror: for Burgers the left and right halves coincide
  CHECK(excited_kernel(0, 1.3, 2.0, p).e == doctest::Approx(excited_kernel(0, -1.3, 2.0, p).e).epsilon(1e-14));
  CHECK(excited_kernel(0, 1.3, 2.0, p).e_y == doctest::Approx(-excited_kernel(0, -1.3, 2.0, p).e_y).epsilon(1e-14));
}

TEST_CASE("templates: source term and majorants") {
  const auto p = lax_two();
  for (double s : {1.0, 4.0, 30.0}) {
    const double pref = std::sqrt(1 + s) / std::sqrt(s);
    CHECK(pref >= 1.0);
    CHECK(pref <= std::sqrt(2.0) + 1e-15);
    for (double y : {-10.0, 0.0, 3.0}) CHECK(psi_source(y, s, p) >= 0.0);
  }
  CHECK_THROWS_AS(psi_source(0.0, 0.0, p), DomainError);
  const auto m = p.mirrored();
  CHECK(m.mirrored().a_minus == p.a_minus);
  for (double x : {-3.0, 0.5})
    CHECK(gtilde_majorant(x, 2.0, 1.5, 0, 0, p) ==
          doctest::Approx(gtilde_majorant(-x, 2.0, -1.5, 0, 0, m)).epsilon(1e-14));
  CHECK_THROWS_AS(gtilde_majorant(0.0, 0.0, 0.0, 0, 0, p), DomainError);
}

TEST_CASE("templates: convolution checks") {
  const auto p = TemplateParams::burgers();
  const auto z = convolution_check(ConvolutionKind::nonlinear_ey_inf, p, {{0.0, 2.0}, {5.0, 10.0}});
  CHECK(z.rhs_zero_lhs_zero);
  CHECK(z.stable);
  for (auto k : {ConvolutionKind::linear_g, ConvolutionKind::linear_e, ConvolutionKind::linear_et,
                 ConvolutionKind::commutator}) {
    const auto r = convolution_check(k, p, standard_samples(k));
    INFO(to_string(k), " C=", r.constant, " drift=", r.drift);
    CHECK(r.stable);
    CHECK(std::isfinite(r.constant));
  }
  auto g = lax_two();
  g.gamma = 1;
  g.l.d_minus.setConstant(0.5);
  for (auto k : {ConvolutionKind::nonlinear_gx, ConvolutionKind::nonlinear_ey_diff, ConvolutionKind::nonlinear_ey_inf}) {
    const auto r = convolution_check(k, g, {{0.0, 2.0}});
    INFO(to_string(k), " C=", r.constant, " drift=", r.drift);
    CHECK(r.stable);
    CHECK(r.constant > 0.0);
  }
  const auto rate = linear_et_rate(p, 1.0, 100.0, 12, 1e-9);
  CHECK(rate.slope == doctest::Approx(-1.5).epsilon(0.1));
}

TEST_CASE("templates: kernel bounds on the lattice") {
  const auto r = kernel_bounds(TemplateParams::burgers(), 41, 25, 1.0);
  CHECK(r.size() == 6);
  for (const auto& b : r) {
    INFO(b.name, " C=", b.constant, " fine=", b.constant_fine, " a=", b.a_fit);
    CHECK(std::isfinite(b.constant));
    CHECK(b.drift < 0.05);
  }
  const auto narrow = kernel_bounds(TemplateParams::burgers(), 41, 25, 0.1);
  CHECK(std::isinf(narrow[2].constant));
}

TEST_CASE("templates: csv export") {
  const auto path = std::filesystem::temp_directory_path() / "shocklab_templates.csv";
  write_template_csv(TemplateParams::burgers(), {-5, 0, 5}, {1, 2}, path.string());
  CHECK(std::filesystem::file_size(path) > 0);
}
