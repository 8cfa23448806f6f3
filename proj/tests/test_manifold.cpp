#include <cmath>

#include "doctest.h"
#include "shocklab/errors.hpp"
#include "shocklab/manifold.hpp"

using namespace shocklab;

namespace {
struct Pulse {
  PerturbationDynamics dyn;
  SpectralDecomposition spec;
  Vector phis;  // stable eigenfunction, unit H2 norm
  explicit Pulse(int m = 201)
      : dyn(quadratic_pulse(), solve_catalog_profile(catalog_model("quadratic_pulse"), Grid::make(20.0, m))),
        spec(unstable_spectrum(dyn.op(), 0.1)) {
    Norms nm(dyn.grid(), 1);
    const auto e = eigenpair_near(dyn.L(), -0.75);
    phis = e.vector / nm.h(e.vector, 2);
    phis -= spec.unstable.project(phis);
  }
  CenterStableManifold manifold(double delta, double dt) const {
    ManifoldParams p;
    p.delta = delta;
    p.dt = dt;
    return CenterStableManifold(dyn, spec, p);
  }
};

const Pulse& pulse() {
  static const Pulse p;
  return p;
}
}  // namespace

TEST_CASE("cutoff function") {
  CHECK(cutoff_rho(0.0) == 1.0);
  CHECK(cutoff_rho(1.0) == 1.0);
  CHECK(cutoff_rho(2.0) == 0.0);
  CHECK(cutoff_rho(1.5) == doctest::Approx(0.5));
  double prev = 1.0;
  for (double s = 1.0; s <= 2.0; s += 0.01) {
    CHECK(cutoff_rho(s) <= prev);
    prev = cutoff_rho(s);
  }
}

TEST_CASE("cutoff nonlinearity") {
  const auto& P = pulse();
  Norms nm(P.dyn.grid(), 1);
  const Vector v = P.phis;  // unit H2
  CHECK(cutoff_nonlinearity(P.dyn, nm, 0.5, v).norm() == 0.0);
  CHECK(cutoff_nonlinearity(P.dyn, nm, 0.4, v).norm() == 0.0);
  CHECK(cutoff_nonlinearity(P.dyn, nm, 1.0, Vector::Zero(v.size())).norm() == 0.0);
  const double q1 = nm.l2(cutoff_nonlinearity(P.dyn, nm, 1.0, 1e-2 * v)) / 1e-4;
  const double q2 = nm.l2(cutoff_nonlinearity(P.dyn, nm, 1.0, 1e-3 * v)) / 1e-6;
  CHECK(q1 == doctest::Approx(q2).epsilon(1e-3));
  CHECK(q1 > 0.0);
  CHECK_THROWS_AS(cutoff_nonlinearity(P.dyn, nm, 0.0, v), DomainError);
}

TEST_CASE("parameter resolution") {
  const auto& P = pulse();
  ManifoldParams p;
  const auto r = p.resolved(P.spec);
  CHECK(3 * r.omega < r.eta);
  CHECK(r.eta < r.beta);
  CHECK(std::exp(-(r.beta - r.eta) * r.T_horizon) <= r.tail_tol);
  ManifoldParams shorter = p;
  shorter.T_horizon = 5.0;
  CHECK_THROWS_AS(shorter.resolved(P.spec), DomainError);
  ManifoldParams bad = p;
  bad.eta = 0.1;  // 3 omega > eta
  CHECK_THROWS_AS(bad.resolved(P.spec), DomainError);
}

TEST_CASE("tail integral of constant single-mode forcing") {
  const auto& P = pulse();
  const auto M = P.manifold(0.5, 0.1);
  const double lam = P.spec.eigenvalues[0].real();
  const int K = M.steps();
  const double T = K * M.params().dt;
  std::vector<CVector> g(K + 1, CVector::Constant(1, 0.7));
  const auto c = M.tail_of_forcing(g);
  double err = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double t = k * M.params().dt;
    err = std::max(err, std::abs(c[k](0) - (-0.7 * (1 - std::exp(-lam * (T - t))) / lam)));
  }
  CHECK(err < 1e-12);
  // zero forcing
  const auto z = M.tail_of_forcing(std::vector<CVector>(K + 1, CVector::Zero(1)));
  CHECK(z[0].norm() == 0.0);
}

TEST_CASE("w equation") {
  const auto& P = pulse();
  const auto M = P.manifold(1e-8, 0.05);
  const int K = M.steps();
  const std::vector<CVector> z0(K + 1, CVector::Zero(1));
  const auto w0 = M.solve_w(z0, Vector::Zero(P.dyn.size()));
  CHECK(w0.back().norm() == 0.0);
  // tiny delta switches the nonlinearity off: w(t) = e^{tL} Pi_cs w0
  const Vector a = 0.3 * P.phis;
  const auto w = M.solve_w(z0, a);
  const Vector ref = semigroup_apply(P.dyn.L(), 1.0, a, P.spec.unstable, SemigroupPart::center_stable);
  CHECK((w[20] - ref).norm() < 1e-3 * ref.norm());
}

TEST_CASE("fixed point: origin, tangency, contraction, seeds") {
  const auto& P = pulse();
  const auto M = P.manifold(0.5, 0.1);
  const auto zero = M.fixed_point(Vector::Zero(P.dyn.size()));
  CHECK(zero.phi.norm() == 0.0);
  CHECK(zero.iterations <= 2);

  const auto fit = tangency_fit(M, P.phis, {0.1, 0.03, 0.01});
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.05));

  // delta-scaled data: contraction factor proportional to delta
  const auto A = P.manifold(0.2, 0.1).fixed_point(0.2 * P.phis);
  const auto B = P.manifold(0.1, 0.1).fixed_point(0.1 * P.phis);
  CHECK(A.converged);
  CHECK(A.contraction < 1.0);
  CHECK(B.contraction / A.contraction == doctest::Approx(0.5).epsilon(0.4));

  // the unstable-part path is in Sigma_u
  const Vector zf = M.z_field(A.paths.z[3]);
  CHECK(apply_projector(P.spec, zf, Projector::cs).norm() < 1e-10 * zf.norm());

  // seed independence
  const Vector w0 = 0.05 * P.phis;
  const auto r0 = M.fixed_point(w0);
  std::vector<CVector> seed(M.steps() + 1, CVector::Constant(1, 1e-3));
  const auto r1 = M.fixed_point(w0, seed);
  CHECK(M.h2(r0.phi - r1.phi) < 1e-8 * M.h2(r0.phi));
  CHECK(r0.w_norm < 2.0 * M.h2(w0));

  CHECK_THROWS_AS(M.fixed_point(w0 + 1e-3 * P.spec.right().col(0).real()), ContractError);
}

TEST_CASE("Lipschitz certificate and reflection symmetry") {
  const auto& P = pulse();
  const auto M = P.manifold(0.5, 0.1);
  // reflect x -> -x; the grid is symmetric
  const Vector odd = P.dyn.profile().derivative(1) / M.h2(P.dyn.profile().derivative(1));
  Vector a = 0.05 * (P.phis + 0.5 * odd);
  a -= P.spec.unstable.project(a);
  const Vector ra = a.reverse();
  CHECK(std::abs(M.h2(M.Phi(a)) - M.h2(M.Phi(ra))) < 1e-8 * M.h2(M.Phi(a)));
  const double big = lipschitz_certificate(M, {{a, Vector::Zero(a.size())}, {a, a}});
  const double small = lipschitz_certificate(M, {{0.5 * a, Vector::Zero(a.size())}});
  CHECK(big > 0.0);
  CHECK(small < big);
  CHECK(small / big == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("local invariance defect shrinks under refinement") {
  const Pulse fine(401);
  const auto& coarse = pulse();
  const auto d1 = invariance_defect(coarse.manifold(0.5, 0.1), 0.1 * coarse.phis, 1.0);
  const auto d2 = invariance_defect(fine.manifold(0.5, 0.05), 0.1 * fine.phis, 1.0);
  CHECK(d2.defect < d1.defect);
  CHECK(d1.defect < 0.1 * d1.z_norm);
}

TEST_CASE("reduced equations") {
  const auto& P = pulse();
  const int N = P.dyn.size();
  const auto r0 = reduced_rhs(P.dyn, Vector::Zero(N));
  CHECK(r0.vdot.norm() == 0.0);
  CHECK(r0.alphadot == 0.0);
  const Vector phi = P.dyn.profile().derivative(1);
  const Vector W = quadrature_weights(P.dyn.grid());
  const Vector v = 1e-2 * P.phis + 3e-3 * phi;
  const auto r = reduced_rhs(P.dyn, v);
  CHECK(std::abs(phi.dot(W.cwiseProduct(r.vdot))) < 1e-12 * r.vdot.norm() * phi.norm());
  const auto rz = reduced_rhs(P.dyn, 1e-3 * phi);
  CHECK(std::abs(rz.alphadot) < 1e-4);
  CHECK_THROWS_AS(reduced_rhs(P.dyn, -0.6 * P.dyn.profile().values()), FrameBreakdownError);
}
