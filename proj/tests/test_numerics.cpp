#include <cmath>
#include <random>

#include "doctest.h"
#include "shocklab/errors.hpp"
#include "shocklab/numerics.hpp"

using namespace shocklab;

namespace {
Vector sample(const Grid& g, double (*fn)(double)) {
  Vector v(g.m);
  for (int i = 0; i < g.m; ++i) v(i) = fn(g.x(i));
  return v;
}
}  // namespace

TEST_CASE("grid construction") {
  const Grid g = Grid::make(20.0, 1601);
  CHECK(g.h == doctest::Approx(0.025));
  CHECK(g.x(800) == 0.0);
  CHECK(g.x(0) == -20.0);
  CHECK(g.x(1600) == 20.0);
  CHECK_THROWS_AS(Grid::make(1.0, 4), DomainError);
}

TEST_CASE("fornberg weights reproduce classical stencils") {
  const auto w = fd_weights(0.0, {-1, 0, 1}, 2);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(-2.0));
  CHECK(w[2] == doctest::Approx(1.0));
  const auto v = fd_weights(0.0, {-2, -1, 0, 1, 2}, 1);
  CHECK(v[0] == doctest::Approx(1.0 / 12));
  CHECK(v[1] == doctest::Approx(-8.0 / 12));
}

TEST_CASE("diff_matrix exactness on polynomials") {
  const Grid g = Grid::make(3.0, 31);
  for (int acc : {2, 4}) {
    for (int order : {1, 2}) {
      const SparseMatrix D = diff_matrix(g, order, acc);
      // degree up to order+acc-1 is exact everywhere, including closures
      const int deg = order + acc - 1;
      Vector p(g.m), dp(g.m);
      for (int i = 0; i < g.m; ++i) {
        const double x = g.x(i);
        p(i) = std::pow(x, deg);
        dp(i) = order == 1 ? deg * std::pow(x, deg - 1) : deg * (deg - 1) * std::pow(x, deg - 2);
      }
      CHECK((D * p - dp).lpNorm<Eigen::Infinity>() < 1e-8);
      CHECK((D * Vector::Ones(g.m)).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
  const SparseMatrix D1 = diff_matrix(g, 1, 2);
  CHECK(((D1 * g.x).array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(diff_matrix(Grid::make(1.0, 5), 2, 4), DomainError);
  CHECK_THROWS_AS(diff_matrix(g, 3, 2), DomainError);
}

TEST_CASE("second derivative of sin") {
  const Grid g = Grid::make(M_PI * 8, 801);
  const Vector s = sample(g, [](double x) { return std::sin(x); });
  const Vector err4 = diff_matrix(g, 2, 4) * s + s;
  CHECK(err4.lpNorm<Eigen::Infinity>() < 1e-4);
  // second order: interior error is h^2/12 |sin|
  const Vector err2 = diff_matrix(g, 2, 2) * s + s;
  const double interior = err2.segment(1, g.m - 2).lpNorm<Eigen::Infinity>();
  CHECK(interior == doctest::Approx(g.h * g.h / 12).epsilon(0.01));
  const Grid f = Grid::make(M_PI * 8, 1601);
  const Vector sf = sample(f, [](double x) { return std::sin(x); });
  const Vector err2f = diff_matrix(f, 2, 2) * sf + sf;
  CHECK(interior / err2f.segment(1, f.m - 2).lpNorm<Eigen::Infinity>() == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("quadrature rules") {
  const Grid g = Grid::make(20.0, 1601);
  for (auto rule : {QuadratureRule::trapezoid, QuadratureRule::simpson}) {
    const Vector w = quadrature_weights(g, rule);
    CHECK(quadrature(Vector::Ones(g.m), w) == doctest::Approx(40.0).epsilon(1e-13));
    const Vector s = sample(g, [](double x) {
      const double c = 1.0 / std::cosh(x / 2);
      return 0.5 * c * c;
    });
    CHECK(std::abs(quadrature(s, w) - 2.0) < 1e-7);
  }
  const Grid ge = Grid::make(1.0, 10);
  const Vector x2 = ge.x.array().square();
  CHECK(quadrature(x2, quadrature_weights(ge, QuadratureRule::simpson)) == doctest::Approx(2.0 / 3));
  CHECK_THROWS_AS(quadrature(Vector(), Vector()), DomainError);
}

TEST_CASE("norms: H2 identity, triangle inequality, homogeneity") {
  const Grid g = Grid::make(10.0, 201);
  Norms N(g, 1);
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  Vector a(g.m), b(g.m);
  for (int i = 0; i < g.m; ++i) {
    const double env = std::exp(-g.x(i) * g.x(i) / 8);
    a(i) = env * nd(rng);
    b(i) = env * nd(rng);
  }
  const SparseMatrix D1 = diff_matrix(g, 1, 4), D2 = diff_matrix(g, 2, 4);
  const double l0 = N.l2(a), l1 = N.l2(D1 * a), l2 = N.l2(D2 * a);
  CHECK(N.h(a, 2) == doctest::Approx(std::sqrt(l0 * l0 + l1 * l1 + l2 * l2)));
  for (int s = 0; s <= 4; ++s) {
    CHECK(N.h(a + b, s) <= N.h(a, s) + N.h(b, s) + 1e-12);
    CHECK(N.h(-3.0 * a, s) == doctest::Approx(3.0 * N.h(a, s)));
  }
  CHECK(N.l1(a + b) <= N.l1(a) + N.l1(b) + 1e-12);
  CHECK(N.linf(a + b) <= N.linf(a) + N.linf(b) + 1e-12);
  CHECK(N.weighted_h4(2.0 * a) == doctest::Approx(2.0 * N.weighted_h4(a)));
  CHECK(N.exp_sup(a + b, 0.5) <= N.exp_sup(a, 0.5) + N.exp_sup(b, 0.5) + 1e-12);
  CHECK_THROWS_AS(N.h(a, 5), DomainError);

  Norms N2(g, 2);
  Vector v(2 * g.m);
  for (int i = 0; i < g.m; ++i) {
    v(2 * i) = 3.0;
    v(2 * i + 1) = 4.0;
  }
  CHECK(N2.linf(v) == doctest::Approx(5.0));
  CHECK(N2.l1(v) == doctest::Approx(100.0));
}

TEST_CASE("IMEX heat equation amplification") {
  const Grid g = Grid::make(M_PI, 201);
  Matrix Ad = Matrix(diff_matrix(g, 2, 2));
  // Dirichlet rows
  Ad.row(0).setZero();
  Ad.row(g.m - 1).setZero();
  const SparseMatrix A = Ad.sparseView();
  Vector v(g.m);
  for (int i = 0; i < g.m; ++i) v(i) = std::sin(g.x(i));
  const double dt = 0.01;
  ImexStepper st(A, nullptr, dt, ImexOrder::first);
  const Vector w = st.step(0.0, v);
  const int mid = g.nearest(M_PI / 2);
  const double k2 = (2.0 - 2.0 * std::cos(g.h)) / (g.h * g.h);
  CHECK(w(mid) / v(mid) == doctest::Approx(1.0 / (1.0 + dt * k2)).epsilon(1e-10));

  ImexStepper zero(A, [](double, const Vector& x) { return Vector::Zero(x.size()); }, dt, ImexOrder::second);
  Vector z = Vector::Zero(g.m);
  for (int k = 0; k < 50; ++k) z = zero.step(k * dt, z);
  CHECK(z.norm() == 0.0);
  CHECK_THROWS_AS(ImexStepper(A, nullptr, 0.0, ImexOrder::first), DomainError);
}

TEST_CASE("IMEX second order converges at rate two") {
  // u' = -u + sin(t) + u^2/10 (scalar; linear part implicit)
  SparseMatrix A(1, 1);
  A.insert(0, 0) = -1.0;
  auto N = [](double t, const Vector& u) {
    Vector r(1);
    r(0) = std::sin(t) + 0.1 * u(0) * u(0);
    return r;
  };
  auto run = [&](double dt, ImexOrder o) {
    ImexStepper st(A, N, dt, o);
    Vector u = Vector::Constant(1, 1.0);
    const int steps = static_cast<int>(std::lround(2.0 / dt));
    for (int k = 0; k < steps; ++k) u = st.step(k * dt, u);
    return u(0);
  };
  const double ref = run(1e-4, ImexOrder::second);
  const double e1 = std::abs(run(0.02, ImexOrder::second) - ref);
  const double e2 = std::abs(run(0.01, ImexOrder::second) - ref);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  const double f1 = std::abs(run(0.02, ImexOrder::first) - ref);
  const double f2 = std::abs(run(0.01, ImexOrder::first) - ref);
  CHECK(f1 / f2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("expm against symmetric eigendecomposition") {
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  Matrix B(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) B(i, j) = nd(rng);
  const Matrix S = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const Matrix ref = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                     es.eigenvectors().transpose();
  CHECK((expm(S) - ref).norm() < 1e-10 * ref.norm());
}

TEST_CASE("expm_action matches dense exponential") {
  const Grid g = Grid::make(5.0, 41);
  SparseMatrix A = diff_matrix(g, 2, 2) - 0.5 * diff_matrix(g, 1, 2);
  Vector v(g.m);
  for (int i = 0; i < g.m; ++i) v(i) = std::exp(-g.x(i) * g.x(i));
  const Matrix dense = Matrix(A);
  for (double t : {0.0, 0.1, 1.0}) {
    const Vector ref = expm(Matrix(t * dense)) * v;
    CHECK((expm_action(A, t, v) - ref).norm() < 1e-9 * ref.norm());
  }
  CHECK(semigroup_apply(A, 0.0, v) == v);
  CHECK_THROWS_AS(semigroup_apply(A, -1.0, v), ContractError);
}

TEST_CASE("invariant subspace projection and group law") {
  // 2x2 upper triangular operator; unstable eigenvalue 2
  Matrix Ad(3, 3);
  Ad << 2.0, 1.0, 0.0, 0.0, -1.0, 0.5, 0.0, 0.0, -3.0;
  SparseMatrix A = Ad.sparseView();
  InvariantSubspace sub;
  sub.right = CMatrix::Zero(3, 1);
  sub.right(0, 0) = 1.0;
  Eigen::EigenSolver<Matrix> es(Ad.transpose());
  int k = 0;
  for (int i = 0; i < 3; ++i)
    if (std::abs(es.eigenvalues()(i) - 2.0) < 1e-12) k = i;
  CVector l = es.eigenvectors().col(k);
  l /= std::conj((l.adjoint() * sub.right)(0, 0));
  sub.left = l;
  sub.generator = CMatrix::Constant(1, 1, 2.0);
  const Vector f = Vector::Random(3);
  const Vector p = sub.project(f);
  CHECK((sub.project(p) - p).norm() < 1e-14);
  CHECK((Ad * p - 2.0 * p).norm() < 1e-13);
  const Vector st = semigroup_apply(A, 0.7, f, sub, SemigroupPart::unstable);
  const Vector two = semigroup_apply(A, 0.3, semigroup_apply(A, 0.4, f, sub, SemigroupPart::unstable), sub,
                                     SemigroupPart::unstable);
  CHECK((st - two).norm() < 1e-13 * st.norm());
  CHECK(st.norm() == doctest::Approx(std::exp(1.4) * p.norm()));
  // backward on the unstable part is allowed
  CHECK(semigroup_apply(A, -1.0, f, sub, SemigroupPart::unstable).norm() == doctest::Approx(std::exp(-2.0) * p.norm()));
  CHECK_THROWS_AS(semigroup_apply(A, -1.0, f, sub, SemigroupPart::center_stable), ContractError);
  const Vector cs = semigroup_apply(A, 1.0, f, sub, SemigroupPart::center_stable);
  CHECK(sub.project(cs).norm() < 1e-12);
  CHECK((cs - expm(Matrix(Ad)) * (f - p)).norm() < 1e-10);
}
