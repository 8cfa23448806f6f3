#include "shocklab/profile.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "shocklab/errors.hpp"

namespace shocklab {

PhaseCondition PhaseCondition::for_form(Form form) {
  PhaseCondition p;
  p.kind = form == Form::conservation ? Kind::value : Kind::derivative;
  return p;
}

namespace {

// Right side of the integrated profile equation u' = F(u).
struct ConservationOde {
  const ParabolicSystem& s;
  Vector f_minus;

  Vector F(const Vector& u) const { return s.b(u).partialPivLu().solve(s.f(u) - f_minus); }

  Matrix J(const Vector& u) const {
    const Matrix B = s.b(u);
    const auto lu = B.partialPivLu();
    const Vector Fu = lu.solve(s.f(u) - f_minus);
    Matrix rhs = s.df(u);
    const auto dbs = s.db(u);
    for (int k = 0; k < s.n; ++k) rhs.col(k) -= dbs[k] * Fu;
    return lu.solve(rhs);
  }

  Vector G(const Vector& u) const { return J(u) * F(u); }

  Matrix dG(const Vector& u) const {
    Matrix out(s.n, s.n);
    for (int k = 0; k < s.n; ++k) {
      const double e = 1e-6 * std::max(1.0, std::abs(u(k)));
      Vector up = u, um = u;
      up(k) += e;
      um(k) -= e;
      out.col(k) = (G(up) - G(um)) / (2.0 * e);
    }
    return out;
  }
};

// Real basis (as rows) for the left invariant subspace of J belonging to
// eigenvalues selected by `pick`.
Matrix left_rows(const Matrix& J, const std::function<bool(cplx)>& pick) {
  Eigen::EigenSolver<Matrix> es(J.transpose());
  std::vector<CVector> sel;
  for (int k = 0; k < J.rows(); ++k)
    if (pick(es.eigenvalues()(k))) sel.push_back(es.eigenvectors().col(k));
  const int count = static_cast<int>(sel.size());
  if (count == 0) return Matrix(0, J.cols());
  Matrix span(J.rows(), 2 * count);
  for (int k = 0; k < count; ++k) {
    span.col(2 * k) = sel[k].real();
    span.col(2 * k + 1) = sel[k].imag();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(span);
  const Matrix Q = qr.householderQ() * Matrix::Identity(J.rows(), count);
  return Q.transpose();
}

double phase_value(const PhaseCondition& ph, const EndStates& e) {
  if (!std::isnan(ph.value)) return ph.value;
  return 0.5 * (e.u_minus(ph.component) + e.u_plus(ph.component));
}

Vector default_guess_values(const Grid& g, int n, const EndStates& e, const std::function<Vector(double)>& guess) {
  Vector U(g.m * n);
  for (int i = 0; i < g.m; ++i) {
    if (guess) {
      U.segment(i * n, n) = guess(g.x(i));
    } else {
      const double t = 0.5 * (1.0 + std::tanh(g.x(i) / 2.0));
      U.segment(i * n, n) = (1.0 - t) * e.u_minus + t * e.u_plus;
    }
  }
  return U;
}

struct NewtonResult {
  Vector x;
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
};

// Damped Newton (Gauss-Newton when overdetermined) on R(x) = 0.
NewtonResult newton(const std::function<Vector(const Vector&)>& R,
                    const std::function<SparseMatrix(const Vector&)>& Jac, Vector x, double tol, int max_iter,
                    double scale) {
  NewtonResult out;
  Vector r = R(x);
  double rn = scale * r.norm();
  out.history.push_back(rn);
  for (int it = 0; it < max_iter; ++it) {
    if (!std::isfinite(rn)) break;
    if (rn <= tol) {
      out.converged = true;
      break;
    }
    SparseMatrix J = Jac(x);
    J.makeCompressed();
    Vector dx;
    if (J.rows() == J.cols()) {
      Eigen::SparseLU<SparseMatrix> lu;
      lu.compute(J);
      if (lu.info() != Eigen::Success) throw SingularSystemError("profile Jacobian is singular");
      dx = lu.solve(-r);
    } else {
      Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
      qr.compute(J);
      if (qr.info() != Eigen::Success) throw SingularSystemError("profile Jacobian QR failed");
      dx = qr.solve(-r);
    }
    if (!dx.allFinite()) break;
    double a = 1.0;
    Vector xn = x + dx;
    Vector rnew = R(xn);
    while (!(scale * rnew.norm() < (1.0 - 1e-4 * a) * rn) && a > 1.0 / 256) {
      a *= 0.5;
      xn = x + a * dx;
      rnew = R(xn);
    }
    const double step = (a * dx).lpNorm<Eigen::Infinity>();
    x = xn;
    r = rnew;
    rn = scale * r.norm();
    out.history.push_back(rn);
    out.iterations = it + 1;
    if (J.rows() != J.cols() && step < 1e-13 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      out.converged = true;
      break;
    }
  }
  if (rn <= tol) out.converged = true;
  out.x = x;
  return out;
}

void append_block(std::vector<Triplet>& t, int r0, int c0, const Matrix& M) {
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0) t.emplace_back(r0 + i, c0 + j, M(i, j));
}

ShockProfile solve_conservation(const ParabolicSystem& s, const EndStates& e, const Grid& g,
                                const PhaseCondition& ph, const ProfileOptions& o) {
  const int n = s.n, m = g.m;
  const double h = g.h;
  ConservationOde ode{s, s.f(e.u_minus)};
  const Matrix Jm = s.b(e.u_minus).partialPivLu().solve(s.df(e.u_minus));
  const Matrix Jp = s.b(e.u_plus).partialPivLu().solve(s.df(e.u_plus));
  const Matrix left = left_rows(Jm, [](cplx l) { return l.real() <= 0.0; });
  const Matrix right = left_rows(Jp, [](cplx l) { return l.real() >= 0.0; });
  const int nl = static_cast<int>(left.rows()), nr = static_cast<int>(right.rows());
  const int rows = (m - 1) * n + nl + nr + 1;
  if (rows < m * n)
    throw UnsupportedError("end states leave the connection underdetermined (overcompressive family)");
  const int i0 = g.nearest(ph.x0);
  const double target = phase_value(ph, e);

  auto residual = [&](const Vector& U) {
    Vector R(rows);
    std::vector<Vector> F(m), G(m);
    for (int i = 0; i < m; ++i) {
      const Vector u = U.segment(i * n, n);
      F[i] = ode.F(u);
      G[i] = ode.J(u) * F[i];
    }
    for (int i = 0; i + 1 < m; ++i) {
      R.segment(i * n, n) = (U.segment((i + 1) * n, n) - U.segment(i * n, n)) / h - 0.5 * (F[i] + F[i + 1]) -
                            h / 12.0 * (G[i] - G[i + 1]);
    }
    int r = (m - 1) * n;
    if (nl) R.segment(r, nl) = left * (U.segment(0, n) - e.u_minus);
    r += nl;
    if (nr) R.segment(r, nr) = right * (U.segment((m - 1) * n, n) - e.u_plus);
    r += nr;
    R(r) = U(i0 * n + ph.component) - target;
    return R;
  };

  auto jacobian = [&](const Vector& U) {
    std::vector<Triplet> t;
    std::vector<Matrix> A(m), B(m);
    const Matrix I = Matrix::Identity(n, n);
    for (int i = 0; i < m; ++i) {
      const Vector u = U.segment(i * n, n);
      const Matrix J = ode.J(u);
      const Matrix dG = ode.dG(u);
      A[i] = -I / h - 0.5 * J - h / 12.0 * dG;  // coefficient of u_i in interval i
      B[i] = I / h - 0.5 * J + h / 12.0 * dG;   // coefficient of u_{i+1} in interval i
    }
    for (int i = 0; i + 1 < m; ++i) {
      append_block(t, i * n, i * n, A[i]);
      append_block(t, i * n, (i + 1) * n, B[i + 1]);
    }
    int r = (m - 1) * n;
    if (nl) append_block(t, r, 0, left);
    r += nl;
    if (nr) append_block(t, r, (m - 1) * n, right);
    r += nr;
    t.emplace_back(r, i0 * n + ph.component, 1.0);
    SparseMatrix Jac(rows, m * n);
    Jac.setFromTriplets(t.begin(), t.end());
    return Jac;
  };

  const Vector U0 = default_guess_values(g, n, e, o.guess);
  auto res = newton(residual, jacobian, U0, o.tol, o.max_iter, std::sqrt(h));
  if (!res.converged)
    throw NoConnectionError("profile Newton iteration did not converge", res.history);

  ShockProfile p;
  p.derivs[0] = res.x;
  p.residual_history = res.history;
  p.iterations = res.iterations;
  p.residual = res.history.back();
  return p;
}

ShockProfile solve_general(const ParabolicSystem& s, const EndStates& e, const Grid& g, const PhaseCondition& ph,
                           const ProfileOptions& o) {
  using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  const int n = s.n, m = g.m;
  const int N = (m - 2) * n;
  const RowSparse d1 = diff_matrix(g, 1, 4), d2 = diff_matrix(g, 2, 4);
  const SparseMatrix D1 = block_expand(diff_matrix(g, 1, 4), n);
  const SparseMatrix D2 = block_expand(diff_matrix(g, 2, 4), n);
  const int i0 = g.nearest(ph.x0);
  const bool by_value = ph.kind == PhaseCondition::Kind::value;
  const double target = by_value ? phase_value(ph, e) : 0.0;

  // phase functional over the full node vector, restricted to the unknowns
  Vector c_full = Vector::Zero(m * n);
  if (by_value) {
    c_full(i0 * n + ph.component) = 1.0;
  } else {
    for (RowSparse::InnerIterator it(d1, i0); it; ++it) c_full(it.col() * n + ph.component) = it.value();
  }
  const Vector c = c_full.segment(n, N);

  auto full = [&](const Vector& X) {
    Vector U(m * n);
    U.segment(0, n) = e.u_minus;
    U.segment((m - 1) * n, n) = e.u_plus;
    U.segment(n, N) = X.head(N);
    return U;
  };

  auto residual = [&](const Vector& X) {
    const Vector U = full(X);
    const Vector P = D1 * U, Q = D2 * U;
    Vector R(N + 1);
    for (int i = 1; i < m - 1; ++i) {
      const Vector u = U.segment(i * n, n);
      R.segment((i - 1) * n, n) = s.b(u) * Q.segment(i * n, n) - s.h(u, P.segment(i * n, n));
    }
    R.head(N) += X(N) * c;
    R(N) = c_full.dot(U) - target;
    return R;
  };

  auto jacobian = [&](const Vector& X) {
    const Vector U = full(X);
    const Vector P = D1 * U, Q = D2 * U;
    std::vector<Triplet> t;
    for (int i = 1; i < m - 1; ++i) {
      const Vector u = U.segment(i * n, n), p = P.segment(i * n, n), q = Q.segment(i * n, n);
      const Matrix B = s.b(u);
      const Matrix Hp = s.h_ux(u, p);
      Matrix diag = -s.h_u(u, p);
      const auto dbs = s.db(u);
      for (int k = 0; k < n; ++k) diag.col(k) += dbs[k] * q;
      const int r0 = (i - 1) * n;
      append_block(t, r0, r0, diag);
      for (RowSparse::InnerIterator it(d2, i); it; ++it) {
        const int j = static_cast<int>(it.col());
        if (j > 0 && j < m - 1) append_block(t, r0, (j - 1) * n, it.value() * B);
      }
      for (RowSparse::InnerIterator it(d1, i); it; ++it) {
        const int j = static_cast<int>(it.col());
        if (j > 0 && j < m - 1) append_block(t, r0, (j - 1) * n, -it.value() * Hp);
      }
    }
    for (int k = 0; k < N; ++k) {
      if (c(k) != 0.0) {
        t.emplace_back(k, N, c(k));
        t.emplace_back(N, k, c(k));
      }
    }
    SparseMatrix J(N + 1, N + 1);
    J.setFromTriplets(t.begin(), t.end());
    return J;
  };

  const Vector U0 = default_guess_values(g, n, e, o.guess);
  Vector X0(N + 1);
  X0.head(N) = U0.segment(n, N);
  X0(N) = 0.0;
  auto res = newton(residual, jacobian, X0, o.tol, o.max_iter, std::sqrt(g.h));
  if (!res.converged)
    throw NoConnectionError("profile Newton iteration did not converge", res.history);

  ShockProfile p;
  p.derivs[0] = full(res.x);
  p.residual_history = res.history;
  p.iterations = res.iterations;
  p.residual = res.history.back();
  return p;
}

}  // namespace


ShockProfile solve_profile(const ParabolicSystem& sys, const EndStates& ends, const Grid& grid,
                           const PhaseCondition& phase, const ProfileOptions& opts) {
  if (ends.u_minus.size() != sys.n || ends.u_plus.size() != sys.n)
    throw DomainError("end states have the wrong dimension");
  if (phase.component < 0 || phase.component >= sys.n) throw DomainError("phase component out of range");
  const double jump = (ends.u_minus - ends.u_plus).norm();
  if (sys.form == Form::conservation) {
    if (jump <= 1e-12 * (1.0 + ends.u_minus.norm()))
      throw NoConnectionError("end states coincide: the constant state is the only bounded solution", {});
    const double rh = (sys.f(ends.u_minus) - sys.f(ends.u_plus)).norm();
    if (rh > 1e-8 * (1.0 + sys.f(ends.u_minus).norm()))
      throw NoConnectionError("end states violate Rankine-Hugoniot in the standing frame", {rh});
  }
  ShockProfile p = sys.form == Form::conservation ? solve_conservation(sys, ends, grid, phase, opts)
                                                  : solve_general(sys, ends, grid, phase, opts);
  p.model = sys.name;
  p.form = sys.form;
  p.n = sys.n;
  p.grid = grid;
  p.ends = ends;
  p.phase = phase;
  p.tol = opts.tol;

  double dev = 0.0;
  for (int i = 0; i < grid.m; ++i) {
    const Vector u = p.derivs[0].segment(i * sys.n, sys.n);
    dev = std::max(dev, std::min((u - ends.u_minus).norm(), (u - ends.u_plus).norm()));
  }
  if (jump < 1e-12 && dev < 1e-6)
    throw NoConnectionError("Newton iteration collapsed onto the constant state", p.residual_history);

  compute_derivatives(sys, p);
  p.tail_error = std::max((p.derivs[0].head(sys.n) - ends.u_minus).norm(),
                          (p.derivs[0].tail(sys.n) - ends.u_plus).norm());
  const auto decay = measure_decay(p);
  p.theta = decay.theta;
  return p;
}

ShockProfile solve_catalog_profile(const CatalogModel& model, const Grid& grid, double tol) {
  if (!model.profile_solvable) throw UnsupportedError("model '" + model.system.name + "' has no standing profile");
  const EndStates ends = classify(model.system, model.u_minus, model.u_plus);
  ProfileOptions o;
  o.tol = tol;
  o.guess = model.guess;
  return solve_profile(model.system, ends, grid, PhaseCondition::for_form(model.system.form), o);
}

void compute_derivatives(const ParabolicSystem& s, ShockProfile& p) {
  const int n = s.n, m = p.grid.m;
  const Vector& U = p.derivs[0];
  const SparseMatrix D1 = block_expand(diff_matrix(p.grid, 1, 4), n);
  const SparseMatrix D2 = block_expand(diff_matrix(p.grid, 2, 4), n);
  Vector d1(m * n), d2(m * n);
  if (s.form == Form::conservation) {
    ConservationOde ode{s, s.f(p.ends.u_minus)};
    for (int i = 0; i < m; ++i) {
      const Vector u = U.segment(i * n, n);
      d1.segment(i * n, n) = ode.F(u);
      d2.segment(i * n, n) = ode.G(u);
    }
  } else {
    d1 = D1 * U;
    for (int i = 0; i < m; ++i) {
      const Vector u = U.segment(i * n, n);
      d2.segment(i * n, n) = s.b(u).partialPivLu().solve(s.h(u, d1.segment(i * n, n)));
    }
  }
  p.derivs[1] = d1;
  p.derivs[2] = d2;
  p.derivs[3] = D1 * d2;
  p.derivs[4] = D2 * d2;
}

double profile_residual(const ParabolicSystem& s, const ShockProfile& p) {
  const int n = s.n, m = p.grid.m;
  const double h = p.grid.h;
  const Vector& U = p.derivs[0];
  double acc = 0.0;
  if (s.form == Form::conservation) {
    ConservationOde ode{s, s.f(p.ends.u_minus)};
    for (int i = 0; i + 1 < m; ++i) {
      const Vector a = U.segment(i * n, n), b = U.segment((i + 1) * n, n);
      const Vector r = (b - a) / h - 0.5 * (ode.F(a) + ode.F(b)) - h / 12.0 * (ode.G(a) - ode.G(b));
      acc += h * r.squaredNorm();
    }
  } else {
    const SparseMatrix D1 = block_expand(diff_matrix(p.grid, 1, 4), n);
    const SparseMatrix D2 = block_expand(diff_matrix(p.grid, 2, 4), n);
    const Vector P = D1 * U, Q = D2 * U;
    for (int i = 1; i < m - 1; ++i) {
      const Vector u = U.segment(i * n, n);
      acc += h * (s.b(u) * Q.segment(i * n, n) - s.h(u, P.segment(i * n, n))).squaredNorm();
    }
  }
  return std::sqrt(acc);
}

DecayReport measure_decay(const ShockProfile& p) {
  DecayReport rep;
  const Grid& g = p.grid;
  const int n = p.n;
  const double x_lo = g.X / 4.0;
  const double x_hi = 0.95 * g.X;
  double theta = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= 4; ++j) {
    if (p.derivs[j].size() == 0) continue;
    Vector mag(g.m);
    for (int i = 0; i < g.m; ++i) mag(i) = p.derivs[j].segment(i * n, n).norm();
    const double top = mag.maxCoeff();
    if (!(top > 0.0)) {
      rep.inconclusive = true;
      continue;
    }
    const double floor = top * (j <= 2 ? 1e-9 : 1e-7);
    for (int side : {-1, 1}) {
      std::vector<double> xs, ys;
      for (int i = 0; i < g.m; ++i) {
        const double ax = side * g.x(i);
        if (ax < x_lo || ax > x_hi || mag(i) <= floor) continue;
        xs.push_back(ax);
        ys.push_back(std::log(mag(i)));
      }
      TailFit f;
      f.order = j;
      f.side = side;
      f.points = static_cast<int>(xs.size());
      if (xs.size() < 10) {
        rep.inconclusive = true;
        rep.fits.push_back(f);
        continue;
      }
      const double N = static_cast<double>(xs.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
      for (size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
        sxx += xs[k] * xs[k];
        sxy += xs[k] * ys[k];
        syy += ys[k] * ys[k];
      }
      const double cov = sxy - sx * sy / N, vx = sxx - sx * sx / N, vy = syy - sy * sy / N;
      const double slope = cov / vx;
      f.theta = -slope;
      f.r2 = vy > 0 ? cov * cov / (vx * vy) : 0.0;
      f.x_from = *std::min_element(xs.begin(), xs.end());
      f.x_to = *std::max_element(xs.begin(), xs.end());
      if (f.r2 < 0.99) rep.low_r2 = true;
      theta = std::min(theta, f.theta);
      rep.fits.push_back(f);
    }
  }
  if (std::isfinite(theta) && !rep.inconclusive) rep.theta = theta;
  return rep;
}

Vector interpolate(const Grid& g, int n, const Vector& values, const Vector& points, const Vector& left,
                   const Vector& right) {
  Vector out(points.size() * n);
  for (Eigen::Index k = 0; k < points.size(); ++k) {
    const double s = (points(k) + g.X) / g.h;
    const int base = static_cast<int>(std::floor(s)) - 2;
    const double t = s - (base + 2);
    Vector acc = Vector::Zero(n);
    for (int a = 0; a < 6; ++a) {
      double w = 1.0;
      for (int b = 0; b < 6; ++b)
        if (b != a) w *= (t - (b - 2)) / static_cast<double>(a - b);
      const int j = base + a;
      if (j < 0)
        acc += w * left;
      else if (j >= g.m)
        acc += w * right;
      else
        acc += w * values.segment(j * n, n);
    }
    out.segment(k * n, n) = acc;
  }
  return out;
}

ShockProfile translate(const ShockProfile& p, double alpha) {
  if (!(std::abs(alpha) < p.grid.X / 2.0)) throw DomainError("translation exceeds half the domain half-width");
  if (alpha == 0.0) return p;
  ShockProfile q = p;
  const Vector pts = p.grid.x.array() - alpha;
  const Vector zero = Vector::Zero(p.n);
  q.derivs[0] = interpolate(p.grid, p.n, p.derivs[0], pts, p.ends.u_minus, p.ends.u_plus);
  for (int j = 1; j <= 4; ++j) q.derivs[j] = interpolate(p.grid, p.n, p.derivs[j], pts, zero, zero);
  q.phase.x0 = p.phase.x0 + alpha;
  return q;
}

uint64_t profile_checksum(const std::string& model, const Grid& grid, double tol) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s|%.17g|%d|%.17g", model.c_str(), grid.X, grid.m, tol);
  uint64_t hsh = 1469598103934665603ull;
  for (const char* c = buf; *c; ++c) {
    hsh ^= static_cast<unsigned char>(*c);
    hsh *= 1099511628211ull;
  }
  return hsh;
}

void export_profile_csv(const ShockProfile& p, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DomainError("cannot open " + path);
  std::fprintf(f, "# shocklab profile v1\n# model=%s\n# n=%d\n# X=%.17g\n# m=%d\n# tol=%.17g\n", p.model.c_str(), p.n,
               p.grid.X, p.grid.m, p.tol);
  std::fprintf(f, "# u_minus=");
  for (int k = 0; k < p.n; ++k) std::fprintf(f, k ? ";%.17g" : "%.17g", p.ends.u_minus(k));
  std::fprintf(f, "\n# u_plus=");
  for (int k = 0; k < p.n; ++k) std::fprintf(f, k ? ";%.17g" : "%.17g", p.ends.u_plus(k));
  std::fprintf(f, "\n# checksum=%016" PRIx64 "\nx", profile_checksum(p.model, p.grid, p.tol));
  for (int k = 0; k < p.n; ++k) std::fprintf(f, ",u%d", k);
  std::fprintf(f, "\n");
  for (int i = 0; i < p.grid.m; ++i) {
    std::fprintf(f, "%.17g", p.grid.x(i));
    for (int k = 0; k < p.n; ++k) std::fprintf(f, ",%.17g", p.derivs[0](i * p.n + k));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

ShockProfile import_profile_csv(const std::string& path, const ParabolicSystem& sys) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::map<std::string, std::string> meta;
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (line[0] == 'x') continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  for (const char* key : {"model", "n", "X", "m", "tol", "checksum", "u_minus", "u_plus"})
    if (!meta.count(key)) throw DomainError(std::string("profile file lacks ") + key);
  const int n = std::stoi(meta["n"]), m = std::stoi(meta["m"]);
  if (n != sys.n) throw DomainError("profile dimension does not match the model");
  if (meta["model"] != sys.name) throw DomainError("profile was computed for a different model");
  const Grid g = Grid::make(std::stod(meta["X"]), m);
  const double tol = std::stod(meta["tol"]);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, profile_checksum(meta["model"], g, tol));
  if (meta["checksum"] != buf) throw DomainError("profile checksum mismatch");
  if (static_cast<int>(rows.size()) != m) throw DomainError("profile row count mismatch");
  auto parse_vec = [n](const std::string& s) {
    Vector v(n);
    std::stringstream ss(s);
    std::string c;
    for (int k = 0; k < n && std::getline(ss, c, ';'); ++k) v(k) = std::stod(c);
    return v;
  };
  ShockProfile p;
  p.model = sys.name;
  p.form = sys.form;
  p.n = n;
  p.grid = g;
  p.tol = tol;
  p.ends = classify(sys, parse_vec(meta["u_minus"]), parse_vec(meta["u_plus"]));
  p.phase = PhaseCondition::for_form(sys.form);
  p.derivs[0].resize(m * n);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < n; ++k) p.derivs[0](i * n + k) = rows[i].at(k + 1);
  compute_derivatives(sys, p);
  p.residual = profile_residual(sys, p);
  p.tail_error = std::max((p.derivs[0].head(n) - p.ends.u_minus).norm(),
                          (p.derivs[0].tail(n) - p.ends.u_plus).norm());
  p.theta = measure_decay(p).theta;
  return p;
}

}  // namespace shocklab
