#include "shocklab/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shocklab/errors.hpp"

namespace shocklab {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw DomainError(std::string("non-finite ") + what);
}

Vector conservation_h(const ParabolicSystem& s, const Vector& u, const Vector& ux) {
  return s.df(u) * ux - s.db_times(u, ux) * ux;
}

// d/dux of (db(u) ux) ux: column k is (d b/d u_k) ux + (db(u) ux) e_k.
Matrix conservation_h_ux(const ParabolicSystem& s, const Vector& u, const Vector& ux) {
  Matrix J = s.df(u) - s.db_times(u, ux);
  const auto dbs = s.db(u);
  for (int k = 0; k < s.n; ++k) J.col(k) -= dbs[k] * ux;
  return J;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& g, const Vector& u, double step) {
  const Vector g0 = g(u);
  Matrix J(g0.size(), u.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double e = step * std::max(1.0, std::abs(u(k)));
    Vector up = u, um = u;
    up(k) += e;
    um(k) -= e;
    J.col(k) = (g(up) - g(um)) / (2.0 * e);
  }
  return J;
}

double poly(const std::vector<double>& c, double u) {
  double s = 0.0;
  for (size_t k = c.size(); k-- > 0;) s = s * u + c[k];
  return s;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
  if (d.empty()) d.push_back(0.0);
  return d;
}

Vector scalar(double v) { return Vector::Constant(1, v); }
Matrix scalar_m(double v) { return Matrix::Constant(1, 1, v); }

std::vector<double> sorted_real(const Eigen::VectorXcd& ev) {
  std::vector<double> r;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r.push_back(ev(i).real());
  std::sort(r.begin(), r.end());
  return r;
}

Matrix convection(const ParabolicSystem& s, const Vector& u) {
  if (s.form == Form::conservation) return s.df(u);
  return s.h_ux(u, Vector::Zero(s.n));
}

}  // namespace

Matrix ParabolicSystem::db_times(const Vector& u, const Vector& v) const {
  Matrix M = Matrix::Zero(n, n);
  if (!db) return M;
  const auto d = db(u);
  for (int k = 0; k < n; ++k) M += v(k) * d[k];
  return M;
}

SystemEval eval(const ParabolicSystem& s, const Vector& u, const std::optional<Vector>& ux) {
  require_finite(u, "state");
  if (u.size() != s.n) throw DomainError("state has wrong dimension");
  if (s.form == Form::general && !ux) throw DomainError("general-form evaluation needs the state gradient");
  SystemEval e;
  e.b = s.b(u);
  e.db = s.db ? s.db(u) : std::vector<Matrix>(s.n, Matrix::Zero(s.n, s.n));
  if (s.form == Form::conservation) {
    e.f = s.f(u);
    e.df = s.df(u);
  }
  if (ux) {
    require_finite(*ux, "gradient");
    if (s.form == Form::conservation) {
      e.h = conservation_h(s, u, *ux);
      e.h_ux = conservation_h_ux(s, u, *ux);
      e.h_u = fd_jacobian([&](const Vector& w) { return conservation_h(s, w, *ux); }, u, 1e-6);
    } else {
      e.h = s.h(u, *ux);
      e.h_u = s.h_u(u, *ux);
      e.h_ux = s.h_ux(u, *ux);
    }
  }
  return e;
}

ParabolicSystem with_fd_derivatives(ParabolicSystem s, double step) {
  if (s.form == Form::conservation && !s.df) {
    auto f = s.f;
    s.df = [f, step](const Vector& u) { return fd_jacobian(f, u, step); };
  }
  if (!s.db) {
    auto b = s.b;
    const int n = s.n;
    s.db = [b, n, step](const Vector& u) {
      std::vector<Matrix> out;
      for (int k = 0; k < n; ++k) {
        const double e = step * std::max(1.0, std::abs(u(k)));
        Vector up = u, um = u;
        up(k) += e;
        um(k) -= e;
        out.push_back((b(up) - b(um)) / (2.0 * e));
      }
      return out;
    };
  }
  if (s.form == Form::general) {
    auto h = s.h;
    if (!s.h_u)
      s.h_u = [h, step](const Vector& u, const Vector& ux) {
        return fd_jacobian([&](const Vector& w) { return h(w, ux); }, u, step);
      };
    if (!s.h_ux)
      s.h_ux = [h, step](const Vector& u, const Vector& ux) {
        return fd_jacobian([&](const Vector& w) { return h(u, w); }, ux, step);
      };
  }
  return s;
}

double derivative_mismatch(const ParabolicSystem& s, const Vector& u, const Vector& ux, double step) {
  double worst = 0.0;
  if (s.form == Form::conservation) {
    worst = std::max(worst, (s.df(u) - fd_jacobian(s.f, u, step)).norm());
  } else {
    worst = std::max(worst,
                     (s.h_u(u, ux) - fd_jacobian([&](const Vector& w) { return s.h(w, ux); }, u, step)).norm());
    worst = std::max(worst,
                     (s.h_ux(u, ux) - fd_jacobian([&](const Vector& w) { return s.h(u, w); }, ux, step)).norm());
  }
  const auto dbs = s.db(u);
  for (int k = 0; k < s.n; ++k) {
    const double e = step * std::max(1.0, std::abs(u(k)));
    Vector up = u, um = u;
    up(k) += e;
    um(k) -= e;
    worst = std::max(worst, (dbs[k] - (s.b(up) - s.b(um)) / (2.0 * e)).norm());
  }
  return worst;
}

std::string to_string(ShockType t) {
  switch (t) {
    case ShockType::lax: return "lax";
    case ShockType::undercompressive: return "undercompressive";
    case ShockType::overcompressive: return "overcompressive";
    case ShockType::none: break;
  }
  return "none";
}

EndStates classify(const ParabolicSystem& s, const Vector& um, const Vector& up, double tol) {
  require_finite(um, "end state");
  require_finite(up, "end state");
  if (um.size() != s.n || up.size() != s.n) throw DomainError("end state has wrong dimension");
  EndStates e;
  e.u_minus = um;
  e.u_plus = up;
  e.a_minus = sorted_real(convection(s, um).eigenvalues());
  e.a_plus = sorted_real(convection(s, up).eigenvalues());
  if ((um - up).norm() <= tol * (1.0 + um.norm())) return e;
  int count = 0;
  for (double a : e.a_minus) count += a > 0.0;
  for (double a : e.a_plus) count += a < 0.0;
  if (count == s.n + 1) {
    e.classification = ShockType::lax;
    e.ell = 1;
  } else if (count > s.n + 1) {
    e.classification = ShockType::overcompressive;
    e.ell = count - s.n;
  } else {
    e.classification = ShockType::undercompressive;
    e.ell = 1;
  }
  return e;
}

ParabolicSystem reflect(const ParabolicSystem& s) {
  ParabolicSystem r = s;
  r.name = s.name + "_reflected";
  if (s.form == Form::conservation) {
    auto f = s.f;
    auto df = s.df;
    r.f = [f](const Vector& u) -> Vector { return -f(u); };
    r.df = [df](const Vector& u) -> Matrix { return -df(u); };
  } else {
    auto h = s.h;
    auto hu = s.h_u;
    auto hux = s.h_ux;
    r.h = [h](const Vector& u, const Vector& p) -> Vector { return h(u, -p); };
    r.h_u = [hu](const Vector& u, const Vector& p) -> Matrix { return hu(u, -p); };
    r.h_ux = [hux](const Vector& u, const Vector& p) -> Matrix { return -hux(u, -p); };
  }
  return r;
}

bool HypothesisReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const HypothesisCheck& HypothesisReport::get(const std::string& id) const {
  for (const auto& c : checks)
    if (c.id == id) return c;
  throw DomainError("no hypothesis check named " + id);
}

std::vector<double> xi_grid(double xmax, int count) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(-xmax + 2.0 * xmax * i / (count - 1));
  return g;
}

HypothesisReport verify_hypotheses(const ParabolicSystem& s, const EndStates& ends, const SampleBox& box,
                                   const std::vector<double>& xis, double tol) {
  HypothesisReport rep;
  const int n = s.n;

  {
    double worst = std::numeric_limits<double>::infinity();
    int total = 1;
    for (int k = 0; k < n; ++k) total *= box.per_axis;
    for (int idx = 0; idx < total; ++idx) {
      Vector u(n);
      int rest = idx;
      for (int k = 0; k < n; ++k) {
        const int j = rest % box.per_axis;
        rest /= box.per_axis;
        const double t = box.per_axis > 1 ? static_cast<double>(j) / (box.per_axis - 1) : 0.5;
        u(k) = box.lo(k) + t * (box.hi(k) - box.lo(k));
      }
      worst = std::min(worst, s.b(u).eigenvalues().real().minCoeff());
    }
    rep.checks.push_back({"H1", worst >= tol, worst, "min Re spectrum of b over sample box"});
  }

  {
    double gap;
    std::string detail;
    if (s.form == Form::conservation) {
      gap = (s.f(ends.u_minus) - s.f(ends.u_plus)).norm();
      detail = "|f(u-) - f(u+)|";
    } else {
      gap = std::max(s.h(ends.u_minus, Vector::Zero(n)).norm(), s.h(ends.u_plus, Vector::Zero(n)).norm());
      detail = "max |h(u+-, 0)|";
    }
    rep.checks.push_back({"RH", gap <= tol * (1.0 + ends.u_minus.norm() + ends.u_plus.norm()), gap, detail});
  }

  {
    double witness = std::numeric_limits<double>::infinity();
    double imag = 0.0;
    for (const Vector* u : {&ends.u_minus, &ends.u_plus}) {
      const Eigen::VectorXcd ev = convection(s, *u).eigenvalues();
      for (Eigen::Index i = 0; i < ev.size(); ++i) {
        imag = std::max(imag, std::abs(ev(i).imag()));
        witness = std::min(witness, std::abs(ev(i)));
        for (Eigen::Index j = i + 1; j < ev.size(); ++j) witness = std::min(witness, std::abs(ev(i) - ev(j)));
      }
    }
    const bool ok = imag <= tol && witness > tol;
    rep.checks.push_back({"H2", ok, ok ? witness : (imag > tol ? -imag : witness),
                          "min over end states of eigenvalue gaps and moduli"});
  }

  {
    double theta = std::numeric_limits<double>::infinity();
    double at_zero = -std::numeric_limits<double>::infinity();
    for (const Vector* u : {&ends.u_minus, &ends.u_plus}) {
      const Vector zero = Vector::Zero(n);
      const Matrix B = s.b(*u);
      const Matrix A = convection(s, *u);
      const Matrix H = s.form == Form::general ? s.h_u(*u, zero) : Matrix::Zero(n, n);
      for (double xi : xis) {
        const CMatrix sym = (-xi * xi) * B.cast<cplx>() - cplx(0.0, xi) * A.cast<cplx>() - H.cast<cplx>();
        const double re = sym.eigenvalues().real().maxCoeff();
        if (std::abs(xi) < 1e-12) {
          at_zero = std::max(at_zero, re);
        } else {
          theta = std::min(theta, -re / (xi * xi));
        }
      }
      // large |xi|: the b xi^2 term dominates
      theta = std::min(theta, B.eigenvalues().real().minCoeff());
    }
    const bool ok = theta >= tol && at_zero <= tol;
    rep.checks.push_back({"H3", ok, theta, "margin theta with Re symbol <= -theta xi^2"});
  }

  rep.checks.push_back({"H5", ends.classification != ShockType::none, static_cast<double>(ends.ell),
                        to_string(ends.classification)});
  return rep;
}

ParabolicSystem burgers() {
  ParabolicSystem s;
  s.name = "burgers";
  s.n = 1;
  s.form = Form::conservation;
  s.regularity = 4;
  s.f = [](const Vector& u) { return scalar(0.5 * u(0) * u(0)); };
  s.df = [](const Vector& u) { return scalar_m(u(0)); };
  s.b = [](const Vector&) { return scalar_m(1.0); };
  s.db = [](const Vector&) { return std::vector<Matrix>{scalar_m(0.0)}; };
  return s;
}

ParabolicSystem quadratic_pulse() {
  ParabolicSystem s;
  s.name = "quadratic_pulse";
  s.n = 1;
  s.form = Form::general;
  s.regularity = 4;
  s.b = [](const Vector&) { return scalar_m(1.0); };
  s.db = [](const Vector&) { return std::vector<Matrix>{scalar_m(0.0)}; };
  s.h = [](const Vector& u, const Vector&) { return scalar(u(0) - u(0) * u(0)); };
  s.h_u = [](const Vector& u, const Vector&) { return scalar_m(1.0 - 2.0 * u(0)); };
  s.h_ux = [](const Vector&, const Vector&) { return scalar_m(0.0); };
  return s;
}

ParabolicSystem cubic() {
  ParabolicSystem s;
  s.name = "cubic";
  s.n = 2;
  s.form = Form::conservation;
  s.regularity = 4;
  s.f = [](const Vector& u) -> Vector { return u.squaredNorm() * u; };
  s.df = [](const Vector& u) -> Matrix {
    return u.squaredNorm() * Matrix::Identity(2, 2) + 2.0 * u * u.transpose();
  };
  s.b = [](const Vector&) -> Matrix { return Matrix::Identity(2, 2); };
  s.db = [](const Vector&) { return std::vector<Matrix>{Matrix::Zero(2, 2), Matrix::Zero(2, 2)}; };
  return s;
}

ParabolicSystem polynomial_conservation(const std::string& name, const std::vector<double>& flux,
                                        const std::vector<double>& visc) {
  if (visc.empty()) throw DomainError("viscosity polynomial is empty");
  ParabolicSystem s;
  s.name = name;
  s.form = Form::conservation;
  const auto dflux = poly_derivative(flux);
  const auto dvisc = poly_derivative(visc);
  s.f = [flux](const Vector& u) { return scalar(poly(flux, u(0))); };
  s.df = [dflux](const Vector& u) { return scalar_m(poly(dflux, u(0))); };
  s.b = [visc](const Vector& u) { return scalar_m(poly(visc, u(0))); };
  s.db = [dvisc](const Vector& u) { return std::vector<Matrix>{scalar_m(poly(dvisc, u(0)))}; };
  return s;
}

ParabolicSystem polynomial_general(const std::string& name, const std::vector<double>& p,
                                   const std::vector<double>& q, const std::vector<double>& visc) {
  if (visc.empty()) throw DomainError("viscosity polynomial is empty");
  ParabolicSystem s;
  s.name = name;
  s.form = Form::general;
  const auto dp = poly_derivative(p);
  const auto dq = poly_derivative(q);
  const auto dvisc = poly_derivative(visc);
  s.b = [visc](const Vector& u) { return scalar_m(poly(visc, u(0))); };
  s.db = [dvisc](const Vector& u) { return std::vector<Matrix>{scalar_m(poly(dvisc, u(0)))}; };
  s.h = [p, q](const Vector& u, const Vector& ux) { return scalar(poly(p, u(0)) + poly(q, u(0)) * ux(0)); };
  s.h_u = [dp, dq](const Vector& u, const Vector& ux) {
    return scalar_m(poly(dp, u(0)) + poly(dq, u(0)) * ux(0));
  };
  s.h_ux = [q](const Vector& u, const Vector&) { return scalar_m(poly(q, u(0))); };
  return s;
}

std::vector<CatalogModel> catalog() {
  std::vector<CatalogModel> out;
  {
    CatalogModel c;
    c.system = burgers();
    c.u_minus = scalar(1.0);
    c.u_plus = scalar(-1.0);
    c.description = "scalar Burgers, standing Lax shock from 1 to -1";
    c.guess = [](double x) { return scalar(-std::tanh(x / 3.0)); };
    c.exact = [](double x) { return -std::tanh(x / 2.0); };
    out.push_back(c);
  }
  {
    CatalogModel c;
    c.system = quadratic_pulse();
    c.u_minus = scalar(0.0);
    c.u_plus = scalar(0.0);
    c.description = "u_t = u_xx - u + u^2, standing pulse with one unstable eigenvalue";
    c.guess = [](double x) {
      const double s = 1.0 / std::cosh(x / 2.3);
      return scalar(1.3 * s * s);
    };
    c.exact = [](double x) {
      const double s = 1.0 / std::cosh(x / 2.0);
      return 1.5 * s * s;
    };
    out.push_back(c);
  }
  {
    CatalogModel c;
    c.system = cubic();
    c.u_minus = Vector::Zero(2);
    c.u_plus = Vector::Zero(2);
    c.u_minus(0) = 1.0;
    c.u_plus(0) = -1.0;
    c.description = "f(u) = |u|^2 u, b = I; end states (+-1, 0) classify as undercompressive";
    c.guess = [](double x) {
      Vector g = Vector::Zero(2);
      g(0) = -std::tanh(x / 3.0);
      return g;
    };
    c.profile_solvable = false;
    out.push_back(c);
  }
  return out;
}

CatalogModel catalog_model(const std::string& name) {
  for (auto& c : catalog())
    if (c.system.name == name) return c;
  throw DomainError("unknown model '" + name + "'");
}

}  // namespace shocklab
