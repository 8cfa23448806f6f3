#include "shocklab/manifold.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "shocklab/errors.hpp"

namespace shocklab {

namespace {

double bump(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }

}  // namespace

double cutoff_rho(double s) {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double a = bump(2.0 - s), b = bump(s - 1.0);
  return a / (a + b);
}

Vector cutoff_nonlinearity(const PerturbationDynamics& dyn, const Norms& norms, double delta, const Vector& v) {
  if (!(delta > 0)) throw DomainError("cutoff radius must be positive");
  const double r = cutoff_rho(norms.h(v, 2) / delta);
  if (r == 0.0) return Vector::Zero(v.size());
  return r * dyn.residual(v);
}

ManifoldParams ManifoldParams::resolved(const SpectralDecomposition& spec) const {
  ManifoldParams p = *this;
  if (std::isnan(p.beta)) p.beta = spec.beta;
  if (std::isnan(p.omega)) p.omega = spec.omega;
  if (std::isnan(p.eta)) p.eta = 0.75 * p.beta;
  if (!(p.beta > 0) || !std::isfinite(p.beta)) throw DomainError("manifold needs an unstable spectrum (beta > 0)");
  if (!(3 * p.omega < p.eta && p.eta < p.beta)) throw DomainError("rates must satisfy 3 omega < eta < beta");
  if (!(p.dt > 0)) throw DomainError("dt must be positive");
  if (!(p.tail_tol > 0 && p.tail_tol < 1)) throw DomainError("tail_tol must lie in (0,1)");
  const double gap = p.beta - p.eta;
  if (std::isnan(p.T_horizon)) {
    p.T_horizon = std::ceil(std::log(1.0 / p.tail_tol) / gap / p.dt) * p.dt;
  } else if (std::exp(-gap * p.T_horizon) > p.tail_tol) {
    throw DomainError("T_horizon too short for the tail tolerance");
  }
  return p;
}

CenterStableManifold::CenterStableManifold(const PerturbationDynamics& dyn, const SpectralDecomposition& spec,
                                           const ManifoldParams& params)
    : dyn_(dyn), spec_(spec), params_(params.resolved(spec)), norms_(dyn.grid(), dyn.n()) {
  K_ = static_cast<int>(std::lround(params_.T_horizon / params_.dt));
  p_ = spec_.p;
  const CMatrix J = spec_.unstable.generator;
  const double dt = params_.dt;
  step_back_ = expm(CMatrix(-dt * J));
  // E0 = int_0^dt e^{-J s}(1 - s/dt) ds, E1 = int_0^dt e^{-J s}(s/dt) ds
  e0_ = CMatrix::Zero(p_, p_);
  e1_ = CMatrix::Zero(p_, p_);
  using GL = boost::math::quadrature::gauss<double, 10>;
  const auto& x = GL::abscissa();
  const auto& w = GL::weights();
  auto add = [&](double xi, double wi) {
    const double s = 0.5 * dt * (1.0 + xi);
    const CMatrix E = expm(CMatrix(-s * J));
    e0_ += 0.5 * dt * wi * (1.0 - s / dt) * E;
    e1_ += 0.5 * dt * wi * (s / dt) * E;
  };
  for (size_t i = 0; i < x.size(); ++i) {
    add(x[i], w[i]);
    if (x[i] != 0.0) add(-x[i], w[i]);
  }
}

Vector CenterStableManifold::nonlinearity(const Vector& v) const {
  return cutoff_nonlinearity(dyn_, norms_, params_.delta, v);
}

Vector CenterStableManifold::z_field(const CVector& c) const {
  if (p_ == 0) return Vector::Zero(dyn_.size());
  return spec_.unstable.from_coords(c);
}

std::vector<Vector> CenterStableManifold::solve_w(const std::vector<CVector>& z, const Vector& w0) const {
  const double dt = params_.dt;
  auto z_at = [&](double t) {
    const double s = std::clamp(t / dt, 0.0, static_cast<double>(K_));
    const int k = std::min(static_cast<int>(std::floor(s)), K_ - 1);
    const double f = s - k;
    return z_field((1.0 - f) * z[k] + f * z[k + 1]);
  };
  const auto& U = spec_.unstable;
  ImexStepper stepper(
      dyn_.L(),
      [&](double t, const Vector& w) {
        const Vector n = nonlinearity(w + z_at(t));
        return Vector(n - U.project(n));
      },
      dt, params_.order);
  std::vector<Vector> w(K_ + 1);
  w[0] = w0;
  for (int k = 0; k < K_; ++k) {
    Vector next = stepper.step(k * dt, w[k]);
    // keep the path in the center-stable subspace; round-off there grows like e^{lambda t}
    next -= U.project(next);
    if (!next.allFinite()) throw StepSizeError("w path became non-finite");
    w[k + 1] = std::move(next);
  }
  return w;
}

std::vector<CVector> CenterStableManifold::tail_of_forcing(const std::vector<CVector>& g) const {
  std::vector<CVector> c(K_ + 1, CVector::Zero(p_));
  for (int k = K_ - 1; k >= 0; --k) c[k] = step_back_ * c[k + 1] - (e0_ * g[k] + e1_ * g[k + 1]);
  return c;
}

std::vector<CVector> CenterStableManifold::tail_integral(const PathPair& paths) const {
  std::vector<CVector> g(K_ + 1);
  for (int k = 0; k <= K_; ++k) g[k] = spec_.unstable.coords(nonlinearity(paths.w[k] + z_field(paths.z[k])));
  return tail_of_forcing(g);
}

double CenterStableManifold::norm_minus_eta(const std::vector<CVector>& z) const {
  double s = 0.0;
  for (size_t k = 0; k < z.size(); ++k)
    if (z[k].size() > 0 && z[k].norm() > 0)
      s = std::max(s, std::exp(-params_.eta * k * params_.dt) * h2(z_field(z[k])));
  return s;
}

double CenterStableManifold::norm_minus_eta(const std::vector<Vector>& w) const {
  double s = 0.0;
  for (size_t k = 0; k < w.size(); ++k) s = std::max(s, std::exp(-params_.eta * k * params_.dt) * h2(w[k]));
  return s;
}

FixedPointResult CenterStableManifold::fixed_point(const Vector& w0,
                                                   const std::optional<std::vector<CVector>>& seed) const {
  if (w0.size() != dyn_.size()) throw DomainError("w0 has the wrong size");
  if (spec_.unstable.project(w0).norm() > 1e-8 * std::max(w0.norm(), 1e-300))
    throw ContractError("w0 must lie in the center-stable subspace");
  FixedPointResult r;
  r.paths.t.resize(K_ + 1);
  for (int k = 0; k <= K_; ++k) r.paths.t[k] = k * params_.dt;
  std::vector<CVector> z = seed ? *seed : std::vector<CVector>(K_ + 1, CVector::Zero(p_));
  if (static_cast<int>(z.size()) != K_ + 1) throw DomainError("seed path has the wrong length");
  std::vector<Vector> w;
  // round-off floor of the z differences: relative to the data, and absolute
  // since N(v) = F(u+v) - F(u) - Lv loses digits against F(u)
  const double floor_abs = std::max(1e-9 * h2(w0), 1e-14);
  for (int it = 1; it <= params_.max_iter; ++it) {
    w = solve_w(z, w0);
    PathPair pp{r.paths.t, w, z};
    std::vector<CVector> znew = tail_integral(pp);
    std::vector<CVector> dz(K_ + 1);
    for (int k = 0; k <= K_; ++k) dz[k] = znew[k] - z[k];
    const double diff = norm_minus_eta(dz);
    if (!std::isfinite(diff)) throw StepSizeError("fixed-point iterate became non-finite");
    r.differences.push_back(diff);
    z = std::move(znew);
    r.iterations = it;
    const double zn = norm_minus_eta(z);
    if (r.differences.size() >= 2) {
      const double prev = r.differences[r.differences.size() - 2];
      const double ratio = prev > 0 ? diff / prev : 0.0;
      r.ratios.push_back(ratio);
      // ratios near the round-off floor are noise
      const bool noise = diff <= std::max(1e-6 * zn, floor_abs);
      if (!noise) r.contraction = std::max(r.contraction, ratio);
      if (r.ratios.size() >= 2 && ratio >= 1.0 && r.ratios[r.ratios.size() - 2] >= 1.0 && !noise)
        throw NonContractionError("fixed-point map is not contracting; reduce delta", ratio);
      // stagnation at the round-off floor of N(v) = F(u+v) - F(u) - Lv
      if (ratio >= 1.0 && noise) {
        r.converged = true;
        break;
      }
    }
    if (diff <= params_.tol * zn || diff <= 1e-3 * floor_abs) {
      r.converged = true;
      break;
    }
  }
  r.paths.w = solve_w(z, w0);
  r.paths.z = z;
  r.phi_coords = z[0];
  r.phi = z_field(z[0]);
  r.w_norm = norm_minus_eta(r.paths.w);
  r.z_norm = norm_minus_eta(z);
  return r;
}

Vector CenterStableManifold::evolve_truncated(const Vector& v0, int steps) const {
  ImexStepper stepper(
      dyn_.L(), [&](double, const Vector& v) { return nonlinearity(v); }, params_.dt, params_.order);
  Vector v = v0;
  for (int k = 0; k < steps; ++k) {
    v = stepper.step(k * params_.dt, v);
    if (!v.allFinite()) throw StepSizeError("truncated evolution became non-finite");
  }
  return v;
}

TangencyFit tangency_fit(const CenterStableManifold& M, const Vector& w, const std::vector<double>& eps) {
  TangencyFit f;
  f.eps = eps;
  for (double e : eps) f.phi_norms.push_back(M.h2(M.Phi(e * w)));
  const int n = static_cast<int>(eps.size());
  if (n < 2) throw DomainError("tangency fit needs at least two amplitudes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(f.phi_norms[i] > 0)) throw DomainError("Phi vanished on the ladder; cannot fit");
    const double x = std::log(eps[i]), y = std::log(f.phi_norms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

double lipschitz_certificate(const CenterStableManifold& M, const std::vector<std::pair<Vector, Vector>>& pairs) {
  double c = 0.0;
  for (const auto& [a, b] : pairs) {
    const double d = M.h2(a - b);
    if (d == 0.0) continue;
    c = std::max(c, M.h2(M.Phi(a) - M.Phi(b)) / d);
  }
  return c;
}

InvarianceDefect invariance_defect(const CenterStableManifold& M, const Vector& w0, double tau) {
  InvarianceDefect d;
  const int steps = static_cast<int>(std::lround(tau / M.params().dt));
  d.tau = steps * M.params().dt;
  const Vector v0 = w0 + M.Phi(w0);
  const Vector v = M.evolve_truncated(v0, steps);
  const Vector z = M.spectrum().unstable.project(v);
  const Vector w = v - z;
  d.defect = M.h2(z - M.Phi(w));
  d.z_norm = M.h2(z);
  d.w_norm = M.h2(w);
  return d;
}

ReducedRhs reduced_rhs(const PerturbationDynamics& dyn, const Vector& v) {
  const Grid& g = dyn.grid();
  const int n = dyn.n();
  Vector W(g.m * n);
  const Vector w1 = quadrature_weights(g);
  for (int i = 0; i < g.m; ++i) W.segment(i * n, n).setConstant(w1(i));
  const Vector& phi = dyn.profile().derivative(1);
  const double phi2 = phi.dot(W.cwiseProduct(phi));
  auto pi2 = [&](const Vector& f) { return phi.dot(W.cwiseProduct(f)) / phi2; };
  const SparseMatrix D1 = block_expand(diff_matrix(g, 1, 4), n);
  const Vector f = dyn.rhs(v);
  ReducedRhs r;
  r.denominator = 1.0 + pi2(D1 * v);
  if (r.denominator < 0.5) throw FrameBreakdownError("phase denominator below 1/2");
  const double p = pi2(f);
  r.vdot = f - p * phi;
  r.alphadot = p / r.denominator;
  return r;
}

}  // namespace shocklab
