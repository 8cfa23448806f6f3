#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "shocklab/spectral.hpp"

namespace shocklab {

// Smooth step: 1 on [0,1], 0 on [2,inf).
double cutoff_rho(double s);

// N^delta(v) = rho(|v|_{H2}/delta) N(v)
Vector cutoff_nonlinearity(const PerturbationDynamics& dyn, const Norms& norms, double delta, const Vector& v);

struct ManifoldParams {
  double delta = 0.1;
  // NaN: taken from the spectral decomposition (beta, omega) and eta = 3 beta / 4
  double omega = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  // NaN: smallest multiple of dt with e^{-(beta-eta) T} <= tail_tol
  double T_horizon = std::numeric_limits<double>::quiet_NaN();
  double dt = 0.05;
  double tail_tol = 1e-3;
  double tol = 1e-10;  // relative, on successive z-path differences in the -eta norm
  int max_iter = 60;
  ImexOrder order = ImexOrder::second;

  // Fills NaN fields and checks 3 omega < eta < beta and the tail tolerance.
  ManifoldParams resolved(const SpectralDecomposition& spec) const;
};

// Time-indexed pair on t_k = k dt; z in unstable-eigenbasis coordinates.
struct PathPair {
  std::vector<double> t;
  std::vector<Vector> w;
  std::vector<CVector> z;
};

struct FixedPointResult {
  PathPair paths;
  CVector phi_coords;
  Vector phi;  // Phi(w0) as a field
  int iterations = 0;
  bool converged = false;
  std::vector<double> differences;  // |z^{k+1} - z^k|_{-eta}
  std::vector<double> ratios;       // successive difference ratios
  double contraction = 0.0;         // max ratio above the round-off floor
  double w_norm = 0.0;              // |w|_{-eta}
  double z_norm = 0.0;              // |z|_{-eta}
};

class CenterStableManifold {
 public:
  CenterStableManifold(const PerturbationDynamics& dyn, const SpectralDecomposition& spec,
                       const ManifoldParams& params);

  const ManifoldParams& params() const { return params_; }
  const PerturbationDynamics& dynamics() const { return dyn_; }
  const SpectralDecomposition& spectrum() const { return spec_; }
  const Norms& norms() const { return norms_; }
  int steps() const { return K_; }

  Vector nonlinearity(const Vector& v) const;
  Vector z_field(const CVector& c) const;
  double h2(const Vector& v) const { return norms_.h(v, 2); }

  // w = W(z, w0): time-stepping the projected w equation along the given z path.
  std::vector<Vector> solve_w(const std::vector<CVector>& z, const Vector& w0) const;
  // z = T(z, w): tail integral in eigen-coordinates.
  std::vector<CVector> tail_integral(const PathPair& paths) const;
  // Backward recursion for c(t) = -int_t^T e^{J(t-s)} g(s) ds with g piecewise linear.
  std::vector<CVector> tail_of_forcing(const std::vector<CVector>& g) const;
  double norm_minus_eta(const std::vector<CVector>& z) const;
  double norm_minus_eta(const std::vector<Vector>& w) const;

  FixedPointResult fixed_point(const Vector& w0, const std::optional<std::vector<CVector>>& seed = std::nullopt) const;
  Vector Phi(const Vector& w0) const { return fixed_point(w0).phi; }

  // Truncated evolution v_t = L v + N^delta(v) for `steps` steps of dt.
  Vector evolve_truncated(const Vector& v0, int steps) const;

 private:
  PerturbationDynamics dyn_;
  SpectralDecomposition spec_;
  ManifoldParams params_;
  Norms norms_;
  int K_ = 0;
  int p_ = 0;
  CMatrix step_back_, e0_, e1_;
};

struct TangencyFit {
  std::vector<double> eps;
  std::vector<double> phi_norms;
  double slope = 0.0;
  double intercept = 0.0;
};

// log|Phi(eps w)|_{H2} against log eps.
TangencyFit tangency_fit(const CenterStableManifold& M, const Vector& w, const std::vector<double>& eps);

double lipschitz_certificate(const CenterStableManifold& M, const std::vector<std::pair<Vector, Vector>>& pairs);

struct InvarianceDefect {
  double tau = 0.0;
  double defect = 0.0;       // |z(tau) - Phi(w(tau))|_{H2}
  double z_norm = 0.0;       // |z(tau)|_{H2}
  double w_norm = 0.0;
};

InvarianceDefect invariance_defect(const CenterStableManifold& M, const Vector& w0, double tau);

struct ReducedRhs {
  Vector vdot;
  double alphadot = 0.0;
  double denominator = 1.0;
};

// Reduced (translation-factored) equations; phi = u_x, pi_2 f = <phi, f> / |phi|^2.
ReducedRhs reduced_rhs(const PerturbationDynamics& dyn, const Vector& v);

}  // namespace shocklab
