#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "shocklab/manifold.hpp"
#include "shocklab/spectral.hpp"
#include "shocklab/templates.hpp"

namespace shocklab {

struct EvolutionOptions {
  double T = 10.0;
  double dt = 0.05;
  ImexOrder order = ImexOrder::second;
  int record_every = 10;    // steps between recorded norms and snapshots
  double blowup_factor = 1e3;
};

// Recorded series. Snapshots hold v at each recorded time: the raw
// perturbation u - u_bar after evolve, the shifted one after reframe.
struct EvolutionTrace {
  std::string model;
  Grid grid;
  int n = 1;
  bool shifted = false;
  std::vector<double> t;
  std::vector<Vector> snapshots;
  std::vector<double> alpha, alphadot;
  std::vector<double> l1, l2, linf, h2, h4, weighted_h4, mass;
  std::vector<double> template_ratio;  // sup_x (|v| + |v_x|) / (theta + psi1 + psi2), if templates given
  std::vector<double> zeta;
  bool diverged = false;
  double diverged_at = std::numeric_limits<double>::quiet_NaN();
  double E0 = 0.0;  // |(1+x^2)^{3/4} v0|_{H4}
  double mass_drift = 0.0;
};

EvolutionTrace evolve(const PerturbationDynamics& dyn, const Vector& v0, const EvolutionOptions& opts);

enum class PhaseMethod { least_squares, kernel };

struct PhaseOptions {
  PhaseMethod method = PhaseMethod::least_squares;
  double window = 2.0;    // half-width of the unimodality scan around the previous alpha
  int scan_points = 41;
  double tol = 1e-13;
  int kernel_iterations = 4;
  std::optional<TemplateParams> kernel;  // required by the kernel method (l table)
};

struct PhaseSeries {
  std::vector<double> t, alpha, alphadot;
  int kernel_iterations = 0;
};

// alpha(t) for a raw trace; alphadot by second-order differences of the series.
PhaseSeries track_phase(const EvolutionTrace& raw, const PerturbationDynamics& dyn, const PhaseOptions& opts = {});

// Least-squares phase of a single state u = u_bar + v, starting the Newton iteration at a0.
double least_squares_phase(const PerturbationDynamics& dyn, const Vector& v, double a0, const PhaseOptions& opts = {});

// v(x,t) = u(x + alpha(t), t) - u_bar(x) and its series; template ratios if params are given.
EvolutionTrace reframe(const EvolutionTrace& raw, const PerturbationDynamics& dyn, const PhaseSeries& phase,
                       const std::optional<TemplateParams>& templates = std::nullopt);

// Scalar conservation-form shock: speeds f'(u-), f'(u+), beta = b, and l = 1/(u+ - u-) so that
// the kernel phase carries the mass of v0.
TemplateParams shock_template_params(const ParabolicSystem& sys, const ShockProfile& profile);

struct Decomposition {
  Vector w;
  Vector z;
  CVector z_coords;
};
Decomposition decompose(const Vector& v, const SpectralDecomposition& spec);

struct ConditionalOptions {
  double T = 40.0;
  int record_every = 10;
  double reproject_every = 2.0;  // 0: never re-project onto the discrete manifold
  double offset = 0.0;           // added to the first unstable coordinate (H2-normalized eigenfunction)
  double stay_factor = 2.0;
  double escape_factor = 10.0;
};

struct ConditionalReport {
  std::vector<double> t;
  std::vector<double> v_norm, w_norm, z_norm, z_over_w2;  // H2 norms
  std::vector<cplx> unstable;                              // unstable coordinates of v, first mode
  double v0_norm = 0.0;
  double max_ratio = 0.0;  // max |v(t)| / |v0|
  bool stayed = false;
  bool escaped = false;
  double escape_time = std::numeric_limits<double>::quiet_NaN();
  int reprojections = 0;
  double max_correction = 0.0;  // largest |z - Phi(w)| removed by a re-projection
  double z_over_w2_max = 0.0;
  bool invariance_failure = false;  // escaped with offset 0
  Vector v_final;
};

ConditionalReport conditional_run(const CenterStableManifold& M, const Vector& w0, const ConditionalOptions& opts);

struct RateFit2 {
  double rate = 0.0;
  double t_from = 0.0, t_to = 0.0;
  int points = 0;
};
// Exponential rate of |c_off - c_ref| (first unstable coordinate) while it lies in [lo, hi].
RateFit2 escape_rate(const ConditionalReport& reference, const ConditionalReport& offset, double lo, double hi);

struct ExponentFit {
  double slope = 0.0;  // d log y / d log(1+t)
  double ci_low = 0.0, ci_high = 0.0;
  double t_from = 0.0, t_to = 0.0;
  int points = 0;
};
// Least squares on log y vs log(1+t) over t in [t_from, t_to], bootstrap 95% CI.
ExponentFit fit_exponent(const std::vector<double>& t, const std::vector<double>& y, double t_from, double t_to,
                         int resamples = 400, std::uint64_t seed = 7);
// Slope of log y vs log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ZetaReport {
  std::vector<double> t, zeta;
  std::vector<double> template_part, h4_part, alphadot_part;
  double final = 0.0;
};
// Running sup of (|w|+|w_x|)/(theta+psi1+psi2) + |w|_{H4}(1+s)^{1/4} + |alphadot|(1+s), w = Pi_cs v.
ZetaReport zeta_monitor(const EvolutionTrace& shifted, const TemplateParams& p,
                        const SpectralDecomposition* spec = nullptr);

struct DampingReport {
  double C = 0.0, theta1 = 0.0, theta2 = 0.0;
  double violation = 0.0;  // max over the check window of (lhs - rhs) / max lhs
  bool admissible = false;
};
// Fits C, theta1, theta2 on the first half of the trace, checks the second half.
DampingReport damping_monitor(const EvolutionTrace& shifted);

void write_trace_csv(const EvolutionTrace& trace, const std::string& path);
void write_conditional_csv(const ConditionalReport& r, const std::string& path);

}  // namespace shocklab
