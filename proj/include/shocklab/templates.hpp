#pragma once

#include <string>
#include <vector>

#include "shocklab/types.hpp"

namespace shocklab {

// l_{jk}^{+-}(y) = c + gamma * d * e^{-eta |y|}; rows j = 1..ell, columns k = 1..n.
struct LTable {
  Matrix c_minus, c_plus;
  Matrix d_minus, d_plus;
  static LTable ones(int ell, int n);
};

struct TemplateParams {
  std::vector<double> a_minus, a_plus;        // sorted ascending
  std::vector<double> beta_minus, beta_plus;  // > 0
  double M = 16.0;
  double eta = 1.0;
  double theta_loc = 1.0;  // localization rate e^{-theta|x|} in the kernel majorants
  int gamma = 0;
  LTable l;

  int n() const { return static_cast<int>(a_minus.size()); }
  int ell() const { return static_cast<int>(l.c_minus.rows()); }
  void validate() const;
  // (x, speeds) -> (-x, -speeds) with the +- data swapped
  TemplateParams mirrored() const;
  // Burgers about u- = 1, u+ = -1 with unit viscosity.
  static TemplateParams burgers();
};

double errfn(double z);  // (1 + erf z) / 2

double chi(double x, double t, const TemplateParams& p);
double theta_template(double x, double t, const TemplateParams& p);
double psi1(double x, double t, const TemplateParams& p);
double psi2(double x, double t, const TemplateParams& p);
double template_sum(double x, double t, const TemplateParams& p);

struct KernelValue {
  double e = 0.0, e_t = 0.0, e_y = 0.0, e_yt = 0.0;
};

// e_j of the excited kernel and its derivatives; t may be +infinity.
KernelValue excited_kernel(int j, double y, double t, const TemplateParams& p);
// e_j(y, t) - e_j(y, inf) and derivatives, evaluated without cancellation.
KernelValue excited_kernel_deficit(int j, double y, double t, const TemplateParams& p);

double psi_source(double y, double s, const TemplateParams& p);

// Majorants of |d_x^s G~| (dy = 0) and |d_x^s d_y G~| (dy = 1) with unit constant.
double gtilde_majorant(double x, double t, double y, int s, int dy, const TemplateParams& p);
// Short-time parametrix bound t^{-1/2} e^{-|x-y|^2/Mt} used for G~_x + G~_y.
double commutator_majorant(double x, double t, double y, const TemplateParams& p);

// Each convolution inequality: left side by quadrature, right side without its constant.
enum class ConvolutionKind {
  linear_g,         // int |G~| w dy <= C T
  linear_gx,        // int |G~_x| w dy <= C (t^{-1/2} + 1) T
  linear_et,        // int |e_t| w dy <= C (1+t)^{-3/2}
  linear_e,         // int |e| w dy <= C
  linear_e_diff,    // int |e - e(inf)| w dy <= C (1+t)^{-1/2}
  nonlinear_gy,     // int_0^t int |G~_y| Psi <= C T
  nonlinear_gyx,    // int_0^{t-1} int |G~_yx| Psi <= C T
  nonlinear_gx,     // int_{t-1}^t int |G~_x| T(y,s) <= C T
  nonlinear_eyt,    // int_0^t int |e_yt| Psi <= C (1+t)^{-1}
  nonlinear_ey_inf, // int_t^inf int |e_y(inf)| Psi <= C gamma (1+t)^{-1/2}
  nonlinear_ey_diff,// int_0^t int |e_y(t-s) - e_y(inf)| Psi <= C (1+t)^{-1/2}
  commutator        // int |G~_x + G~_y| w dy <= C T, t <= 1
};
std::string to_string(ConvolutionKind k);
std::vector<ConvolutionKind> all_convolution_kinds();

struct SamplePoint {
  double x = 0.0, t = 1.0;
};

struct ConvolutionSample {
  double x = 0.0, t = 0.0;
  double lhs = 0.0, rhs = 0.0;
};

struct ConvolutionReport {
  ConvolutionKind kind;
  std::vector<ConvolutionSample> samples;
  double constant = 0.0;       // max lhs/rhs at the base tolerance
  double constant_fine = 0.0;  // same with the refined tolerance
  double drift = 0.0;          // |constant_fine / constant - 1|
  bool stable = false;         // drift <= 5%
  bool rhs_zero_lhs_zero = true;  // where rhs = 0 the left side vanished as well
};

// Left side of one inequality at (x, t) with the given relative tolerance.
double convolution_lhs(ConvolutionKind kind, double x, double t, const TemplateParams& p, double tol);
double convolution_rhs(ConvolutionKind kind, double x, double t, const TemplateParams& p);

ConvolutionReport convolution_check(ConvolutionKind kind, const TemplateParams& p,
                                    const std::vector<SamplePoint>& samples, double tol = 1e-6,
                                    double fine_tol = 1e-9);

// Standard sample set: x in {-20,-5,0,5,20} x t in {0.5, 2, 10, 50} (t <= 1 for the commutator).
std::vector<SamplePoint> standard_samples(ConvolutionKind kind);

struct RateFit {
  std::vector<double> t, values;
  double slope = 0.0;
};
// log-log slope of int |e_t| (1+|y|)^{-3/2} dy against 1+t.
RateFit linear_et_rate(const TemplateParams& p, double t0 = 1.0, double t1 = 100.0, int points = 12,
                       double tol = 1e-9);

// Corollary-type kernel bounds on a (y, t) lattice with y <= 0.
struct KernelBoundReport {
  std::string name;
  double constant = 0.0;
  double constant_fine = 0.0;
  double drift = 0.0;
  double a_fit = 0.0;  // only for the e - e(inf) bound
};
// Lattice y in [-50, 0], t log-spaced in [t_min, 100]. Below t ~ 4 beta / M the
// Gaussian majorants are narrower than the kernel and the ratios are unbounded.
std::vector<KernelBoundReport> kernel_bounds(const TemplateParams& p, int ny = 101, int nt = 60, double t_min = 0.1);

// CSV heatmap (x, t, value) of theta+psi1+psi2.
void write_template_csv(const TemplateParams& p, const std::vector<double>& xs, const std::vector<double>& ts,
                        const std::string& path);

}  // namespace shocklab
