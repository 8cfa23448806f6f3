#include "shocklab/templates.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "shocklab/errors.hpp"

namespace shocklab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double phi(double z) { return std::exp(-z * z) / std::sqrt(std::numbers::pi); }

double weight(double y) { return std::pow(1.0 + std::abs(y), -1.5); }

std::vector<double> reversed_negated(const std::vector<double>& v) {
  std::vector<double> out(v.rbegin(), v.rend());
  for (double& x : out) x = -x;
  return out;
}

std::vector<double> reversed(const std::vector<double>& v) { return {v.rbegin(), v.rend()}; }

Matrix reverse_cols(const Matrix& m) { return m.rowwise().reverse(); }

// int f over the real line, split at the given points; adaptive Gauss-Kronrod per
// piece, exp-sinh on the algebraically decaying tails.
double integrate_line(const std::function<double(double)>& f, std::vector<double> breaks, double tol) {
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> pts;
  for (double b : breaks)
    if (pts.empty() || b > pts.back()) pts.push_back(b);
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0, err_sum = 0.0, l1_sum = 0.0;
  auto add = [&](double v, double err, double l1) {
    if (!std::isfinite(v)) throw QuadratureError("non-finite quadrature value");
    total += v;
    err_sum += err;
    l1_sum += l1;
  };
  auto tail = [&](double a, bool right) {
    static boost::math::quadrature::exp_sinh<double> es;
    double err = 0.0, l1 = 0.0;
    const double v = es.integrate(
        [&](double u) { return std::isfinite(u) ? f(right ? a + u : a - u) : 0.0; }, 0.0, kInf, tol, &err, &l1);
    add(v, err, l1);
  };
  tail(pts.front(), false);
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    // mapped to [0, 1]: the library's error estimate is not rescaled by the interval length
    const double a = pts[i], w = pts[i + 1] - pts[i];
    const double v = GK::integrate([&](double u) { return w * f(a + w * u); }, 0.0, 1.0, 15, tol, &err, &l1);
    add(v, err, l1);
  }
  tail(pts.back(), true);
  if (err_sum > 100 * tol * l1_sum + 1e-300) throw QuadratureError("y-quadrature did not converge");
  return total;
}

// Break points where the integrands of the checks change character at time tau.
std::vector<double> breaks_for(double x, double tau, const TemplateParams& p) {
  std::vector<double> b{0.0, x};
  std::vector<double> speeds = p.a_minus;
  speeds.insert(speeds.end(), p.a_plus.begin(), p.a_plus.end());
  const double w = std::sqrt(p.M * std::max(tau, 0.0)) + 1e-300;
  double amax = 0.0;
  for (double a : speeds) {
    amax = std::max(amax, std::abs(a));
    for (double c : {x - a * tau, a * tau, -a * tau, a * (tau + 1), -a * (tau + 1), x + a * tau}) {
      b.push_back(c);
      if (w < 1.0)
        for (double k : {1.0, 3.0, 10.0}) {
          b.push_back(c - k * w);
          b.push_back(c + k * w);
        }
    }
  }
  // exponential localization scales
  for (double k : {1.0, 3.0, 10.0, 30.0})
    for (double len : {1.0 / p.eta, 1.0 / p.theta_loc}) {
      b.push_back(k * len);
      b.push_back(-k * len);
      b.push_back(x + k * len);
      b.push_back(x - k * len);
    }
  // centers of the reflected Gaussians in the kernel majorant
  for (double ak : speeds)
    for (double aj : speeds)
      if (aj != 0.0)
        for (double sg : {-1.0, 1.0}) b.push_back(sg * ak * (tau - sg * x / aj));
  const double Y = std::abs(x) + amax * (tau + 1) + 20 * std::sqrt(p.M * (tau + 1)) + 50;
  b.push_back(-Y);
  b.push_back(Y);
  std::vector<double> out;
  for (double v : b)
    if (std::isfinite(v) && std::abs(v) <= Y) out.push_back(v);
  return out;
}

std::vector<double> merge(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double kernel_component(const KernelValue& k, int which) {
  switch (which) {
    case 0: return k.e;
    case 1: return k.e_t;
    case 2: return k.e_y;
    default: return k.e_yt;
  }
}

// sum_j |component of e_j(y,t) - component of e_j(y, inf)| (or without the subtraction)
double kernel_abs(double y, double t, const TemplateParams& p, int which, bool minus_limit) {
  double s = 0.0;
  for (int j = 0; j < p.ell(); ++j) {
    const auto k = minus_limit ? excited_kernel_deficit(j, y, t, p) : excited_kernel(j, y, t, p);
    s += std::abs(kernel_component(k, which));
  }
  return s;
}

// Zeros of the signed kernel components in y; |.| has kinks there. The scan
// step is a small fraction of the narrowest kernel width.
std::vector<double> kernel_zeros(double t, const TemplateParams& p, int which, bool minus_limit) {
  double amax = 0.0, bmin = kInf, bmax = 0.0;
  for (int k = 0; k < p.n(); ++k) {
    amax = std::max({amax, std::abs(p.a_minus[k]), std::abs(p.a_plus[k])});
    bmin = std::min({bmin, p.beta_minus[k], p.beta_plus[k]});
    bmax = std::max({bmax, p.beta_minus[k], p.beta_plus[k]});
  }
  const double hi = amax * (t + 1) + 40 * std::sqrt(bmax * (t + 1)) + 40 / p.eta;
  const double lo = -hi;
  const int n = static_cast<int>(std::ceil((hi - lo) / (0.1 * std::sqrt(bmin))));
  std::vector<double> out;
  for (int j = 0; j < p.ell(); ++j) {
    auto g = [&](double y) {
      return kernel_component(minus_limit ? excited_kernel_deficit(j, y, t, p) : excited_kernel(j, y, t, p), which);
    };
    double y0 = lo, g0 = g(lo);
    for (int i = 1; i <= n; ++i) {
      const double y1 = lo + (hi - lo) * i / n, g1 = g(y1);
      if (g0 * g1 < 0) {
        std::uintmax_t iters = 100;
        const auto r = boost::math::tools::toms748_solve(g, y0, y1, g0, g1,
                                                         boost::math::tools::eps_tolerance<double>(50), iters);
        out.push_back(0.5 * (r.first + r.second));
      }
      y0 = y1;
      g0 = g1;
    }
  }
  return out;
}

}  // namespace

LTable LTable::ones(int ell, int n) {
  LTable l;
  l.c_minus = Matrix::Ones(ell, n);
  l.c_plus = Matrix::Ones(ell, n);
  l.d_minus = Matrix::Zero(ell, n);
  l.d_plus = Matrix::Zero(ell, n);
  return l;
}

void TemplateParams::validate() const {
  const size_t k = a_minus.size();
  if (k == 0 || a_plus.size() != k || beta_minus.size() != k || beta_plus.size() != k)
    throw DomainError("template speeds and rates need n entries on each side");
  if (!(M > 0)) throw DomainError("template constant M must be positive");
  for (size_t i = 0; i < k; ++i)
    if (!(beta_minus[i] > 0 && beta_plus[i] > 0)) throw DomainError("diffusion rates must be positive");
  if (!std::is_sorted(a_minus.begin(), a_minus.end()) || !std::is_sorted(a_plus.begin(), a_plus.end()))
    throw DomainError("speeds must be sorted ascending");
  if (l.c_minus.cols() != static_cast<Eigen::Index>(k) || l.c_plus.cols() != static_cast<Eigen::Index>(k))
    throw DomainError("l table has the wrong number of columns");
  if (gamma != 0 && gamma != 1) throw DomainError("gamma must be 0 or 1");
}

TemplateParams TemplateParams::mirrored() const {
  TemplateParams m = *this;
  m.a_minus = reversed_negated(a_plus);
  m.a_plus = reversed_negated(a_minus);
  m.beta_minus = reversed(beta_plus);
  m.beta_plus = reversed(beta_minus);
  m.l.c_minus = reverse_cols(l.c_plus);
  m.l.c_plus = reverse_cols(l.c_minus);
  m.l.d_minus = reverse_cols(l.d_plus);
  m.l.d_plus = reverse_cols(l.d_minus);
  return m;
}

TemplateParams TemplateParams::burgers() {
  TemplateParams p;
  p.a_minus = {1.0};
  p.a_plus = {-1.0};
  p.beta_minus = {1.0};
  p.beta_plus = {1.0};
  p.M = 16.0;
  p.eta = 1.0;
  p.theta_loc = 1.0;
  p.gamma = 0;
  p.l = LTable::ones(1, 1);
  return p;
}

double errfn(double z) { return 0.5 * std::erfc(-z); }

double chi(double x, double t, const TemplateParams& p) {
  return (x >= p.a_minus.front() * t && x <= p.a_plus.back() * t) ? 1.0 : 0.0;
}

double theta_template(double x, double t, const TemplateParams& p) {
  if (t < 0) throw DomainError("templates need t >= 0");
  double s = 0.0;
  auto term = [&](double a) {
    if (t == 0) {
      if (x == 0.0) throw DomainError("theta is singular at t = 0 on a characteristic");
      return 0.0;
    }
    const double d = x - a * t;
    return std::pow(1 + t, -0.5) * std::exp(-d * d / (p.M * t));
  };
  for (double a : p.a_minus)
    if (a < 0) s += term(a);
  for (double a : p.a_plus)
    if (a > 0) s += term(a);
  return s;
}

double psi1(double x, double t, const TemplateParams& p) {
  if (chi(x, t, p) == 0.0) return 0.0;
  double s = 0.0;
  auto term = [&](double a) { return std::pow(1 + std::abs(x) + t, -0.5) * std::pow(1 + std::abs(x - a * t), -0.5); };
  for (double a : p.a_minus)
    if (a < 0) s += term(a);
  for (double a : p.a_plus)
    if (a > 0) s += term(a);
  return s;
}

double psi2(double x, double t, const TemplateParams& p) {
  if (t < 0) throw DomainError("templates need t >= 0");
  if (chi(x, t, p) == 1.0) return 0.0;
  const double r = std::sqrt(t);
  return std::pow(1 + std::abs(x - p.a_minus.front() * t) + r, -1.5) +
         std::pow(1 + std::abs(x - p.a_plus.back() * t) + r, -1.5);
}

double template_sum(double x, double t, const TemplateParams& p) {
  return theta_template(x, t, p) + psi1(x, t, p) + psi2(x, t, p);
}

namespace {

KernelValue kernel_impl(int j, double y, double t, const TemplateParams& p, bool deficit) {
  if (t < 0) throw DomainError("kernel needs t >= 0");
  if (j < 0 || j >= p.ell()) throw DomainError("kernel index out of range");
  // y > 0 is the mirror image of the y <= 0 formula
  const bool right = y > 0;
  const double yy = right ? -y : y;
  const double sgn = right ? -1.0 : 1.0;
  KernelValue out;
  const int n = p.n();
  for (int k = 0; k < n; ++k) {
    const double a = right ? -p.a_plus[k] : p.a_minus[k];
    if (!(a > 0)) continue;
    const double beta = right ? p.beta_plus[k] : p.beta_minus[k];
    const double c = right ? p.l.c_plus(j, k) : p.l.c_minus(j, k);
    const double d = right ? p.l.d_plus(j, k) : p.l.d_minus(j, k);
    const double ex = p.gamma * d * std::exp(-p.eta * std::abs(yy));
    const double l = c + ex;
    const double ly = p.eta * ex;  // d/dyy of e^{eta yy}, yy <= 0
    if (std::isinf(t)) {
      if (deficit) continue;
      out.e += l;
      out.e_y += sgn * ly;
      continue;
    }
    const double s = t + 1, r = std::sqrt(4 * beta * s);
    const double g = (yy + a * s) / r, h = (yy - a * t) / r;
    const double gt = a / r - g / (2 * s), ht = -a / r - h / (2 * s);
    // 1 - errfn(g) = erfc(g) / 2
    const double E = deficit ? -0.5 * (std::erfc(g) + std::erfc(-h)) : errfn(g) - errfn(h);
    const double Et = phi(g) * gt - phi(h) * ht;
    const double Ey = (phi(g) - phi(h)) / r;
    const double Eyt = (-2 * g * phi(g) * gt + 2 * h * phi(h) * ht) / r - (phi(g) - phi(h)) / (2 * s * r);
    out.e += E * l;
    out.e_t += Et * l;
    out.e_y += sgn * (Ey * l + E * ly);
    out.e_yt += sgn * (Eyt * l + Et * ly);
  }
  return out;
}

}  // namespace

KernelValue excited_kernel(int j, double y, double t, const TemplateParams& p) {
  return kernel_impl(j, y, t, p, false);
}

KernelValue excited_kernel_deficit(int j, double y, double t, const TemplateParams& p) {
  return kernel_impl(j, y, t, p, true);
}

double psi_source(double y, double s, const TemplateParams& p) {
  if (!(s > 0)) throw DomainError("Psi needs s > 0");
  const double T = template_sum(y, s, p);
  return std::sqrt(1 + s) / std::sqrt(s) * T * T + T / (1 + s);
}

double gtilde_majorant(double x, double t, double y, int s, int dy, const TemplateParams& p0) {
  if (!(t > 0)) throw DomainError("kernel majorant needs t > 0");
  if (y > 0) return gtilde_majorant(-x, t, -y, s, dy, p0.mirrored());
  const TemplateParams& p = p0;
  const double xp = std::max(x, 0.0), xm = std::max(-x, 0.0);
  const double rt = 1.0 / std::sqrt(t);
  double S = 0.0;
  for (double a : p.a_minus) {
    const double d = x - y - a * t;
    S += rt * std::exp(-d * d / (p.M * t)) * std::exp(-p.eta * xp);
  }
  for (double ak : p.a_minus) {
    if (!(ak > 0) || ak * t < std::abs(y)) continue;
    const double tt = t - std::abs(y / ak);
    for (double aj : p.a_minus)
      if (aj < 0) {
        const double d = x - aj * tt;
        S += rt * std::exp(-d * d / (p.M * t)) * std::exp(-p.eta * xp);
      }
    for (double aj : p.a_plus)
      if (aj > 0) {
        const double d = x - aj * tt;
        S += rt * std::exp(-d * d / (p.M * t)) * std::exp(-p.eta * xm);
      }
  }
  const double base = std::exp(-p.eta * (std::abs(x - y) + t));
  const double loc = std::exp(-p.theta_loc * std::abs(x));
  const double pref = std::pow(t, -0.5 * s) + loc;
  if (dy == 0) return base + pref * S;
  return base + rt * (pref + p.gamma * std::exp(-p.theta_loc * std::abs(y))) * S;
}

double commutator_majorant(double x, double t, double y, const TemplateParams& p) {
  if (!(t > 0)) throw DomainError("kernel majorant needs t > 0");
  const double d = x - y;
  return std::exp(-d * d / (p.M * t)) / std::sqrt(t);
}

std::string to_string(ConvolutionKind k) {
  switch (k) {
    case ConvolutionKind::linear_g: return "linear_g";
    case ConvolutionKind::linear_gx: return "linear_gx";
    case ConvolutionKind::linear_et: return "linear_et";
    case ConvolutionKind::linear_e: return "linear_e";
    case ConvolutionKind::linear_e_diff: return "linear_e_diff";
    case ConvolutionKind::nonlinear_gy: return "nonlinear_gy";
    case ConvolutionKind::nonlinear_gyx: return "nonlinear_gyx";
    case ConvolutionKind::nonlinear_gx: return "nonlinear_gx";
    case ConvolutionKind::nonlinear_eyt: return "nonlinear_eyt";
    case ConvolutionKind::nonlinear_ey_inf: return "nonlinear_ey_inf";
    case ConvolutionKind::nonlinear_ey_diff: return "nonlinear_ey_diff";
    case ConvolutionKind::commutator: return "commutator";
  }
  return "?";
}

std::vector<ConvolutionKind> all_convolution_kinds() {
  using K = ConvolutionKind;
  return {K::linear_g,     K::linear_gx,     K::linear_et,        K::linear_e,
          K::linear_e_diff, K::nonlinear_gy, K::nonlinear_gyx,    K::nonlinear_gx,
          K::nonlinear_eyt, K::nonlinear_ey_inf, K::nonlinear_ey_diff, K::commutator};
}

double convolution_rhs(ConvolutionKind kind, double x, double t, const TemplateParams& p) {
  using K = ConvolutionKind;
  switch (kind) {
    case K::linear_g:
    case K::nonlinear_gy:
    case K::nonlinear_gyx:
    case K::nonlinear_gx:
    case K::commutator: return template_sum(x, t, p);
    case K::linear_gx: return (1.0 / std::sqrt(t) + 1.0) * template_sum(x, t, p);
    case K::linear_et: return std::pow(1 + t, -1.5);
    case K::linear_e: return 1.0;
    case K::linear_e_diff:
    case K::nonlinear_ey_diff: return std::pow(1 + t, -0.5);
    case K::nonlinear_eyt: return 1.0 / (1 + t);
    case K::nonlinear_ey_inf: return p.gamma * std::pow(1 + t, -0.5);
  }
  return 0.0;
}

double convolution_lhs(ConvolutionKind kind, double x, double t, const TemplateParams& p, double tol) {
  using K = ConvolutionKind;
  p.validate();
  if (!(t > 0)) throw DomainError("convolution checks need t > 0");
  // inner y-integral at time s for the nonlinear kinds
  auto inner = [&](double s, const std::function<double(double)>& f, int zeros_of = -1, bool diff = false) {
    const double tau = std::max(t - s, 0.0);
    auto b = merge(breaks_for(zeros_of >= 0 ? 0.0 : x, tau, p), breaks_for(0.0, s, p));
    if (zeros_of >= 0) b = merge(b, kernel_zeros(tau, p, zeros_of, diff));
    return integrate_line(f, b, 0.1 * tol);
  };
  // s = a + (b - a) sin^2(pi u / 2) removes inverse square-root endpoint singularities
  auto outer = [&](double a, double b, const std::function<double(double)>& g) {
    if (!(b > a)) return 0.0;
    const double h = 0.5 * std::numbers::pi;
    auto gu = [&](double u) {
      const double sn = std::sin(h * u), cs = std::cos(h * u);
      return g(a + (b - a) * sn * sn) * (b - a) * 2 * h * sn * cs;
    };
    double err = 0.0, l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(gu, 0.0, 1.0, 20, tol, &err, &l1);
    if (!std::isfinite(v) || err > 100 * tol * l1 + 1e-300) throw QuadratureError("s-quadrature did not converge");
    return v;
  };
  switch (kind) {
    case K::linear_g:
    case K::linear_gx: {
      const int s = kind == K::linear_gx ? 1 : 0;
      return integrate_line([&](double y) { return gtilde_majorant(x, t, y, s, 0, p) * weight(y); },
                            breaks_for(x, t, p), tol);
    }
    case K::commutator:
      return integrate_line([&](double y) { return commutator_majorant(x, t, y, p) * weight(y); },
                            breaks_for(x, t, p), tol);
    case K::linear_et:
    case K::linear_e:
    case K::linear_e_diff: {
      const int which = kind == K::linear_et ? 1 : 0;
      const bool diff = kind == K::linear_e_diff;
      const auto b = breaks_for(0.0, t, p);
      return integrate_line([&](double y) { return kernel_abs(y, t, p, which, diff) * weight(y); },
                            merge(b, kernel_zeros(t, p, which, diff)), tol);
    }
    case K::nonlinear_gy:
      return outer(0.0, t, [&](double s) {
        if (s <= 0 || s >= t) return 0.0;
        return inner(s, [&](double y) { return gtilde_majorant(x, t - s, y, 0, 1, p) * psi_source(y, s, p); });
      });
    case K::nonlinear_gyx:
      return outer(0.0, t - 1.0, [&](double s) {
        if (s <= 0) return 0.0;
        return inner(s, [&](double y) { return gtilde_majorant(x, t - s, y, 1, 1, p) * psi_source(y, s, p); });
      });
    case K::nonlinear_gx:
      return outer(std::max(0.0, t - 1.0), t, [&](double s) {
        if (s >= t) return 0.0;
        return inner(s, [&](double y) { return gtilde_majorant(x, t - s, y, 1, 0, p) * template_sum(y, s, p); });
      });
    case K::nonlinear_eyt:
      return outer(0.0, t, [&](double s) {
        if (s <= 0) return 0.0;
        return inner(s, [&](double y) { return kernel_abs(y, t - s, p, 3, false) * psi_source(y, s, p); }, 3);
      });
    case K::nonlinear_ey_diff:
      return outer(0.0, t, [&](double s) {
        if (s <= 0) return 0.0;
        return inner(s, [&](double y) { return kernel_abs(y, t - s, p, 2, true) * psi_source(y, s, p); }, 2, true);
      });
    case K::nonlinear_ey_inf: {
      if (p.gamma == 0) {
        // e_y(., inf) = l' vanishes identically when gamma = 0
        double probe = 0.0;
        for (double y : {-3.0, -0.5, 0.5, 3.0}) probe += kernel_abs(y, kInf, p, 2, false);
        if (probe == 0.0) return 0.0;
      }
      // s = t / v^4 maps [t, inf) to (0, 1] and leaves a regular integrand
      double err = 0.0, l1 = 0.0;
      const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          [&](double u) {
            if (!(u > 0)) return 0.0;
            const double u2 = u * u, s = t / (u2 * u2);
            return 4 * t / (u2 * u2 * u) *
                   integrate_line([&](double y) { return kernel_abs(y, kInf, p, 2, false) * psi_source(y, s, p); },
                                  breaks_for(0.0, s, p), 0.1 * tol);
          },
          0.0, 1.0, 12, tol, &err, &l1);
      if (!std::isfinite(v) || err > 100 * tol * l1 + 1e-300) throw QuadratureError("tail s-quadrature did not converge");
      return v;
    }
  }
  return 0.0;
}

std::vector<SamplePoint> standard_samples(ConvolutionKind kind) {
  using K = ConvolutionKind;
  std::vector<SamplePoint> out;
  const bool short_time = kind == K::commutator;
  // the e-kernel lines do not depend on x
  const bool x_free = kind == K::linear_et || kind == K::linear_e || kind == K::linear_e_diff ||
                      kind == K::nonlinear_eyt || kind == K::nonlinear_ey_inf || kind == K::nonlinear_ey_diff;
  const std::vector<double> ts = short_time ? std::vector<double>{0.1, 0.4, 1.0} : std::vector<double>{0.5, 2, 10, 50};
  const std::vector<double> xs = x_free ? std::vector<double>{0.0} : std::vector<double>{-20.0, -5.0, 0.0, 5.0, 20.0};
  for (double t : ts)
    for (double x : xs) out.push_back({x, t});
  return out;
}

ConvolutionReport convolution_check(ConvolutionKind kind, const TemplateParams& p,
                                    const std::vector<SamplePoint>& samples, double tol, double fine_tol) {
  ConvolutionReport r;
  r.kind = kind;
  for (const auto& sp : samples) {
    ConvolutionSample c{sp.x, sp.t, convolution_lhs(kind, sp.x, sp.t, p, tol), convolution_rhs(kind, sp.x, sp.t, p)};
    const double fine = convolution_lhs(kind, sp.x, sp.t, p, fine_tol);
    if (c.rhs > 0) {
      r.constant = std::max(r.constant, c.lhs / c.rhs);
      r.constant_fine = std::max(r.constant_fine, fine / c.rhs);
    } else if (c.lhs != 0.0 || fine != 0.0) {
      r.rhs_zero_lhs_zero = false;
    }
    r.samples.push_back(c);
  }
  r.drift = r.constant > 0 ? std::abs(r.constant_fine / r.constant - 1.0) : std::abs(r.constant_fine);
  r.stable = r.drift <= 0.05 && r.rhs_zero_lhs_zero && std::isfinite(r.constant);
  return r;
}

RateFit linear_et_rate(const TemplateParams& p, double t0, double t1, int points, double tol) {
  RateFit f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < points; ++i) {
    const double t = t0 * std::pow(t1 / t0, static_cast<double>(i) / (points - 1));
    const double v = convolution_lhs(ConvolutionKind::linear_et, 0.0, t, p, tol);
    f.t.push_back(t);
    f.values.push_back(v);
    const double X = std::log(1 + t), Y = std::log(v);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
  }
  f.slope = (points * sxy - sx * sy) / (points * sxx - sx * sx);
  return f;
}

std::vector<KernelBoundReport> kernel_bounds(const TemplateParams& p, int ny, int nt, double t_min) {
  p.validate();
  auto lattice = [&](int NY, int NT, const std::function<std::pair<double, double>(double, double)>& lr) {
    double c = 0.0;
    for (int i = 0; i < NY; ++i) {
      const double y = -50.0 * i / (NY - 1);
      for (int k = 0; k < NT; ++k) {
        const double t = t_min * std::pow(100.0 / t_min, static_cast<double>(k) / (NT - 1));
        const auto [l, r] = lr(y, t);
        if (l <= 1e-280) continue;
        c = std::max(c, r > 0 ? l / r : kInf);
      }
    }
    return c;
  };
  auto gauss_sum = [&](double y, double t) {
    double s = 0.0;
    for (double a : p.a_minus)
      if (a > 0) s += std::exp(-(y + a * t) * (y + a * t) / (p.M * t));
    return s;
  };
  auto erf_diff = [&](double y, double t) {
    double s = 0.0;
    for (size_t k = 0; k < p.a_minus.size(); ++k) {
      const double a = p.a_minus[k];
      if (!(a > 0)) continue;
      const double r = std::sqrt(4 * p.beta_minus[k] * (t + 1));
      s += errfn((y + a * t) / r) - errfn((y - a * t) / r);
    }
    return s;
  };
  double amin = kInf;
  for (double a : p.a_minus)
    if (a > 0) amin = std::min(amin, a);
  using LR = std::function<std::pair<double, double>(double, double)>;
  std::vector<std::pair<std::string, LR>> bounds = {
      {"e", [&](double y, double t) { return std::make_pair(kernel_abs(y, t, p, 0, false), erf_diff(y, t)); }},
      {"e_t", [&](double y, double t) {
         return std::make_pair(kernel_abs(y, t, p, 1, false), gauss_sum(y, t) / std::sqrt(t));
       }},
      {"e_y", [&](double y, double t) {
         return std::make_pair(kernel_abs(y, t, p, 2, false),
                               gauss_sum(y, t) / std::sqrt(t) + p.gamma * std::exp(-p.eta * std::abs(y)) * erf_diff(y, t));
       }},
      {"e_y_diff", [&](double y, double t) {
         return std::make_pair(kernel_abs(y, t, p, 2, true), gauss_sum(y, t) / std::sqrt(t));
       }},
      {"e_yt", [&](double y, double t) {
         return std::make_pair(kernel_abs(y, t, p, 3, false),
                               (1.0 / t + p.gamma * std::exp(-p.eta * std::abs(y)) / std::sqrt(t)) * gauss_sum(y, t));
       }},
  };
  std::vector<KernelBoundReport> out;
  for (const auto& [name, lr] : bounds) {
    KernelBoundReport r;
    r.name = name;
    r.constant = lattice(ny, nt, lr);
    r.constant_fine = lattice(2 * ny - 1, 2 * nt - 1, lr);
    r.drift = std::abs(r.constant_fine / r.constant - 1.0);
    out.push_back(r);
  }
  // e - e(inf) against errfn((|y| - a t)/(M sqrt t)); a is fitted on a grid below the slowest incoming speed
  KernelBoundReport best;
  best.name = "e_diff";
  best.constant = kInf;
  if (std::isfinite(amin)) {
    for (int i = 1; i <= 9; ++i) {
      const double a = 0.1 * i * amin;
      LR lr = [&, a](double y, double t) {
        return std::make_pair(kernel_abs(y, t, p, 0, true), errfn((std::abs(y) - a * t) / (p.M * std::sqrt(t))));
      };
      const double c = lattice(ny, nt, lr);
      if (c < best.constant) {
        best.constant = c;
        best.a_fit = a;
        best.constant_fine = lattice(2 * ny - 1, 2 * nt - 1, lr);
      }
    }
    best.drift = std::abs(best.constant_fine / best.constant - 1.0);
  }
  out.insert(out.begin() + 1, best);
  return out;
}

void write_template_csv(const TemplateParams& p, const std::vector<double>& xs, const std::vector<double>& ts,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  out << "x,t,theta,psi1,psi2,sum\n";
  char buf[256];
  for (double t : ts)
    for (double x : xs) {
      const double a = theta_template(x, t, p), b = psi1(x, t, p), c = psi2(x, t, p);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x, t, a, b, c, a + b + c);
      out << buf;
    }
}

}  // namespace shocklab
