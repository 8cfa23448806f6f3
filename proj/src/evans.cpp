#include "shocklab/evans.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "shocklab/errors.hpp"

namespace shocklab {

namespace {

constexpr double kPi = std::numbers::pi;

int parity(std::vector<int> v) {
  int sign = 1;
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = i + 1; j < v.size(); ++j)
      if (v[i] > v[j]) sign = -sign;
  return sign;
}

std::vector<std::vector<int>> subsets_of(int N, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < N; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

int mask_of(const std::vector<int>& s) {
  int m = 0;
  for (int i : s) m |= 1 << i;
  return m;
}

}  // namespace

cplx Contour::Segment::at(double s) const {
  if (!arc) return a + s * (b - a);
  return center + radius * std::exp(cplx(0.0, t0 + s * (t1 - t0)));
}

double Contour::Segment::length() const { return arc ? radius * std::abs(t1 - t0) : std::abs(b - a); }

cplx Contour::at(double s) const {
  double total = 0.0;
  for (const auto& g : segments) total += g.length();
  double target = std::clamp(s, 0.0, 1.0) * total;
  for (size_t i = 0; i < segments.size(); ++i) {
    const double L = segments[i].length();
    if (target <= L || i + 1 == segments.size()) return segments[i].at(L > 0 ? std::min(target / L, 1.0) : 0.0);
    target -= L;
  }
  return segments.front().at(0.0);
}

Contour Contour::circle(cplx center, double radius, int samples) {
  if (!(radius > 0)) throw DomainError("circle radius must be positive");
  Contour c;
  char buf[160];
  std::snprintf(buf, sizeof buf, "circle(center=%g%+gi, r=%g)", center.real(), center.imag(), radius);
  c.description = buf;
  Segment s;
  s.arc = true;
  s.center = center;
  s.radius = radius;
  s.t0 = 0.0;
  s.t1 = 2 * kPi;
  c.segments = {s};
  c.samples = samples;
  return c;
}

Contour Contour::rectangle(cplx lo, cplx hi, int samples) {
  if (!(hi.real() > lo.real() && hi.imag() > lo.imag())) throw DomainError("rectangle corners out of order");
  Contour c;
  char buf[160];
  std::snprintf(buf, sizeof buf, "rectangle([%g,%g]x[%g,%g])", lo.real(), hi.real(), lo.imag(), hi.imag());
  c.description = buf;
  const cplx v[4] = {lo, cplx(hi.real(), lo.imag()), hi, cplx(lo.real(), hi.imag())};
  for (int i = 0; i < 4; ++i) {
    Segment s;
    s.a = v[i];
    s.b = v[(i + 1) % 4];
    c.segments.push_back(s);
  }
  c.samples = samples;
  return c;
}

Contour Contour::right_region(double a, double R, double hole, int samples) {
  if (!(R > std::abs(a))) throw DomainError("outer radius must exceed |re_min|");
  const bool notch = hole > 0 && std::abs(a) < hole;
  if (hole > 0 && a <= -hole) throw ContourError("hole lies strictly inside the region; use two contours");
  Contour c;
  char buf[160];
  std::snprintf(buf, sizeof buf, "right_region(re>=%g, |l|<=%g, hole=%g)", a, R, notch ? hole : 0.0);
  c.description = buf;
  const double Y = std::sqrt(R * R - a * a);
  Segment s;
  if (notch) {
    const double y = std::sqrt(hole * hole - a * a);
    s.a = cplx(a, Y);
    s.b = cplx(a, y);
    c.segments.push_back(s);
    Segment arc;
    arc.arc = true;
    arc.center = 0.0;
    arc.radius = hole;
    arc.t0 = std::atan2(y, a);
    arc.t1 = -arc.t0;
    c.segments.push_back(arc);
    s.a = cplx(a, -y);
    s.b = cplx(a, -Y);
    c.segments.push_back(s);
  } else {
    s.a = cplx(a, Y);
    s.b = cplx(a, -Y);
    c.segments.push_back(s);
  }
  Segment big;
  big.arc = true;
  big.center = 0.0;
  big.radius = R;
  big.t0 = std::atan2(-Y, a);
  big.t1 = std::atan2(Y, a);
  c.segments.push_back(big);
  c.samples = samples;
  return c;
}

EvansFunction::EvansFunction(const ParabolicSystem& sys, const ShockProfile& profile, EvansOptions opts)
    : prof_(profile), opts_(opts), n_(sys.n), k_(sys.n) {
  if (n_ > 2) throw UnsupportedError("Evans function implemented for n <= 2");
  const Grid& g = prof_.grid;
  const int m = g.m, n = n_;
  subsets_ = subsets_of(2 * n, k_);
  binv_.resize(m);
  k0_.resize(m);
  k1_.resize(m);
  std::vector<Matrix> c1(m), c0(m);
  if (sys.form == Form::conservation) {
    // B w'' + (B' + M - A) w' + (M' - A') w, M = [d_k B u_x]_k, A = df(u)
    std::vector<Matrix> M(m), A(m);
    for (int i = 0; i < m; ++i) {
      const Vector u = prof_.derivative(0).segment(i * n, n), ux = prof_.derivative(1).segment(i * n, n);
      const auto db = sys.db(u);
      M[i].resize(n, n);
      for (int k = 0; k < n; ++k) M[i].col(k) = db[k] * ux;
      A[i] = sys.df(u);
      c1[i] = sys.db_times(u, ux) + M[i] - A[i];
    }
    const SparseMatrix D1 = diff_matrix(g, 1, 4);
    Matrix E(m, n * n);
    for (int i = 0; i < m; ++i) {
      const Matrix d = M[i] - A[i];
      E.row(i) = Eigen::Map<const Eigen::RowVectorXd>(d.data(), n * n);
    }
    const Matrix dE = D1 * E;
    for (int i = 0; i < m; ++i) c0[i] = Eigen::Map<const Matrix>(dE.row(i).eval().data(), n, n);
  } else {
    // B w'' - h_ux w' + (N - h_u) w, N = [d_k B u_xx]_k
    for (int i = 0; i < m; ++i) {
      const Vector u = prof_.derivative(0).segment(i * n, n), ux = prof_.derivative(1).segment(i * n, n),
                   uxx = prof_.derivative(2).segment(i * n, n);
      const auto db = sys.db(u);
      Matrix N(n, n);
      for (int k = 0; k < n; ++k) N.col(k) = db[k] * uxx;
      c1[i] = -sys.h_ux(u, ux);
      c0[i] = N - sys.h_u(u, ux);
    }
  }
  for (int i = 0; i < m; ++i) {
    const Vector u = prof_.derivative(0).segment(i * n, n);
    binv_[i] = sys.b(u).inverse();
    k0_[i] = binv_[i] * c0[i];
    k1_[i] = binv_[i] * c1[i];
  }
  for (int s = 0; s < 2; ++s) {
    const Vector u = s == 0 ? prof_.ends.u_minus : prof_.ends.u_plus;
    const Vector z = Vector::Zero(n);
    binv_lim_[s] = sys.b(u).inverse();
    const Matrix C1 = sys.form == Form::conservation ? Matrix(-sys.df(u)) : Matrix(-sys.h_ux(u, z));
    const Matrix C0 = sys.form == Form::conservation ? Matrix(Matrix::Zero(n, n)) : Matrix(-sys.h_u(u, z));
    k0_lim_[s] = binv_lim_[s] * C0;
    k1_lim_[s] = binv_lim_[s] * C1;
  }
  // real orthonormal frames of the decaying subspaces at lambda_ref; P(lambda) times these is analytic
  for (int s = 0; s < 2; ++s) {
    cplx mu;
    const Matrix P = decaying_projector(limit(s, opts_.lambda_ref), s, mu).real();
    Eigen::ColPivHouseholderQR<Matrix> qr(P);
    ref_[s] = Matrix(qr.householderQ()).leftCols(n).cast<cplx>();
  }
}

CMatrix EvansFunction::coefficient(double x, cplx lambda) const {
  const Grid& g = prof_.grid;
  const int n = n_;
  const double t = (x + g.X) / g.h;
  int j = static_cast<int>(std::floor(t)) - 1;
  j = std::clamp(j, 0, g.m - 4);
  Matrix bi = Matrix::Zero(n, n), a0 = Matrix::Zero(n, n), a1 = Matrix::Zero(n, n);
  for (int p = 0; p < 4; ++p) {
    double w = 1.0;
    for (int q = 0; q < 4; ++q)
      if (q != p) w *= (t - (j + q)) / static_cast<double>(p - q);
    bi += w * binv_[j + p];
    a0 += w * k0_[j + p];
    a1 += w * k1_[j + p];
  }
  CMatrix A = CMatrix::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n).setIdentity();
  A.bottomLeftCorner(n, n) = lambda * bi.cast<cplx>() - a0.cast<cplx>();
  A.bottomRightCorner(n, n) = -a1.cast<cplx>();
  return A;
}

CMatrix EvansFunction::limit(int side, cplx lambda) const {
  const int n = n_;
  CMatrix A = CMatrix::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n).setIdentity();
  A.bottomLeftCorner(n, n) = lambda * binv_lim_[side].cast<cplx>() - k0_lim_[side].cast<cplx>();
  A.bottomRightCorner(n, n) = -k1_lim_[side].cast<cplx>();
  return A;
}

CMatrix EvansFunction::compound(const CMatrix& A) const {
  if (k_ == 1) return A;
  const int N = static_cast<int>(subsets_.size());
  CMatrix out = CMatrix::Zero(N, N);
  std::vector<int> index(1 << (2 * n_), -1);
  for (int i = 0; i < N; ++i) index[mask_of(subsets_[i])] = i;
  for (int col = 0; col < N; ++col) {
    const auto& I = subsets_[col];
    for (int j = 0; j < k_; ++j) {
      for (int r = 0; r < 2 * n_; ++r) {
        const cplx a = A(r, I[j]);
        if (a == 0.0) continue;
        if (r == I[j]) {
          out(col, col) += a;
          continue;
        }
        if (std::find(I.begin(), I.end(), r) != I.end()) continue;
        std::vector<int> J = I;
        J[j] = r;
        const int sign = parity(J);
        std::sort(J.begin(), J.end());
        out(index[mask_of(J)], col) += static_cast<double>(sign) * a;
      }
    }
  }
  return out;
}

CVector EvansFunction::wedge_columns(const CMatrix& R) const {
  CVector v(subsets_.size());
  for (size_t s = 0; s < subsets_.size(); ++s) {
    CMatrix sub(k_, k_);
    for (int a = 0; a < k_; ++a) sub.row(a) = R.row(subsets_[s][a]);
    v(s) = sub.determinant();
  }
  return v;
}

cplx EvansFunction::pair(const CVector& a, const CVector& b) const {
  const int full = (1 << (2 * n_)) - 1;
  cplx sum = 0.0;
  for (size_t i = 0; i < subsets_.size(); ++i) {
    const int comp = full & ~mask_of(subsets_[i]);
    for (size_t j = 0; j < subsets_.size(); ++j) {
      if (mask_of(subsets_[j]) != comp) continue;
      std::vector<int> cat = subsets_[i];
      cat.insert(cat.end(), subsets_[j].begin(), subsets_[j].end());
      sum += static_cast<double>(parity(cat)) * a(i) * b(j);
    }
  }
  return sum;
}

CVector EvansFunction::integrate(int side, cplx lambda, cplx mu, const CVector& start, int sub,
                                 double& growth) const {
  const Grid& g = prof_.grid;
  const int c = g.center();
  const int cells = side == 0 ? c : g.m - 1 - c;
  const double hs = (side == 0 ? g.h : -g.h) / sub;
  const int N = static_cast<int>(start.size());
  const CMatrix shift = mu * CMatrix::Identity(N, N);
  CVector v = start;
  const double v0 = start.norm();
  double big = 1.0;
  double x = side == 0 ? -g.X : g.X;
  CMatrix Ax = compound(coefficient(x, lambda)) - shift;
  for (int step = 0; step < cells * sub; ++step) {
    const CMatrix Am = compound(coefficient(x + 0.5 * hs, lambda)) - shift;
    const CMatrix An = compound(coefficient(x + hs, lambda)) - shift;
    const CVector k1 = Ax * v;
    const CVector k2 = Am * (v + 0.5 * hs * k1);
    const CVector k3 = Am * (v + 0.5 * hs * k2);
    const CVector k4 = An * (v + hs * k3);
    v += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    x += hs;
    Ax = An;
    const double r = v.norm() / v0;
    if (!std::isfinite(r) || r > 1e150) throw StepSizeError("Evans integration overflowed");
    big = std::max(big, r);
  }
  growth = std::log10(big);
  return v;
}

CMatrix EvansFunction::decaying_projector(const CMatrix& A, int side, cplx& mu) const {
  const int n = n_;
  Eigen::ComplexEigenSolver<CMatrix> es(A);
  const CVector ev = es.eigenvalues();
  std::vector<int> order(2 * n);
  for (int i = 0; i < 2 * n; ++i) order[i] = i;
  // descending real part; the decaying set is the top n at -inf and the bottom n at +inf
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ev(a).real() > ev(b).real(); });
  const double gap = ev(order[n - 1]).real() - ev(order[n]).real();
  if (!(gap > opts_.gap_tol)) throw DomainError("lambda in the essential spectrum: limiting spectral gap closed");
  const CMatrix V = es.eigenvectors();
  const CMatrix Vi = V.inverse();
  CMatrix P = CMatrix::Zero(2 * n, 2 * n);
  mu = 0.0;
  for (int a = 0; a < n; ++a) {
    const int idx = side == 0 ? order[a] : order[n + a];
    P += V.col(idx) * Vi.row(idx);
    mu += ev(idx);
  }
  return P;
}

EvansEvaluation EvansFunction::operator()(cplx lambda) const {
  const int n = n_;
  EvansEvaluation out;
  out.lambda = lambda;
  CVector ends[2];
  int sub = opts_.substeps;
  CVector starts[2];
  cplx mus[2];
  double stiff = 0.0;
  for (int side = 0; side < 2; ++side) {
    const CMatrix A = limit(side, lambda);
    cplx mu;
    const CMatrix P = decaying_projector(A, side, mu);
    starts[side] = wedge_columns(P * ref_[side]);
    if (!(starts[side].norm() > 0)) throw DomainError("reference frame degenerates at this lambda");
    mus[side] = mu;
    const CVector cev = Eigen::ComplexEigenSolver<CMatrix>(compound(A)).eigenvalues();
    for (int i = 0; i < cev.size(); ++i) stiff = std::max(stiff, std::abs(cev(i) - mu));
  }
  if (sub <= 0) {
    sub = std::max(1, static_cast<int>(std::ceil(stiff * prof_.grid.h / 0.5)));
    if (sub > opts_.max_substeps) throw StepSizeError("Evans integration needs too many substeps");
  }
  out.substeps = sub;
  ends[0] = integrate(0, lambda, mus[0], starts[0], sub, out.growth_minus);
  ends[1] = integrate(1, lambda, mus[1], starts[1], sub, out.growth_plus);
  out.D = pair(ends[0], ends[1]);
  out.scale = ends[0].norm() * ends[1].norm();
  return out;
}

EvansEvaluation evans_eval(const ParabolicSystem& sys, const ShockProfile& profile, cplx lambda,
                           const EvansOptions& opts) {
  return EvansFunction(sys, profile, opts)(lambda);
}

ContourResult winding_number(const EvansFunction& D, const Contour& contour) {
  ContourResult r;
  r.description = contour.description;
  const int N0 = std::max(8, contour.samples);
  for (int j = 0; j <= N0; ++j) r.params.push_back(static_cast<double>(j) / N0);
  double min_rel = std::numeric_limits<double>::infinity();
  auto eval = [&](cplx l) {
    const auto e = D(l);
    min_rel = std::min(min_rel, std::abs(e.D) / e.scale);
    return e.D;
  };
  for (int j = 0; j < N0; ++j) {
    r.lambdas.push_back(contour.at(r.params[j]));
    r.values.push_back(eval(r.lambdas.back()));
  }
  r.lambdas.push_back(r.lambdas.front());
  r.values.push_back(r.values.front());
  const double limit = kPi / 2;
  for (int round = 0;; ++round) {
    std::vector<double> P{r.params[0]};
    std::vector<cplx> L{r.lambdas[0]}, V{r.values[0]};
    bool refined = false;
    for (size_t j = 0; j + 1 < r.params.size(); ++j) {
      if (std::abs(std::arg(r.values[j + 1] / r.values[j])) >= limit) {
        const double s = 0.5 * (r.params[j] + r.params[j + 1]);
        P.push_back(s);
        L.push_back(contour.at(s));
        V.push_back(eval(L.back()));
        refined = true;
      }
      P.push_back(r.params[j + 1]);
      L.push_back(r.lambdas[j + 1]);
      V.push_back(r.values[j + 1]);
    }
    r.params = std::move(P);
    r.lambdas = std::move(L);
    r.values = std::move(V);
    if (!refined) break;
    if (round >= D.options().max_refinements) throw ContourError("phase increments did not resolve on " + contour.description);
  }
  r.samples = static_cast<int>(r.params.size()) - 1;
  r.min_abs = std::abs(r.values[0]);
  r.max_abs = r.min_abs;
  double phase = 0.0;
  for (size_t j = 0; j + 1 < r.values.size(); ++j) {
    phase += std::arg(r.values[j + 1] / r.values[j]);
    r.min_abs = std::min(r.min_abs, std::abs(r.values[j]));
    r.max_abs = std::max(r.max_abs, std::abs(r.values[j]));
  }
  r.min_relative = min_rel;
  if (!(min_rel > D.options().safety))
    throw ContourError("contour passes too close to a zero of D: " + contour.description);
  r.raw = phase / (2 * kPi);
  r.winding = static_cast<int>(std::lround(r.raw));
  if (std::abs(r.raw - r.winding) > 1e-2) throw ContourError("winding sum is not an integer");
  return r;
}

ContourResult winding_number(const ParabolicSystem& sys, const ShockProfile& profile, const Contour& contour) {
  return winding_number(EvansFunction(sys, profile), contour);
}

ZeroOrder zero_order_at_origin(const EvansFunction& D, double radius, cplx center, int samples) {
  ZeroOrder z;
  z.radius = radius;
  z.center = center;
  const auto outer = winding_number(D, Contour::circle(center, radius, samples));
  const auto inner = winding_number(D, Contour::circle(center, radius / 2, samples));
  z.order = outer.winding;
  z.inner_order = inner.winding;
  if (z.order != z.inner_order)
    throw ContourError("annulus between r/2 and r contains a root; shrink the radius");
  z.ell = D.profile().ends.ell;
  z.matches_ell = z.order == z.ell;
  // Cauchy formula on the outer circle, trapezoid in the contour parameter
  cplx d1 = 0.0;
  for (size_t j = 0; j + 1 < outer.lambdas.size(); ++j) {
    const double ds = outer.params[j + 1] - outer.params[j];
    const cplx e0 = outer.lambdas[j] - center, e1 = outer.lambdas[j + 1] - center;
    d1 += 0.5 * ds * (outer.values[j] / e0 + outer.values[j + 1] / e1);
  }
  z.derivative = std::abs(d1) / D(center).scale;
  return z;
}

cplx refine_root(const EvansFunction& D, cplx guess, double tol, int max_iter) {
  cplx z0 = guess, z1 = guess + 1e-6 * (1.0 + std::abs(guess));
  cplx d0 = D(z0).D, d1 = D(z1).D;
  for (int it = 0; it < max_iter; ++it) {
    if (d1 == d0) break;
    const cplx z2 = z1 - d1 * (z1 - z0) / (d1 - d0);
    z0 = z1;
    d0 = d1;
    z1 = z2;
    d1 = D(z1).D;
    if (std::abs(z1 - z0) < tol * (1.0 + std::abs(z1))) break;
  }
  return z1;
}

std::vector<cplx> evans_roots(const EvansFunction& D, const Contour& contour) {
  const auto r = winding_number(D, contour);
  const int w = r.winding;
  if (w <= 0) return {};
  // power sums s_j = (1/2 pi i) \oint lambda^j dlog D
  std::vector<cplx> s(w + 1, 0.0);
  for (size_t j = 0; j + 1 < r.values.size(); ++j) {
    const cplx q = r.values[j + 1] / r.values[j];
    const cplx dlog(std::log(std::abs(q)), std::arg(q));
    const cplx mid = 0.5 * (r.lambdas[j] + r.lambdas[j + 1]);
    cplx p = 1.0;
    for (int k = 1; k <= w; ++k) {
      p *= mid;
      s[k] += p * dlog;
    }
  }
  for (int k = 1; k <= w; ++k) s[k] /= cplx(0.0, 2 * kPi);
  // Newton identities to elementary symmetric polynomials
  std::vector<cplx> e(w + 1, 0.0);
  e[0] = 1.0;
  for (int k = 1; k <= w; ++k) {
    cplx acc = 0.0;
    for (int i = 1; i <= k; ++i) acc += (i % 2 ? 1.0 : -1.0) * e[k - i] * s[i];
    e[k] = acc / static_cast<double>(k);
  }
  CMatrix C = CMatrix::Zero(w, w);
  for (int k = 0; k < w; ++k) C(0, k) = (k % 2 ? -1.0 : 1.0) * e[k + 1];
  for (int k = 1; k < w; ++k) C(k, k - 1) = 1.0;
  const CVector guesses = Eigen::ComplexEigenSolver<CMatrix>(C).eigenvalues();
  std::vector<cplx> roots;
  for (int k = 0; k < w; ++k) roots.push_back(refine_root(D, guesses(k)));
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return roots;
}

void write_evans_csv(const ContourResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  out << "re_lambda,im_lambda,re_D,im_D\n";
  char buf[128];
  for (size_t j = 0; j < r.lambdas.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.lambdas[j].real(), r.lambdas[j].imag(),
                  r.values[j].real(), r.values[j].imag());
    out << buf;
  }
}

}  // namespace shocklab
