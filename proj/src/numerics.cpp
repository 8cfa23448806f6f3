#include "shocklab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "shocklab/errors.hpp"

namespace shocklab {

Grid Grid::make(double half_width, int nodes) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw DomainError("grid half-width must be positive");
  if (nodes < 5) throw DomainError("grid needs at least 5 nodes");
  Grid g;
  g.X = half_width;
  g.m = nodes;
  g.h = 2.0 * half_width / (nodes - 1);
  g.x.resize(nodes);
  for (int i = 0; i < nodes; ++i) g.x(i) = -half_width + i * g.h;
  // exact symmetry of the node set
  for (int i = 0; i < nodes / 2; ++i) g.x(nodes - 1 - i) = -g.x(i);
  if (nodes % 2 == 1) g.x(nodes / 2) = 0.0;
  return g;
}

int Grid::nearest(double xv) const {
  long i = std::lround((xv + X) / h);
  return static_cast<int>(std::clamp<long>(i, 0, m - 1));
}

Field::Field(Grid g, int comps, Vector v) : grid(std::move(g)), n(comps), values(std::move(v)) {
  if (values.size() != static_cast<Eigen::Index>(grid.m) * n) throw DomainError("field size does not match grid");
}

Field Field::zeros(const Grid& g, int comps) { return Field(g, comps, Vector::Zero(g.m * comps)); }

Vector Field::component(int comp) const { return shocklab::component(values, n, comp); }

Vector component(const Vector& v, int n, int comp) {
  const Eigen::Index m = v.size() / n;
  Vector out(m);
  for (Eigen::Index i = 0; i < m; ++i) out(i) = v(i * n + comp);
  return out;
}

void set_component(Vector& v, int n, int comp, const Vector& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) v(i * n + comp) = values(i);
}

std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
  const int np = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(np, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < np; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(np);
  for (int j = 0; j < np; ++j) w[j] = c[j][m];
  return w;
}

SparseMatrix diff_matrix(const Grid& grid, int order, int accuracy) {
  if (order != 1 && order != 2) throw DomainError("derivative order must be 1 or 2");
  if (accuracy != 2 && accuracy != 4) throw DomainError("accuracy must be 2 or 4");
  const int r = (order + accuracy - 1) / 2;
  const int npts = order + accuracy;
  const int m = grid.m;
  if (m < npts || m < 2 * r + 1) throw DomainError("grid too small for stencil");
  const double scale = std::pow(grid.h, -order);

  std::vector<double> central_nodes;
  for (int k = -r; k <= r; ++k) central_nodes.push_back(k);
  const auto central = fd_weights(0.0, central_nodes, order);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(m) * npts);
  for (int i = 0; i < m; ++i) {
    if (i >= r && i < m - r) {
      for (int k = -r; k <= r; ++k) {
        const double w = central[k + r];
        if (w != 0.0) trips.emplace_back(i, i + k, w * scale);
      }
      continue;
    }
    const int start = i < r ? 0 : m - npts;
    std::vector<double> nodes;
    for (int k = 0; k < npts; ++k) nodes.push_back(start + k);
    const auto w = fd_weights(static_cast<double>(i), nodes, order);
    for (int k = 0; k < npts; ++k) trips.emplace_back(i, start + k, w[k] * scale);
  }
  SparseMatrix D(m, m);
  D.setFromTriplets(trips.begin(), trips.end());
  return D;
}

SparseMatrix block_expand(const SparseMatrix& S, int n) {
  if (n == 1) return S;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(S.nonZeros()) * n);
  for (int k = 0; k < S.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(S, k); it; ++it)
      for (int c = 0; c < n; ++c) trips.emplace_back(it.row() * n + c, it.col() * n + c, it.value());
  SparseMatrix B(S.rows() * n, S.cols() * n);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

Vector quadrature_weights(const Grid& grid, QuadratureRule rule) {
  const int m = grid.m;
  const double h = grid.h;
  Vector w = Vector::Constant(m, h);
  if (rule == QuadratureRule::trapezoid) {
    w(0) = w(m - 1) = 0.5 * h;
    return w;
  }
  w.setZero();
  const int simpson_end = (m % 2 == 1) ? m - 1 : m - 4;
  for (int i = 0; i < simpson_end; i += 2) {
    w(i) += h / 3.0;
    w(i + 1) += 4.0 * h / 3.0;
    w(i + 2) += h / 3.0;
  }
  if (m % 2 == 0) {
    const double c = 3.0 * h / 8.0;
    w(m - 4) += c;
    w(m - 3) += 3.0 * c;
    w(m - 2) += 3.0 * c;
    w(m - 1) += c;
  }
  return w;
}

double quadrature(const Vector& values, const Vector& weights) {
  if (values.size() == 0) throw DomainError("quadrature of an empty field");
  if (values.size() != weights.size()) throw DomainError("quadrature weights do not match values");
  return values.dot(weights);
}

double integrate(const Grid& grid, const Vector& values) {
  const Eigen::Index n = values.size() / grid.m;
  if (values.size() == 0 || n * grid.m != values.size()) throw DomainError("field does not match grid");
  const Vector w = quadrature_weights(grid);
  double s = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) s += quadrature(component(values, static_cast<int>(n), static_cast<int>(c)), w);
  return s;
}

Vector cumulative_integral(const Grid& grid, const Vector& values) {
  Vector out(values.size());
  out(0) = 0.0;
  for (Eigen::Index i = 1; i < values.size(); ++i) out(i) = out(i - 1) + 0.5 * grid.h * (values(i) + values(i - 1));
  return out;
}

Norms::Norms(const Grid& grid, int n)
    : grid_(grid),
      n_(n),
      d1_(block_expand(diff_matrix(grid, 1, 4), n)),
      d2_(block_expand(diff_matrix(grid, 2, 4), n)),
      w_(quadrature_weights(grid)) {}

Vector Norms::pointwise_abs(const Vector& v) const {
  Vector a(grid_.m);
  for (int i = 0; i < grid_.m; ++i) a(i) = v.segment(i * n_, n_).norm();
  return a;
}

double Norms::l1(const Vector& v) const { return w_.dot(pointwise_abs(v)); }

double Norms::l2(const Vector& v) const {
  double s = 0.0;
  for (int i = 0; i < grid_.m; ++i) s += w_(i) * v.segment(i * n_, n_).squaredNorm();
  return std::sqrt(s);
}

double Norms::linf(const Vector& v) const { return pointwise_abs(v).maxCoeff(); }

Vector Norms::derivative(const Vector& v, int j) const {
  switch (j) {
    case 0: return v;
    case 1: return d1_ * v;
    case 2: return d2_ * v;
    case 3: return d1_ * (d2_ * v);
    case 4: return d2_ * (d2_ * v);
    default: throw DomainError("derivative order must lie in 0..4");
  }
}

double Norms::h(const Vector& v, int s) const {
  if (s < 0 || s > 4) throw DomainError("Sobolev index must lie in 0..4");
  double acc = 0.0;
  for (int j = 0; j <= s; ++j) {
    const double l = l2(derivative(v, j));
    acc += l * l;
  }
  return std::sqrt(acc);
}

double Norms::weighted_h4(const Vector& v) const {
  Vector g = v;
  for (int i = 0; i < grid_.m; ++i) g.segment(i * n_, n_) *= std::pow(1.0 + grid_.x(i) * grid_.x(i), 0.75);
  return h(g, 4);
}

double Norms::exp_sup(const Vector& v, double theta) const {
  const Vector a = pointwise_abs(v);
  double s = 0.0;
  for (int i = 0; i < grid_.m; ++i) s = std::max(s, std::exp(theta * std::abs(grid_.x(i))) * a(i));
  return s;
}

ImexStepper::ImexStepper(const SparseMatrix& A, Nonlinear nonlinear, double dt, ImexOrder order)
    : A_(A), N_(std::move(nonlinear)), dt_(dt), order_(order) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (order == ImexOrder::second) {
    gamma_ = 1.0 - 1.0 / std::sqrt(2.0);
    delta_ = 1.0 - 1.0 / (2.0 * gamma_);
  }
  SparseMatrix I(A.rows(), A.cols());
  I.setIdentity();
  SparseMatrix M = I - (gamma_ * dt) * A;
  M.makeCompressed();
  lu_.compute(M);
  if (lu_.info() != Eigen::Success) throw SingularSystemError("implicit operator factorization failed");
}

Vector ImexStepper::solve(const Vector& rhs) const {
  Vector x = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success || !x.allFinite()) throw SingularSystemError("implicit solve failed");
  return x;
}

Vector ImexStepper::step(double t, const Vector& v) const {
  const Vector k1 = N_ ? N_(t, v) : Vector::Zero(v.size());
  if (order_ == ImexOrder::first) return solve(v + dt_ * k1);
  const Vector u2 = solve(v + gamma_ * dt_ * k1);
  const Vector k2 = N_ ? N_(t + gamma_ * dt_, u2) : Vector::Zero(v.size());
  const Vector rhs = v + dt_ * ((1.0 - gamma_) * (A_ * u2) + delta_ * k1 + (1.0 - delta_) * k2);
  return solve(rhs);
}

Vector step_imex(const SparseMatrix& A, const ImexStepper::Nonlinear& N, const Vector& v, double t, double dt,
                 ImexOrder order) {
  return ImexStepper(A, N, dt, order).step(t, v);
}

CMatrix expm(const CMatrix& A) { return A.exp(); }
Matrix expm(const Matrix& A) { return A.exp(); }

namespace {
double norm1(const SparseMatrix& A) {
  Vector colsum = Vector::Zero(A.cols());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) colsum(it.col()) += std::abs(it.value());
  return colsum.size() ? colsum.maxCoeff() : 0.0;
}
}  // namespace

Vector expm_action(const SparseMatrix& A, double t, const Vector& v, double tol) {
  if (t == 0.0) return v;
  const double theta = 3.5;
  const double a = std::abs(t) * norm1(A);
  const int s = std::max(1, static_cast<int>(std::ceil(a / theta)));
  const double tau = t / s;
  Vector f = v;
  for (int step = 0; step < s; ++step) {
    Vector term = f;
    Vector acc = f;
    double prev = term.lpNorm<Eigen::Infinity>();
    for (int k = 1; k <= 60; ++k) {
      term = (tau / k) * (A * term);
      acc += term;
      const double cur = term.lpNorm<Eigen::Infinity>();
      if (cur + prev <= tol * acc.lpNorm<Eigen::Infinity>()) break;
      prev = cur;
    }
    f = acc;
  }
  return f;
}

CVector InvariantSubspace::coords(const Vector& f) const { return left.adjoint() * f.cast<cplx>(); }

Vector InvariantSubspace::from_coords(const CVector& c) const { return (right * c).real(); }

Vector InvariantSubspace::project(const Vector& f) const {
  if (dim() == 0) return Vector::Zero(f.size());
  return from_coords(coords(f));
}

Vector InvariantSubspace::propagate(double t, const Vector& f) const {
  if (dim() == 0) return Vector::Zero(f.size());
  return from_coords(expm(CMatrix(t * generator)) * coords(f));
}

Vector semigroup_apply(const SparseMatrix& L, double t, const Vector& f) {
  if (t < 0.0) throw ContractError("backward propagation requires the unstable projection");
  return expm_action(L, t, f);
}

Vector semigroup_apply(const SparseMatrix& L, double t, const Vector& f, const InvariantSubspace& sub,
                       SemigroupPart part) {
  switch (part) {
    case SemigroupPart::unstable: return sub.propagate(t, f);
    case SemigroupPart::center_stable: {
      if (t < 0.0) throw ContractError("backward propagation requires the unstable projection");
      const Vector g = f - sub.project(f);
      const Vector r = expm_action(L, t, g);
      return r - sub.project(r);
    }
    case SemigroupPart::full: return semigroup_apply(L, t, f);
  }
  return f;
}

}  // namespace shocklab
