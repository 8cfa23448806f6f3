#include "shocklab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "shocklab/errors.hpp"

namespace shocklab {

namespace {

void add_block(std::vector<Triplet>& t, int bi, int bj, int n, const Matrix& M) {
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (M(a, b) != 0.0) t.emplace_back(bi * n + a, bj * n + b, M(a, b));
}

Vector expanded_weights(const Grid& g, int n) {
  const Vector w = quadrature_weights(g);
  Vector out(g.m * n);
  for (int i = 0; i < g.m; ++i) out.segment(i * n, n).setConstant(w(i));
  return out;
}

// Column k is (d b / d u_k) g.
Matrix db_apply(const std::vector<Matrix>& dbs, const Vector& g) {
  const int n = static_cast<int>(g.size());
  Matrix C(n, n);
  for (int k = 0; k < n; ++k) C.col(k) = dbs[k] * g;
  return C;
}

CMatrix orthonormal_columns(const CMatrix& X) {
  Eigen::HouseholderQR<CMatrix> qr(X);
  return qr.householderQ() * CMatrix::Identity(X.rows(), X.cols());
}

CMatrix random_block(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  CMatrix X(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = cplx(nd(rng), nd(rng));
  return X;
}

// Orthonormal basis of the invariant subspace of A (or A^T) near sigma.
CMatrix block_inverse_iteration(const SparseMatrix& A, cplx sigma, int k, int iters, bool transpose,
                                unsigned seed) {
  const Eigen::Index N = A.rows();
  CSparseMatrix M = transpose ? CSparseMatrix(A.transpose().cast<cplx>()) : CSparseMatrix(A.cast<cplx>());
  CSparseMatrix I(N, N);
  I.setIdentity();
  M = M - sigma * I;
  M.makeCompressed();
  Eigen::SparseLU<CSparseMatrix> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) throw SingularSystemError("shifted operator factorization failed");
  CMatrix X = orthonormal_columns(random_block(N, k, seed));
  for (int it = 0; it < iters; ++it) {
    CMatrix Y = lu.solve(X);
    if (!Y.allFinite()) throw SingularSystemError("inverse iteration produced non-finite values");
    X = orthonormal_columns(Y);
  }
  return X;
}

// Rotate each column so its largest entry is real and positive.
void fix_phase(CMatrix& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Eigen::Index imax = 0;
    X.col(j).cwiseAbs().maxCoeff(&imax);
    const cplx ph = X(imax, j) / std::abs(X(imax, j));
    X.col(j) /= ph;
  }
}

CMatrix realify(const CMatrix& X) {
  Matrix span(X.rows(), 2 * X.cols());
  span << X.real(), X.imag();
  Eigen::ColPivHouseholderQR<Matrix> qr(span);
  const Matrix Q = qr.householderQ() * Matrix::Identity(X.rows(), X.cols());
  return Q.cast<cplx>();
}

CMatrix antiderivatives_of(const Grid& g, int n, const CMatrix& right) {
  CMatrix Phi(right.rows(), right.cols());
  for (Eigen::Index j = 0; j < right.cols(); ++j) {
    for (int c = 0; c < n; ++c) {
      const Vector re = cumulative_integral(g, component(right.col(j).real(), n, c));
      const Vector im = cumulative_integral(g, component(right.col(j).imag(), n, c));
      for (int i = 0; i < g.m; ++i) Phi(i * n + c, j) = cplx(re(i), im(i));
    }
  }
  return Phi;
}

}  // namespace

DiscretizedOperator assemble_L(const ParabolicSystem& s, const ShockProfile& p) {
  const int n = s.n, m = p.grid.m;
  const double h = p.grid.h;
  const Vector& U = p.values();
  if (U.size() != m * n) throw DomainError("profile does not match the model dimension");
  auto node = [&](const Vector& v, int i) { return Vector(v.segment(i * n, n)); };

  double bmax = 0.0;
  for (int i = 0; i < m; ++i) bmax = std::max(bmax, s.b(node(U, i)).eigenvalues().real().maxCoeff());
  const double kappa = 2.0 * bmax / (h * h);

  std::vector<Triplet> t;
  for (int c = 0; c < n; ++c) {
    t.emplace_back(c, c, -kappa);
    t.emplace_back((m - 1) * n + c, (m - 1) * n + c, -kappa);
  }
  DiscretizedOperator op;
  if (s.form == Form::conservation) {
    // flux at interface i+1/2 depends on v_i (P) and v_{i+1} (Q)
    std::vector<Matrix> P(m - 1), Q(m - 1);
    for (int i = 0; i + 1 < m; ++i) {
      const Vector a = node(U, i), b = node(U, i + 1);
      const Vector g = (b - a) / h;
      const Matrix bbar = 0.5 * (s.b(a) + s.b(b));
      P[i] = -bbar / h + 0.5 * db_apply(s.db(a), g) - 0.5 * s.df(a);
      Q[i] = bbar / h + 0.5 * db_apply(s.db(b), g) - 0.5 * s.df(b);
    }
    for (int i = 1; i < m - 1; ++i) {
      add_block(t, i, i + 1, n, Q[i] / h);
      add_block(t, i, i, n, (P[i] - Q[i - 1]) / h);
      add_block(t, i, i - 1, n, -P[i - 1] / h);
    }
    op.recipe = "conservation flux form, second order";
  } else {
    const SparseMatrix D1 = block_expand(diff_matrix(p.grid, 1, 2), n);
    const SparseMatrix D2 = block_expand(diff_matrix(p.grid, 2, 2), n);
    const Vector Px = D1 * U, Qxx = D2 * U;
    for (int i = 1; i < m - 1; ++i) {
      const Vector u = node(U, i), px = node(Px, i), qxx = node(Qxx, i);
      const Matrix B = s.b(u);
      const Matrix Hp = s.h_ux(u, px);
      const Matrix diag = -2.0 * B / (h * h) + db_apply(s.db(u), qxx) - s.h_u(u, px);
      add_block(t, i, i - 1, n, B / (h * h) + Hp / (2.0 * h));
      add_block(t, i, i, n, diag);
      add_block(t, i, i + 1, n, B / (h * h) - Hp / (2.0 * h));
    }
    op.recipe = "general form collocation, second order";
  }
  op.matrix = SparseMatrix(m * n, m * n);
  op.matrix.setFromTriplets(t.begin(), t.end());
  op.matrix.makeCompressed();
  op.grid = p.grid;
  op.n = n;
  op.form = s.form;
  op.kappa = kappa;
  op.zero_mode = p.derivative(1);
  return op;
}

double zero_mode_residual(const DiscretizedOperator& op) {
  const Vector r = op.matrix * op.zero_mode;
  const int n = op.n;
  const int m = op.grid.m;
  return std::sqrt(op.grid.h * r.segment(n, (m - 2) * n).squaredNorm());
}

PerturbationDynamics::PerturbationDynamics(ParabolicSystem sys, ShockProfile profile)
    : sys_(std::move(sys)), prof_(std::move(profile)) {
  op_ = assemble_L(sys_, prof_);
  if (sys_.form == Form::general) {
    d1_ = block_expand(diff_matrix(prof_.grid, 1, 2), sys_.n);
    d2_ = block_expand(diff_matrix(prof_.grid, 2, 2), sys_.n);
  }
  base_flow_ = flow(prof_.values());
}

Vector PerturbationDynamics::flow(const Vector& U) const {
  const int n = sys_.n, m = prof_.grid.m;
  const double h = prof_.grid.h;
  Vector out = Vector::Zero(m * n);
  if (sys_.form == Form::conservation) {
    std::vector<Vector> f(m);
    std::vector<Matrix> b(m);
    for (int i = 0; i < m; ++i) {
      const Vector u = U.segment(i * n, n);
      f[i] = sys_.f(u);
      b[i] = sys_.b(u);
    }
    Vector flux_prev;
    for (int i = 0; i + 1 < m; ++i) {
      const Vector flux = 0.5 * (b[i] + b[i + 1]) * (U.segment((i + 1) * n, n) - U.segment(i * n, n)) / h -
                          0.5 * (f[i] + f[i + 1]);
      if (i > 0) out.segment(i * n, n) = (flux - flux_prev) / h;
      flux_prev = flux;
    }
  } else {
    const Vector P = d1_ * U, Q = d2_ * U;
    for (int i = 1; i < m - 1; ++i) {
      const Vector u = U.segment(i * n, n);
      out.segment(i * n, n) = sys_.b(u) * Q.segment(i * n, n) - sys_.h(u, P.segment(i * n, n));
    }
  }
  return out;
}

Vector PerturbationDynamics::rhs(const Vector& v) const {
  const int n = sys_.n, m = prof_.grid.m;
  Vector r = flow(prof_.values() + v) - base_flow_;
  r.head(n) = -op_.kappa * v.head(n);
  r.segment((m - 1) * n, n) = -op_.kappa * v.segment((m - 1) * n, n);
  return r;
}

Vector PerturbationDynamics::residual(const Vector& v) const { return rhs(v) - op_.matrix * v; }

std::vector<cplx> locate_eigenvalues(const SparseMatrix& L, const SpectralOptions& o) {
  std::vector<cplx> out;
  const Eigen::Index N = L.rows();
  if (N <= o.dense_limit) {
    Eigen::EigenSolver<Matrix> es(Matrix(L), false);
    for (Eigen::Index i = 0; i < N; ++i) out.push_back(es.eigenvalues()(i));
  } else {
    // subspace iteration on (I - tau L)^{-1}; eigenvalues with |1 - tau lambda| < 1 dominate
    SparseMatrix I(N, N);
    I.setIdentity();
    SparseMatrix M = I - o.tau * L;
    M.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success) throw SingularSystemError("resolvent factorization failed");
    const int s = std::min<int>(o.block, static_cast<int>(N));
    std::mt19937 rng(12345);
    std::normal_distribution<double> nd;
    Matrix Q(N, s);
    for (Eigen::Index j = 0; j < s; ++j)
      for (Eigen::Index i = 0; i < N; ++i) Q(i, j) = nd(rng);
    for (int it = 0; it < o.block_iterations; ++it) {
      const Matrix Z = lu.solve(Q);
      Eigen::HouseholderQR<Matrix> qr(Z);
      Q = qr.householderQ() * Matrix::Identity(N, s);
    }
    const Matrix H = Q.transpose() * Matrix(lu.solve(Q));
    Eigen::EigenSolver<Matrix> es(H, false);
    for (int i = 0; i < s; ++i) {
      const cplx mu = es.eigenvalues()(i);
      if (std::abs(mu) > 0.0) out.push_back((1.0 - 1.0 / mu) / o.tau);
    }
  }
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

SpectralDecomposition SpectralDecomposition::from_basis(const Grid& grid, int n, Form form, const CMatrix& right,
                                                        const CMatrix& left_functions, const CMatrix& generator) {
  SpectralDecomposition d;
  d.grid = grid;
  d.n = n;
  d.form = form;
  d.weights = expanded_weights(grid, n);
  d.p = static_cast<int>(right.cols());
  CMatrix Wl = d.weights.cast<cplx>().asDiagonal() * left_functions;
  const CMatrix M = Wl.adjoint() * right;
  Wl = Wl * M.inverse().adjoint();
  d.unstable.right = right;
  d.unstable.left = Wl;
  d.unstable.generator = generator;
  d.left_functions = d.weights.cwiseInverse().cast<cplx>().asDiagonal() * Wl;
  if (d.p > 0) {
    const Eigen::VectorXcd ev = generator.eigenvalues();
    for (int j = 0; j < d.p; ++j) {
      d.eigenvalues.push_back(ev(j));
      d.ranks.push_back(1);
    }
    d.min_re = ev.real().minCoeff();
    d.beta = d.min_re / 2.0;
    d.omega = d.beta / 6.0;
  }
  if (form == Form::conservation) d.antiderivatives = antiderivatives_of(grid, n, right);
  return d;
}

SpectralDecomposition unstable_spectrum(const DiscretizedOperator& op, double cutoff, const SpectralOptions& o) {
  const SparseMatrix& L = op.matrix;
  const Eigen::Index N = L.rows();
  SpectralDecomposition d;
  d.grid = op.grid;
  d.n = op.n;
  d.form = op.form;
  d.weights = expanded_weights(op.grid, op.n);
  d.located = locate_eigenvalues(L, o);

  std::vector<cplx> sel;
  for (const cplx& l : d.located) {
    if (std::abs(l.real() - cutoff) <= o.ambiguity_tol * std::max(1.0, std::abs(l)))
      throw AmbiguousSplittingError("an eigenvalue lies on the cutoff; choose a different cutoff");
    if (l.real() > cutoff) sel.push_back(l);
  }

  // clusters of nearby eigenvalues (Jordan blocks split under discretization)
  std::vector<std::vector<cplx>> clusters;
  for (const cplx& l : sel) {
    bool placed = false;
    for (auto& c : clusters) {
      for (const cplx& q : c)
        if (std::abs(q - l) <= o.cluster_tol * (1.0 + std::abs(l))) {
          c.push_back(l);
          placed = true;
          break;
        }
      if (placed) break;
    }
    if (!placed) clusters.push_back({l});
  }

  std::vector<CMatrix> rights, lefts;
  std::vector<cplx> centers;
  const double imag_tol = 1e-8;
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    const auto& c = clusters[ci];
    cplx center(0.0, 0.0);
    for (const cplx& l : c) center += l;
    center /= static_cast<double>(c.size());
    const bool real_cluster = std::abs(center.imag()) <= imag_tol * (1.0 + std::abs(center));
    if (real_cluster) center = center.real();
    const int k = static_cast<int>(c.size());
    CMatrix X, Y;
    // conjugate partner already processed?
    bool mirrored = false;
    if (!real_cluster && center.imag() < 0.0) {
      for (size_t pj = 0; pj < centers.size(); ++pj)
        if (std::abs(centers[pj] - std::conj(center)) <= o.cluster_tol * (1.0 + std::abs(center)) &&
            rights[pj].cols() == k) {
          X = rights[pj].conjugate();
          Y = lefts[pj].conjugate();
          mirrored = true;
          break;
        }
    }
    if (!mirrored) {
      const cplx shift = center + 1e-9 * (1.0 + std::abs(center));
      X = block_inverse_iteration(L, shift, k, o.inverse_iterations, false, 101 + static_cast<unsigned>(ci));
      Y = block_inverse_iteration(L, std::conj(shift), k, o.inverse_iterations, true, 202 + static_cast<unsigned>(ci));
      if (real_cluster) {
        X = realify(X);
        Y = realify(Y);
      }
      fix_phase(X);
      fix_phase(Y);
    }
    rights.push_back(X);
    lefts.push_back(Y);
    centers.push_back(center);
  }

  int p = 0;
  for (const auto& X : rights) p += static_cast<int>(X.cols());
  CMatrix Xall(N, p), Yall(N, p);
  {
    int col = 0;
    for (size_t ci = 0; ci < rights.size(); ++ci) {
      Xall.middleCols(col, rights[ci].cols()) = rights[ci];
      Yall.middleCols(col, lefts[ci].cols()) = lefts[ci];
      col += static_cast<int>(rights[ci].cols());
    }
  }
  d.p = p;
  if (p > 0) {
    const CMatrix M = Yall.adjoint() * Xall;
    const CMatrix left_e = Yall * M.inverse().adjoint();
    const CMatrix LX = L.cast<cplx>() * Xall;
    d.unstable.right = Xall;
    d.unstable.left = left_e;
    d.unstable.generator = left_e.adjoint() * LX;
    d.left_functions = d.weights.cwiseInverse().cast<cplx>().asDiagonal() * left_e;
    int col = 0;
    for (size_t ci = 0; ci < rights.size(); ++ci) {
      const int k = static_cast<int>(rights[ci].cols());
      const CMatrix Jc = d.unstable.generator.block(col, col, k, k);
      const Eigen::VectorXcd ev = Jc.eigenvalues();
      const CMatrix Nil = Jc - centers[ci] * CMatrix::Identity(k, k);
      int chain = 0;
      CMatrix power = CMatrix::Identity(k, k);
      for (int r = 1; r <= std::min(k, 4); ++r) {
        power = power * Nil;
        const double tol_r = std::pow(o.cluster_tol * (1.0 + std::abs(centers[ci])), r) * k;
        if (power.norm() <= tol_r) {
          chain = r;
          break;
        }
      }
      if (chain == 0) chain = k;
      if (chain > 3) throw UnsupportedError("Jordan chain longer than 3");
      for (int j = 0; j < k; ++j) {
        d.eigenvalues.push_back(ev(j));
        d.ranks.push_back(chain);
      }
      col += k;
    }
    d.min_re = std::numeric_limits<double>::infinity();
    for (const cplx& l : d.eigenvalues) d.min_re = std::min(d.min_re, l.real());
    d.beta = d.min_re / 2.0;
    d.omega = d.beta / 6.0;
    if (d.form == Form::conservation) d.antiderivatives = antiderivatives_of(d.grid, d.n, Xall);
  } else {
    d.unstable.right = CMatrix(N, 0);
    d.unstable.left = CMatrix(N, 0);
    d.unstable.generator = CMatrix(0, 0);
    d.left_functions = CMatrix(N, 0);
    d.antiderivatives = CMatrix(N, 0);
  }

  // translational zero mode
  d.zero_mode = op.zero_mode;
  if (d.zero_mode.size() == N && d.zero_mode.norm() > 0.0 && !d.located.empty()) {
    cplx l0 = d.located.front();
    for (const cplx& l : d.located)
      if (std::abs(l) < std::abs(l0)) l0 = l;
    d.zero_eigenvalue = l0;
    const double shift = l0.real() + 1e-10;
    const CMatrix psi = block_inverse_iteration(L, shift, 1, o.inverse_iterations, false, 303);
    const CMatrix y = block_inverse_iteration(L, shift, 1, o.inverse_iterations, true, 404);
    const CVector z = d.zero_mode.cast<cplx>();
    d.zero_match = std::abs(psi.col(0).dot(z)) / (psi.col(0).norm() * z.norm());
    Vector yr = realify(y).col(0).real();
    Vector dual = yr.cwiseQuotient(d.weights);
    const double pairing = (d.weights.cwiseProduct(dual)).dot(d.zero_mode);
    d.zero_dual = dual / pairing;
  }
  return d;
}

EigenPair eigenpair_near(const SparseMatrix& L, double sigma, int iterations) {
  const CMatrix x = block_inverse_iteration(L, sigma, 1, iterations, false, 505);
  EigenPair e;
  e.vector = realify(x).col(0).real();
  e.vector /= e.vector.norm();
  Eigen::Index imax;
  e.vector.cwiseAbs().maxCoeff(&imax);
  if (e.vector(imax) < 0) e.vector = -e.vector;
  e.value = e.vector.dot(L * e.vector);
  return e;
}

Vector apply_projector(const SpectralDecomposition& spec, const Vector& f, Projector which) {
  if ((which == Projector::u_tilde || which == Projector::cs_tilde) && spec.form != Form::conservation)
    throw UnsupportedError("the tilde projectors need conservation form");
  switch (which) {
    case Projector::u: return spec.unstable.project(f);
    case Projector::cs: return f - spec.unstable.project(f);
    case Projector::u_tilde:
    case Projector::cs_tilde: {
      Vector ut = Vector::Zero(f.size());
      if (spec.p > 0) {
        const SparseMatrix D = block_expand(diff_matrix(spec.grid, 1, 4), spec.n);
        CMatrix dleft(spec.left_functions.rows(), spec.p);
        for (int j = 0; j < spec.p; ++j) {
          const Vector re = D * Vector(spec.left_functions.col(j).real());
          const Vector im = D * Vector(spec.left_functions.col(j).imag());
          for (Eigen::Index i = 0; i < re.size(); ++i) dleft(i, j) = cplx(re(i), im(i));
        }
        const CVector c = dleft.adjoint() * spec.weights.cwiseProduct(f).cast<cplx>();
        ut = -(spec.antiderivatives * c).real();
      }
      return which == Projector::u_tilde ? ut : Vector(f - ut);
    }
  }
  return f;
}

ProjectorBoundsReport projector_bounds(const SpectralDecomposition& spec, double theta) {
  ProjectorBoundsReport rep;
  rep.theta = theta;
  const Grid& g = spec.grid;
  const int n = spec.n;
  Norms nm(g, n);
  auto fill = [&](const std::function<double(double)>& fn) {
    Vector v(g.m * n);
    for (int i = 0; i < g.m; ++i) v.segment(i * n, n).setConstant(fn(g.x(i)));
    return v;
  };
  std::vector<Vector> probes;
  for (double c : {-6.0, -3.0, 0.0, 2.5, 5.0}) probes.push_back(fill([c](double x) { return std::exp(-(x - c) * (x - c)); }));
  const double w = 3.0 * g.h;
  probes.push_back(fill([w](double x) { return std::exp(-(x / w) * (x / w)); }));
  probes.push_back(fill([](double x) { return std::exp(-x * x / 4) * std::cos(3 * x); }));
  std::vector<Vector> exp_probes;
  for (double c : {-2.0, 0.0, 1.5})
    exp_probes.push_back(fill([theta, c](double x) { return std::exp(-theta * std::abs(x)) * std::cos(x - c); }));
  rep.probes = static_cast<int>(probes.size() + exp_probes.size());

  auto lp = [&](const Vector& v, int p) { return p == 1 ? nm.l1(v) : p == 2 ? nm.l2(v) : nm.linf(v); };
  const bool tilde = spec.form == Form::conservation;
  for (const Vector& f : probes) {
    const Vector pu = apply_projector(spec, f, Projector::u);
    const Vector pcs = f - pu;
    const Vector put = tilde ? apply_projector(spec, f, Projector::u_tilde) : Vector();
    for (int p : {1, 2, 0}) {
      const std::string ps = p == 0 ? "inf" : std::to_string(p);
      const double fn = lp(f, p);
      for (int r = 0; r <= 4; ++r) {
        auto& a = rep.norms["u:p=" + ps + ":r=" + std::to_string(r)];
        a = std::max(a, lp(nm.derivative(pu, r), p) / fn);
        if (tilde) {
          auto& b = rep.norms["u_tilde:p=" + ps + ":r=" + std::to_string(r)];
          b = std::max(b, lp(nm.derivative(put, r), p) / fn);
        }
      }
      auto& c = rep.norms["cs:p=" + ps + ":r=0"];
      c = std::max(c, lp(pcs, p) / fn);
    }
    rep.weighted_u = std::max(rep.weighted_u, nm.weighted_h4(pu) / nm.l1(f));
    if (tilde) rep.weighted_u_tilde = std::max(rep.weighted_u_tilde, nm.weighted_h4(put) / nm.weighted_h4(f));
  }
  for (const Vector& f : exp_probes) {
    const Vector pcs = apply_projector(spec, f, Projector::cs);
    rep.exp_localization = std::max(rep.exp_localization, nm.exp_sup(pcs, theta) / nm.exp_sup(f, theta));
  }
  return rep;
}

// unstable part: measures e^{-tL} Pi_u against e^{-rate t}; center-stable: e^{tL} Pi_cs against e^{rate t}.
double semigroup_constant(const SparseMatrix& L, const SpectralDecomposition& spec, SemigroupPart part, double rate,
                          const std::vector<double>& times, const std::vector<Vector>& probes) {
  Norms nm(spec.grid, spec.n);
  double C = 0.0;
  for (const Vector& f : probes) {
    const double fn = nm.l2(f);
    if (fn == 0.0) continue;
    for (double t : times) {
      const double tt = part == SemigroupPart::unstable ? -t : t;
      const Vector r = semigroup_apply(L, tt, f, spec.unstable, part);
      const double bound = part == SemigroupPart::unstable ? std::exp(-rate * t) : std::exp(rate * t);
      C = std::max(C, nm.l2(r) / (bound * fn));
    }
  }
  return C;
}

}  // namespace shocklab
