#pragma once

#include <functional>
#include <optional>

#include "shocklab/types.hpp"

namespace shocklab {

struct Grid {
  double X = 0.0;
  int m = 0;
  double h = 0.0;
  Vector x;

  static Grid make(double half_width, int nodes);
  int nearest(double xv) const;
  int center() const { return nearest(0.0); }
};

// Node-major storage: component c at node i sits at index i*n + c.
struct Field {
  Grid grid;
  int n = 1;
  Vector values;

  Field() = default;
  Field(Grid g, int comps, Vector v);
  static Field zeros(const Grid& g, int comps);
  double at(int node, int comp) const { return values(node * n + comp); }
  Vector component(int comp) const;
  Vector node(int i) const { return values.segment(i * n, n); }
};

Vector component(const Vector& v, int n, int comp);
void set_component(Vector& v, int n, int comp, const Vector& values);

// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
std::vector<double> fd_weights(double z, const std::vector<double>& nodes, int order);

SparseMatrix diff_matrix(const Grid& grid, int order, int accuracy);
SparseMatrix block_expand(const SparseMatrix& scalar, int n);

enum class QuadratureRule { trapezoid, simpson };
Vector quadrature_weights(const Grid& grid, QuadratureRule rule = QuadratureRule::trapezoid);
double quadrature(const Vector& values, const Vector& weights);
// Integral of a node-major field, summing components.
double integrate(const Grid& grid, const Vector& values);
// Running integral from -X, trapezoid rule.
Vector cumulative_integral(const Grid& grid, const Vector& values);

// Discrete norms with derivative operators of fourth-order accuracy.
class Norms {
 public:
  Norms(const Grid& grid, int n);
  double l1(const Vector& v) const;
  double l2(const Vector& v) const;
  double linf(const Vector& v) const;
  double h(const Vector& v, int s) const;
  // |(1+x^2)^{3/4} v|_{H^4}
  double weighted_h4(const Vector& v) const;
  // sup_x e^{theta|x|}|v(x)|
  double exp_sup(const Vector& v, double theta) const;
  // Derivative of order j in 0..4.
  Vector derivative(const Vector& v, int j) const;
  const Grid& grid() const { return grid_; }
  int n() const { return n_; }
  const Vector& weights() const { return w_; }

 private:
  Grid grid_;
  int n_;
  SparseMatrix d1_, d2_;
  Vector w_;
  Vector pointwise_abs(const Vector& v) const;
};

enum class ImexOrder { first = 1, second = 2 };

// Implicit in the linear block A, explicit in N(t, v).
class ImexStepper {
 public:
  using Nonlinear = std::function<Vector(double, const Vector&)>;
  ImexStepper(const SparseMatrix& A, Nonlinear nonlinear, double dt, ImexOrder order);
  Vector step(double t, const Vector& v) const;
  double dt() const { return dt_; }
  ImexOrder order() const { return order_; }

 private:
  SparseMatrix A_;
  Nonlinear N_;
  double dt_;
  ImexOrder order_;
  double gamma_ = 1.0;
  double delta_ = 0.0;
  Eigen::SparseLU<SparseMatrix> lu_;
  Vector solve(const Vector& rhs) const;
};

Vector step_imex(const SparseMatrix& A, const ImexStepper::Nonlinear& N, const Vector& v, double t,
                 double dt, ImexOrder order);

CMatrix expm(const CMatrix& A);
Matrix expm(const Matrix& A);
// e^{tA} v via scaled truncated Taylor series; t >= 0 is not required here.
Vector expm_action(const SparseMatrix& A, double t, const Vector& v, double tol = 1e-14);

// Finite-dimensional invariant subspace of a discretized operator.
// left is the Euclidean dual (quadrature weights folded in): left^H right = I.
struct InvariantSubspace {
  CMatrix right;
  CMatrix left;
  CMatrix generator;
  int dim() const { return static_cast<int>(right.cols()); }
  CVector coords(const Vector& f) const;
  Vector project(const Vector& f) const;
  Vector from_coords(const CVector& c) const;
  Vector propagate(double t, const Vector& f) const;
};

enum class SemigroupPart { full, unstable, center_stable };

Vector semigroup_apply(const SparseMatrix& L, double t, const Vector& f);
Vector semigroup_apply(const SparseMatrix& L, double t, const Vector& f, const InvariantSubspace& sub,
                       SemigroupPart part);

}  // namespace shocklab
