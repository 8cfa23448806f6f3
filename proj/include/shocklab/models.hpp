#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "shocklab/types.hpp"

namespace shocklab {

enum class Form { conservation, general };

// u_t = (b(u) u_x)_x - f(u)_x   (conservation)
// u_t = b(u) u_xx - h(u, u_x)   (general)
struct ParabolicSystem {
  std::string name;
  int n = 1;
  Form form = Form::conservation;
  int regularity = 2;

  std::function<Vector(const Vector&)> f;
  std::function<Matrix(const Vector&)> df;
  std::function<Matrix(const Vector&)> b;
  // db(u)[k] = d b / d u_k
  std::function<std::vector<Matrix>(const Vector&)> db;
  std::function<Vector(const Vector&, const Vector&)> h;
  std::function<Matrix(const Vector&, const Vector&)> h_u;
  std::function<Matrix(const Vector&, const Vector&)> h_ux;

  // (db(u) v) as a matrix acting on w: sum_k v_k (d b/d u_k) w
  Matrix db_times(const Vector& u, const Vector& v) const;
};

struct SystemEval {
  Vector f;        // conservation form only
  Matrix df;       // conservation form only
  Matrix b;
  std::vector<Matrix> db;
  Vector h;        // present whenever ux was given
  Matrix h_u;
  Matrix h_ux;
};

SystemEval eval(const ParabolicSystem& sys, const Vector& u, const std::optional<Vector>& ux = std::nullopt);

// Fills any missing derivative callables with central differences.
ParabolicSystem with_fd_derivatives(ParabolicSystem sys, double step = 1e-6);

// Largest deviation between supplied and finite-difference derivatives at u.
double derivative_mismatch(const ParabolicSystem& sys, const Vector& u, const Vector& ux, double step);

enum class ShockType { none, lax, undercompressive, overcompressive };
std::string to_string(ShockType t);

struct EndStates {
  Vector u_minus;
  Vector u_plus;
  std::vector<double> a_minus;
  std::vector<double> a_plus;
  ShockType classification = ShockType::none;
  int ell = 0;
};

EndStates classify(const ParabolicSystem& sys, const Vector& u_minus, const Vector& u_plus,
                   double tol = 1e-8);

// x -> -x: f -> -f, h -> h(u,-ux) with sign flips; end states swapped.
ParabolicSystem reflect(const ParabolicSystem& sys);

struct HypothesisCheck {
  std::string id;
  bool passed = false;
  double witness = 0.0;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  bool all_passed() const;
  const HypothesisCheck& get(const std::string& id) const;
};

struct SampleBox {
  Vector lo;
  Vector hi;
  int per_axis = 9;
};

HypothesisReport verify_hypotheses(const ParabolicSystem& sys, const EndStates& ends, const SampleBox& box,
                                   const std::vector<double>& xi_grid, double tol = 1e-8);

// Uniform xi grid on [-xmax, xmax].
std::vector<double> xi_grid(double xmax, int count);

struct CatalogModel {
  ParabolicSystem system;
  Vector u_minus;
  Vector u_plus;
  std::string description;
  // Initial guess for the profile solver.
  std::function<Vector(double)> guess;
  // Closed-form profile (first component) when known.
  std::function<double(double)> exact;
  // Phase anchor: value condition for conservation form, derivative for general.
  bool profile_solvable = true;
};

std::vector<CatalogModel> catalog();
CatalogModel catalog_model(const std::string& name);

ParabolicSystem burgers();
ParabolicSystem quadratic_pulse();
ParabolicSystem cubic();

// Scalar polynomial models: coefficient k multiplies u^k.
ParabolicSystem polynomial_conservation(const std::string& name, const std::vector<double>& flux,
                                        const std::vector<double>& viscosity);
// h(u, ux) = P(u) + Q(u) ux
ParabolicSystem polynomial_general(const std::string& name, const std::vector<double>& p,
                                   const std::vector<double>& q, const std::vector<double>& viscosity);

}  // namespace shocklab
