#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>

#include "shocklab/models.hpp"
#include "shocklab/numerics.hpp"

namespace shocklab {

struct PhaseCondition {
  enum class Kind { value, derivative };
  Kind kind = Kind::value;
  double x0 = 0.0;
  int component = 0;
  // Used by Kind::value; NaN means the mean of the end states.
  double value = std::numeric_limits<double>::quiet_NaN();

  static PhaseCondition for_form(Form form);
};

struct ProfileOptions {
  double tol = 1e-10;
  int max_iter = 60;
  std::function<Vector(double)> guess;
};

struct ShockProfile {
  std::string model;
  Form form = Form::conservation;
  int n = 1;
  Grid grid;
  EndStates ends;
  PhaseCondition phase;
  // derivs[0] is the profile itself; derivs[j] is the j-th derivative.
  std::array<Vector, 5> derivs;
  double theta = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;
  std::vector<double> residual_history;
  int iterations = 0;
  double tail_error = 0.0;
  double tol = 1e-10;

  const Vector& values() const { return derivs[0]; }
  const Vector& derivative(int j) const { return derivs.at(j); }
  Field field() const { return Field(grid, n, derivs[0]); }
};

ShockProfile solve_profile(const ParabolicSystem& sys, const EndStates& ends, const Grid& grid,
                           const PhaseCondition& phase, const ProfileOptions& opts = {});

// Convenience: catalog model on a grid with its documented guess.
ShockProfile solve_catalog_profile(const CatalogModel& model, const Grid& grid, double tol = 1e-10);

// Fills derivative fields 1..4 from the profile values.
void compute_derivatives(const ParabolicSystem& sys, ShockProfile& p);

// Discrete residual of the profile equation, L2 norm.
double profile_residual(const ParabolicSystem& sys, const ShockProfile& p);

struct TailFit {
  int order = 0;
  int side = 0;  // -1 left, +1 right
  double theta = 0.0;
  double r2 = 0.0;
  double x_from = 0.0, x_to = 0.0;
  int points = 0;
};

struct DecayReport {
  std::vector<TailFit> fits;
  double theta = std::numeric_limits<double>::quiet_NaN();
  bool inconclusive = false;
  bool low_r2 = false;
};

DecayReport measure_decay(const ShockProfile& p);

ShockProfile translate(const ShockProfile& p, double alpha);

// Values of a node-major field at arbitrary points, 6-point Lagrange, with
// tails continued by `left` and `right`.
Vector interpolate(const Grid& grid, int n, const Vector& values, const Vector& points, const Vector& left,
                   const Vector& right);

uint64_t profile_checksum(const std::string& model, const Grid& grid, double tol);
void export_profile_csv(const ShockProfile& p, const std::string& path);
ShockProfile import_profile_csv(const std::string& path, const ParabolicSystem& sys);

}  // namespace shocklab
