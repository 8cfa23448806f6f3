#pragma once

#include <string>
#include <vector>

#include "shocklab/models.hpp"
#include "shocklab/profile.hpp"

namespace shocklab {

struct EvansOptions {
  // minimum separation between the n-th and (n+1)-th real parts of the limiting spectra
  double gap_tol = 1e-8;
  // RK4 substeps per grid cell; 0 picks from |lambda|
  int substeps = 0;
  int max_substeps = 64;
  // contour: min |D|/scale below this is "too close"
  double safety = 1e-5;
  int max_refinements = 14;
  // real point where the reference frames of the decaying subspaces are taken
  double lambda_ref = 1.0;
};

struct EvansEvaluation {
  cplx lambda;
  cplx D;
  // |V-(0)| * |V+(0)|: the natural size D is compared against
  double scale = 0.0;
  // log10 of the largest norm ratio seen along each integration
  double growth_minus = 0.0;
  double growth_plus = 0.0;
  int substeps = 1;
};

// Oriented closed curve made of line segments and circular arcs.
struct Contour {
  struct Segment {
    bool arc = false;
    cplx a, b;            // line endpoints
    cplx center;          // arc
    double radius = 0.0;
    double t0 = 0.0, t1 = 0.0;  // arc angles
    cplx at(double s) const;
    double length() const;
  };
  std::string description;
  std::vector<Segment> segments;
  int samples = 128;

  cplx at(double s) const;  // s in [0, 1], arclength-proportional
  static Contour circle(cplx center, double radius, int samples = 128);
  static Contour rectangle(cplx lo, cplx hi, int samples = 128);
  // Boundary of {Re >= re_min, |lambda| <= radius} with a disk of radius `hole`
  // about 0 removed when the line passes through it.
  static Contour right_region(double re_min, double radius, double hole, int samples = 256);
};

struct ContourResult {
  std::string description;
  int samples = 0;
  int winding = 0;
  double raw = 0.0;  // phase sum / 2 pi
  double min_abs = 0.0;
  double max_abs = 0.0;
  double min_relative = 0.0;  // min |D|/scale
  std::vector<double> params;
  std::vector<cplx> lambdas;
  std::vector<cplx> values;
};

struct ZeroOrder {
  int order = 0;
  int inner_order = 0;  // winding at half radius
  double radius = 0.0;
  cplx center;
  int ell = 0;
  bool matches_ell = false;
  // |D'(center)| / scale estimated from the circle samples
  double derivative = 0.0;
};

class EvansFunction {
 public:
  EvansFunction(const ParabolicSystem& sys, const ShockProfile& profile, EvansOptions opts = {});
  EvansEvaluation operator()(cplx lambda) const;
  int n() const { return n_; }
  const ShockProfile& profile() const { return prof_; }
  const EvansOptions& options() const { return opts_; }

  // First-order coefficient matrix (w, w_x)' = A(x, lambda) (w, w_x).
  CMatrix coefficient(double x, cplx lambda) const;
  CMatrix limit(int side, cplx lambda) const;

 private:
  ShockProfile prof_;
  EvansOptions opts_;
  int n_;
  int k_;
  std::vector<std::vector<int>> subsets_;
  std::vector<Matrix> binv_, k0_, k1_;  // per node
  Matrix binv_lim_[2], k0_lim_[2], k1_lim_[2];
  CMatrix ref_[2];

  CMatrix decaying_projector(const CMatrix& A, int side, cplx& mu) const;

  CMatrix compound(const CMatrix& A) const;
  CVector wedge_columns(const CMatrix& R) const;
  cplx pair(const CVector& a, const CVector& b) const;
  CVector integrate(int side, cplx lambda, cplx mu, const CVector& start, int sub, double& growth) const;
};

EvansEvaluation evans_eval(const ParabolicSystem& sys, const ShockProfile& profile, cplx lambda,
                           const EvansOptions& opts = {});

ContourResult winding_number(const EvansFunction& D, const Contour& contour);
ContourResult winding_number(const ParabolicSystem& sys, const ShockProfile& profile, const Contour& contour);

ZeroOrder zero_order_at_origin(const EvansFunction& D, double radius, cplx center = 0.0, int samples = 96);

// Roots inside a contour from argument-principle moments, each refined by secant steps.
std::vector<cplx> evans_roots(const EvansFunction& D, const Contour& contour);
cplx refine_root(const EvansFunction& D, cplx guess, double tol = 1e-12, int max_iter = 40);

void write_evans_csv(const ContourResult& r, const std::string& path);

}  // namespace shocklab
