#pragma once

#include <map>
#include <string>

#include "shocklab/models.hpp"
#include "shocklab/numerics.hpp"
#include "shocklab/profile.hpp"

namespace shocklab {

struct DiscretizedOperator {
  SparseMatrix matrix;
  Grid grid;
  int n = 1;
  Form form = Form::conservation;
  std::string recipe;
  // boundary rows are -kappa * I (Dirichlet pinning of perturbations)
  double kappa = 0.0;
  Vector zero_mode;  // the profile derivative used as the translational mode
};

DiscretizedOperator assemble_L(const ParabolicSystem& sys, const ShockProfile& profile);

// L2 norm of L u_x over interior rows.
double zero_mode_residual(const DiscretizedOperator& op);

// Discrete nonlinear perturbation dynamics v_t = F_h(u + v) - F_h(u), whose
// Jacobian at v = 0 is exactly the assembled L.
class PerturbationDynamics {
 public:
  PerturbationDynamics(ParabolicSystem sys, ShockProfile profile);
  const ParabolicSystem& system() const { return sys_; }
  const ShockProfile& profile() const { return prof_; }
  const DiscretizedOperator& op() const { return op_; }
  const SparseMatrix& L() const { return op_.matrix; }
  const Grid& grid() const { return prof_.grid; }
  int n() const { return prof_.n; }
  int size() const { return prof_.grid.m * prof_.n; }

  // Discrete spatial operator on a full state (interior rows only).
  Vector flow(const Vector& u) const;
  Vector rhs(const Vector& v) const;
  // N(v) = rhs(v) - L v
  Vector residual(const Vector& v) const;

 private:
  ParabolicSystem sys_;
  ShockProfile prof_;
  DiscretizedOperator op_;
  Vector base_flow_;
  SparseMatrix d1_, d2_;
};

struct SpectralOptions {
  int dense_limit = 2000;
  double ambiguity_tol = 1e-6;
  double cluster_tol = 1e-4;
  int inverse_iterations = 8;
  // sparse path: block size and shift-invert parameter
  int block = 24;
  double tau = 0.25;
  int block_iterations = 80;
};

struct SpectralDecomposition {
  Grid grid;
  int n = 1;
  Form form = Form::conservation;
  int p = 0;
  std::vector<cplx> eigenvalues;  // one per basis vector (generalized included)
  std::vector<int> ranks;         // chain length for each entry of eigenvalues
  InvariantSubspace unstable;     // Euclidean duals
  CMatrix left_functions;         // phi~_j with <phi~_i, phi_j>_W = delta_ij
  CMatrix antiderivatives;        // Phi_j (conservation form)
  Vector zero_mode;               // phi = u_x
  Vector zero_dual;               // phi~ with <phi~, phi>_W = 1
  cplx zero_eigenvalue{0.0, 0.0};
  double zero_match = 0.0;        // |cos| between eigenvector and u_x
  double min_re = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double omega = std::numeric_limits<double>::quiet_NaN();
  Vector weights;
  std::vector<cplx> located;      // all eigenvalues found by the locator, by decreasing real part

  // Build from given right/left functions (left normalized here); used for synthetic tests.
  static SpectralDecomposition from_basis(const Grid& grid, int n, Form form, const CMatrix& right,
                                          const CMatrix& left_functions, const CMatrix& generator);
  CMatrix right() const { return unstable.right; }
};

std::vector<cplx> locate_eigenvalues(const SparseMatrix& L, const SpectralOptions& opts = {});

SpectralDecomposition unstable_spectrum(const DiscretizedOperator& op, double cutoff_re,
                                        const SpectralOptions& opts = {});

// Real eigenpair of L nearest the real shift sigma by inverse iteration; the
// vector has unit Euclidean norm and a positive largest entry.
struct EigenPair {
  double value = 0.0;
  Vector vector;
};
EigenPair eigenpair_near(const SparseMatrix& L, double sigma, int iterations = 12);

enum class Projector { u, cs, u_tilde, cs_tilde };
Vector apply_projector(const SpectralDecomposition& spec, const Vector& f, Projector which);

struct ProjectorBoundsReport {
  // key: "u:p=2:r=1" etc.
  std::map<std::string, double> norms;
  double weighted_u = 0.0;        // |(1+x^2)^{3/4} Pi_u f|_{H4} / |f|_{L1}
  double weighted_u_tilde = 0.0;  // |(1+x^2)^{3/4} Pi~_u f|_{H4} / |(1+x^2)^{3/4} f|_{H4}
  double exp_localization = 0.0;  // sup e^{theta|x|}|Pi_cs f| / sup e^{theta|y|}|f|
  double theta = 0.0;
  int probes = 0;
};

ProjectorBoundsReport projector_bounds(const SpectralDecomposition& spec, double theta);

// Measured C in |e^{tL} Pi f| <= C e^{rate t} |f| over the given times and probes.
double semigroup_constant(const SparseMatrix& L, const SpectralDecomposition& spec, SemigroupPart part,
                          double rate, const std::vector<double>& times, const std::vector<Vector>& probes);

}  // namespace shocklab
