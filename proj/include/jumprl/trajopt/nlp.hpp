#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>
#include <string>

namespace jumprl {

using VecX = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Smooth constrained problem
//   min f(x)  s.t.  c(x) = 0,  psi(x) >= 0
// exposed through value and transposed-Jacobian-product callbacks. Problems
// that can also assemble sparse constraint Jacobians get the Gauss-Newton
// inner loop, which copes with much stiffer penalties.
class AlProblem {
 public:
  virtual ~AlProblem() = default;
  virtual int num_vars() const = 0;
  virtual int num_eq() const = 0;
  virtual int num_ineq() const = 0;

  // Returns f(x) and fills the residual vectors (sized num_eq / num_ineq).
  virtual double eval(const VecX& x, VecX& c, VecX& psi) = 0;

  // grad = grad f(x) + Jc(x)^T wc + Jpsi(x)^T wpsi.
  virtual void grad_combination(const VecX& x, const VecX& wc, const VecX& wpsi,
                                VecX& grad) = 0;

  // Optional full first-order model: objective gradient, residuals and sparse
  // Jacobians, plus the diagonal Gauss-Newton model of the objective itself.
  virtual bool has_jacobians() const { return false; }
  virtual double eval_full(const VecX& x, VecX& grad_f, VecX& obj_curvature, VecX& c, SpMat& Jc,
                           VecX& psi, SpMat& Jpsi) {
    (void)x;
    (void)grad_f;
    (void)obj_curvature;
    (void)c;
    (void)Jc;
    (void)psi;
    (void)Jpsi;
    throw std::logic_error("eval_full not implemented for this problem");
  }
};

struct LbfgsOptions {
  int max_iters = 500;
  double grad_tol = 1e-6;
  int history = 10;
  double armijo_c1 = 1e-4;
  int max_line_search = 40;
  bool trace = false;  // per-iteration diagnostics on stdout
};

struct LbfgsResult {
  int iters = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Limited-memory BFGS with Armijo backtracking. `fn` returns the value and,
// when the pointer is non-null, fills the gradient.
LbfgsResult minimize_lbfgs(const std::function<double(const VecX&, VecX*)>& fn, VecX& x,
                           const LbfgsOptions& opt);

struct AlOptions {
  int max_outer = 40;
  int max_inner_total = 20000;
  int max_inner_per_outer = 2000;
  double rho_eq = 100.0;
  double rho_ineq = 100.0;
  double rho_max = 1e6;
  double rho_growth = 4.0;
  double eq_tol = 1e-5;
  double ineq_tol = 1e-7;
  double grad_tol_start = 1e-2;
  double grad_tol_final = 1e-7;
  double stat_tol = 1e-3;        // on the plain-multiplier KKT gradient
  double multiplier_cap = 1e7;
  double active_band = 1e-3;  // inequality rows within this of the kink join the GN model
  bool verbose = false;
  bool trace_inner = false;  // forwarded to the inner minimizer
};

// Levenberg-damped Gauss-Newton on the constraint residuals alone. Run after
// the augmented-Lagrangian stage it converges quadratically to a feasible
// point near the optimizer, which is what the trajectory contract asks for.
struct PolishOptions {
  int max_iters = 300;
  double eq_tol = 9e-5;
  double ineq_tol = 9e-7;
  int max_line_search = 30;
  bool trace = false;
};

struct PolishReport {
  bool feasible = false;
  double max_eq = 0.0;
  double min_ineq = 0.0;
  int iters = 0;
};

PolishReport polish_feasibility(AlProblem& problem, VecX& x, const PolishOptions& opt = {});

struct AlReport {
  bool converged = false;
  double cost = 0.0;
  double max_eq = 0.0;    // max |c_i| at the returned point
  double min_ineq = 0.0;  // min psi_j at the returned point
  int outer_iters = 0;
  int inner_iters = 0;
  std::string message;
};

// Classic PHR augmented Lagrangian: L-BFGS inner solves, first-order
// multiplier updates, penalty growth on stalled feasibility. On exit x holds
// the best iterate seen (most feasible, then cheapest).
AlReport solve_al(AlProblem& problem, VecX& x, const AlOptions& opt);

}  // namespace jumprl
