#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace fcmpc {

// Dense convex QP with two-sided linear constraints:
//   minimize   0.5 z'Hz + g'z
//   subject to lower <= G z <= upper     (+/-inf allowed, lower==upper is
//                                         treated as an equality row)
struct QpProblem {
  Eigen::MatrixXd H;      // n x n, symmetric positive (semi)definite
  Eigen::VectorXd g;      // n
  Eigen::MatrixXd G;      // m x n
  Eigen::VectorXd lower;  // m
  Eigen::VectorXd upper;  // m

  int num_vars() const { return static_cast<int>(H.rows()); }
  int num_constraints() const { return static_cast<int>(G.rows()); }
  void validate() const;
};

enum class QpStatus { Solved, MaxIter, Infeasible };

const char* to_string(QpStatus status);

struct QpSolution {
  Eigen::VectorXd z;
  // Signed row multipliers: stationarity is H z + g + G' nu = 0 with
  // nu_i >= 0 when the upper side is active, <= 0 for the lower side.
  Eigen::VectorXd nu;
  QpStatus status = QpStatus::MaxIter;
  double objective = 0.0;
  double stat_residual = 0.0;  // ||Hz + g + G'nu||_inf
  double feas_residual = 0.0;  // max bound violation
  double comp_residual = 0.0;  // max |nu_i| * active-gap
  int iterations = 0;
  std::vector<int> active_rows;  // internal one-sided rows, usable as warm hint
};

struct QpOptions {
  double tol = 1e-6;
  int max_iter = 4000;
};

// Dual active-set method (Goldfarb-Idnani): starts from the unconstrained
// minimizer and adds violated constraints until dual feasible. Exact up to
// rounding; deterministic (ties broken by lowest row index). The warm hint
// only reorders constraint selection, never changes the fixed point.
class QpSolver {
 public:
  explicit QpSolver(QpOptions options = {}) : options_(options) {}

  QpSolution solve(const QpProblem& problem) const;
  QpSolution solve(const QpProblem& problem, const std::vector<int>& warm_hint) const;

  const QpOptions& options() const { return options_; }

 private:
  QpOptions options_;
};

// Text dump (matrix-market-like) for offline reproduction of a problem.
void dump_problem(const QpProblem& problem, const std::string& path);

}  // namespace fcmpc
