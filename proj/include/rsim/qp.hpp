#pragma once
#include <Eigen/Dense>

namespace rsim {

// Dense convex quadratic program
//   min 1/2 x'Px + q'x + c0   s.t.  A x <= b,  lb <= x <= ub
// with P symmetric positive definite.
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double c0 = 0.0;
  Eigen::MatrixXd A;  // may have zero rows
  Eigen::VectorXd b;
  Eigen::VectorXd lb, ub;
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

struct QpResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // includes c0
  QpStatus status = QpStatus::MaxIter;
  int iterations = 0;
  double kkt_residual = 0.0;
};

// Primal-dual interior-point solve (Mehrotra predictor-corrector). Accepts
// infeasible starts; when the iteration stalls, a slack phase-1 program
// decides between Infeasible and MaxIter.
QpResult solve_qp(const QpProblem& p, double tol = 1e-8, int max_iter = 60);

}  // namespace rsim
