#include "rsim/qp.hpp"

#include <algorithm>
#include <cmath>

namespace rsim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Stacks general rows and box bounds into a single A x <= b system.
void stack_rows(const QpProblem& p, MatrixXd& a, VectorXd& b) {
  const int n = static_cast<int>(p.q.size());
  const int mg = static_cast<int>(p.b.size());
  a.resize(mg + 2 * n, n);
  b.resize(mg + 2 * n);
  if (mg > 0) {
    a.topRows(mg) = p.A;
    b.head(mg) = p.b;
  }
  a.middleRows(mg, n) = MatrixXd::Identity(n, n);
  b.segment(mg, n) = p.ub;
  a.bottomRows(n) = -MatrixXd::Identity(n, n);
  b.tail(n) = -p.lb;
}

struct IpmOut {
  VectorXd x;
  bool converged = false;
  int iterations = 0;
  double kkt = 0.0;
};

// min 1/2 x'Px + q'x  s.t. A x <= b, P > 0. Infeasible-start path following.
IpmOut ipm(const MatrixXd& P, const VectorXd& q, const MatrixXd& A,
           const VectorXd& b, double tol, int max_iter) {
  const int n = static_cast<int>(q.size());
  const int m = static_cast<int>(b.size());
  IpmOut out;

  VectorXd x = VectorXd::Zero(n);
  {
    Eigen::LLT<MatrixXd> llt(P);
    if (llt.info() == Eigen::Success) x = llt.solve(-q);
  }
  VectorXd s(m), z(m);
  for (int i = 0; i < m; ++i) {
    const double slack = b(i) - A.row(i).dot(x);
    s(i) = std::max(slack, 1.0);
    z(i) = 1.0;
  }

  const double scale = std::max(1.0, q.lpNorm<Eigen::Infinity>());
  for (int it = 0; it < max_iter; ++it) {
    VectorXd r_d = P * x + q + A.transpose() * z;
    VectorXd r_p = A * x + s - b;
    const double mu = s.dot(z) / m;
    const double kkt = std::max({r_d.lpNorm<Eigen::Infinity>() / scale,
                                 r_p.lpNorm<Eigen::Infinity>(), mu});
    out.iterations = it;
    out.kkt = kkt;
    if (kkt <= tol) {
      out.converged = true;
      break;
    }

    VectorXd w = z.cwiseQuotient(s);  // z/s > 0
    MatrixXd M = P;
    for (int i = 0; i < m; ++i)
      M.noalias() += w(i) * (A.row(i).transpose() * A.row(i));
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) break;

    auto solve_step = [&](const VectorXd& r_c, VectorXd& dx, VectorXd& ds,
                          VectorXd& dz) {
      // eliminate ds = -r_p - A dx and dz = -(r_c + z*ds)/s
      VectorXd rhs = -r_d;
      rhs.noalias() += A.transpose() * (r_c.cwiseQuotient(s) - w.cwiseProduct(r_p));
      dx = llt.solve(rhs);
      ds = -r_p - A * dx;
      dz = -(r_c + z.cwiseProduct(ds)).cwiseQuotient(s);
    };
    auto max_step = [&](const VectorXd& v, const VectorXd& dv) {
      double a = 1.0;
      for (int i = 0; i < m; ++i)
        if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
      return a;
    };

    // predictor
    VectorXd dx_a, ds_a, dz_a;
    solve_step(s.cwiseProduct(z), dx_a, ds_a, dz_a);
    const double ap = max_step(s, ds_a);
    const double ad = max_step(z, dz_a);
    const double mu_aff =
        (s + ap * ds_a).dot(z + ad * dz_a) / m;
    const double sigma = std::pow(std::max(mu_aff / std::max(mu, 1e-300), 0.0), 3.0);

    // corrector
    VectorXd r_c = s.cwiseProduct(z) + ds_a.cwiseProduct(dz_a) -
                   VectorXd::Constant(m, sigma * mu);
    VectorXd dx, ds, dz;
    solve_step(r_c, dx, ds, dz);
    const double alpha =
        0.99 * std::min(max_step(s, ds), max_step(z, dz));
    x += alpha * dx;
    s += alpha * ds;
    z += alpha * dz;
  }
  out.x = x;
  return out;
}

// Phase-1 certificate: min t + eps/2 (|x|^2 + t^2)  s.t. A x - t <= b.
// Always strictly feasible; the sign of the optimal t classifies the system.
bool rows_feasible(const MatrixXd& A, const VectorXd& b, double tol) {
  const int n = static_cast<int>(A.cols());
  const int m = static_cast<int>(b.size());
  MatrixXd P1 = MatrixXd::Identity(n + 1, n + 1) * 1e-6;
  VectorXd q1 = VectorXd::Zero(n + 1);
  q1(n) = 1.0;
  MatrixXd A1(m, n + 1);
  A1.leftCols(n) = A;
  A1.col(n).setConstant(-1.0);
  IpmOut r = ipm(P1, q1, A1, b, 1e-9, 120);
  if (!r.converged) return true;  // inconclusive; let the caller retry
  return r.x(n) <= tol;
}

}  // namespace

QpResult solve_qp(const QpProblem& p, double tol, int max_iter) {
  QpResult res;
  MatrixXd a;
  VectorXd b;
  stack_rows(p, a, b);

  IpmOut out = ipm(p.P, p.q, a, b, tol, max_iter);
  res.iterations = out.iterations;
  res.kkt_residual = out.kkt;
  res.x = out.x;
  if (out.converged) {
    res.status = QpStatus::Optimal;
    res.objective = 0.5 * out.x.dot(p.P * out.x) + p.q.dot(out.x) + p.c0;
    return res;
  }
  if (!rows_feasible(a, b, 1e-7)) {
    res.status = QpStatus::Infeasible;
    return res;
  }
  // feasible but unconverged; one longer retry before giving up
  IpmOut retry = ipm(p.P, p.q, a, b, tol, 3 * max_iter);
  res.iterations += retry.iterations;
  res.kkt_residual = retry.kkt;
  res.x = retry.x;
  if (retry.converged) {
    res.status = QpStatus::Optimal;
    res.objective = 0.5 * retry.x.dot(p.P * retry.x) + p.q.dot(retry.x) + p.c0;
  } else {
    res.status = QpStatus::MaxIter;
  }
  return res;
}

}  // namespace rsim
