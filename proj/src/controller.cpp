#include "rsim/controller.hpp"

#include <algorithm>
#include <cmath>

#include "rsim/qp.hpp"

namespace rsim {

namespace {

double plan_speed_at(const std::vector<double>& v, int idx) {
  if (v.empty()) return 0.0;
  return v[std::min<std::size_t>(idx, v.size() - 1)];
}

}  // namespace

NeighborPrediction predict_neighbor(const VehicleState& state,
                                    const std::vector<double>* plan_speeds,
                                    int plan_age, int horizon, double step,
                                    const VehicleLimits& limits,
                                    NeighborPrediction::Role role) {
  NeighborPrediction p;
  p.id = state.id;
  p.role = role;
  p.v.resize(horizon + 1);
  p.x.resize(horizon + 1);
  for (int h = 0; h <= horizon; ++h) {
    double vh = plan_speeds ? plan_speed_at(*plan_speeds, plan_age + h)
                            : state.v;
    p.v[h] = std::clamp(vh, limits.v_min, limits.v_max);
  }
  p.x[0] = state.x;
  for (int h = 0; h < horizon; ++h) p.x[h + 1] = p.x[h] + step * p.v[h];
  return p;
}

std::vector<double> nominal_speeds(double v0,
                                   const std::vector<double>* plan_speeds,
                                   int plan_age, int horizon,
                                   const VehicleLimits& limits) {
  std::vector<double> v(horizon + 1);
  for (int h = 0; h <= horizon; ++h) {
    double vh = plan_speeds ? plan_speed_at(*plan_speeds, plan_age + h) : v0;
    v[h] = std::clamp(vh, limits.v_min, limits.v_max);
  }
  v[0] = std::clamp(v0, limits.v_min, limits.v_max);
  return v;
}

std::vector<ConstraintRow> build_speed_cbfs(const std::vector<double>& nominal_v,
                                            const CbfGains& gains,
                                            const VehicleLimits& limits,
                                            int horizon) {
  std::vector<ConstraintRow> rows;
  rows.reserve(2 * horizon);
  for (int h = 0; h < horizon; ++h) {
    const double vh = nominal_v[h];
    rows.push_back({h, 1.0, gains.k_speed_upper * (limits.v_max - vh), '1'});
    rows.push_back({h, -1.0, gains.k_speed_lower * (vh - limits.v_min), '2'});
  }
  return rows;
}

std::vector<ConstraintRow> build_rear_end_cbf(
    const std::vector<double>& nominal_v, double gap0,
    const NeighborPrediction& leader, const CbfGains& gains,
    const VehicleLimits& limits, int horizon, double step) {
  std::vector<ConstraintRow> rows;
  rows.reserve(horizon);
  const double phi = limits.reaction_time;
  double z = gap0;
  for (int h = 0; h < horizon; ++h) {
    const double vh = nominal_v[h];
    const double vp = leader.v[h];
    const double b3 = z - phi * vh - limits.gap_margin;
    rows.push_back({h, phi, (vp - vh) + gains.k_rear * b3, '3'});
    z += step * (vp - vh);
  }
  return rows;
}

std::vector<ConstraintRow> build_merging_clbf(
    const std::vector<double>& nominal_v, double x0, double self_seg_length,
    const NeighborPrediction& conflict, double conflict_seg_length,
    double arrival_time, const CbfGains& gains, const VehicleLimits& limits,
    int horizon, double step) {
  std::vector<ConstraintRow> rows;
  const double phi = limits.reaction_time;
  const double l_im = conflict_seg_length;
  if (l_im <= 0.0) return rows;
  if (conflict.x[0] >= l_im) return rows;  // already past the merging point

  int last_step = horizon - 1;
  if (std::isfinite(arrival_time))
    last_step = std::min(last_step, static_cast<int>(arrival_time / step));

  double xi = x0;
  for (int h = 0; h <= last_step; ++h) {
    const double vh = nominal_v[h];
    const double xm = std::min(conflict.x[h], l_im);
    const double vm = conflict.v[h];
    const double b4 = (self_seg_length - xi) - (l_im - xm) -
                      (phi / l_im) * xm * vh - limits.gap_margin;
    const double power =
        gains.clbf_p * (b4 >= 0.0 ? 1.0 : -1.0) *
        std::pow(std::abs(b4), gains.clbf_q);
    const double coef = (phi / l_im) * xm;
    const double rhs = vm - vh - (phi / l_im) * vm * vh + power;
    rows.push_back({h, coef, rhs, '4'});
    xi += step * vh;
  }
  return rows;
}

std::vector<ConstraintRow> build_lateral_cbf(
    const std::vector<double>& nominal_v, const std::vector<double>& kappa,
    const CbfGains& gains, const VehicleLimits& limits, int horizon) {
  std::vector<ConstraintRow> rows;
  for (int h = 0; h < horizon; ++h) {
    const double k = kappa[h];
    if (k <= 0.0) continue;
    const double vh = nominal_v[h];
    const double b5 = limits.half_width * limits.gravity -
                      k * vh * vh * limits.body_height;
    rows.push_back(
        {h, 2.0 * k * limits.body_height * vh, gains.k_lateral * b5, '5'});
  }
  return rows;
}

MpcSolution fallback_solution(double x0, double v0, const ControllerConfig& cfg) {
  MpcSolution s;
  s.status = MpcStatus::Infeasible;
  const int H = cfg.horizon;
  s.u.resize(H);
  s.v.resize(H + 1);
  s.x.resize(H + 1);
  s.v[0] = v0;
  s.x[0] = x0;
  for (int h = 0; h < H; ++h) {
    s.u[h] = std::max(cfg.limits.u_min, (cfg.limits.v_min - s.v[h]) / cfg.step);
    s.v[h + 1] = s.v[h] + cfg.step * s.u[h];
    s.x[h + 1] = s.x[h] + cfg.step * s.v[h];
  }
  return s;
}

MpcSolution assemble_and_solve(const MpcProblem& p) {
  const int H = p.horizon;
  const double td = p.step;
  const VehicleLimits& lim = p.limits;

  ControllerConfig fb;
  fb.horizon = H;
  fb.step = td;
  fb.limits = lim;

  // pre-scan degenerate rows: vacuous ones drop out, contradictions solve to
  // the braking fallback straight away
  std::vector<const ConstraintRow*> active;
  active.reserve(p.rows.size());
  for (const auto& r : p.rows) {
    if (std::abs(r.coef) < 1e-12) {
      if (r.rhs < -1e-9) {
        auto s = fallback_solution(p.x0, p.v0, fb);
        return s;
      }
      continue;
    }
    active.push_back(&r);
  }

  // objective: sum_h u_h^2/M + l1 (v_h - v_d)^2/W^2 + l2 k_h v_h^2/(kmax vmax^2)
  // with v_h = v0 + td * sum_{l<h} u_l affine in the controls
  const double m_u = std::max(lim.u_max * lim.u_max, lim.u_min * lim.u_min);
  const double w = lim.v_max - lim.v_min;
  const double c_speed = p.lambda_speed / (w * w);
  const double c_comf_den = p.kappa_max * lim.v_max * lim.v_max;

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(H, H);
  for (int h = 1; h < H; ++h)
    for (int l = 0; l < h; ++l) g(h, l) = td;

  Eigen::VectorXd diag_comf(H);
  for (int h = 0; h < H; ++h)
    diag_comf(h) = p.lambda_comfort * p.kappa[h] / c_comf_den;

  QpProblem qp;
  qp.P = (2.0 / m_u) * Eigen::MatrixXd::Identity(H, H);
  qp.P.noalias() += 2.0 * c_speed * g.transpose() * g;
  qp.P.noalias() += 2.0 * g.transpose() * diag_comf.asDiagonal() * g;
  qp.q = 2.0 * c_speed * (p.v0 - p.desired_speed) * g.transpose() *
         Eigen::VectorXd::Ones(H);
  qp.q.noalias() += 2.0 * p.v0 * g.transpose() * diag_comf;
  qp.c0 = H * c_speed * (p.v0 - p.desired_speed) * (p.v0 - p.desired_speed) +
          p.v0 * p.v0 * diag_comf.sum();

  const int m_rows = static_cast<int>(active.size()) + 2 * H;
  qp.A = Eigen::MatrixXd::Zero(m_rows, H);
  qp.b = Eigen::VectorXd::Zero(m_rows);
  int r = 0;
  for (const ConstraintRow* row : active) {
    qp.A(r, row->step) = row->coef;
    qp.b(r) = row->rhs;
    ++r;
  }
  // speed box over the horizon: v_min <= v0 + td * sum u <= v_max
  for (int h = 1; h <= H; ++h) {
    for (int l = 0; l < h; ++l) qp.A(r, l) = td;
    qp.b(r) = lim.v_max - p.v0;
    ++r;
    for (int l = 0; l < h; ++l) qp.A(r, l) = -td;
    qp.b(r) = p.v0 - lim.v_min;
    ++r;
  }
  qp.lb = Eigen::VectorXd::Constant(H, lim.u_min);
  qp.ub = Eigen::VectorXd::Constant(H, lim.u_max);

  QpResult res = solve_qp(qp, p.solver_tol);
  if (res.status != QpStatus::Optimal) {
    auto s = fallback_solution(p.x0, p.v0, fb);
    s.iterations = res.iterations;
    s.kkt_residual = res.kkt_residual;
    return s;
  }

  MpcSolution s;
  s.status = MpcStatus::Optimal;
  s.iterations = res.iterations;
  s.kkt_residual = res.kkt_residual;
  s.objective = res.objective;
  s.u.resize(H);
  s.v.resize(H + 1);
  s.x.resize(H + 1);
  s.v[0] = p.v0;
  s.x[0] = p.x0;
  for (int h = 0; h < H; ++h) {
    s.u[h] = res.x(h);
    s.v[h + 1] = s.v[h] + td * s.u[h];
    s.x[h + 1] = s.x[h] + td * s.v[h];
  }
  return s;
}

MpcSolution solve_vehicle(const VehicleSolveInput& in,
                          const ControllerConfig& cfg) {
  const int H = cfg.horizon;

  std::vector<double> nominal = in.nominal_v;
  if (nominal.empty())
    nominal = nominal_speeds(in.v0, nullptr, 0, H, cfg.limits);

  MpcSolution sol;
  for (int pass = 0; pass <= std::max(0, cfg.refine_passes); ++pass) {
    MpcProblem p;
    p.horizon = H;
    p.step = cfg.step;
    p.lambda_speed = cfg.lambda_speed;
    p.lambda_comfort = cfg.lambda_comfort;
    p.desired_speed = cfg.desired_speed;
    p.kappa_max = cfg.kappa_max;
    p.x0 = in.x0;
    p.v0 = in.v0;
    p.limits = cfg.limits;
    p.solver_tol = cfg.solver_tol;

    p.kappa.resize(H);
    double dh = in.d0;
    for (int h = 0; h < H; ++h) {
      p.kappa[h] = in.kappa_at ? in.kappa_at(dh) : 0.0;
      dh += cfg.step * nominal[h];
    }

    p.rows = build_speed_cbfs(nominal, cfg.gains, cfg.limits, H);
    if (in.leader) {
      auto rows = build_rear_end_cbf(nominal, in.leader_gap0, *in.leader,
                                     cfg.gains, cfg.limits, H, cfg.step);
      p.rows.insert(p.rows.end(), rows.begin(), rows.end());
    }
    if (in.conflict) {
      auto rows = build_merging_clbf(nominal, in.x0, in.seg_length,
                                     *in.conflict, in.conflict_seg_length,
                                     in.conflict_arrival, cfg.gains,
                                     cfg.limits, H, cfg.step);
      p.rows.insert(p.rows.end(), rows.begin(), rows.end());
    }
    {
      auto rows = build_lateral_cbf(nominal, p.kappa, cfg.gains, cfg.limits, H);
      p.rows.insert(p.rows.end(), rows.begin(), rows.end());
    }

    MpcSolution next = assemble_and_solve(p);
    if (next.status != MpcStatus::Optimal) return next;
    double delta = 0.0;
    if (!sol.u.empty())
      for (int h = 0; h < H; ++h)
        delta = std::max(delta, std::abs(next.u[h] - sol.u[h]));
    const bool first = sol.u.empty();
    sol = std::move(next);
    if (!first && delta < cfg.refine_delta) break;
    nominal = sol.v;
  }
  return sol;
}

SequenceEvaluation evaluate_sequence(const std::vector<int>& order,
                                     const Assignments& assigns,
                                     const WorldSnapshot& snapshot,
                                     const ControllerConfig& cfg) {
  SequenceEvaluation eval;
  const RoundaboutLayout& layout = *snapshot.layout;
  const int H = cfg.horizon;

  auto predict = [&](int id, NeighborPrediction::Role role)
      -> NeighborPrediction {
    const SnapshotVehicle& sv = snapshot.vehicles.at(id);
    auto fresh = eval.solutions.find(id);
    if (fresh != eval.solutions.end()) {
      NeighborPrediction p;
      p.id = id;
      p.role = role;
      p.v = fresh->second.v;
      p.x = fresh->second.x;
      return p;
    }
    const std::vector<double>* speeds =
        sv.plan && sv.plan->status == MpcStatus::Optimal ? &sv.plan->v
                                                         : nullptr;
    return predict_neighbor(sv.state, speeds, sv.plan_age, H, cfg.step,
                            cfg.limits, role);
  };

  for (int id : order) {
    const SnapshotVehicle& sv = snapshot.vehicles.at(id);
    if (sv.state.kind != VehicleKind::Cav) continue;

    VehicleSolveInput in;
    in.x0 = sv.state.x;
    in.v0 = sv.state.v;
    in.d0 = sv.state.d;
    in.seg_length = layout.length(sv.state.segment);
    const RouteSpec* route = &sv.state.route;
    in.kappa_at = [route, &layout](double d) {
      const double dc = std::clamp(d, 0.0, route->total_length);
      return curvature_at(layout, *route, dc);
    };
    in.nominal_v = nominal_speeds(
        sv.state.v, sv.plan ? &sv.plan->v : nullptr, sv.plan_age, H,
        cfg.limits);

    auto ip = assigns.ip.find(id);
    if (ip != assigns.ip.end() && snapshot.vehicles.count(ip->second)) {
      const SnapshotVehicle& lead = snapshot.vehicles.at(ip->second);
      auto gap = try_forward_gap(layout, sv.state.segment, sv.state.x,
                                 lead.state.segment, lead.state.x);
      if (gap) {
        in.leader = predict(ip->second, NeighborPrediction::Role::Predecessor);
        in.leader_gap0 = *gap;
      }
    }
    auto im = assigns.im.find(id);
    if (im != assigns.im.end() && snapshot.vehicles.count(im->second)) {
      const SnapshotVehicle& conf = snapshot.vehicles.at(im->second);
      in.conflict =
          predict(im->second, NeighborPrediction::Role::MergingConflict);
      in.conflict_seg_length = layout.length(conf.state.segment);
      const double remaining = in.conflict_seg_length - conf.state.x;
      in.conflict_arrival =
          conf.state.v >= 0.1 ? remaining / conf.state.v
                              : std::numeric_limits<double>::infinity();
    }

    MpcSolution sol = solve_vehicle(in, cfg);
    ++eval.solves;
    if (sol.status != MpcStatus::Optimal) {
      eval.infeasible = true;
      eval.cost = std::numeric_limits<double>::infinity();
      eval.solutions[id] = std::move(sol);
      return eval;
    }
    eval.cost += sol.objective;
    eval.solutions[id] = std::move(sol);
  }
  return eval;
}

}  // namespace rsim
