#pragma once
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsim/sequencing.hpp"
#include "rsim/vehicle.hpp"

namespace rsim {

// Gains of the linear class-K functions (one per barrier) plus the signed
// power term that drives finite-time recovery of the merging constraint.
struct CbfGains {
  double k_speed_upper = 1.0;  // v <= v_max barrier
  double k_speed_lower = 1.0;  // v >= v_min barrier
  double k_rear = 1.0;         // rear-end distance barrier
  double k_lateral = 1.0;      // rollover barrier
  double clbf_p = 1.0;
  double clbf_q = 0.5;  // in (0, 1)
};

struct ControllerConfig {
  int horizon = 10;
  double step = 0.1;            // s
  double lambda_speed = 0.3;    // weight of the speed-deviation term
  double lambda_comfort = 0.02; // weight of the centrifugal term
  double desired_speed = 12.0;  // m/s
  double kappa_max = 1.0;       // 1/m, normalization of the comfort term
  CbfGains gains;
  VehicleLimits limits;
  double solver_tol = 1e-8;
  int refine_passes = 0;        // extra convexification passes
  double refine_delta = 1e-3;   // m/s^2, control-change stop threshold
};

// Exogenous trajectory of a neighboring vehicle over the horizon.
// Index 0 is the current state; positions are segment coordinates continued
// virtually past the segment end.
struct NeighborPrediction {
  int id = -1;
  enum class Role { Predecessor, MergingConflict } role = Role::Predecessor;
  std::vector<double> x;  // size horizon + 1
  std::vector<double> v;  // size horizon + 1
};

// One linear inequality in a single control entry: coef * u[step] <= rhs.
struct ConstraintRow {
  int step = 0;
  double coef = 0.0;
  double rhs = 0.0;
  char tag = '?';  // barrier label for diagnostics
};

// The per-vehicle horizon program. All barrier values are frozen on the
// nominal trajectory, so every row is linear in the controls and the
// program is a convex QP.
struct MpcProblem {
  int horizon = 10;
  double step = 0.1;
  double lambda_speed = 0.3;
  double lambda_comfort = 0.02;
  double desired_speed = 12.0;
  double kappa_max = 1.0;
  std::vector<double> kappa;  // size horizon, curvature along the nominal path
  double x0 = 0.0;
  double v0 = 0.0;
  std::vector<ConstraintRow> rows;
  VehicleLimits limits;
  double solver_tol = 1e-8;
};

enum class MpcStatus { Optimal, Infeasible, Fallback };

struct MpcSolution {
  std::vector<double> u;  // size horizon
  std::vector<double> v;  // size horizon + 1, v[0] = v0
  std::vector<double> x;  // size horizon + 1, segment coordinate (virtual)
  double objective = std::numeric_limits<double>::infinity();
  MpcStatus status = MpcStatus::Infeasible;
  int iterations = 0;
  double kkt_residual = 0.0;
};

// Constant-speed or stored-plan rollout for a neighbor; speeds are clamped
// to the limits and positions integrate the speeds from the current state.
NeighborPrediction predict_neighbor(const VehicleState& state,
                                    const std::vector<double>* plan_speeds,
                                    int plan_age, int horizon, double step,
                                    const VehicleLimits& limits,
                                    NeighborPrediction::Role role);

// Nominal self speeds (size horizon + 1): stored plan shifted by its age, or
// a constant-velocity rollout on a cold start.
std::vector<double> nominal_speeds(double v0,
                                   const std::vector<double>* plan_speeds,
                                   int plan_age, int horizon,
                                   const VehicleLimits& limits);

// Barrier rows, one set per horizon step, all built on nominal values.
std::vector<ConstraintRow> build_speed_cbfs(const std::vector<double>& nominal_v,
                                            const CbfGains& gains,
                                            const VehicleLimits& limits,
                                            int horizon);

std::vector<ConstraintRow> build_rear_end_cbf(
    const std::vector<double>& nominal_v, double gap0,
    const NeighborPrediction& leader, const CbfGains& gains,
    const VehicleLimits& limits, int horizon, double step);

// Active while the conflicting vehicle still heads to the shared merging
// point; `arrival_time` is its constant-speed arrival estimate.
std::vector<ConstraintRow> build_merging_clbf(
    const std::vector<double>& nominal_v, double x0, double self_seg_length,
    const NeighborPrediction& conflict, double conflict_seg_length,
    double arrival_time, const CbfGains& gains, const VehicleLimits& limits,
    int horizon, double step);

std::vector<ConstraintRow> build_lateral_cbf(
    const std::vector<double>& nominal_v, const std::vector<double>& kappa,
    const CbfGains& gains, const VehicleLimits& limits, int horizon);

// Solves the horizon QP. On an infeasible constraint set the returned
// controls are the maximal safe braking rollout and the status says so.
MpcSolution assemble_and_solve(const MpcProblem& problem);

// Maximal braking consistent with the box and speed bounds.
MpcSolution fallback_solution(double x0, double v0, const ControllerConfig& cfg);

// Everything needed to solve one vehicle against its neighbors.
struct VehicleSolveInput {
  double x0 = 0.0;
  double v0 = 0.0;
  double d0 = 0.0;
  double seg_length = 0.0;  // current segment length
  std::function<double(double)> kappa_at;  // curvature by route distance
  std::optional<NeighborPrediction> leader;
  double leader_gap0 = 0.0;
  std::optional<NeighborPrediction> conflict;
  double conflict_seg_length = 0.0;
  double conflict_arrival = std::numeric_limits<double>::infinity();
  std::vector<double> nominal_v;  // empty = constant speed
};

MpcSolution solve_vehicle(const VehicleSolveInput& input,
                          const ControllerConfig& cfg);

// A stored horizon plan, consumed step by step between resequencing rounds.
struct PlannedTrajectory {
  std::vector<double> u, v, x;
  long stored_step = 0;
  MpcStatus status = MpcStatus::Optimal;
};

struct SnapshotVehicle {
  VehicleState state;
  const PlannedTrajectory* plan = nullptr;
  int plan_age = 0;  // steps elapsed since the plan was stored
};

struct WorldSnapshot {
  const RoundaboutLayout* layout = nullptr;
  std::map<int, SnapshotVehicle> vehicles;
};

struct SequenceEvaluation {
  double cost = 0.0;
  bool infeasible = false;
  std::map<int, MpcSolution> solutions;  // per CAV id
  int solves = 0;
};

// Solves the horizon program for every CAV in the order, feeding fresh
// solutions of earlier vehicles into later predictions, and sums their
// objectives. Any infeasible member marks the whole sequence infeasible.
SequenceEvaluation evaluate_sequence(const std::vector<int>& order,
                                     const Assignments& assigns,
                                     const WorldSnapshot& snapshot,
                                     const ControllerConfig& cfg);

}  // namespace rsim
