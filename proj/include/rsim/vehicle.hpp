#pragma once
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rsim/geometry.hpp"

namespace rsim {

enum class VehicleKind : unsigned char { Cav, Hdv };

// Shared physical limits and safety-geometry constants.
struct VehicleLimits {
  double v_min = 0.0;    // m/s
  double v_max = 20.0;   // m/s
  double u_min = -4.0;   // m/s^2
  double u_max = 4.0;    // m/s^2
  double reaction_time = 1.8;  // s, headway factor in the distance constraints
  double gap_margin = 0.0;     // m, static offset for vehicle extent
  double body_height = 1.5;    // m, rollover lever arm
  double half_width = 0.9;     // m
  double gravity = 9.81;       // m/s^2
};

// Kinematic state of one vehicle. Value type; stepping is pure.
struct VehicleState {
  int id = -1;
  VehicleKind kind = VehicleKind::Hdv;
  double x = 0.0;  // m from current segment origin
  double v = 0.0;  // m/s
  double d = 0.0;  // m traveled since route origin
  int segment = 0;
  int chain_index = 0;  // index of `segment` in route.segments
  RouteSpec route;
  double entry_time = 0.0;       // s, time the vehicle entered the roundabout
  double aggressiveness = 0.0;   // HDV driving style in [-1, 1]

  bool on_entry(const RoundaboutLayout& l) const { return l.is_entry(segment); }
  // road code: 1 on an entry segment, 0 on the ring
  int road_code(const RoundaboutLayout& l) const { return on_entry(l) ? 1 : 0; }
  bool in_final_cz() const {
    return chain_index + 1 == static_cast<int>(route.segments.size());
  }
};

struct MpCrossing {
  int mp = 0;
  int from_segment = 0;
  double step_fraction = 0.0;  // fraction of the step at which the MP was crossed
};

struct StepOutcome {
  VehicleState next;
  bool speed_clamped = false;
  bool exited = false;
  double exit_fraction = 0.0;  // valid when exited
  std::vector<MpCrossing> crossings;
};

// Forward-Euler step with zero-order-hold control: x' = x + T_d v,
// v' = clamp(v + T_d u, v_min, v_max). Segment membership advances when the
// segment end is passed, carrying the overflow; crossings are interpolated
// within the step. The speed clamp is reported, never fatal.
StepOutcome step_dynamics(const RoundaboutLayout& layout,
                          const VehicleState& s, double u, double t_d,
                          const VehicleLimits& limits);

// Intelligent Driver Model parameters. The desired speed is derived per
// driver by the caller; remaining values are standard.
struct IdmParams {
  double desired_speed = 20.0;  // m/s (v0)
  double time_headway = 1.5;    // s
  double min_spacing = 2.0;     // m
  double accel = 2.0;           // m/s^2
  double comfort_decel = 3.0;   // m/s^2
  double exponent = 4.0;
};

struct IdmResult {
  double u = 0.0;
  bool overlap = false;  // leader gap was <= 0
};

inline constexpr double kNoLeaderGap = std::numeric_limits<double>::infinity();

// IDM longitudinal acceleration, clamped to [u_min, u_max]. Pass
// kNoLeaderGap when there is no leader. A non-positive gap returns maximal
// braking with the overlap flag raised.
IdmResult idm_acceleration(double v, double leader_gap, double leader_speed,
                           const IdmParams& params, const VehicleLimits& limits);

// Yielding model parameters for HDVs approaching a merging point.
struct HdvParams {
  double accept_gap_base = 40.0;   // m, reaction distance for an average driver
  double accept_gap_slope = 0.3;   // aggressiveness shrinks the distance
  double fixed_aggressiveness = 0.0;  // used when no per-vehicle draw is configured
};

struct LeaderView {
  double gap = 0.0;
  double speed = 0.0;
  int id = -1;
};

// Effective leader for an HDV: the more constraining of (a) the physical
// predecessor along the forward path and (b) a virtual leader projected from
// the cross-segment vehicle at the next merging point. The virtual leader is
// considered only when it is predicted to reach the MP first under constant
// speeds and lies within the driver's reaction distance.
std::optional<LeaderView> hdv_effective_leader(
    const RoundaboutLayout& layout, const VehicleState& hdv,
    std::span<const VehicleState> world, const HdvParams& params);

// Nearest vehicle physically ahead of `s` along its forward path.
std::optional<LeaderView> physical_predecessor(
    const RoundaboutLayout& layout, const VehicleState& s,
    std::span<const VehicleState> world);

}  // namespace rsim
