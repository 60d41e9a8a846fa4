#include "rsim/vehicle.hpp"

#include <algorithm>
#include <cmath>

namespace rsim {

StepOutcome step_dynamics(const RoundaboutLayout& layout,
                          const VehicleState& s, double u, double t_d,
                          const VehicleLimits& limits) {
  StepOutcome out;
  out.next = s;
  VehicleState& n = out.next;

  const double advance = t_d * s.v;
  double v_new = s.v + t_d * u;
  if (v_new < limits.v_min - 1e-12 || v_new > limits.v_max + 1e-12)
    out.speed_clamped = true;
  v_new = std::clamp(v_new, limits.v_min, limits.v_max);

  n.v = v_new;
  n.d = s.d + advance;
  n.x = s.x + advance;

  // carry overflow across segment ends; each end is a merging point
  double x_local = s.x;
  double dist_done = 0.0;
  while (n.x >= layout.length(n.segment)) {
    const double seg_len = layout.length(n.segment);
    dist_done += seg_len - x_local;
    const double frac = advance > 0.0 ? dist_done / advance : 1.0;
    out.crossings.push_back({layout.mp_of(n.segment), n.segment, frac});
    if (n.chain_index + 1 >= static_cast<int>(s.route.segments.size())) {
      out.exited = true;
      out.exit_fraction = frac;
      n.x = seg_len;
      n.d = s.route.total_length;
      break;
    }
    n.x -= seg_len;
    n.chain_index += 1;
    n.segment = s.route.segments[n.chain_index];
    x_local = 0.0;
  }
  return out;
}

IdmResult idm_acceleration(double v, double leader_gap, double leader_speed,
                           const IdmParams& params,
                           const VehicleLimits& limits) {
  IdmResult r;
  if (leader_gap <= 0.0 && std::isfinite(leader_gap)) {
    r.u = limits.u_min;
    r.overlap = true;
    return r;
  }
  const double v0 = std::max(params.desired_speed, 0.1);
  double interaction = 0.0;
  if (std::isfinite(leader_gap)) {
    const double dv = v - leader_speed;
    const double s_star =
        params.min_spacing +
        std::max(0.0, v * params.time_headway +
                          v * dv / (2.0 * std::sqrt(params.accel *
                                                    params.comfort_decel)));
    interaction = (s_star / leader_gap) * (s_star / leader_gap);
  }
  const double free_flow = std::pow(v / v0, params.exponent);
  r.u = params.accel * (1.0 - free_flow - interaction);
  r.u = std::clamp(r.u, limits.u_min, limits.u_max);
  return r;
}

std::optional<LeaderView> physical_predecessor(
    const RoundaboutLayout& layout, const VehicleState& s,
    std::span<const VehicleState> world) {
  std::optional<LeaderView> best;
  for (const VehicleState& o : world) {
    if (o.id == s.id) continue;
    auto g = try_forward_gap(layout, s.segment, s.x, o.segment, o.x);
    if (!g || *g <= 0.0) continue;
    if (!best || *g < best->gap || (*g == best->gap && o.id < best->id))
      best = LeaderView{*g, o.v, o.id};
  }
  return best;
}

std::optional<LeaderView> hdv_effective_leader(
    const RoundaboutLayout& layout, const VehicleState& hdv,
    std::span<const VehicleState> world, const HdvParams& params) {
  std::optional<LeaderView> best = physical_predecessor(layout, hdv, world);

  // Virtual leader: cross-segment traffic heading to the same MP. The driver
  // yields (treats it as a leader) when it is predicted to arrive first and
  // is already within the accepted reaction distance.
  const double accept =
      params.accept_gap_base *
      (1.0 - params.accept_gap_slope * hdv.aggressiveness);
  const double l_own = layout.length(hdv.segment);
  const double own_eta =
      hdv.v > 1e-9 ? (l_own - hdv.x) / hdv.v
                   : std::numeric_limits<double>::infinity();
  for (const VehicleState& o : world) {
    if (o.id == hdv.id) continue;
    if (layout.cz_of(o.segment) != layout.cz_of(hdv.segment)) continue;
    if (o.segment == hdv.segment) continue;
    const double l_o = layout.length(o.segment);
    if (o.v <= 1e-9) continue;  // not predicted to reach the MP
    const double eta = (l_o - o.x) / o.v;
    if (eta >= own_eta) continue;
    const double raw_gap =
        gap_to_merging_conflict(layout, hdv.segment, hdv.x, o.segment, o.x);
    if (raw_gap > accept) continue;
    const double gap = std::max(raw_gap, 0.1);  // keep the IDM input usable
    if (!best || gap < best->gap) best = LeaderView{gap, o.v, o.id};
  }
  return best;
}

}  // namespace rsim
