#include "rsim/geometry.hpp"

#include <cmath>
#include <string>

namespace rsim {

RoundaboutLayout RoundaboutLayout::make(const Config& cfg) {
  if (cfg.num_entries < 2)
    throw std::invalid_argument("layout: need at least 2 entries");
  const int n = cfg.num_entries;
  if (static_cast<int>(cfg.entry_length.size()) != n ||
      static_cast<int>(cfg.curve_length.size()) != n)
    throw std::invalid_argument("layout: per-CZ length lists must have one entry per CZ");

  RoundaboutLayout l;
  l.n_ = n;
  l.lengths_.resize(2 * n);
  double circ = 0.0;
  for (int k = 0; k < n; ++k) {
    if (cfg.entry_length[k] <= 0.0 || cfg.curve_length[k] <= 0.0)
      throw std::invalid_argument("layout: all segment lengths must be positive");
    l.lengths_[k] = cfg.entry_length[k];
    l.lengths_[n + k] = cfg.curve_length[k];
    circ += cfg.curve_length[k];
  }
  l.circumference_ = circ;
  // The ring arcs tile the circle exactly; radius follows from their sum
  // unless an explicit radius is given, which then has to agree.
  const double derived_radius = circ / (2.0 * kPi);
  if (cfg.ring_radius) {
    if (std::abs(2.0 * kPi * (*cfg.ring_radius) - circ) > 1e-9)
      throw std::invalid_argument(
          "layout: ring_radius inconsistent with arc lengths (|2*pi*r - sum| > 1e-9)");
    l.radius_ = *cfg.ring_radius;
  } else {
    l.radius_ = derived_radius;
  }
  l.mp_pos_.resize(n);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    acc += cfg.curve_length[k];
    l.mp_pos_[k] = acc;
  }
  return l;
}

RoundaboutLayout RoundaboutLayout::symmetric(int num_entries, double entry_len,
                                             double curve_len) {
  Config cfg;
  cfg.num_entries = num_entries;
  cfg.entry_length.assign(num_entries, entry_len);
  cfg.curve_length.assign(num_entries, curve_len);
  return make(cfg);
}

RouteSpec make_route(const RoundaboutLayout& layout, int origin, int exit) {
  const int n = layout.num_entries();
  if (origin < 0 || origin >= n || exit < 0 || exit >= n)
    throw std::invalid_argument("route: origin/exit out of range");

  RouteSpec r;
  r.origin = origin;
  r.exit = exit;
  r.segments.push_back(layout.entry_segment(origin));
  r.mps.push_back(origin);
  // arcs o+1, o+2, ..., e (mod n); exit == origin means a full loop
  const int arcs = ((exit - origin - 1) % n + n) % n + 1;
  for (int i = 1; i <= arcs; ++i) {
    const int k = (origin + i) % n;
    r.segments.push_back(layout.curve_segment(k));
    r.mps.push_back(k);
  }
  double acc = 0.0;
  r.cum_length.reserve(r.segments.size());
  for (int seg : r.segments) {
    r.cum_length.push_back(acc);
    acc += layout.length(seg);
  }
  r.total_length = acc;
  return r;
}

double curvature_at(const RoundaboutLayout& layout, const RouteSpec& route,
                    double d) {
  if (d < 0.0 || d > route.total_length)
    throw std::domain_error("curvature_at: d outside route [0, total_length]");
  if (d == route.total_length)
    return layout.curvature(route.segments.back());
  // half-open [start, end): a boundary position uses the segment entered
  for (std::size_t i = route.segments.size(); i-- > 0;) {
    if (d >= route.cum_length[i]) return layout.curvature(route.segments[i]);
  }
  return layout.curvature(route.segments.front());
}

std::optional<double> try_forward_gap(const RoundaboutLayout& layout,
                                      int seg_i, double x_i, int seg_ip,
                                      double x_ip) {
  if (seg_i == seg_ip && x_ip >= x_i) return x_ip - x_i;
  if (seg_i == seg_ip && layout.is_entry(seg_i))
    return x_ip - x_i;  // behind on the same entry; signed
  // walk the ring forward, accumulating the offset between segment origins
  double delta = layout.length(seg_i);
  int s = layout.next_physical(seg_i);
  for (int hops = 0; hops < layout.num_entries(); ++hops) {
    if (s == seg_ip) return x_ip + delta - x_i;
    delta += layout.length(s);
    s = layout.next_physical(s);
  }
  return std::nullopt;
}

double gap_to_predecessor(const RoundaboutLayout& layout, int seg_i,
                          double x_i, int seg_ip, double x_ip) {
  auto g = try_forward_gap(layout, seg_i, x_i, seg_ip, x_ip);
  if (!g)
    throw TopologyError("gap_to_predecessor: segments " +
                        std::to_string(seg_i) + " -> " +
                        std::to_string(seg_ip) + " not on a connected path");
  return *g;
}

double gap_to_merging_conflict(const RoundaboutLayout& layout, int seg_i,
                               double x_i, int seg_im, double x_im) {
  if (seg_i == seg_im)
    throw std::logic_error("gap_to_merging_conflict: same-segment pair");
  if (layout.cz_of(seg_i) != layout.cz_of(seg_im))
    throw std::logic_error("gap_to_merging_conflict: vehicles in different CZs");
  return (layout.length(seg_i) - x_i) - (layout.length(seg_im) - x_im);
}

RemainingToMp remaining_to_next_mp(const RoundaboutLayout& layout,
                                   const RouteSpec& route, int chain_index,
                                   double x) {
  RemainingToMp out;
  if (chain_index >= static_cast<int>(route.segments.size())) {
    out.past_final_mp = true;
    out.meters = 0.0;
    return out;
  }
  const int seg = route.segments[chain_index];
  out.meters = layout.length(seg) - x;
  if (out.meters < 0.0) {
    out.meters = 0.0;
    out.past_final_mp = chain_index + 1 == static_cast<int>(route.segments.size());
  }
  return out;
}

}  // namespace rsim
