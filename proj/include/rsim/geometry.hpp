#pragma once
#include <optional>
#include <stdexcept>
#include <vector>

namespace rsim {

inline constexpr double kPi = 3.14159265358979323846;

// Raised when two vehicles are not on a connected forward path.
struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Static geometry of an N-entry single-lane roundabout. Each control zone
// (CZ) k owns one straight entry segment and one ring arc, both ending at
// merging point M_k. Traffic is counterclockwise: after M_k a vehicle is on
// the arc of CZ (k+1) mod N.
//
// Segment ids: [0, N) are entry segments, [N, 2N) are ring arcs; arc N+k
// ends at M_k. Immutable after construction; safe for concurrent reads.
class RoundaboutLayout {
 public:
  struct Config {
    int num_entries = 3;
    std::vector<double> entry_length;       // meters, per CZ
    std::vector<double> curve_length;       // meters, per CZ (ring arcs)
    std::optional<double> ring_radius;      // must match arc sum when given
  };

  static RoundaboutLayout make(const Config& cfg);
  // All entry segments of length `entry_len`, all arcs of length `curve_len`.
  static RoundaboutLayout symmetric(int num_entries, double entry_len,
                                    double curve_len);

  int num_entries() const { return n_; }
  int num_segments() const { return 2 * n_; }
  int entry_segment(int cz) const { return cz; }
  int curve_segment(int cz) const { return n_ + cz; }
  bool is_entry(int seg) const { return seg < n_; }
  int cz_of(int seg) const { return is_entry(seg) ? seg : seg - n_; }
  // merging point a segment feeds into
  int mp_of(int seg) const { return cz_of(seg); }

  double length(int seg) const { return lengths_[seg]; }
  double curvature(int seg) const { return is_entry(seg) ? 0.0 : 1.0 / radius_; }
  double max_curvature() const { return 1.0 / radius_; }
  double ring_radius() const { return radius_; }
  double ring_circumference() const { return circumference_; }
  // arc position of M_k along the ring, measured from the start of arc 0
  double mp_arc_position(int k) const { return mp_pos_[k]; }

  // segment physically after `seg` in the driving direction
  int next_physical(int seg) const {
    return curve_segment((cz_of(seg) + 1) % n_);
  }

 private:
  int n_ = 0;
  std::vector<double> lengths_;  // indexed by segment id
  std::vector<double> mp_pos_;
  double radius_ = 0.0;
  double circumference_ = 0.0;
};

// One vehicle's path: the origin entry segment followed by ring arcs up to
// and including the arc ending at the exit merging point. mps lists the
// merging points crossed, in order; the last one is crossed on exit.
struct RouteSpec {
  int origin = 0;
  int exit = 0;
  std::vector<int> segments;
  std::vector<int> mps;
  std::vector<double> cum_length;  // route distance at each segment start
  double total_length = 0.0;
};

RouteSpec make_route(const RoundaboutLayout& layout, int origin, int exit);

// Piecewise-constant curvature along a route: 0 on the entry, 1/r on arcs.
// A position exactly on a segment boundary belongs to the segment being
// entered ([start, end) intervals); d == total_length uses the last segment.
double curvature_at(const RoundaboutLayout& layout, const RouteSpec& route,
                    double d);

// Along-road center-to-center distance from (seg_i, x_i) to a vehicle ahead
// at (seg_ip, x_ip), following the physical forward path (at most one full
// ring loop). Returns a negative value for a same-segment vehicle behind.
// Throws TopologyError when the target segment is not reachable forward.
double gap_to_predecessor(const RoundaboutLayout& layout, int seg_i,
                          double x_i, int seg_ip, double x_ip);

// Like gap_to_predecessor but never throws; empty when not connected.
std::optional<double> try_forward_gap(const RoundaboutLayout& layout,
                                      int seg_i, double x_i, int seg_ip,
                                      double x_ip);

// Difference of distances-to-MP for two vehicles of the same CZ on opposite
// segments: (L_i - x_i) - (L_im - x_im). Positive when im is closer to the
// merging point. Throws std::logic_error on a same-segment pair.
double gap_to_merging_conflict(const RoundaboutLayout& layout, int seg_i,
                               double x_i, int seg_im, double x_im);

struct RemainingToMp {
  double meters = 0.0;
  bool past_final_mp = false;
};

// Distance left on the current segment before its merging point. In this
// topology routes end at their final MP, so past_final_mp only flags a
// position beyond the route's end.
RemainingToMp remaining_to_next_mp(const RoundaboutLayout& layout,
                                   const RouteSpec& route, int chain_index,
                                   double x);

}  // namespace rsim
