#pragma once
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "rsim/vehicle.hpp"

namespace rsim {

// Snapshot of one vehicle for sequencing decisions.
struct GroupMember {
  int id = -1;
  VehicleKind kind = VehicleKind::Hdv;
  int c = 0;            // 1 = entry road, 0 = ring arc
  double x = 0.0;       // m from segment origin
  double v = 0.0;       // m/s
  double seg_length = 0.0;
  double aggressiveness = 0.0;
};

// All vehicles currently inside one control zone, split by road segment.
// Each side is ordered by decreasing x (closest to the merging point first);
// projected exit order must preserve these per-segment orders.
struct MergingGroup {
  int cz = 0;
  std::vector<GroupMember> curve;
  std::vector<GroupMember> entry;

  std::size_t size() const { return curve.size() + entry.size(); }
  const GroupMember* find(int id) const;
};

// Thresholds of the merge-ahead distance rule. The gap required in front of
// an HDV grows cubically with its aggressiveness:
// g(a) = base_gap + sensitivity * a^3.
struct SafePolicyParams {
  double base_gap = 10.0;     // m
  double sensitivity = 5.0;   // m
  double threshold(double a) const { return base_gap + sensitivity * a * a * a; }
};

// All interleavings of the two per-segment orders; count is
// binomial(n0 + n1, n0). An empty group yields one empty sequence.
// Enumeration order is deterministic (curve head preferred first).
std::vector<std::vector<int>> enumerate_feasible(const MergingGroup& group);

// Distance condition under which HDV `hdv` does not influence CAV `cav`:
// z_{j,i} - phi * (v_j - v_i * x_i / L_i) >= g(a_j).
bool merge_ahead_permitted(const GroupMember& cav, const GroupMember& hdv,
                           double reaction_time,
                           const SafePolicyParams& params);

// Safe-sequence filter: drops every order in which some CAV's first
// cross-segment follower is an HDV that fails merge_ahead_permitted. The
// maximally yielding order always survives.
std::vector<std::vector<int>> filter_safe(
    const std::vector<std::vector<int>>& sequences, const MergingGroup& group,
    double reaction_time, const SafePolicyParams& params);

// Baseline yielding filter: keeps only orders in which every entry-road CAV
// is placed after every ring-road HDV of the group.
std::vector<std::vector<int>> filter_baseline(
    const std::vector<std::vector<int>>& sequences, const MergingGroup& group);

// The maximally yielding order: HDV heads are emitted as early as on-road
// order allows (ring side first) and entry CAVs go last. Contains no CAV
// whose first cross-segment follower is an HDV, so every filter keeps it.
std::vector<int> all_yield_sequence(const MergingGroup& group);

// Keeps at most `cap` candidates, preferring those closest in pair-inversion
// distance to `current` (falling back to enumeration order), and always
// retains `must_keep`.
std::vector<std::vector<int>> cap_candidates(
    std::vector<std::vector<int>> candidates,
    const std::vector<int>& current, const std::vector<int>& must_keep,
    std::size_t cap);

// World-derived inputs for predecessor assignment of subsequence heads.
struct AssignContext {
  // id of the rearmost ring-arc vehicle per CZ (empty slot when none)
  std::vector<std::optional<int>> last_curve_vehicle;
  // group member ids whose current CZ is the last of their route
  std::vector<int> final_cz_ids;
};

struct Assignments {
  std::map<int, int> ip;  // vehicle -> physical predecessor under the order
  std::map<int, int> im;  // vehicle -> cross-segment conflict ahead
};

// i_m: nearest predecessor in the order from the other segment. i_p: the
// immediate predecessor within the vehicle's own per-segment subsequence;
// heads look through successive CZs' ring arcs, stopping after one loop.
Assignments assign_ip_im(const std::vector<int>& order,
                         const MergingGroup& group, const AssignContext& ctx);

struct SelectResult {
  int index = -1;       // chosen candidate
  double cost = 0.0;
  bool fallback = false;  // every candidate was infeasible
};

// Argmin of candidate costs with first-wins tie-breaking; +inf marks an
// infeasible candidate. When all are infeasible, returns `fallback_index`
// with the fallback flag set.
SelectResult select_optimal(const std::vector<double>& costs,
                            int fallback_index);

}  // namespace rsim
