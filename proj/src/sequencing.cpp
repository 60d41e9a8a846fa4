#include "rsim/sequencing.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace rsim {

const GroupMember* MergingGroup::find(int id) const {
  for (const auto& m : curve)
    if (m.id == id) return &m;
  for (const auto& m : entry)
    if (m.id == id) return &m;
  return nullptr;
}

namespace {

void interleave(const std::vector<GroupMember>& a,
                const std::vector<GroupMember>& b, std::size_t ia,
                std::size_t ib, std::vector<int>& prefix,
                std::vector<std::vector<int>>& out) {
  if (ia == a.size() && ib == b.size()) {
    out.push_back(prefix);
    return;
  }
  if (ia < a.size()) {
    prefix.push_back(a[ia].id);
    interleave(a, b, ia + 1, ib, prefix, out);
    prefix.pop_back();
  }
  if (ib < b.size()) {
    prefix.push_back(b[ib].id);
    interleave(a, b, ia, ib + 1, prefix, out);
    prefix.pop_back();
  }
}

std::unordered_map<int, const GroupMember*> index_members(
    const MergingGroup& g) {
  std::unordered_map<int, const GroupMember*> by_id;
  by_id.reserve(g.size());
  for (const auto& m : g.curve) by_id[m.id] = &m;
  for (const auto& m : g.entry) by_id[m.id] = &m;
  return by_id;
}

// number of id pairs ordered differently in the two sequences
int inversion_distance(const std::vector<int>& a, const std::vector<int>& b) {
  std::unordered_map<int, int> pos;
  for (std::size_t i = 0; i < b.size(); ++i) pos[b[i]] = static_cast<int>(i);
  int dist = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto pi = pos.find(a[i]);
    if (pi == pos.end()) continue;
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      auto pj = pos.find(a[j]);
      if (pj == pos.end()) continue;
      if (pi->second > pj->second) ++dist;
    }
  }
  return dist;
}

}  // namespace

std::vector<std::vector<int>> enumerate_feasible(const MergingGroup& group) {
  std::vector<std::vector<int>> out;
  std::vector<int> prefix;
  prefix.reserve(group.size());
  interleave(group.curve, group.entry, 0, 0, prefix, out);
  return out;
}

bool merge_ahead_permitted(const GroupMember& cav, const GroupMember& hdv,
                           double reaction_time,
                           const SafePolicyParams& params) {
  const double z = (hdv.seg_length - hdv.x) - (cav.seg_length - cav.x);
  const double lhs =
      z - reaction_time * (hdv.v - cav.v * cav.x / cav.seg_length);
  return lhs >= params.threshold(hdv.aggressiveness);
}

std::vector<std::vector<int>> filter_safe(
    const std::vector<std::vector<int>>& sequences, const MergingGroup& group,
    double reaction_time, const SafePolicyParams& params) {
  auto by_id = index_members(group);
  std::vector<std::vector<int>> kept;
  kept.reserve(sequences.size());
  for (const auto& seq : sequences) {
    bool safe = true;
    for (std::size_t i = 0; i < seq.size() && safe; ++i) {
      const GroupMember* mi = by_id.at(seq[i]);
      if (mi->kind != VehicleKind::Cav) continue;
      // first follower from the other segment is the direct merge conflict
      for (std::size_t j = i + 1; j < seq.size(); ++j) {
        const GroupMember* mj = by_id.at(seq[j]);
        if (mj->c == mi->c) continue;
        if (mj->kind == VehicleKind::Hdv &&
            !merge_ahead_permitted(*mi, *mj, reaction_time, params))
          safe = false;
        break;
      }
    }
    if (safe) kept.push_back(seq);
  }
  return kept;
}

std::vector<std::vector<int>> filter_baseline(
    const std::vector<std::vector<int>>& sequences, const MergingGroup& group) {
  auto by_id = index_members(group);
  std::vector<std::vector<int>> kept;
  kept.reserve(sequences.size());
  for (const auto& seq : sequences) {
    bool ok = true;
    for (std::size_t i = 0; i < seq.size() && ok; ++i) {
      const GroupMember* mi = by_id.at(seq[i]);
      if (mi->kind != VehicleKind::Cav || mi->c != 1) continue;
      for (std::size_t j = i + 1; j < seq.size(); ++j) {
        const GroupMember* mj = by_id.at(seq[j]);
        if (mj->c == 0 && mj->kind == VehicleKind::Hdv) {
          ok = false;  // an entry CAV ahead of a ring HDV
          break;
        }
      }
    }
    if (ok) kept.push_back(seq);
  }
  return kept;
}

std::vector<int> all_yield_sequence(const MergingGroup& group) {
  std::vector<int> out;
  out.reserve(group.size());
  std::size_t ic = 0, ie = 0;
  while (ic < group.curve.size() || ie < group.entry.size()) {
    const bool curve_left = ic < group.curve.size();
    const bool entry_left = ie < group.entry.size();
    if (curve_left && group.curve[ic].kind == VehicleKind::Hdv) {
      out.push_back(group.curve[ic++].id);
    } else if (entry_left && group.entry[ie].kind == VehicleKind::Hdv) {
      out.push_back(group.entry[ie++].id);
    } else if (curve_left) {
      out.push_back(group.curve[ic++].id);
    } else {
      out.push_back(group.entry[ie++].id);
    }
  }
  return out;
}

std::vector<std::vector<int>> cap_candidates(
    std::vector<std::vector<int>> candidates, const std::vector<int>& current,
    const std::vector<int>& must_keep, std::size_t cap) {
  if (candidates.size() <= cap || cap == 0) return candidates;
  std::vector<std::size_t> idx(candidates.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (!current.empty()) {
    std::vector<int> dist(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
      dist[i] = inversion_distance(candidates[i], current);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
    });
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());  // keep enumeration order among survivors
  std::vector<std::vector<int>> kept;
  kept.reserve(cap);
  bool have_must = false;
  for (std::size_t i : idx) {
    if (candidates[i] == must_keep) have_must = true;
    kept.push_back(std::move(candidates[i]));
  }
  if (!have_must && !must_keep.empty()) kept.back() = must_keep;
  return kept;
}

Assignments assign_ip_im(const std::vector<int>& order,
                         const MergingGroup& group, const AssignContext& ctx) {
  auto by_id = index_members(group);
  Assignments out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const GroupMember* mi = by_id.at(order[i]);
    bool have_ip = false;
    for (std::size_t j = i; j-- > 0;) {
      const GroupMember* mj = by_id.at(order[j]);
      if (mj->c != mi->c && !out.im.count(mi->id)) out.im[mi->id] = mj->id;
      if (mj->c == mi->c && !have_ip) {
        out.ip[mi->id] = mj->id;
        have_ip = true;
      }
    }
    if (!have_ip) {
      // subsequence head: predecessor lives on a ring arc further around,
      // unless the vehicle is already in its final CZ
      const bool final_cz =
          std::find(ctx.final_cz_ids.begin(), ctx.final_cz_ids.end(),
                    mi->id) != ctx.final_cz_ids.end();
      if (!final_cz && !ctx.last_curve_vehicle.empty()) {
        const int n = static_cast<int>(ctx.last_curve_vehicle.size());
        for (int step = 1; step < n; ++step) {
          const auto& slot = ctx.last_curve_vehicle[(group.cz + step) % n];
          if (slot) {
            out.ip[mi->id] = *slot;
            break;
          }
        }
      }
    }
  }
  return out;
}

SelectResult select_optimal(const std::vector<double>& costs,
                            int fallback_index) {
  SelectResult r;
  r.cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (costs[i] < r.cost) {
      r.cost = costs[i];
      r.index = static_cast<int>(i);
    }
  }
  if (r.index < 0 || !std::isfinite(r.cost)) {
    r.index = fallback_index;
    r.fallback = true;
    r.cost = std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace rsim
