#pragma once
#include <string>
#include <vector>

#include "rsim/controller.hpp"
#include "rsim/sequencing.hpp"
#include "rsim/vehicle.hpp"

namespace rsim {

enum class PolicyKind { SafeSequencing, BaselineYield, HdvOnly };

enum class TraceLevel { Off, Summary, Full };

struct IdmConfig {
  double time_headway = 1.5;
  double min_spacing = 2.0;
  double accel = 2.0;
  double comfort_decel = 3.0;
  double exponent = 4.0;
  // desired speed per driver: v_max * (1 + factor * aggressiveness), capped
  double desired_speed_factor = 0.1;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::SafeSequencing;
  SafePolicyParams safe;          // merge-ahead thresholds
  std::size_t max_candidates = 64;
};

struct SimConfig {
  std::vector<double> arrival_rates_vph = {396.0, 396.0, 396.0};
  double cav_penetration = 0.8;
  double duration = 1000.0;       // s of traffic generation
  std::uint64_t seed = 1;
  double resequence_timeout = 1.0;  // s
  double spawn_speed = 10.0;        // m/s
  bool drain = true;                // keep stepping until traffic clears
  double drain_limit = 120.0;       // s
  double pet_threshold = 1.0;       // s
  bool pet_critical_below = true;   // critical when PET < threshold
  TraceLevel trace = TraceLevel::Summary;
};

struct ScenarioConfig {
  std::string name = "default";
  RoundaboutLayout::Config geometry{3, {60.0, 60.0, 60.0}, {60.0, 60.0, 60.0}, {}};
  VehicleLimits limits;
  IdmConfig idm;
  HdvParams hdv;
  ControllerConfig controller;  // kappa_max is derived from geometry at load
  PolicyConfig policy;
  SimConfig sim;
};

// Parse from a JSON document; unknown keys are rejected, missing keys keep
// defaults. Validates layout and basic ranges.
ScenarioConfig scenario_from_json(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

// Full resolved configuration, suitable for byte-stable reruns.
std::string scenario_to_json(const ScenarioConfig& cfg);

// Named arrival-rate presets for the three-entry layout:
// balanced (396 each), unbalanced (108/540/540), heavy (576 each).
void apply_demand_preset(ScenarioConfig& cfg, const std::string& name);

const char* policy_name(PolicyKind k);
PolicyKind policy_from_name(const std::string& s);

}  // namespace rsim
