#include "rsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rsim {

using nlohmann::json;

namespace {

// read known keys into refs; complain about anything unexpected
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {}

  template <typename T>
  void get(const char* key, T& out) {
    keys_.insert(key);
    if (j_.contains(key)) out = j_.at(key).get<T>();
  }

  const json* sub(const char* key) {
    keys_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!keys_.count(it.key()))
        throw std::invalid_argument("config: unknown key '" + name_ + "." +
                                    it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> keys_;
};

TraceLevel trace_from_name(const std::string& s) {
  if (s == "off") return TraceLevel::Off;
  if (s == "summary") return TraceLevel::Summary;
  if (s == "full") return TraceLevel::Full;
  throw std::invalid_argument("config: unknown trace level '" + s + "'");
}

const char* trace_name(TraceLevel t) {
  switch (t) {
    case TraceLevel::Off: return "off";
    case TraceLevel::Summary: return "summary";
    case TraceLevel::Full: return "full";
  }
  return "summary";
}

}  // namespace

const char* policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::SafeSequencing: return "ss";
    case PolicyKind::BaselineYield: return "bs";
    case PolicyKind::HdvOnly: return "hdv";
  }
  return "ss";
}

PolicyKind policy_from_name(const std::string& s) {
  if (s == "ss") return PolicyKind::SafeSequencing;
  if (s == "bs") return PolicyKind::BaselineYield;
  if (s == "hdv") return PolicyKind::HdvOnly;
  throw std::invalid_argument("config: unknown policy '" + s + "'");
}

ScenarioConfig scenario_from_json(const std::string& text) {
  const json j = json::parse(text);
  ScenarioConfig cfg;

  Section root(j, "");
  root.get("name", cfg.name);

  if (const json* g = root.sub("geometry")) {
    Section s(*g, "geometry");
    s.get("num_entries", cfg.geometry.num_entries);
    s.get("entry_length", cfg.geometry.entry_length);
    s.get("curve_length", cfg.geometry.curve_length);
    double radius = 0.0;
    if ((*g).contains("ring_radius") && !(*g).at("ring_radius").is_null()) {
      s.get("ring_radius", radius);
      cfg.geometry.ring_radius = radius;
    } else {
      s.get("ring_radius", radius);  // consume the key when null
      cfg.geometry.ring_radius.reset();
    }
  }
  if (const json* l = root.sub("limits")) {
    Section s(*l, "limits");
    s.get("v_min", cfg.limits.v_min);
    s.get("v_max", cfg.limits.v_max);
    s.get("u_min", cfg.limits.u_min);
    s.get("u_max", cfg.limits.u_max);
    s.get("reaction_time", cfg.limits.reaction_time);
    s.get("gap_margin", cfg.limits.gap_margin);
    s.get("body_height", cfg.limits.body_height);
    s.get("half_width", cfg.limits.half_width);
    s.get("gravity", cfg.limits.gravity);
  }
  if (const json* i = root.sub("idm")) {
    Section s(*i, "idm");
    s.get("time_headway", cfg.idm.time_headway);
    s.get("min_spacing", cfg.idm.min_spacing);
    s.get("accel", cfg.idm.accel);
    s.get("comfort_decel", cfg.idm.comfort_decel);
    s.get("exponent", cfg.idm.exponent);
    s.get("desired_speed_factor", cfg.idm.desired_speed_factor);
  }
  if (const json* h = root.sub("hdv")) {
    Section s(*h, "hdv");
    s.get("accept_gap_base", cfg.hdv.accept_gap_base);
    s.get("accept_gap_slope", cfg.hdv.accept_gap_slope);
    s.get("aggressiveness", cfg.hdv.fixed_aggressiveness);
  }
  if (const json* c = root.sub("controller")) {
    Section s(*c, "controller");
    s.get("horizon", cfg.controller.horizon);
    s.get("step", cfg.controller.step);
    s.get("lambda_speed", cfg.controller.lambda_speed);
    s.get("lambda_comfort", cfg.controller.lambda_comfort);
    s.get("desired_speed", cfg.controller.desired_speed);
    s.get("k_speed_upper", cfg.controller.gains.k_speed_upper);
    s.get("k_speed_lower", cfg.controller.gains.k_speed_lower);
    s.get("k_rear", cfg.controller.gains.k_rear);
    s.get("k_lateral", cfg.controller.gains.k_lateral);
    s.get("clbf_p", cfg.controller.gains.clbf_p);
    s.get("clbf_q", cfg.controller.gains.clbf_q);
    s.get("solver_tol", cfg.controller.solver_tol);
    s.get("refine_passes", cfg.controller.refine_passes);
    s.get("refine_delta", cfg.controller.refine_delta);
  }
  if (const json* p = root.sub("policy")) {
    Section s(*p, "policy");
    std::string kind = policy_name(cfg.policy.kind);
    s.get("kind", kind);
    cfg.policy.kind = policy_from_name(kind);
    s.get("merge_gap_base", cfg.policy.safe.base_gap);
    s.get("merge_gap_sensitivity", cfg.policy.safe.sensitivity);
    s.get("max_candidates", cfg.policy.max_candidates);
  }
  if (const json* m = root.sub("sim")) {
    Section s(*m, "sim");
    s.get("arrival_rates_vph", cfg.sim.arrival_rates_vph);
    s.get("cav_penetration", cfg.sim.cav_penetration);
    s.get("duration", cfg.sim.duration);
    s.get("seed", cfg.sim.seed);
    s.get("resequence_timeout", cfg.sim.resequence_timeout);
    s.get("spawn_speed", cfg.sim.spawn_speed);
    s.get("drain", cfg.sim.drain);
    s.get("drain_limit", cfg.sim.drain_limit);
    s.get("pet_threshold", cfg.sim.pet_threshold);
    s.get("pet_critical_below", cfg.sim.pet_critical_below);
    std::string trace = trace_name(cfg.sim.trace);
    s.get("trace", trace);
    cfg.sim.trace = trace_from_name(trace);
  }

  // validation beyond what the layout itself enforces
  const auto layout = RoundaboutLayout::make(cfg.geometry);
  cfg.controller.kappa_max = layout.max_curvature();
  cfg.controller.limits = cfg.limits;
  if (static_cast<int>(cfg.sim.arrival_rates_vph.size()) !=
      cfg.geometry.num_entries)
    throw std::invalid_argument("config: one arrival rate per entry required");
  for (double r : cfg.sim.arrival_rates_vph)
    if (r < 0.0) throw std::invalid_argument("config: arrival rates must be >= 0");
  if (cfg.sim.cav_penetration < 0.0 || cfg.sim.cav_penetration > 1.0)
    throw std::invalid_argument("config: cav_penetration must be in [0, 1]");
  if (cfg.sim.duration <= 0.0)
    throw std::invalid_argument("config: duration must be positive");
  if (cfg.controller.horizon < 1 || cfg.controller.step <= 0.0)
    throw std::invalid_argument("config: horizon >= 1 and step > 0 required");
  if (cfg.controller.gains.clbf_q <= 0.0 || cfg.controller.gains.clbf_q >= 1.0)
    throw std::invalid_argument("config: clbf_q must lie in (0, 1)");
  if (cfg.limits.v_max <= cfg.limits.v_min || cfg.limits.v_min < 0.0 ||
      cfg.limits.u_min >= 0.0 || cfg.limits.u_max <= 0.0)
    throw std::invalid_argument("config: bad speed/acceleration limits");
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["geometry"] = {{"num_entries", cfg.geometry.num_entries},
                   {"entry_length", cfg.geometry.entry_length},
                   {"curve_length", cfg.geometry.curve_length}};
  if (cfg.geometry.ring_radius)
    j["geometry"]["ring_radius"] = *cfg.geometry.ring_radius;
  else
    j["geometry"]["ring_radius"] = nullptr;
  j["limits"] = {{"v_min", cfg.limits.v_min},
                 {"v_max", cfg.limits.v_max},
                 {"u_min", cfg.limits.u_min},
                 {"u_max", cfg.limits.u_max},
                 {"reaction_time", cfg.limits.reaction_time},
                 {"gap_margin", cfg.limits.gap_margin},
                 {"body_height", cfg.limits.body_height},
                 {"half_width", cfg.limits.half_width},
                 {"gravity", cfg.limits.gravity}};
  j["idm"] = {{"time_headway", cfg.idm.time_headway},
              {"min_spacing", cfg.idm.min_spacing},
              {"accel", cfg.idm.accel},
              {"comfort_decel", cfg.idm.comfort_decel},
              {"exponent", cfg.idm.exponent},
              {"desired_speed_factor", cfg.idm.desired_speed_factor}};
  j["hdv"] = {{"accept_gap_base", cfg.hdv.accept_gap_base},
              {"accept_gap_slope", cfg.hdv.accept_gap_slope},
              {"aggressiveness", cfg.hdv.fixed_aggressiveness}};
  j["controller"] = {{"horizon", cfg.controller.horizon},
                     {"step", cfg.controller.step},
                     {"lambda_speed", cfg.controller.lambda_speed},
                     {"lambda_comfort", cfg.controller.lambda_comfort},
                     {"desired_speed", cfg.controller.desired_speed},
                     {"k_speed_upper", cfg.controller.gains.k_speed_upper},
                     {"k_speed_lower", cfg.controller.gains.k_speed_lower},
                     {"k_rear", cfg.controller.gains.k_rear},
                     {"k_lateral", cfg.controller.gains.k_lateral},
                     {"clbf_p", cfg.controller.gains.clbf_p},
                     {"clbf_q", cfg.controller.gains.clbf_q},
                     {"solver_tol", cfg.controller.solver_tol},
                     {"refine_passes", cfg.controller.refine_passes},
                     {"refine_delta", cfg.controller.refine_delta}};
  j["policy"] = {{"kind", policy_name(cfg.policy.kind)},
                 {"merge_gap_base", cfg.policy.safe.base_gap},
                 {"merge_gap_sensitivity", cfg.policy.safe.sensitivity},
                 {"max_candidates", cfg.policy.max_candidates}};
  j["sim"] = {{"arrival_rates_vph", cfg.sim.arrival_rates_vph},
              {"cav_penetration", cfg.sim.cav_penetration},
              {"duration", cfg.sim.duration},
              {"seed", cfg.sim.seed},
              {"resequence_timeout", cfg.sim.resequence_timeout},
              {"spawn_speed", cfg.sim.spawn_speed},
              {"drain", cfg.sim.drain},
              {"drain_limit", cfg.sim.drain_limit},
              {"pet_threshold", cfg.sim.pet_threshold},
              {"pet_critical_below", cfg.sim.pet_critical_below},
              {"trace", trace_name(cfg.sim.trace)}};
  return j.dump(2) + "\n";
}

void apply_demand_preset(ScenarioConfig& cfg, const std::string& name) {
  if (cfg.geometry.num_entries != 3)
    throw std::invalid_argument("demand presets are defined for 3 entries");
  if (name == "balanced") {
    cfg.sim.arrival_rates_vph = {396.0, 396.0, 396.0};
  } else if (name == "unbalanced") {
    cfg.sim.arrival_rates_vph = {108.0, 540.0, 540.0};
  } else if (name == "heavy") {
    cfg.sim.arrival_rates_vph = {576.0, 576.0, 576.0};
  } else {
    throw std::invalid_argument("config: unknown demand preset '" + name + "'");
  }
}

}  // namespace rsim
