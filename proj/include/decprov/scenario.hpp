#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decprov/compliance.hpp"
#include "decprov/log.hpp"
#include "decprov/policy.hpp"

namespace decprov {

struct FaultInjection {
  std::string kind;     // model_stale | service_bad_update | process_skipped | sensor_bias
  std::string target;   // "Agent/component"
  std::int64_t window_start_s = 0;
  std::int64_t window_end_s = 0;
  std::int64_t staleness_s = 0;  // model_stale
  std::string process;           // process_skipped
  double offset = 0.0;           // sensor_bias

  bool active_at(std::int64_t tick) const {
    return tick >= window_start_s && tick <= window_end_s;
  }
  nlohmann::json to_json() const;
  static FaultInjection from_json(const nlohmann::json& j);
};

struct AgentSpec {
  std::string name;
  std::string kind;  // organisation / device / service
  Attrs attrs = Attrs::object();
};

struct ComponentSpec {
  std::string agent;
  std::string name;
  std::string behavior;
  std::optional<std::int64_t> at;        // one-shot tick
  std::optional<std::int64_t> period_s;  // periodic schedule
  std::int64_t phase_s = 0;
  nlohmann::json params = nlohmann::json::object();
};

struct DependencySpec {
  std::string producer;
  std::string consumer;
  std::string category;
  Boundary boundary = Boundary::Administrative;
};

// Declarative description of the simulated ecosystem: who exists, what each
// component emits or decides and when, which flows are expected, and which
// faults are scripted.
struct ScenarioSpec {
  std::string name;
  Instant start_time = 0;
  std::int64_t horizon_s = 0;
  std::uint64_t seed = 1;
  std::int64_t incident_tick = 0;
  double initial_light = 0.9;
  std::vector<double> busyness;  // scripted street busyness, one value per step
  std::int64_t busyness_step_s = 10;
  std::vector<AgentSpec> agents;
  std::vector<ComponentSpec> components;
  std::vector<DependencySpec> dependencies;
  std::vector<FaultInjection> faults;

  double busyness_at(std::int64_t tick) const;
  void validate() const;  // throws InvalidSpec
  nlohmann::json to_json() const;
  static ScenarioSpec from_json(const nlohmann::json& j);
  static ScenarioSpec load(const std::string& path);
};

// Pure copy-with-addition; throws WindowOutOfRange when the fault window
// does not fit the horizon.
ScenarioSpec inject(const ScenarioSpec& spec, const FaultInjection& fault);

struct SimEvent {
  std::int64_t tick = 0;
  std::string kind;    // emit / flow / decision / fault / blocked
  std::string detail;
  NodeId node;
};

struct SimResult {
  ProvLog log;
  std::vector<SimEvent> trace;
  std::vector<ComplianceDecision> decisions;
};

// Deterministic run: identical (spec, seed) gives a byte-identical log and
// trace. All capture goes through the policy gate; flows are checked against
// the compliance rules when supplied.
SimResult run_scenario(const ScenarioSpec& spec, const CapturePolicy* policy = nullptr,
                       const ComplianceConfig* rules = nullptr);

void save_trace(const std::vector<SimEvent>& trace, const std::string& path);

// One of the three investigation threads: driver / lighting / ambulance.
// Findings are the fault-tagged ancestors of the thread's decision node;
// the investigation itself is recorded in the log.
nlohmann::json investigate(ProvLog& log, const std::string& thread);

}  // namespace decprov
