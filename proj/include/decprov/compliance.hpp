#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "decprov/log.hpp"
#include "decprov/query.hpp"

namespace decprov {

enum class Reaction { Allow, Block, FilterEntity, Quarantine, Alert };

const char* to_string(Reaction r);
Reaction parse_reaction(const std::string& s);

// Trigger predicate over a flow or use event. Every present criterion must
// hold; a rule with no criteria matches everything. Total by construction.
struct Trigger {
  bool not_whitelisted = false;   // flow absent from the expected-flow whitelist
  bool expired = false;           // entity attrs["expiry"] earlier than now
  bool unreliable_source = false; // backward trace touches an unreliable agent
  std::optional<std::string> boundary;
  std::optional<std::string> from_agent;
  std::optional<std::string> to_agent;
  std::optional<std::string> category;  // entity attrs["category"]
};

struct ComplianceRule {
  std::string id;
  Trigger trigger;
  Reaction reaction = Reaction::Allow;
  std::string alert_severity;   // optional alert attached to the decision
  std::string alert_recipient;
  std::string note;
};

// (from_agent pattern, to_agent pattern, entity-category pattern) triples.
struct ExpectedFlowPolicy {
  std::vector<std::array<std::string, 3>> allowed;
  bool contains(const std::string& from, const std::string& to,
                const std::string& category) const;
};

struct ComplianceConfig {
  std::vector<ComplianceRule> rules;
  ExpectedFlowPolicy whitelist;
  std::vector<std::string> unreliable_agents;  // agent names, in addition to attr flags

  static ComplianceConfig from_json(const nlohmann::json& j);
  static ComplianceConfig load(const std::string& path);
};

struct ComplianceDecision {
  NodeId event;      // flow id, or entity id for use checks
  std::string rule;  // empty when no rule triggered (Allow)
  Reaction reaction = Reaction::Allow;
  Instant timestamp = 0;
  std::string alert_severity;
  std::string alert_recipient;
  std::optional<NodeId> logged_activity;

  nlohmann::json to_json() const;
};

// First triggering rule's reaction, Allow if none. Non-Allow decisions are
// appended to `writer` (when given) as Activity nodes so reactions are
// themselves reviewable. The flow itself is expected to be in the log
// already — blocked flows stay logged, only delivery is suppressed.
ComplianceDecision check_flow(const ComplianceConfig& cfg, const ProvLog& snapshot,
                              const FlowEvent& event, Instant now, ProvLog* writer = nullptr);

// Per-input decisions for an activity's inputs: FilterEntity for expired
// entities, Quarantine for entities whose ancestry touches an unreliable
// agent, per the configured rules.
std::vector<ComplianceDecision> check_use(const ComplianceConfig& cfg, const ProvLog& snapshot,
                                          const std::vector<NodeId>& input_entities, Instant now,
                                          ProvLog* writer = nullptr);

// Agents flagged unreliable: attr reliable=false / unreliable=true, or listed
// in the config by name.
bool agent_unreliable(const ComplianceConfig& cfg, const ProvNode& agent);

// Breach report for an incident entity: backward and forward trace, actors,
// boundary crossings; an Alert decision is appended to the log.
nlohmann::json breach_report(const ComplianceConfig& cfg, ProvLog& log, const NodeId& incident,
                             const std::string& recipient);
std::string breach_report_text(const nlohmann::json& report);

}  // namespace decprov
