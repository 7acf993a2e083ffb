#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "decprov/log.hpp"

namespace decprov {

enum class CaptureAction { RecordFull, RecordMetadataOnly, Redact, Drop };

const char* to_string(CaptureAction a);
CaptureAction parse_capture_action(const std::string& s);

// Literal string or single-`*` glob. Throws MalformedPattern on more than
// one `*`.
bool glob_match(const std::string& pattern, const std::string& text);

// First-match capture rule. All present criteria must hold:
//   kind      — payload kind (entity/activity/agent/relation/flow)
//   agent     — attrs["agent"] for nodes, from_agent for flows
//   boundary  — flow boundary kind
//   attrs     — for each (key pattern, value pattern) some attr matches both
struct CaptureRule {
  std::optional<std::string> kind;
  std::optional<std::string> agent;
  std::optional<std::string> boundary;
  std::vector<std::pair<std::string, std::string>> attrs;
  CaptureAction action = CaptureAction::RecordFull;
  std::optional<Instant> retention_ms;
};

struct CapturePolicy {
  std::vector<CaptureRule> rules;
  CaptureAction default_action = CaptureAction::RecordFull;

  static CapturePolicy from_json(const nlohmann::json& j);
  static CapturePolicy load(const std::string& path);
};

struct CaptureEval {
  CaptureAction action;
  std::optional<std::size_t> rule_index;  // absent when the default applied
};

// Pure: first matching rule's action, else the default.
CaptureEval evaluate(const CapturePolicy& policy, const Payload& payload);

struct GateResult {
  std::optional<NodeId> appended;
  CaptureAction action_taken;
};

// Applies the policy, transforms the payload as the action demands, and
// appends unless dropped. Transformed payloads carry attrs["capture_action"].
GateResult gate_append(const CapturePolicy& policy, Payload payload, ProvLog& log);

struct ExpireResult {
  ProvLog compacted;
  std::vector<NodeId> tombstoned;
};

// Rewrites the log with records past their matched rule's retention replaced
// by tombstones (attrs cleared, kind preserved, tombstone flag set). The
// chain is recomputed; the input log is untouched; graph shape is preserved.
ExpireResult expire(const CapturePolicy& policy, const ProvLog& log, Instant now);

}  // namespace decprov
