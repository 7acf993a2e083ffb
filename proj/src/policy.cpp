#include "decprov/policy.hpp"

#include <fstream>

#include "decprov/errors.hpp"

namespace decprov {

const char* to_string(CaptureAction a) {
  switch (a) {
    case CaptureAction::RecordFull: return "record_full";
    case CaptureAction::RecordMetadataOnly: return "metadata_only";
    case CaptureAction::Redact: return "redact";
    case CaptureAction::Drop: return "drop";
  }
  return "?";
}

CaptureAction parse_capture_action(const std::string& s) {
  if (s == "record_full") return CaptureAction::RecordFull;
  if (s == "metadata_only") return CaptureAction::RecordMetadataOnly;
  if (s == "redact") return CaptureAction::Redact;
  if (s == "drop") return CaptureAction::Drop;
  throw Error(Errc::ParseError, "unknown capture action: " + s);
}

bool glob_match(const std::string& pattern, const std::string& text) {
  auto star = pattern.find('*');
  if (star == std::string::npos) return pattern == text;
  if (pattern.find('*', star + 1) != std::string::npos)
    throw Error(Errc::MalformedPattern, "more than one '*' in: " + pattern);
  std::string prefix = pattern.substr(0, star);
  std::string suffix = pattern.substr(star + 1);
  if (text.size() < prefix.size() + suffix.size()) return false;
  return text.compare(0, prefix.size(), prefix) == 0 &&
         text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

namespace {

std::string attr_as_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string payload_kind_string(const Payload& p) {
  if (const auto* n = std::get_if<ProvNode>(&p)) return to_string(n->kind);
  if (std::holds_alternative<ProvRelation>(p)) return "relation";
  return "flow";
}

std::string payload_agent_string(const Payload& p) {
  if (const auto* n = std::get_if<ProvNode>(&p)) {
    auto it = n->attrs.find("agent");
    return it != n->attrs.end() && it->is_string() ? it->get<std::string>() : std::string();
  }
  if (const auto* f = std::get_if<FlowEvent>(&p)) return f->from_agent;
  return {};
}

bool rule_matches(const CaptureRule& r, const Payload& p) {
  if (r.kind && !glob_match(*r.kind, payload_kind_string(p))) return false;
  if (r.agent && !glob_match(*r.agent, payload_agent_string(p))) return false;
  if (r.boundary) {
    const auto* f = std::get_if<FlowEvent>(&p);
    if (!f || !glob_match(*r.boundary, to_string(f->boundary))) return false;
  }
  if (!r.attrs.empty()) {
    const auto* n = std::get_if<ProvNode>(&p);
    if (!n) return false;
    for (const auto& [kp, vp] : r.attrs) {
      bool any = false;
      for (auto it = n->attrs.begin(); it != n->attrs.end() && !any; ++it)
        any = glob_match(kp, it.key()) && glob_match(vp, attr_as_string(it.value()));
      if (!any) return false;
    }
  }
  return true;
}

constexpr const char* kTagPersonal = "#pd";
constexpr const char* kTagPayload = "#payload";

bool has_tag(const Attrs& attrs, const std::string& key, const char* tag) {
  auto it = attrs.find(key + tag);
  return it != attrs.end() && it->is_boolean() && it->get<bool>();
}

bool is_tag_key(const std::string& key) { return key.find('#') != std::string::npos; }

}  // namespace

CapturePolicy CapturePolicy::from_json(const nlohmann::json& j) {
  CapturePolicy p;
  p.default_action = parse_capture_action(j.value("default_action", std::string("record_full")));
  for (const auto& rj : j.value("rules", nlohmann::json::array())) {
    CaptureRule r;
    const auto& m = rj.value("match", nlohmann::json::object());
    if (m.contains("kind")) r.kind = m.at("kind").get<std::string>();
    if (m.contains("agent")) r.agent = m.at("agent").get<std::string>();
    if (m.contains("boundary")) r.boundary = m.at("boundary").get<std::string>();
    if (m.contains("attrs"))
      for (const auto& [k, v] : m.at("attrs").items())
        r.attrs.emplace_back(k, attr_as_string(v));
    r.action = parse_capture_action(rj.at("action").get<std::string>());
    if (rj.contains("retention_s")) {
      std::int64_t s = rj.at("retention_s").get<std::int64_t>();
      if (s <= 0) throw Error(Errc::ParseError, "retention_s must be > 0");
      r.retention_ms = s * 1000;
    }
    p.rules.push_back(std::move(r));
  }
  return p;
}

CapturePolicy CapturePolicy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, "bad policy JSON: " + path);
  return from_json(j);
}

CaptureEval evaluate(const CapturePolicy& policy, const Payload& payload) {
  for (std::size_t i = 0; i < policy.rules.size(); ++i)
    if (rule_matches(policy.rules[i], payload)) return {policy.rules[i].action, i};
  return {policy.default_action, {}};
}

GateResult gate_append(const CapturePolicy& policy, Payload payload, ProvLog& log) {
  CaptureEval ev = evaluate(policy, payload);
  if (ev.action == CaptureAction::Drop) return {{}, ev.action};

  if (auto* n = std::get_if<ProvNode>(&payload)) {
    if (ev.action == CaptureAction::Redact) {
      bool touched = false;
      for (auto it = n->attrs.begin(); it != n->attrs.end(); ++it) {
        if (is_tag_key(it.key())) continue;
        if (has_tag(n->attrs, it.key(), kTagPersonal)) {
          it.value() = "[REDACTED]";
          touched = true;
        }
      }
      if (touched) n->attrs["capture_action"] = "redact";
    } else if (ev.action == CaptureAction::RecordMetadataOnly) {
      std::vector<std::string> drop;
      for (auto it = n->attrs.begin(); it != n->attrs.end(); ++it) {
        if (is_tag_key(it.key())) continue;
        if (has_tag(n->attrs, it.key(), kTagPayload)) drop.push_back(it.key());
      }
      for (const auto& k : drop) {
        n->attrs.erase(k);
        n->attrs.erase(k + kTagPayload);
      }
      if (!drop.empty()) n->attrs["capture_action"] = "metadata_only";
    }
  }
  return {log.append(std::move(payload)), ev.action};
}

ExpireResult expire(const CapturePolicy& policy, const ProvLog& log, Instant now) {
  ExpireResult out;
  for (const auto& rec : log.records()) {
    Payload p = rec.payload;
    CaptureEval ev = evaluate(policy, p);
    bool tomb = false;
    if (ev.rule_index) {
      const auto& rule = policy.rules[*ev.rule_index];
      if (rule.retention_ms && payload_timestamp(p) + *rule.retention_ms < now) tomb = true;
    }
    if (tomb) {
      if (auto* n = std::get_if<ProvNode>(&p)) {
        n->attrs = Attrs::object();
        n->attrs["tombstone"] = true;
      }
      out.tombstoned.push_back(payload_id(p));
    }
    out.compacted.append(std::move(p));
  }
  return out;
}

}  // namespace decprov
