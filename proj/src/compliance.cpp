#include "decprov/compliance.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "decprov/errors.hpp"
#include "decprov/policy.hpp"

namespace decprov {

const char* to_string(Reaction r) {
  switch (r) {
    case Reaction::Allow: return "allow";
    case Reaction::Block: return "block";
    case Reaction::FilterEntity: return "filter_entity";
    case Reaction::Quarantine: return "quarantine";
    case Reaction::Alert: return "alert";
  }
  return "?";
}

Reaction parse_reaction(const std::string& s) {
  if (s == "allow") return Reaction::Allow;
  if (s == "block") return Reaction::Block;
  if (s == "filter_entity") return Reaction::FilterEntity;
  if (s == "quarantine") return Reaction::Quarantine;
  if (s == "alert") return Reaction::Alert;
  throw Error(Errc::MalformedRule, "unknown reaction: " + s);
}

bool ExpectedFlowPolicy::contains(const std::string& from, const std::string& to,
                                  const std::string& category) const {
  for (const auto& [fp, tp, cp] : allowed)
    if (glob_match(fp, from) && glob_match(tp, to) && glob_match(cp, category)) return true;
  return false;
}

ComplianceConfig ComplianceConfig::from_json(const nlohmann::json& j) {
  ComplianceConfig cfg;
  for (const auto& rj : j.value("rules", nlohmann::json::array())) {
    ComplianceRule r;
    r.id = rj.at("id").get<std::string>();
    const auto& t = rj.value("trigger", nlohmann::json::object());
    r.trigger.not_whitelisted = t.value("not_whitelisted", false);
    r.trigger.expired = t.value("expired", false);
    r.trigger.unreliable_source = t.value("unreliable_source", false);
    if (t.contains("boundary")) r.trigger.boundary = t.at("boundary").get<std::string>();
    if (t.contains("from_agent")) r.trigger.from_agent = t.at("from_agent").get<std::string>();
    if (t.contains("to_agent")) r.trigger.to_agent = t.at("to_agent").get<std::string>();
    if (t.contains("category")) r.trigger.category = t.at("category").get<std::string>();
    r.reaction = parse_reaction(rj.at("reaction").get<std::string>());
    if (rj.contains("alert")) {
      r.alert_severity = rj.at("alert").value("severity", std::string("info"));
      r.alert_recipient = rj.at("alert").value("recipient", std::string());
    }
    r.note = rj.value("note", std::string());
    cfg.rules.push_back(std::move(r));
  }
  for (const auto& wj : j.value("whitelist", nlohmann::json::array())) {
    if (!wj.is_array() || wj.size() != 3)
      throw Error(Errc::MalformedRule, "whitelist entries are [from,to,category] triples");
    cfg.whitelist.allowed.push_back({wj[0].get<std::string>(), wj[1].get<std::string>(),
                                     wj[2].get<std::string>()});
  }
  for (const auto& u : j.value("unreliable_agents", nlohmann::json::array()))
    cfg.unreliable_agents.push_back(u.get<std::string>());
  return cfg;
}

ComplianceConfig ComplianceConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, "bad rules JSON: " + path);
  return from_json(j);
}

nlohmann::json ComplianceDecision::to_json() const {
  nlohmann::json j;
  j["event"] = event;
  j["rule"] = rule;
  j["reaction"] = to_string(reaction);
  j["timestamp"] = format_instant(timestamp);
  if (!alert_severity.empty()) {
    j["alert"] = {{"severity", alert_severity}, {"recipient", alert_recipient}};
  }
  if (logged_activity) j["logged_activity"] = *logged_activity;
  return j;
}

namespace {

std::string agent_name(const ProvLog& log, const NodeId& id) {
  const ProvNode& n = log.node(id);
  auto it = n.attrs.find("name");
  return it != n.attrs.end() && it->is_string() ? it->get<std::string>() : id;
}

std::string entity_category(const ProvLog& log, const NodeId& id) {
  const ProvNode& n = log.node(id);
  auto it = n.attrs.find("category");
  return it != n.attrs.end() && it->is_string() ? it->get<std::string>() : std::string();
}

bool entity_expired(const ProvLog& log, const NodeId& id, Instant now) {
  const ProvNode& n = log.node(id);
  auto it = n.attrs.find("expiry");
  if (it == n.attrs.end() || !it->is_string()) return false;
  return parse_instant(it->get<std::string>()) < now;
}

bool ancestry_unreliable(const ComplianceConfig& cfg, const ProvLog& log, const NodeId& entity) {
  Pipeline p = trace_back(log, entity);
  for (const NodeId& a : p.actors)
    if (agent_unreliable(cfg, log.node(a))) return true;
  return false;
}

// Context for one trigger evaluation. Flow-only facts are absent for use
// events and fail flow-only criteria.
struct EventCtx {
  bool is_flow = false;
  std::string from, to, category, boundary;
  bool whitelisted = true;
  bool expired = false;
  bool unreliable = false;
};

bool trigger_fires(const Trigger& t, const EventCtx& c) {
  if (t.not_whitelisted && (!c.is_flow || c.whitelisted)) return false;
  if (t.expired && !c.expired) return false;
  if (t.unreliable_source && !c.unreliable) return false;
  if (t.boundary && (!c.is_flow || !glob_match(*t.boundary, c.boundary))) return false;
  if (t.from_agent && (!c.is_flow || !glob_match(*t.from_agent, c.from))) return false;
  if (t.to_agent && (!c.is_flow || !glob_match(*t.to_agent, c.to))) return false;
  if (t.category && !glob_match(*t.category, c.category)) return false;
  return true;
}

ComplianceDecision decide(const ComplianceConfig& cfg, const EventCtx& ctx, const NodeId& event,
                          Instant now) {
  ComplianceDecision d;
  d.event = event;
  d.timestamp = now;
  for (const auto& rule : cfg.rules) {
    if (trigger_fires(rule.trigger, ctx)) {
      d.rule = rule.id;
      d.reaction = rule.reaction;
      d.alert_severity = rule.alert_severity;
      d.alert_recipient = rule.alert_recipient;
      return d;
    }
  }
  return d;  // Allow
}

void log_decision(ComplianceDecision& d, const NodeId& entity, const ProvLog& snapshot,
                  ProvLog* writer) {
  if (!writer || d.reaction == Reaction::Allow) return;
  Instant ts = std::max(d.timestamp, snapshot.node(entity).timestamp);
  ProvNode act;
  act.kind = NodeKind::Activity;
  act.timestamp = ts;
  act.attrs["role"] = "compliance-decision";
  act.attrs["rule"] = d.rule;
  act.attrs["reaction"] = to_string(d.reaction);
  act.attrs["event"] = d.event;
  if (!d.alert_severity.empty()) {
    act.attrs["alert_severity"] = d.alert_severity;
    act.attrs["alert_recipient"] = d.alert_recipient;
  }
  NodeId act_id = writer->append(act);
  ProvRelation used;
  used.rel = RelKind::Used;
  used.src = act_id;
  used.dst = entity;
  used.timestamp = ts;
  writer->append(used);
  d.logged_activity = act_id;
}

}  // namespace

bool agent_unreliable(const ComplianceConfig& cfg, const ProvNode& agent) {
  auto rel = agent.attrs.find("reliable");
  if (rel != agent.attrs.end() && rel->is_boolean() && !rel->get<bool>()) return true;
  auto unr = agent.attrs.find("unreliable");
  if (unr != agent.attrs.end() && unr->is_boolean() && unr->get<bool>()) return true;
  auto name = agent.attrs.find("name");
  std::string n = name != agent.attrs.end() && name->is_string() ? name->get<std::string>() : "";
  return std::find(cfg.unreliable_agents.begin(), cfg.unreliable_agents.end(), n) !=
             cfg.unreliable_agents.end() ||
         std::find(cfg.unreliable_agents.begin(), cfg.unreliable_agents.end(), agent.id) !=
             cfg.unreliable_agents.end();
}

ComplianceDecision check_flow(const ComplianceConfig& cfg, const ProvLog& snapshot,
                              const FlowEvent& event, Instant now, ProvLog* writer) {
  EventCtx ctx;
  ctx.is_flow = true;
  ctx.from = agent_name(snapshot, event.from_agent);
  ctx.to = agent_name(snapshot, event.to_agent);
  ctx.category = entity_category(snapshot, event.entity);
  ctx.boundary = to_string(event.boundary);
  ctx.whitelisted = cfg.whitelist.contains(ctx.from, ctx.to, ctx.category);
  ctx.expired = entity_expired(snapshot, event.entity, now);
  ctx.unreliable = ancestry_unreliable(cfg, snapshot, event.entity) ||
                   agent_unreliable(cfg, snapshot.node(event.from_agent));
  ComplianceDecision d = decide(cfg, ctx, event.id, now);
  log_decision(d, event.entity, snapshot, writer);
  return d;
}

std::vector<ComplianceDecision> check_use(const ComplianceConfig& cfg, const ProvLog& snapshot,
                                          const std::vector<NodeId>& input_entities, Instant now,
                                          ProvLog* writer) {
  std::vector<ComplianceDecision> out;
  for (const NodeId& e : input_entities) {
    EventCtx ctx;
    ctx.category = entity_category(snapshot, e);
    ctx.expired = entity_expired(snapshot, e, now);
    ctx.unreliable = ancestry_unreliable(cfg, snapshot, e);
    ComplianceDecision d = decide(cfg, ctx, e, now);
    log_decision(d, e, snapshot, writer);
    out.push_back(std::move(d));
  }
  return out;
}

nlohmann::json breach_report(const ComplianceConfig& cfg, ProvLog& log, const NodeId& incident,
                             const std::string& recipient) {
  Pipeline back = trace_back(log, incident);
  Pipeline fwd = trace_forward(log, incident);
  auto actors_b = actors_involved(log, back);
  auto actors_f = actors_involved(log, fwd);

  std::map<NodeId, std::set<std::string>> actors;
  for (const auto& a : actors_b) actors[a.agent].insert(a.roles.begin(), a.roles.end());
  for (const auto& a : actors_f) actors[a.agent].insert(a.roles.begin(), a.roles.end());

  nlohmann::json j;
  j["incident_entity"] = incident;
  j["recipient"] = recipient;
  j["backward"] = back.to_json();
  j["forward"] = fwd.to_json();
  nlohmann::json actor_list = nlohmann::json::array();
  for (const auto& [agent, roles] : actors) {
    actor_list.push_back({{"agent", agent},
                          {"name", agent_name(log, agent)},
                          {"roles", std::vector<std::string>(roles.begin(), roles.end())}});
  }
  j["actors"] = actor_list;
  nlohmann::json crossings = nlohmann::json::array();
  for (const auto& [fid, b] : boundary_crossings(log, fwd))
    crossings.push_back({{"flow", fid}, {"boundary", to_string(b)}});
  for (const auto& [fid, b] : boundary_crossings(log, back))
    crossings.push_back({{"flow", fid}, {"boundary", to_string(b)}});
  j["boundary_crossings"] = crossings;

  // The alert itself is recorded, so the report is reviewable later.
  ComplianceDecision alert;
  alert.event = incident;
  alert.rule = "breach-report";
  alert.reaction = Reaction::Alert;
  alert.timestamp = log.node(incident).timestamp;
  alert.alert_severity = "high";
  alert.alert_recipient = recipient;
  log_decision(alert, incident, log, &log);
  j["alert"] = alert.to_json();
  (void)cfg;
  return j;
}

std::string breach_report_text(const nlohmann::json& report) {
  std::ostringstream os;
  os << "DATA BREACH REPORT\n";
  os << "Incident entity: " << report.at("incident_entity").get<std::string>() << "\n";
  os << "Recipient: " << report.at("recipient").get<std::string>() << "\n\n";
  os << "Entities and systems involved:\n";
  for (const auto& a : report.at("actors"))
    os << "  - " << a.at("name").get<std::string>() << " (" << a.at("agent").get<std::string>()
       << "), roles: " << a.at("roles").dump() << "\n";
  os << "\nUpstream records (inputs): " << report.at("backward").at("nodes").size() << " nodes\n";
  os << "Downstream records (consequences): " << report.at("forward").at("nodes").size()
     << " nodes\n";
  os << "Boundary crossings: " << report.at("boundary_crossings").size() << "\n";
  os << "Alert: severity " << report.at("alert").at("alert").at("severity").get<std::string>()
     << " to " << report.at("alert").at("alert").at("recipient").get<std::string>() << "\n";
  return os.str();
}

}  // namespace decprov
