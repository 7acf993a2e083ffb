#include "decprov/artifacts.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "decprov/errors.hpp"

namespace decprov {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t sep = s.find(';', pos);
    std::string item = s.substr(pos, sep == std::string::npos ? std::string::npos : sep - pos);
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) out.push_back(item);
    if (sep == std::string::npos) break;
    pos = sep + 1;
  }
  return out;
}

std::string attr_string(const ProvNode& n, const char* key) {
  auto it = n.attrs.find(key);
  return it != n.attrs.end() && it->is_string() ? it->get<std::string>() : std::string();
}

Instant log_max_ts(const ProvLog& log) {
  Instant t = 0;
  for (const auto& rec : log.records()) t = std::max(t, payload_timestamp(rec.payload));
  return t;
}

NodeId attach_entity(ProvLog& log, const NodeId& target, ProvNode artifact) {
  artifact.timestamp = std::max(log.node(target).timestamp, log_max_ts(log));
  NodeId id = log.append(artifact);
  ProvRelation derived;
  derived.rel = RelKind::DerivedFrom;
  derived.src = id;
  derived.dst = target;
  derived.timestamp = artifact.timestamp;
  log.append(derived);
  return id;
}

void require_category(const ProvLog& log, const NodeId& id, const char* category) {
  const ProvNode& n = log.node(id);
  if (n.kind != NodeKind::Entity || attr_string(n, "category") != category)
    throw Error(Errc::CategoryMismatch, id + " is not a " + category + " entity");
}

}  // namespace

NodeId attach_datasheet(ProvLog& log, const NodeId& dataset_entity, const Datasheet& sheet) {
  require_category(log, dataset_entity, "dataset");
  ProvNode n;
  n.kind = NodeKind::Entity;
  n.attrs["category"] = "datasheet";
  n.attrs["collection_method"] = sheet.collection_method;
  n.attrs["legal_basis"] = sheet.legal_basis;
  n.attrs["known_biases"] = join(sheet.known_biases);
  std::vector<std::string> prep(sheet.preprocessing.begin(), sheet.preprocessing.end());
  for (const auto& a : sheet.preprocessing)
    if (log.node(a).kind != NodeKind::Activity)
      throw Error(Errc::CategoryMismatch, a + " is not an activity");
  n.attrs["preprocessing"] = join(prep);
  return attach_entity(log, dataset_entity, std::move(n));
}

NodeId attach_model_card(ProvLog& log, const NodeId& model_entity, const ModelCard& card) {
  require_category(log, model_entity, "model");
  for (const auto& [cond, acc] : card.benchmarks)
    if (acc < 0.0 || acc > 1.0)
      throw Error(Errc::InvalidSpec, "benchmark accuracy out of [0,1]: " + cond);
  for (const NodeId& prev : model_cards_of(log, model_entity)) {
    const ProvNode& p = log.node(prev);
    auto v = p.attrs.find("version");
    if (v != p.attrs.end() && v->is_number_integer() && v->get<std::int64_t>() >= card.version)
      throw Error(Errc::InvalidSpec, "model card version must increase");
  }
  ProvNode n;
  n.kind = NodeKind::Entity;
  n.attrs["category"] = "model-card";
  n.attrs["intended_context"] = card.intended_context;
  n.attrs["version"] = card.version;
  n.attrs["last_updated"] = format_instant(card.last_updated);
  for (const auto& [cond, acc] : card.benchmarks) n.attrs["benchmark:" + cond] = acc;
  return attach_entity(log, model_entity, std::move(n));
}

std::vector<NodeId> model_cards_of(const ProvLog& log, const NodeId& model_entity) {
  std::vector<NodeId> out;
  for (std::size_t idx : log.relations_to(model_entity)) {
    const auto& r = std::get<ProvRelation>(log.record(idx).payload);
    if (r.rel != RelKind::DerivedFrom) continue;
    const ProvNode& src = log.node(r.src);
    if (attr_string(src, "category") == "model-card") out.push_back(r.src);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct FieldGroup {
  std::set<std::string> values;
  std::set<NodeId> sources;

  void add(const std::string& v, const NodeId& src) {
    if (v.empty()) return;
    values.insert(v);
    sources.insert(src);
  }
  void add_list(const std::string& list, const NodeId& src) {
    for (const auto& v : split_list(list)) add(v, src);
  }
  nlohmann::json to_json() const {
    return {{"values", std::vector<std::string>(values.begin(), values.end())},
            {"sources", std::vector<NodeId>(sources.begin(), sources.end())}};
  }
};

bool has_personal_attr(const ProvNode& n) {
  for (auto it = n.attrs.begin(); it != n.attrs.end(); ++it) {
    auto k = it.key();
    if (k.size() > 3 && k.compare(k.size() - 3, 3, "#pd") == 0 && it->is_boolean() &&
        it->get<bool>())
      return true;
  }
  return false;
}

}  // namespace

nlohmann::json export_art30(const ProvLog& log, const NodeId& controller) {
  const ProvNode& ctrl = log.node(controller);
  if (ctrl.kind != NodeKind::Agent) throw Error(Errc::UnknownId, controller + " is not an agent");
  std::string ctrl_name = attr_string(ctrl, "name");

  FieldGroup purposes, subjects, pd_categories, recipients, security;
  purposes.add_list(attr_string(ctrl, "purposes"), controller);
  subjects.add_list(attr_string(ctrl, "data_subject_categories"), controller);
  pd_categories.add_list(attr_string(ctrl, "personal_data_categories"), controller);
  security.add(attr_string(ctrl, "security_measures"), controller);

  // Activities associated with the controller contribute declared purposes;
  // attributed entities contribute data-subject and personal-data categories.
  for (std::size_t idx : log.relations_to(controller)) {
    const auto& r = std::get<ProvRelation>(log.record(idx).payload);
    const ProvNode& src = log.node(r.src);
    if (r.rel == RelKind::AssociatedWith) {
      purposes.add(attr_string(src, "purpose"), src.id);
    } else if (r.rel == RelKind::AttributedTo) {
      subjects.add_list(attr_string(src, "data_subjects"), src.id);
      if (has_personal_attr(src)) pd_categories.add(attr_string(src, "category"), src.id);
    }
  }

  for (std::size_t idx : log.all_flows()) {
    const auto& f = std::get<FlowEvent>(log.record(idx).payload);
    if (f.from_agent != controller) continue;
    const ProvNode& to = log.node(f.to_agent);
    std::string cat = attr_string(to, "org_category");
    recipients.add(cat.empty() ? attr_string(to, "name") : cat, f.id);
  }

  nlohmann::json j;
  j["controller"] = {{"id", controller},
                     {"name", ctrl_name},
                     {"contact", attr_string(ctrl, "contact")}};
  j["purposes"] = purposes.to_json();
  j["data_subject_categories"] = subjects.to_json();
  j["personal_data_categories"] = pd_categories.to_json();
  j["recipient_categories"] = recipients.to_json();
  j["security_measures"] = security.to_json();

  nlohmann::json procs = nlohmann::json::array();
  for (std::size_t idx : log.all_nodes()) {
    const auto& n = std::get<ProvNode>(log.record(idx).payload);
    if (n.kind != NodeKind::Agent) continue;
    auto serves = split_list(attr_string(n, "processes_for"));
    if (std::find(serves.begin(), serves.end(), ctrl_name) == serves.end()) continue;
    procs.push_back({{"id", n.id},
                     {"name", attr_string(n, "name")},
                     {"contact", attr_string(n, "contact")},
                     {"processing_categories", attr_string(n, "purposes")},
                     {"security_measures", attr_string(n, "security_measures")}});
  }
  j["processors"] = procs;

  nlohmann::json warnings = nlohmann::json::array();
  auto warn_if_empty = [&](const char* name, const FieldGroup& g) {
    if (g.values.empty()) warnings.push_back(std::string("no records found for ") + name);
  };
  warn_if_empty("purposes", purposes);
  warn_if_empty("data_subject_categories", subjects);
  warn_if_empty("personal_data_categories", pd_categories);
  warn_if_empty("recipient_categories", recipients);
  warn_if_empty("security_measures", security);
  j["completeness_warnings"] = warnings;
  return j;
}

std::string art30_text(const nlohmann::json& record) {
  std::ostringstream os;
  os << "RECORD OF PROCESSING ACTIVITIES (Art. 30)\n";
  os << "Controller: " << record.at("controller").at("name").get<std::string>() << "\n";
  auto section = [&](const char* title, const char* key) {
    os << title << ":\n";
    for (const auto& v : record.at(key).at("values")) os << "  - " << v.get<std::string>() << "\n";
  };
  section("Purposes of processing", "purposes");
  section("Categories of data subjects", "data_subject_categories");
  section("Categories of personal data", "personal_data_categories");
  section("Categories of recipients", "recipient_categories");
  section("Technical and organisational security measures", "security_measures");
  for (const auto& w : record.at("completeness_warnings"))
    os << "WARNING: " << w.get<std::string>() << "\n";
  return os.str();
}

namespace {

const char* comprehensibility_level(const std::string& audience) {
  if (audience == "user") return "summary";
  if (audience == "regulator") return "structured";
  return "detailed";
}

}  // namespace

nlohmann::json render_report(const ProvLog& log, const NodeId& root, const std::string& audience,
                             double proportionality_cap) {
  if (audience != "regulator" && audience != "developer" && audience != "user")
    throw Error(Errc::ParseError, "unknown audience: " + audience);

  Pipeline back = trace_back(log, root);
  Pipeline fwd = trace_forward(log, root);

  std::set<NodeId> base;
  for (const Pipeline* p : {&back, &fwd}) {
    base.insert(p->nodes.begin(), p->nodes.end());
    base.insert(p->edges.begin(), p->edges.end());
    base.insert(p->flows.begin(), p->flows.end());
    base.insert(p->actors.begin(), p->actors.end());
  }

  std::set<NodeId> included;
  nlohmann::json body;
  auto actor_table = [&](const Pipeline& p) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& a : actors_involved(log, p)) {
      t.push_back({{"agent", a.agent},
                   {"name", attr_string(log.node(a.agent), "name")},
                   {"roles", std::vector<std::string>(a.roles.begin(), a.roles.end())}});
    }
    return t;
  };

  if (audience == "user") {
    // Actors, categories and boundary crossings only — no raw attr values.
    for (const auto& a : back.actors) included.insert(a);
    for (const auto& a : fwd.actors) included.insert(a);
    std::set<std::string> categories;
    for (const Pipeline* p : {&back, &fwd})
      for (const auto& id : p->nodes) {
        std::string c = attr_string(log.node(id), "category");
        if (!c.empty()) categories.insert(c);
      }
    nlohmann::json crossings = nlohmann::json::array();
    for (const Pipeline* p : {&back, &fwd})
      for (const auto& [fid, b] : boundary_crossings(log, *p)) {
        included.insert(fid);
        crossings.push_back({{"flow", fid}, {"boundary", to_string(b)}});
      }
    body["actors"] = actor_table(back);
    body["data_categories"] = std::vector<std::string>(categories.begin(), categories.end());
    body["boundary_crossings"] = crossings;
  } else {
    included = base;
    body["backward"] = back.to_json();
    body["forward"] = fwd.to_json();
    body["actors"] = actor_table(back);
    if (audience == "regulator") {
      nlohmann::json decisions = nlohmann::json::array();
      for (std::size_t idx : log.all_nodes()) {
        const auto& n = std::get<ProvNode>(log.record(idx).payload);
        if (n.kind == NodeKind::Activity && attr_string(n, "role") == "compliance-decision") {
          included.insert(n.id);
          decisions.push_back({{"id", n.id}, {"attrs", n.attrs}});
        }
      }
      body["compliance_decisions"] = decisions;
      nlohmann::json extracts = nlohmann::json::array();
      for (const Pipeline* p : {&back, &fwd})
        for (const auto& a : p->actors)
          if (log.node(a).attrs.value("controller", false)) extracts.push_back(export_art30(log, a));
      body["art30_extracts"] = extracts;
    }
  }

  VerifyReport chain = log.verify();
  std::size_t base_included = 0;
  for (const auto& id : included)
    if (base.count(id)) ++base_included;

  nlohmann::json metrics;
  metrics["relevant"] = base.empty() ? 1.0 : double(base_included) / double(base.size());
  metrics["accurate"] = {{"chain_verified", chain.ok},
                         {"records_checked", log.size()},
                         {"representative", "manual-review checklist item"}};
  double prop = log.empty() ? 0.0 : double(included.size()) / double(log.size());
  metrics["proportionate"] = {{"ratio", prop},
                              {"cap", proportionality_cap},
                              {"within_cap", prop <= proportionality_cap}};
  metrics["comprehensible"] = comprehensibility_level(audience);

  nlohmann::json j;
  j["root"] = root;
  j["audience"] = audience;
  j["included_records"] = std::vector<NodeId>(included.begin(), included.end());
  j["body"] = body;
  j["metrics"] = metrics;
  return j;
}

std::string report_text(const nlohmann::json& report) {
  std::ostringstream os;
  os << "AUDIT REPORT (" << report.at("audience").get<std::string>() << ")\n";
  os << "Decision: " << report.at("root").get<std::string>() << "\n";
  os << "Included records: " << report.at("included_records").size() << "\n";
  const auto& m = report.at("metrics");
  os << "Relevant: " << m.at("relevant").get<double>() << "\n";
  os << "Accurate: chain " << (m.at("accurate").at("chain_verified").get<bool>() ? "ok" : "BROKEN")
     << ", " << m.at("accurate").at("records_checked").get<std::size_t>() << " records\n";
  os << "Proportionate: " << m.at("proportionate").at("ratio").get<double>() << " (cap "
     << m.at("proportionate").at("cap").get<double>() << ")\n";
  os << "Comprehensibility level: " << m.at("comprehensible").get<std::string>() << "\n";
  if (report.at("body").contains("actors")) {
    os << "Actors:\n";
    for (const auto& a : report.at("body").at("actors"))
      os << "  - " << a.at("name").get<std::string>() << " roles " << a.at("roles").dump() << "\n";
  }
  return os.str();
}

}  // namespace decprov
