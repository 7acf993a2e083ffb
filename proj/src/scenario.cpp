#include "decprov/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "decprov/errors.hpp"
#include "decprov/query.hpp"

namespace decprov {

nlohmann::json FaultInjection::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["target"] = target;
  j["window"] = {window_start_s, window_end_s};
  if (staleness_s) j["staleness_s"] = staleness_s;
  if (!process.empty()) j["process"] = process;
  if (offset != 0.0) j["offset"] = offset;
  return j;
}

FaultInjection FaultInjection::from_json(const nlohmann::json& j) {
  FaultInjection f;
  f.kind = j.at("kind").get<std::string>();
  f.target = j.at("target").get<std::string>();
  const auto& w = j.at("window");
  f.window_start_s = w.at(0).get<std::int64_t>();
  f.window_end_s = w.at(1).get<std::int64_t>();
  f.staleness_s = j.value("staleness_s", std::int64_t(0));
  f.process = j.value("process", std::string());
  f.offset = j.value("offset", 0.0);
  return f;
}

double ScenarioSpec::busyness_at(std::int64_t tick) const {
  if (busyness.empty()) return 0.5;
  std::size_t i = busyness_step_s > 0 ? std::size_t(tick / busyness_step_s) : 0;
  return busyness[std::min(i, busyness.size() - 1)];
}

void ScenarioSpec::validate() const {
  if (horizon_s < 0) throw Error(Errc::InvalidSpec, "horizon must be >= 0");
  std::set<std::string> names;
  for (const auto& a : agents) {
    if (a.name.empty()) throw Error(Errc::InvalidSpec, "agent without a name");
    if (!names.insert(a.name).second)
      throw Error(Errc::InvalidSpec, "duplicate agent: " + a.name);
  }
  for (const auto& c : components)
    if (!names.count(c.agent))
      throw Error(Errc::InvalidSpec, "component " + c.name + " on undeclared agent " + c.agent);
  for (const auto& d : dependencies)
    if (!names.count(d.producer) || !names.count(d.consumer))
      throw Error(Errc::InvalidSpec,
                  "dependency references undeclared agent: " + d.producer + "->" + d.consumer);
  for (const auto& f : faults)
    if (f.window_start_s < 0 || f.window_end_s > horizon_s || f.window_start_s > f.window_end_s)
      throw Error(Errc::InvalidSpec, "fault window outside horizon: " + f.kind);
}

nlohmann::json ScenarioSpec::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["start_time"] = format_instant(start_time);
  j["horizon_s"] = horizon_s;
  j["seed"] = seed;
  j["incident_tick"] = incident_tick;
  j["initial_light"] = initial_light;
  j["street_busyness"] = {{"values", busyness}, {"step_s", busyness_step_s}};
  j["agents"] = nlohmann::json::array();
  for (const auto& a : agents)
    j["agents"].push_back({{"name", a.name}, {"kind", a.kind}, {"attrs", a.attrs}});
  j["components"] = nlohmann::json::array();
  for (const auto& c : components) {
    nlohmann::json cj{{"agent", c.agent}, {"name", c.name}, {"behavior", c.behavior},
                      {"params", c.params}};
    if (c.at) cj["at"] = *c.at;
    if (c.period_s) {
      cj["period_s"] = *c.period_s;
      cj["phase_s"] = c.phase_s;
    }
    j["components"].push_back(cj);
  }
  j["dependencies"] = nlohmann::json::array();
  for (const auto& d : dependencies)
    j["dependencies"].push_back({{"producer", d.producer},
                                 {"consumer", d.consumer},
                                 {"category", d.category},
                                 {"boundary", to_string(d.boundary)}});
  j["faults"] = nlohmann::json::array();
  for (const auto& f : faults) j["faults"].push_back(f.to_json());
  return j;
}

ScenarioSpec ScenarioSpec::from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  s.name = j.value("name", std::string("scenario"));
  s.start_time = parse_instant(j.at("start_time").get<std::string>());
  s.horizon_s = j.at("horizon_s").get<std::int64_t>();
  s.seed = j.value("seed", std::uint64_t(1));
  s.incident_tick = j.value("incident_tick", std::int64_t(0));
  s.initial_light = j.value("initial_light", 0.9);
  if (j.contains("street_busyness")) {
    const auto& b = j.at("street_busyness");
    s.busyness = b.value("values", std::vector<double>{});
    s.busyness_step_s = b.value("step_s", std::int64_t(10));
  }
  for (const auto& aj : j.value("agents", nlohmann::json::array())) {
    AgentSpec a;
    a.name = aj.at("name").get<std::string>();
    a.kind = aj.value("kind", std::string("organisation"));
    a.attrs = aj.value("attrs", Attrs::object());
    s.agents.push_back(std::move(a));
  }
  for (const auto& cj : j.value("components", nlohmann::json::array())) {
    ComponentSpec c;
    c.agent = cj.at("agent").get<std::string>();
    c.name = cj.at("name").get<std::string>();
    c.behavior = cj.at("behavior").get<std::string>();
    if (cj.contains("at")) c.at = cj.at("at").get<std::int64_t>();
    if (cj.contains("period_s")) {
      c.period_s = cj.at("period_s").get<std::int64_t>();
      c.phase_s = cj.value("phase_s", std::int64_t(0));
    }
    c.params = cj.value("params", nlohmann::json::object());
    s.components.push_back(std::move(c));
  }
  for (const auto& dj : j.value("dependencies", nlohmann::json::array())) {
    DependencySpec d;
    d.producer = dj.at("producer").get<std::string>();
    d.consumer = dj.at("consumer").get<std::string>();
    d.category = dj.at("category").get<std::string>();
    d.boundary = parse_boundary(dj.value("boundary", std::string("administrative")));
    s.dependencies.push_back(std::move(d));
  }
  for (const auto& fj : j.value("faults", nlohmann::json::array()))
    s.faults.push_back(FaultInjection::from_json(fj));
  s.validate();
  return s;
}

ScenarioSpec ScenarioSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, "bad scenario JSON: " + path);
  return from_json(j);
}

ScenarioSpec inject(const ScenarioSpec& spec, const FaultInjection& fault) {
  if (fault.window_start_s < 0 || fault.window_end_s > spec.horizon_s ||
      fault.window_start_s > fault.window_end_s)
    throw Error(Errc::WindowOutOfRange, "fault window does not fit horizon");
  ScenarioSpec out = spec;
  out.faults.push_back(fault);
  return out;
}

void save_trace(const std::vector<SimEvent>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path);
  for (const auto& e : trace) {
    nlohmann::json j{{"tick", e.tick}, {"kind", e.kind}, {"detail", e.detail}, {"node", e.node}};
    out << j.dump() << '\n';
  }
}

namespace {

double round3(double x) { return std::floor(x * 1000.0 + 0.5) / 1000.0; }

class Engine {
 public:
  Engine(const ScenarioSpec& spec, const CapturePolicy* policy, const ComplianceConfig* rules)
      : spec_(spec), rules_(rules), rng_(spec.seed), light_(spec.initial_light) {
    if (policy) policy_ = *policy;
  }

  SimResult run() {
    spec_.validate();
    declare_agents();
    for (tick_ = 0; tick_ < spec_.horizon_s; ++tick_) {
      for (const auto& comp : spec_.components)
        if (fires(comp)) step(comp);
    }
    return std::move(res_);
  }

 private:
  Instant now() const { return spec_.start_time + tick_ * 1000; }

  bool fires(const ComponentSpec& c) const {
    if (c.at) return *c.at == tick_;
    if (c.period_s && *c.period_s > 0)
      return tick_ >= c.phase_s && (tick_ - c.phase_s) % *c.period_s == 0;
    return false;
  }

  const FaultInjection* active_fault(const std::string& kind) const {
    for (const auto& f : spec_.faults)
      if (f.kind == kind && f.active_at(tick_)) return &f;
    return nullptr;
  }

  const FaultInjection* fault_for_process(const std::string& process, std::int64_t at) const {
    for (const auto& f : spec_.faults)
      if (f.kind == "process_skipped" && f.process == process && f.active_at(at)) return &f;
    return nullptr;
  }

  double sensor_bias(const std::string& target) const {
    for (const auto& f : spec_.faults)
      if (f.kind == "sensor_bias" && f.target == target && f.active_at(tick_)) return f.offset;
    return 0.0;
  }

  std::optional<NodeId> gated(Payload p, const char* event_kind, const std::string& detail) {
    GateResult g = gate_append(policy_, std::move(p), res_.log);
    if (g.appended) res_.trace.push_back({tick_, event_kind, detail, *g.appended});
    return g.appended;
  }

  void edge(RelKind rel, const NodeId& src, const NodeId& dst) {
    ProvRelation r;
    r.rel = rel;
    r.src = src;
    r.dst = dst;
    r.timestamp = now();
    gate_append(policy_, r, res_.log);
  }

  void declare_agents() {
    for (const auto& a : spec_.agents) {
      ProvNode n;
      n.kind = NodeKind::Agent;
      n.timestamp = spec_.start_time;
      n.attrs = a.attrs;
      n.attrs["name"] = a.name;
      n.attrs["agent"] = a.name;
      n.attrs["org_kind"] = a.kind;
      auto id = gated(n, "declare", a.name);
      if (id) agent_ids_[a.name] = *id;
    }
    for (const auto& c : spec_.components) {
      ProvNode n;
      n.kind = NodeKind::Activity;
      n.timestamp = spec_.start_time;
      n.attrs["role"] = "component-declaration";
      n.attrs["component"] = c.name;
      n.attrs["agent"] = c.agent;
      n.attrs["behavior"] = c.behavior;
      auto id = gated(n, "declare", c.agent + "/" + c.name);
      if (id && agent_ids_.count(c.agent)) edge(RelKind::AssociatedWith, *id, agent_ids_[c.agent]);
    }
  }

  std::optional<NodeId> emit_entity(const ComponentSpec& c, Attrs attrs,
                                    const std::string& category,
                                    std::optional<NodeId> generated_by = {},
                                    std::optional<NodeId> derived_from = {}) {
    ProvNode n;
    n.kind = NodeKind::Entity;
    n.timestamp = now();
    n.attrs = std::move(attrs);
    n.attrs["category"] = category;
    n.attrs["agent"] = c.agent;
    n.attrs["component"] = c.name;
    n.attrs["tick"] = tick_;
    auto id = gated(n, "emit", category);
    if (!id) return id;
    if (generated_by) edge(RelKind::Generated, *id, *generated_by);
    if (derived_from) edge(RelKind::DerivedFrom, *id, *derived_from);
    edge(RelKind::AttributedTo, *id, agent_ids_.at(c.agent));
    local_[c.agent][category].push_back(*id);
    deliver(c.agent, *id, category);
    return id;
  }

  std::optional<NodeId> decision(const ComponentSpec& c, const std::string& role, Attrs attrs,
                                 const std::vector<NodeId>& inputs) {
    ProvNode n;
    n.kind = NodeKind::Activity;
    n.timestamp = now();
    n.attrs = std::move(attrs);
    n.attrs["role"] = role;
    n.attrs["agent"] = c.agent;
    n.attrs["component"] = c.name;
    n.attrs["tick"] = tick_;
    auto id = gated(n, "decision", role);
    if (!id) return id;
    for (const auto& in : inputs) edge(RelKind::Used, *id, in);
    edge(RelKind::AssociatedWith, *id, agent_ids_.at(c.agent));
    return id;
  }

  // Flow the entity along every declared dependency for its category.
  void deliver(const std::string& producer, const NodeId& entity, const std::string& category) {
    for (const auto& d : spec_.dependencies) {
      if (d.producer != producer || d.category != category) continue;
      FlowEvent f;
      f.entity = entity;
      f.from_agent = agent_ids_.at(d.producer);
      f.to_agent = agent_ids_.at(d.consumer);
      f.boundary = d.boundary;
      f.timestamp = now();
      auto fid = gated(f, "flow", d.producer + "->" + d.consumer);

      bool blocked = false;
      if (rules_ && fid) {
        ComplianceDecision dec =
            check_flow(*rules_, res_.log, res_.log.flow(*fid), now(), &res_.log);
        blocked = dec.reaction == Reaction::Block;
        if (blocked) res_.trace.push_back({tick_, "blocked", d.producer + "->" + d.consumer, *fid});
        res_.decisions.push_back(std::move(dec));
      }
      if (!blocked) inbox_[d.consumer][category].push_back(entity);
    }
  }

  std::optional<NodeId> latest(const std::map<std::string, std::map<std::string, std::vector<NodeId>>>& store,
                               const std::string& agent, const std::string& category) const {
    auto a = store.find(agent);
    if (a == store.end()) return {};
    auto c = a->second.find(category);
    if (c == a->second.end() || c->second.empty()) return {};
    return c->second.back();
  }

  std::optional<NodeId> latest_input(const std::string& agent, const std::string& cat) const {
    auto in = latest(inbox_, agent, cat);
    return in ? in : latest(local_, agent, cat);
  }

  double attr_num(const NodeId& id, const char* key, double dflt = 0.0) const {
    const ProvNode& n = res_.log.node(id);
    auto it = n.attrs.find(key);
    return it != n.attrs.end() && it->is_number() ? it->get<double>() : dflt;
  }

  bool attr_bool(const NodeId& id, const char* key) const {
    const ProvNode& n = res_.log.node(id);
    auto it = n.attrs.find(key);
    return it != n.attrs.end() && it->is_boolean() && it->get<bool>();
  }

  double jitter() { return double(rng_() % 1000) / 100000.0; }  // [0, 0.01)

  void step(const ComponentSpec& c) {
    if (c.behavior == "model_provider") return model_provider(c);
    if (c.behavior == "update_check") return update_check(c);
    if (c.behavior == "vehicle") return vehicle(c);
    if (c.behavior == "aggregate_reports") return aggregate_reports(c);
    if (c.behavior == "emit_series") return emit_series(c);
    if (c.behavior == "light_controller") return light_controller(c);
    if (c.behavior == "historic_summary") return historic_summary(c);
    if (c.behavior == "event_adjustment") return event_adjustment(c);
    if (c.behavior == "risk_redirect") return risk_redirect(c);
    throw Error(Errc::InvalidSpec, "unknown behavior: " + c.behavior);
  }

  void model_provider(const ComponentSpec& c) {
    const FaultInjection* fault = active_fault("model_stale");
    const auto& variant = c.params.at(fault ? "stale" : "fresh");
    std::int64_t age_s = fault ? fault->staleness_s : variant.value("age_s", std::int64_t(259200));

    Attrs attrs;
    attrs["name"] = c.params.value("model_name", std::string("model"));
    attrs["version"] = variant.at("version").get<std::int64_t>();
    attrs["last_updated"] = format_instant(spec_.start_time - age_s * 1000);
    attrs["data_subjects"] = c.params.value("data_subjects", std::string("road users"));
    if (c.params.contains("pd_attr")) {
      std::string k = c.params.at("pd_attr").get<std::string>();
      attrs[k] = c.params.value("sentinel", std::string("PD")) + "_" + std::to_string(tick_);
      attrs[k + "#pd"] = true;
    }
    if (fault) attrs["fault"] = "model_stale";
    auto model = emit_entity(c, attrs, "model");
    if (!model) return;
    cloud_model_ = *model;

    // The published model card: benchmarks per condition.
    Attrs card;
    card["category_of"] = *model;
    card["intended_context"] = c.params.value("intended_context", std::string());
    card["version"] = variant.at("version").get<std::int64_t>();
    card["last_updated"] = attrs["last_updated"];
    for (const auto& [cond, acc] : variant.at("benchmarks").items())
      card["benchmark:" + cond] = acc.get<double>();
    auto card_id = emit_entity(c, card, "model-card", {}, model);
    if (card_id) model_card_ = *card_id;
  }

  void update_check(const ComponentSpec& c) {
    auto source = latest_input(c.agent, "model");
    if (!source) return;
    const FaultInjection* fault = active_fault("model_stale");
    Attrs act;
    act["purpose"] = "model update management";
    act["outcome"] = fault ? "skipped-manual-update" : "updated";
    if (fault) act["fault"] = "model_stale";
    auto check = decision(c, "manual-update-check", act, {*source});
    if (!check) return;

    Attrs local;
    local["name"] = "on-vehicle model";
    local["version"] = res_.log.node(*source).attrs.value("version", std::int64_t(0));
    local["local_copy"] = true;
    if (fault) local["stale"] = true;
    auto m = emit_entity(c, local, "model", check);
    if (m) local_model_ = *m;
  }

  void vehicle(const ComponentSpec& c) {
    std::string v = c.params.value("vehicle", c.name);
    double busy = spec_.busyness_at(tick_);

    Attrs frame;
    std::string sentinel = c.params.value("sentinel", std::string("PD_SENTINEL_FRAME"));
    frame["camera_frame"] = sentinel + "_" + v + "_" + std::to_string(tick_);
    frame["camera_frame#pd"] = true;
    frame["light_level"] = round3(light_);
    frame["data_subjects"] = "pedestrians; drivers";
    frame["expiry"] = format_instant(spec_.start_time + 86400 * 1000);
    auto frame_id = emit_entity(c, frame, "camera-frame");

    std::vector<NodeId> inputs;
    if (frame_id) inputs.push_back(*frame_id);
    if (local_model_) inputs.push_back(*local_model_);
    if (model_card_) inputs.push_back(*model_card_);

    std::string condition = light_ < 0.5 ? "low_light" : "daylight";
    double accuracy =
        model_card_ ? attr_num(*model_card_, ("benchmark:" + condition).c_str(), 0.0) : 0.0;
    bool hazard_present = busy > 0.3;
    bool detected = hazard_present && accuracy >= 0.5;

    Attrs act;
    act["purpose"] = "hazard detection";
    act["vehicle"] = v;
    act["condition"] = condition;
    act["decision"] = detected ? "brake" : "no-braking";
    auto det = decision(c, "hazard-detection", act, inputs);

    if (det) {
      Attrs cmd;
      cmd["action"] = detected ? "brake" : "none";
      emit_entity(c, cmd, "braking-command", det);
    }

    // Presence telemetry shared across the CarNet mesh; not derived from the
    // recognition model.
    Attrs report;
    report["vehicle"] = v;
    report["hazard_shared"] = true;
    report["pedestrians_seen"] = detected ? std::int64_t(std::lround(busy * 20)) : std::int64_t(0);
    report["data_subjects"] = "drivers";
    emit_entity(c, report, "vehicle-report");
  }

  void aggregate_reports(const ComponentSpec& c) {
    auto it = local_.find(c.agent);
    if (it == local_.end()) return;
    auto cat = it->second.find(c.params.value("input_category", std::string("vehicle-report")));
    if (cat == it->second.end() || cat->second.empty()) return;
    const auto& reports = cat->second;

    double total = 0;
    for (const auto& r : reports) total += attr_num(r, "pedestrians_seen");
    double pedestrian_density = round3(total / double(reports.size()) / 20.0);

    Attrs act;
    act["purpose"] = "vehicle telemetry";
    auto agg = decision(c, "density-aggregation", act, reports);
    if (!agg) return;

    Attrs out;
    out["pedestrian_density"] = pedestrian_density;
    out["vehicle_density"] = round3(double(reports.size()) / 10.0);
    out["data_subjects"] = "drivers; pedestrians";
    emit_entity(c, out, c.params.value("output_category", std::string("density-data")), agg);
  }

  void emit_series(const ComponentSpec& c) {
    const FaultInjection* fault = active_fault("service_bad_update");
    if (fault && !bad_update_) {
      Attrs upd;
      upd["name"] = "release-" + std::to_string(fault->window_start_s);
      upd["fault"] = "bad_update";
      upd["corrupted"] = true;
      bad_update_ = emit_entity(c, upd, "service-update");
      if (bad_update_) res_.trace.push_back({tick_, "fault", "service_bad_update", *bad_update_});
    }

    double value = round3(spec_.busyness_at(tick_) + sensor_bias(c.agent + "/" + c.name) + jitter());
    Attrs attrs;
    attrs[c.params.value("value_attr", std::string("density"))] = fault ? 0.0 : value;
    attrs["corrupted"] = fault != nullptr;
    attrs["data_subjects"] = c.params.value("data_subjects", std::string("app users"));
    if (c.params.contains("pd_attr")) {
      std::string k = c.params.at("pd_attr").get<std::string>();
      attrs[k] = c.params.value("sentinel", std::string("PD")) + "_" + std::to_string(tick_);
      attrs[k + "#pd"] = true;
    }
    emit_entity(c, attrs, c.params.value("category", std::string("congestion-report")), {},
                fault ? bad_update_ : std::optional<NodeId>{});
  }

  void light_controller(const ComponentSpec& c) {
    auto input = latest_input(c.agent, c.params.value("input_category",
                                                      std::string("congestion-report")));
    if (!input) return;
    double density = attr_num(*input, "density");
    bool dim = density < c.params.value("dim_threshold", 0.2);

    Attrs act;
    act["purpose"] = "street lighting control";
    act["decision"] = dim ? "dim" : "bright";
    auto d = decision(c, "set-light-level", act, {*input});
    if (!d) return;

    double level = dim ? c.params.value("dim", 0.15) : c.params.value("bright", 0.9);
    light_ = level;
    Attrs cmd;
    cmd["light_level"] = level;
    cmd["data_subjects"] = "residents";
    emit_entity(c, cmd, "light-command", d);
  }

  void historic_summary(const ComponentSpec& c) {
    Attrs act;
    act["purpose"] = "emergency response planning";
    auto agg = decision(c, "historic-aggregation", act, {});
    if (!agg) return;

    std::string process = c.params.value("adjustment_process", std::string("event-adjustment"));
    std::int64_t adjust_at = c.params.value("adjust_at", tick_ + 1);
    const FaultInjection* skipped = fault_for_process(process, adjust_at);

    Attrs s;
    s["hotspot"] = c.params.value("hotspot", false);
    s["event_adjusted"] = false;
    s["data_subjects"] = "patients";
    if (skipped) {
      s["fault"] = "process_skipped";
      res_.trace.push_back({tick_, "fault", "process_skipped:" + process, ""});
    }
    emit_entity(c, s, c.params.value("category", std::string("callout-summary")), agg);
  }

  void event_adjustment(const ComponentSpec& c) {
    if (fault_for_process(c.name, tick_)) return;  // process not followed
    auto summary = latest_input(c.agent, c.params.value("input_category",
                                                        std::string("callout-summary")));
    if (!summary) return;

    Attrs act;
    act["purpose"] = "emergency response planning";
    act["event"] = c.params.value("event", std::string("major sporting event"));
    auto adj = decision(c, "event-adjustment", act, {*summary});
    if (!adj) return;

    Attrs s;
    s["hotspot"] = attr_bool(*summary, "hotspot");
    s["event_adjusted"] = true;
    s["expected_demand"] = "high";
    s["data_subjects"] = "patients";
    emit_entity(c, s, res_.log.node(*summary).attrs.value("category", std::string("callout-summary")),
                adj, summary);
  }

  void risk_redirect(const ComponentSpec& c) {
    std::vector<NodeId> inputs;
    for (const auto& cat : c.params.value("inputs", std::vector<std::string>{})) {
      auto in = latest_input(c.agent, cat);
      if (!in) return;  // not all three sources available yet
      inputs.push_back(*in);
    }

    double congestion = attr_num(inputs[0], "density", 1.0);
    double pedestrians = attr_num(inputs[1], "pedestrian_density", 1.0);
    bool hotspot = attr_bool(inputs[2], "hotspot");
    bool adjusted = attr_bool(inputs[2], "event_adjusted");
    bool low_risk = congestion < 0.2 && pedestrians < 0.2 && !hotspot && !adjusted;

    Attrs act;
    act["purpose"] = "vehicle distribution";
    act["classification"] = low_risk ? "low-risk" : "normal";
    act["decision"] = low_risk ? "redirect-ambulances" : "maintain-coverage";
    auto d = decision(c, "risk-redirect", act, inputs);
    if (!d) return;

    Attrs plan;
    plan["classification"] = low_risk ? "low-risk" : "normal";
    plan["data_subjects"] = "patients; public";
    emit_entity(c, plan, c.params.value("output_category", std::string("dispatch-plan")), d);
  }

  ScenarioSpec spec_;
  CapturePolicy policy_;
  const ComplianceConfig* rules_;
  SimResult res_;
  std::mt19937_64 rng_;
  double light_;
  std::int64_t tick_ = 0;
  std::map<std::string, NodeId> agent_ids_;
  std::map<std::string, std::map<std::string, std::vector<NodeId>>> inbox_;
  std::map<std::string, std::map<std::string, std::vector<NodeId>>> local_;
  std::optional<NodeId> cloud_model_, local_model_, model_card_, bad_update_;
};

const char* thread_role(const std::string& thread) {
  if (thread == "driver") return "hazard-detection";
  if (thread == "lighting") return "set-light-level";
  if (thread == "ambulance") return "risk-redirect";
  throw Error(Errc::UnknownThread, thread);
}

}  // namespace

SimResult run_scenario(const ScenarioSpec& spec, const CapturePolicy* policy,
                       const ComplianceConfig* rules) {
  return Engine(spec, policy, rules).run();
}

nlohmann::json investigate(ProvLog& log, const std::string& thread) {
  std::string role = thread_role(thread);

  // Thread root: the latest decision of the thread's kind; the driver thread
  // starts from the focal vehicle's detection decision.
  std::optional<NodeId> root;
  for (std::size_t idx : log.all_nodes()) {
    const auto& n = std::get<ProvNode>(log.record(idx).payload);
    if (n.kind != NodeKind::Activity) continue;
    if (n.attrs.value("role", std::string()) != role) continue;
    if (thread == "driver" && n.attrs.value("vehicle", std::string()) != "vehicle-1") continue;
    root = n.id;
  }
  if (!root) throw Error(Errc::UnknownId, "no " + role + " decision in log");

  Pipeline back = trace_back(log, *root);
  nlohmann::json findings = nlohmann::json::array();
  std::set<NodeId> responsible;
  for (const NodeId& id : back.nodes) {
    const ProvNode& n = log.node(id);
    auto f = n.attrs.find("fault");
    if (f == n.attrs.end()) continue;
    std::vector<NodeId> agents;
    for (std::size_t ridx : log.relations_from(id)) {
      const auto& r = std::get<ProvRelation>(log.record(ridx).payload);
      if (r.rel == RelKind::AttributedTo || r.rel == RelKind::AssociatedWith) {
        agents.push_back(r.dst);
        responsible.insert(r.dst);
      }
    }
    findings.push_back({{"node", id},
                        {"fault", f->get<std::string>()},
                        {"kind", to_string(n.kind)},
                        {"agents", agents}});
  }

  // Reviews are themselves reviewable.
  NodeId inv = record_investigation(log, "investigation thread: " + thread, back);

  nlohmann::json j;
  j["thread"] = thread;
  j["root"] = *root;
  j["findings"] = findings;
  j["responsible_agents"] = std::vector<NodeId>(responsible.begin(), responsible.end());
  j["investigation"] = inv;
  return j;
}

}  // namespace decprov
