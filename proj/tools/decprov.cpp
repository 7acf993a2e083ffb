// decprov — decision provenance engine CLI.
//
// Machine-readable results go to stdout, diagnostics to stderr.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "decprov/artifacts.hpp"
#include "decprov/compliance.hpp"
#include "decprov/errors.hpp"
#include "decprov/log.hpp"
#include "decprov/policy.hpp"
#include "decprov/query.hpp"
#include "decprov/scenario.hpp"

namespace {

using namespace decprov;

std::optional<Window> parse_window(const std::string& s) {
  if (s.empty()) return {};
  auto sep = s.find("..");
  if (sep == std::string::npos) throw Error(Errc::BadWindow, "expected start..end: " + s);
  Window w{parse_instant(s.substr(0, sep)), parse_instant(s.substr(sep + 2))};
  if (w.start > w.end) throw Error(Errc::BadWindow, "window start after end");
  return w;
}

std::string default_log_path(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DECPROV_LOG")) return env;
  throw Error(Errc::IoFailure, "no log path: pass --log or set DECPROV_LOG");
}

NodeId resolve_id(const ProvLog& log, const std::string& id_or_query) {
  if (log.has(id_or_query)) return id_or_query;
  // attrs lookup: key=value, latest match wins
  auto eq = id_or_query.find('=');
  if (eq != std::string::npos) {
    std::string key = id_or_query.substr(0, eq), value = id_or_query.substr(eq + 1);
    std::optional<NodeId> found;
    for (std::size_t idx : log.all_nodes()) {
      const auto& n = std::get<ProvNode>(log.record(idx).payload);
      auto it = n.attrs.find(key);
      if (it != n.attrs.end() && it->is_string() && it->get<std::string>() == value) found = n.id;
    }
    if (found) return *found;
  }
  throw Error(Errc::UnknownId, id_or_query);
}

void emit_pipeline(const ProvLog& log, const Pipeline& p, const std::string& format) {
  if (format == "dot") {
    std::cout << to_dot(log, p);
  } else if (format == "text") {
    std::cout << "pipeline root=" << p.root << " direction=" << to_string(p.direction) << "\n";
    for (const auto& id : p.nodes) {
      const ProvNode& n = log.node(id);
      std::cout << "  " << id << " [" << to_string(n.kind) << "] "
                << format_instant(n.timestamp) << " " << n.attrs.dump() << "\n";
    }
    std::cout << "  edges=" << p.edges.size() << " flows=" << p.flows.size()
              << " actors=" << p.actors.size() << "\n";
  } else {
    std::cout << p.to_json().dump() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decprov — decision provenance recording, tracing and compliance"};
  app.require_subcommand(1);

  std::string log_path, policy_path, rules_path, out_path, format = "json";
  std::string id, direction = "back", window_s, audience = "developer";
  std::string scenario_path, trace_out, payloads_path, thread, controller;
  std::string now_s, recipient = "supervisory-authority", breach_entity;
  std::int64_t seed = -1;
  int max_depth = -1;

  auto* ingest = app.add_subcommand("ingest", "gate payloads through a capture policy into a log");
  ingest->add_option("--log", log_path);
  ingest->add_option("--payloads", payloads_path, "JSONL of record payloads")->required();
  ingest->add_option("--policy", policy_path);

  auto* verify = app.add_subcommand("verify", "verify the hash chain of a log file");
  verify->add_option("--log", log_path);

  auto* trace = app.add_subcommand("trace", "backward or forward decision pipeline");
  trace->add_option("--log", log_path);
  trace->add_option("--id", id)->required();
  trace->add_option("--direction", direction, "back|forward");
  trace->add_option("--window", window_s, "start..end (RFC 3339)");
  trace->add_option("--max-depth", max_depth);
  trace->add_option("--format", format, "json|text|dot");

  auto* actors = app.add_subcommand("actors", "actors involved in a pipeline");
  actors->add_option("--log", log_path);
  actors->add_option("--id", id)->required();
  actors->add_option("--direction", direction);
  actors->add_option("--window", window_s);

  auto* flows = app.add_subcommand("flows", "boundary crossings of a pipeline");
  flows->add_option("--log", log_path);
  flows->add_option("--id", id)->required();
  flows->add_option("--direction", direction);
  flows->add_option("--window", window_s);

  auto* audit = app.add_subcommand("audit", "re-check logged flows against compliance rules");
  audit->add_option("--log", log_path);
  audit->add_option("--rules", rules_path)->required();
  audit->add_option("--breach-entity", breach_entity, "emit a breach report for this entity");
  audit->add_option("--recipient", recipient);
  audit->add_option("--out", out_path, "write the updated log (breach alerts) here");
  audit->add_option("--format", format, "json|text");

  auto* report = app.add_subcommand("report", "audience-targeted audit report");
  report->add_option("--log", log_path);
  report->add_option("--id", id)->required();
  report->add_option("--audience", audience, "regulator|developer|user");
  report->add_option("--format", format, "json|text");

  auto* art30 = app.add_subcommand("art30", "record of processing activities for a controller");
  art30->add_option("--log", log_path);
  art30->add_option("--controller", controller)->required();
  art30->add_option("--format", format, "json|text");

  auto* simulate = app.add_subcommand("simulate", "run a scenario and write its provenance log");
  simulate->add_option("--scenario", scenario_path)->required();
  simulate->add_option("--seed", seed, "overrides the scenario seed");
  simulate->add_option("--out", out_path)->required();
  simulate->add_option("--policy", policy_path, "capture policy gating the run");
  simulate->add_option("--rules", rules_path, "compliance rules checked on flows");
  simulate->add_option("--trace-out", trace_out, "event trace JSONL");

  auto* investigate_cmd = app.add_subcommand("investigate", "run an investigation thread");
  investigate_cmd->add_option("--log", log_path);
  investigate_cmd->add_option("--thread", thread, "driver|lighting|ambulance")->required();
  investigate_cmd->add_option("--out", out_path, "write the log including the recorded query");

  auto* expire = app.add_subcommand("expire", "tombstone records past their retention");
  expire->add_option("--log", log_path);
  expire->add_option("--policy", policy_path)->required();
  expire->add_option("--now", now_s, "RFC 3339 reference instant")->required();
  expire->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*verify) {
      VerifyReport r = ProvLog::verify_file(default_log_path(log_path));
      nlohmann::json j{{"ok", r.ok}};
      if (r.first_bad_index) j["first_bad_index"] = *r.first_bad_index;
      std::cout << j.dump() << "\n";
      std::cerr << (r.ok ? "ok" : "chain broken") << "\n";
      return r.ok ? 0 : 1;
    }

    if (*ingest) {
      std::string lp = default_log_path(log_path);
      ProvLog log;
      std::ifstream probe(lp);
      if (probe.good()) log = ProvLog::load(lp);
      CapturePolicy policy;
      if (!policy_path.empty()) policy = CapturePolicy::load(policy_path);
      std::ifstream in(payloads_path);
      if (!in) throw Error(Errc::IoFailure, "cannot open " + payloads_path);
      std::string line;
      nlohmann::json results = nlohmann::json::array();
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        GateResult g = gate_append(policy, payload_from_json(nlohmann::json::parse(line)), log);
        nlohmann::json r{{"action", to_string(g.action_taken)}};
        if (g.appended) r["id"] = *g.appended;
        results.push_back(r);
      }
      log.save(lp);
      std::cout << results.dump() << "\n";
      return 0;
    }

    if (*trace || *actors || *flows) {
      ProvLog log = ProvLog::load(default_log_path(log_path));
      NodeId root = resolve_id(log, id);
      auto window = parse_window(window_s);
      std::optional<int> depth;
      if (max_depth >= 0) depth = max_depth;
      Pipeline p = parse_trace_direction(direction) == TraceDirection::Backward
                       ? trace_back(log, root, window, depth)
                       : trace_forward(log, root, window, depth);
      if (*trace) {
        emit_pipeline(log, p, format);
      } else if (*actors) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& a : actors_involved(log, p))
          j.push_back({{"agent", a.agent},
                       {"roles", std::vector<std::string>(a.roles.begin(), a.roles.end())}});
        std::cout << j.dump() << "\n";
      } else {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& [fid, b] : boundary_crossings(log, p))
          j.push_back({{"flow", fid}, {"boundary", to_string(b)}});
        std::cout << j.dump() << "\n";
      }
      return 0;
    }

    if (*audit) {
      ProvLog log = ProvLog::load(default_log_path(log_path));
      ComplianceConfig cfg = ComplianceConfig::load(rules_path);
      if (!breach_entity.empty()) {
        nlohmann::json rep = breach_report(cfg, log, resolve_id(log, breach_entity), recipient);
        if (!out_path.empty()) log.save(out_path);
        std::cout << (format == "text" ? breach_report_text(rep) : rep.dump() + "\n");
        return 0;
      }
      nlohmann::json decisions = nlohmann::json::array();
      for (std::size_t idx : log.all_flows()) {
        const auto& f = std::get<FlowEvent>(log.record(idx).payload);
        decisions.push_back(check_flow(cfg, log, f, f.timestamp).to_json());
      }
      std::cout << decisions.dump() << "\n";
      return 0;
    }

    if (*report) {
      ProvLog log = ProvLog::load(default_log_path(log_path));
      nlohmann::json r = render_report(log, resolve_id(log, id), audience);
      std::cout << (format == "text" ? report_text(r) : r.dump() + "\n");
      return 0;
    }

    if (*art30) {
      ProvLog log = ProvLog::load(default_log_path(log_path));
      NodeId agent = log.has(controller) ? controller : resolve_id(log, "name=" + controller);
      nlohmann::json r = export_art30(log, agent);
      std::cout << (format == "text" ? art30_text(r) : r.dump() + "\n");
      return 0;
    }

    if (*simulate) {
      ScenarioSpec spec = ScenarioSpec::load(scenario_path);
      if (seed >= 0) spec.seed = static_cast<std::uint64_t>(seed);
      CapturePolicy policy;
      bool have_policy = !policy_path.empty();
      if (have_policy) policy = CapturePolicy::load(policy_path);
      ComplianceConfig rules;
      bool have_rules = !rules_path.empty();
      if (have_rules) rules = ComplianceConfig::load(rules_path);
      SimResult res = run_scenario(spec, have_policy ? &policy : nullptr,
                                   have_rules ? &rules : nullptr);
      res.log.save(out_path);
      if (!trace_out.empty()) save_trace(res.trace, trace_out);
      nlohmann::json j{{"records", res.log.size()},
                       {"events", res.trace.size()},
                       {"head_hash", res.log.head_hash()}};
      std::cout << j.dump() << "\n";
      return 0;
    }

    if (*investigate_cmd) {
      std::string lp = default_log_path(log_path);
      ProvLog log = ProvLog::load(lp);
      nlohmann::json findings = investigate(log, thread);
      log.save(out_path.empty() ? lp : out_path);
      std::cout << findings.dump() << "\n";
      return 0;
    }

    if (*expire) {
      ProvLog log = ProvLog::load(default_log_path(log_path));
      CapturePolicy policy = CapturePolicy::load(policy_path);
      ExpireResult r = decprov::expire(policy, log, parse_instant(now_s));
      r.compacted.save(out_path);
      nlohmann::json j{{"tombstoned", r.tombstoned}};
      std::cout << j.dump() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
