#include "decprov/query.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "decprov/errors.hpp"

namespace decprov {

const char* to_string(TraceDirection d) {
  return d == TraceDirection::Backward ? "backward" : "forward";
}

TraceDirection parse_trace_direction(const std::string& s) {
  if (s == "backward" || s == "back") return TraceDirection::Backward;
  if (s == "forward" || s == "fwd") return TraceDirection::Forward;
  throw Error(Errc::ParseError, "unknown direction: " + s);
}

namespace {

bool is_trace_rel(RelKind r) {
  return r == RelKind::Used || r == RelKind::Generated || r == RelKind::DerivedFrom;
}

bool in_window(const std::optional<Window>& w, Instant t) {
  return !w || (t >= w->start && t <= w->end);
}

void sort_by_time(const ProvLog& log, std::vector<NodeId>& ids) {
  std::sort(ids.begin(), ids.end(), [&](const NodeId& a, const NodeId& b) {
    Instant ta = payload_timestamp(log.record(log.index_of(a)).payload);
    Instant tb = payload_timestamp(log.record(log.index_of(b)).payload);
    return ta != tb ? ta < tb : a < b;
  });
}

Pipeline trace(const ProvLog& log, const NodeId& root, TraceDirection dir,
               std::optional<Window> window, std::optional<int> max_depth) {
  if (window && window->start > window->end)
    throw Error(Errc::BadWindow, "window start after end");
  (void)log.node(root);  // UnknownId if absent

  Pipeline p;
  p.root = root;
  p.direction = dir;
  p.window = window;

  std::map<NodeId, int> depth;
  std::deque<NodeId> frontier;
  depth[root] = 0;
  frontier.push_back(root);
  std::set<NodeId> edge_ids;

  while (!frontier.empty()) {
    NodeId cur = frontier.front();
    frontier.pop_front();
    int d = depth[cur];
    if (max_depth && d >= *max_depth) continue;
    const auto& incident =
        dir == TraceDirection::Backward ? log.relations_from(cur) : log.relations_to(cur);
    for (std::size_t idx : incident) {
      const auto& r = std::get<ProvRelation>(log.record(idx).payload);
      if (!is_trace_rel(r.rel)) continue;
      const NodeId& next = dir == TraceDirection::Backward ? r.dst : r.src;
      if (!in_window(window, log.node(next).timestamp)) continue;
      edge_ids.insert(r.id);
      if (!depth.count(next)) {
        depth[next] = d + 1;
        frontier.push_back(next);
      }
    }
  }

  std::set<NodeId> node_set;
  for (const auto& [id, _] : depth) node_set.insert(id);

  // Edges fully inside the node set (includes cross links between visited
  // nodes at max depth).
  for (std::size_t idx : log.all_relations()) {
    const auto& r = std::get<ProvRelation>(log.record(idx).payload);
    if (is_trace_rel(r.rel) && node_set.count(r.src) && node_set.count(r.dst))
      edge_ids.insert(r.id);
  }

  // Flows delivering traced entities, inside the window.
  for (const NodeId& id : node_set) {
    for (std::size_t idx : log.flows_of_entity(id)) {
      const auto& f = std::get<FlowEvent>(log.record(idx).payload);
      if (in_window(window, f.timestamp)) p.flows.push_back(f.id);
    }
  }

  // Actors: agents attached to traced nodes by attribution/association.
  std::set<NodeId> actor_set;
  for (const NodeId& id : node_set) {
    for (std::size_t idx : log.relations_from(id)) {
      const auto& r = std::get<ProvRelation>(log.record(idx).payload);
      if (r.rel == RelKind::AttributedTo || r.rel == RelKind::AssociatedWith)
        actor_set.insert(r.dst);
    }
  }

  p.nodes.assign(node_set.begin(), node_set.end());
  p.edges.assign(edge_ids.begin(), edge_ids.end());
  p.actors.assign(actor_set.begin(), actor_set.end());
  sort_by_time(log, p.nodes);
  sort_by_time(log, p.edges);
  sort_by_time(log, p.flows);
  std::sort(p.actors.begin(), p.actors.end());
  return p;
}

}  // namespace

nlohmann::json Pipeline::to_json() const {
  nlohmann::json j;
  j["root"] = root;
  j["direction"] = to_string(direction);
  if (window) {
    j["window"] = {{"start", format_instant(window->start)}, {"end", format_instant(window->end)}};
  }
  j["nodes"] = nodes;
  j["edges"] = edges;
  j["flows"] = flows;
  j["actors"] = actors;
  return j;
}

Pipeline trace_back(const ProvLog& log, const NodeId& root, std::optional<Window> window,
                    std::optional<int> max_depth) {
  return trace(log, root, TraceDirection::Backward, window, max_depth);
}

Pipeline trace_forward(const ProvLog& log, const NodeId& root, std::optional<Window> window,
                       std::optional<int> max_depth) {
  return trace(log, root, TraceDirection::Forward, window, max_depth);
}

std::vector<ActorRole> actors_involved(const ProvLog& log, const Pipeline& p) {
  std::map<NodeId, std::set<std::string>> roles;
  std::set<NodeId> node_set(p.nodes.begin(), p.nodes.end());
  for (const NodeId& id : p.nodes) {
    for (std::size_t idx : log.relations_from(id)) {
      const auto& r = std::get<ProvRelation>(log.record(idx).payload);
      if (r.rel == RelKind::AttributedTo) roles[r.dst].insert("attributed-source");
      if (r.rel == RelKind::AssociatedWith) roles[r.dst].insert("processor");
    }
  }
  for (const NodeId& fid : p.flows) {
    const auto& f = log.flow(fid);
    roles[f.from_agent].insert("attributed-source");
    roles[f.to_agent].insert("recipient");
  }
  std::vector<ActorRole> out;
  for (auto& [agent, rs] : roles) out.push_back({agent, std::move(rs)});
  return out;
}

std::vector<std::pair<NodeId, Boundary>> boundary_crossings(const ProvLog& log,
                                                            const Pipeline& p) {
  std::vector<std::pair<NodeId, Boundary>> out;
  for (const NodeId& fid : p.flows) {
    const auto& f = log.flow(fid);
    if (f.boundary != Boundary::None) out.emplace_back(f.id, f.boundary);
  }
  // p.flows is already time-ordered.
  return out;
}

NodeId record_investigation(ProvLog& log, const std::string& description, const Pipeline& p) {
  Instant when = 0;
  for (const auto& rec : log.records()) when = std::max(when, payload_timestamp(rec.payload));

  std::vector<NodeId> targets;
  const ProvNode& root = log.node(p.root);
  if (root.kind == NodeKind::Entity) {
    targets.push_back(p.root);
  } else {
    targets = log.neighbors(p.root, Direction::Upstream, RelKind::Used);
  }

  ProvNode act;
  act.kind = NodeKind::Activity;
  act.timestamp = when;
  act.attrs["role"] = "investigation";
  act.attrs["query"] = description;
  act.attrs["pipeline_root"] = p.root;
  act.attrs["direction"] = to_string(p.direction);
  NodeId act_id = log.append(act);

  if (targets.empty()) {
    // No entity to anchor the query to: materialize a descriptor entity.
    ProvNode desc;
    desc.kind = NodeKind::Entity;
    desc.timestamp = when;
    desc.attrs["category"] = "query-descriptor";
    desc.attrs["pipeline_root"] = p.root;
    NodeId desc_id = log.append(desc);
    ProvRelation gen;
    gen.rel = RelKind::Generated;
    gen.src = desc_id;
    gen.dst = act_id;
    gen.timestamp = when;
    log.append(gen);
  }
  for (const NodeId& t : targets) {
    ProvRelation used;
    used.rel = RelKind::Used;
    used.src = act_id;
    used.dst = t;
    used.timestamp = when;
    log.append(used);
  }
  return act_id;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string to_dot(const ProvLog& log, const Pipeline& p) {
  std::ostringstream os;
  os << "digraph pipeline {\n  rankdir=BT;\n";
  auto label = [&](const ProvNode& n) {
    std::string l = n.id;
    auto it = n.attrs.find("name");
    if (it == n.attrs.end()) it = n.attrs.find("category");
    if (it == n.attrs.end()) it = n.attrs.find("role");
    if (it != n.attrs.end() && it->is_string()) l += "\\n" + it->get<std::string>();
    return l;
  };
  for (const NodeId& id : p.nodes) {
    const ProvNode& n = log.node(id);
    const char* shape = n.kind == NodeKind::Entity     ? "ellipse"
                        : n.kind == NodeKind::Activity ? "box"
                                                       : "house";
    os << "  \"" << dot_escape(id) << "\" [shape=" << shape << ",label=\""
       << dot_escape(label(n)) << "\"];\n";
  }
  std::set<NodeId> node_set(p.nodes.begin(), p.nodes.end());
  for (const NodeId& id : p.actors) {
    if (node_set.count(id)) continue;
    const ProvNode& n = log.node(id);
    os << "  \"" << dot_escape(id) << "\" [shape=house,style=filled,fillcolor=lightyellow,label=\""
       << dot_escape(label(n)) << "\"];\n";
  }
  for (const NodeId& eid : p.edges) {
    const auto& r = log.relation(eid);
    os << "  \"" << dot_escape(r.src) << "\" -> \"" << dot_escape(r.dst) << "\" [label=\""
       << to_string(r.rel) << "\"];\n";
  }
  for (const NodeId& id : p.nodes) {
    for (std::size_t idx : log.relations_from(id)) {
      const auto& r = std::get<ProvRelation>(log.record(idx).payload);
      if (r.rel == RelKind::AttributedTo || r.rel == RelKind::AssociatedWith)
        os << "  \"" << dot_escape(r.src) << "\" -> \"" << dot_escape(r.dst)
           << "\" [style=dashed,label=\"" << to_string(r.rel) << "\"];\n";
    }
  }
  for (const NodeId& fid : p.flows) {
    const auto& f = log.flow(fid);
    os << "  \"" << dot_escape(f.from_agent) << "\" -> \"" << dot_escape(f.to_agent)
       << "\" [style=dotted,label=\"flow " << dot_escape(f.entity) << " ("
       << to_string(f.boundary) << ")\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace decprov
