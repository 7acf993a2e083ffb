#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "decprov/log.hpp"

namespace decprov {

enum class TraceDirection { Backward, Forward };

const char* to_string(TraceDirection d);
TraceDirection parse_trace_direction(const std::string& s);

struct Window {
  Instant start;
  Instant end;  // inclusive
};

// Extracted decision pipeline: the closure of a backward or forward trace.
// nodes/edges/flows are ordered by (timestamp, NodeId); actors are the agents
// attributed to / associated with the traced nodes.
struct Pipeline {
  NodeId root;
  TraceDirection direction = TraceDirection::Backward;
  std::optional<Window> window;
  std::vector<NodeId> nodes;
  std::vector<NodeId> edges;
  std::vector<NodeId> flows;
  std::vector<NodeId> actors;

  nlohmann::json to_json() const;
};

// All provenance ancestors of root via Used/Generated/DerivedFrom, restricted
// to the window and depth; flows delivering traced entities are included.
Pipeline trace_back(const ProvLog& log, const NodeId& root, std::optional<Window> window = {},
                    std::optional<int> max_depth = {});
// Mirror image: cascading consequences of root.
Pipeline trace_forward(const ProvLog& log, const NodeId& root, std::optional<Window> window = {},
                       std::optional<int> max_depth = {});

struct ActorRole {
  NodeId agent;
  std::set<std::string> roles;  // attributed-source / processor / recipient
};

// Agents touching the pipeline, annotated by how: attribution edges, activity
// association, or receiving a flow.
std::vector<ActorRole> actors_involved(const ProvLog& log, const Pipeline& p);

// Pipeline flows crossing a technical or administrative boundary, by time.
std::vector<std::pair<NodeId, Boundary>> boundary_crossings(const ProvLog& log,
                                                            const Pipeline& p);

// Appends an Activity describing the query plus Used edges to the pipeline's
// root entity (or, for an activity root, its input entities), so reviews are
// themselves reviewable.
NodeId record_investigation(ProvLog& log, const std::string& description, const Pipeline& p);

// Graphviz rendering of a pipeline for figures.
std::string to_dot(const ProvLog& log, const Pipeline& p);

}  // namespace decprov
