#pragma once

#include <json.hpp>
#include <string>
#include <variant>

#include "decprov/time.hpp"

namespace decprov {

// Opaque, lexicographically sortable identifier. Assigned from the log
// sequence number, zero-padded, so creation order == lexicographic order.
using NodeId = std::string;

NodeId make_node_id(std::size_t seq);

enum class NodeKind { Entity, Activity, Agent };
enum class RelKind { Used, Generated, DerivedFrom, AttributedTo, AssociatedWith };
enum class Boundary { None, Technical, Administrative };

const char* to_string(NodeKind k);
const char* to_string(RelKind r);
const char* to_string(Boundary b);
NodeKind parse_node_kind(const std::string& s);
RelKind parse_rel_kind(const std::string& s);
Boundary parse_boundary(const std::string& s);

// Attribute maps are flat JSON objects: string/number/boolean values only.
// Convention: a key "K#pd" with value true marks attr K as personal data;
// "K#payload" marks it as payload-bearing (stripped by metadata-only capture).
using Attrs = nlohmann::json;

struct ProvNode {
  NodeId id;
  NodeKind kind = NodeKind::Entity;
  Instant timestamp = 0;
  Attrs attrs = Attrs::object();
};

// Edge orientation follows PROV: src is the downstream element.
//   Used          activity -> entity
//   Generated     entity   -> activity
//   DerivedFrom   entity   -> entity
//   AttributedTo  entity   -> agent
//   AssociatedWith activity -> agent
struct ProvRelation {
  NodeId id;
  RelKind rel = RelKind::Used;
  NodeId src;
  NodeId dst;
  Instant timestamp = 0;
};

// Movement of an entity across a technical or administrative boundary.
struct FlowEvent {
  NodeId id;
  NodeId entity;
  NodeId from_agent;
  NodeId to_agent;
  Boundary boundary = Boundary::None;
  Instant timestamp = 0;
};

using Payload = std::variant<ProvNode, ProvRelation, FlowEvent>;

const NodeId& payload_id(const Payload& p);
Instant payload_timestamp(const Payload& p);

// Canonical JSON form used for hashing and the JSONL file: keys sorted,
// no insignificant whitespace, UTF-8, timestamps RFC 3339 (ms).
nlohmann::json payload_to_json(const Payload& p);
Payload payload_from_json(const nlohmann::json& j);  // throws Error(ParseError)

struct LogRecord {
  Payload payload;
  std::string prev_hash;  // 64-char lowercase hex; all zeros for the first record
  std::string hash;       // SHA-256(canonical payload JSON + prev_hash)
};

std::string record_content_hash(const Payload& p, const std::string& prev_hash);
nlohmann::json record_to_json(const LogRecord& r);
LogRecord record_from_json(const nlohmann::json& j);

}  // namespace decprov
