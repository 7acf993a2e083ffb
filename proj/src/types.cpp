#include "decprov/types.hpp"

#include <cstdio>

#include "decprov/errors.hpp"
#include "decprov/sha256.hpp"

namespace decprov {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::TemporalViolation: return "TemporalViolation";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnknownId: return "UnknownId";
    case Errc::IoFailure: return "IoFailure";
    case Errc::ParseError: return "ParseError";
    case Errc::MalformedPattern: return "MalformedPattern";
    case Errc::MalformedRule: return "MalformedRule";
    case Errc::CategoryMismatch: return "CategoryMismatch";
    case Errc::BadWindow: return "BadWindow";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::WindowOutOfRange: return "WindowOutOfRange";
    case Errc::UnknownThread: return "UnknownThread";
  }
  return "Error";
}

NodeId make_node_id(std::size_t seq) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "n%08zu", seq);
  return buf;
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Entity: return "entity";
    case NodeKind::Activity: return "activity";
    case NodeKind::Agent: return "agent";
  }
  return "?";
}

const char* to_string(RelKind r) {
  switch (r) {
    case RelKind::Used: return "used";
    case RelKind::Generated: return "generated";
    case RelKind::DerivedFrom: return "derived_from";
    case RelKind::AttributedTo: return "attributed_to";
    case RelKind::AssociatedWith: return "associated_with";
  }
  return "?";
}

const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::None: return "none";
    case Boundary::Technical: return "technical";
    case Boundary::Administrative: return "administrative";
  }
  return "?";
}

NodeKind parse_node_kind(const std::string& s) {
  if (s == "entity") return NodeKind::Entity;
  if (s == "activity") return NodeKind::Activity;
  if (s == "agent") return NodeKind::Agent;
  throw Error(Errc::ParseError, "unknown node kind: " + s);
}

RelKind parse_rel_kind(const std::string& s) {
  if (s == "used") return RelKind::Used;
  if (s == "generated") return RelKind::Generated;
  if (s == "derived_from") return RelKind::DerivedFrom;
  if (s == "attributed_to") return RelKind::AttributedTo;
  if (s == "associated_with") return RelKind::AssociatedWith;
  throw Error(Errc::ParseError, "unknown relation kind: " + s);
}

Boundary parse_boundary(const std::string& s) {
  if (s == "none") return Boundary::None;
  if (s == "technical") return Boundary::Technical;
  if (s == "administrative") return Boundary::Administrative;
  throw Error(Errc::ParseError, "unknown boundary kind: " + s);
}

const NodeId& payload_id(const Payload& p) {
  return std::visit([](const auto& v) -> const NodeId& { return v.id; }, p);
}

Instant payload_timestamp(const Payload& p) {
  return std::visit([](const auto& v) { return v.timestamp; }, p);
}

static void check_attrs(const Attrs& a) {
  if (!a.is_object()) throw Error(Errc::ParseError, "attrs must be a JSON object");
  for (auto it = a.begin(); it != a.end(); ++it) {
    if (it.key().empty()) throw Error(Errc::ParseError, "empty attr key");
    const auto& v = it.value();
    if (!(v.is_string() || v.is_number() || v.is_boolean()))
      throw Error(Errc::ParseError, "attr value must be string/number/boolean: " + it.key());
  }
}

nlohmann::json payload_to_json(const Payload& p) {
  nlohmann::json j;
  if (const auto* n = std::get_if<ProvNode>(&p)) {
    j["kind"] = to_string(n->kind);
    j["id"] = n->id;
    j["timestamp"] = format_instant(n->timestamp);
    j["attrs"] = n->attrs;
  } else if (const auto* r = std::get_if<ProvRelation>(&p)) {
    j["kind"] = "relation";
    j["id"] = r->id;
    j["timestamp"] = format_instant(r->timestamp);
    j["rel"] = to_string(r->rel);
    j["src"] = r->src;
    j["dst"] = r->dst;
  } else {
    const auto& f = std::get<FlowEvent>(p);
    j["kind"] = "flow";
    j["id"] = f.id;
    j["timestamp"] = format_instant(f.timestamp);
    j["entity"] = f.entity;
    j["from_agent"] = f.from_agent;
    j["to_agent"] = f.to_agent;
    j["boundary"] = to_string(f.boundary);
  }
  return j;
}

Payload payload_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("id") || !j.contains("timestamp"))
    throw Error(Errc::ParseError, "record missing kind/id/timestamp");
  std::string kind = j.at("kind").get<std::string>();
  NodeId id = j.at("id").get<std::string>();
  Instant ts = parse_instant(j.at("timestamp").get<std::string>());
  if (kind == "relation") {
    ProvRelation r;
    r.id = id;
    r.timestamp = ts;
    r.rel = parse_rel_kind(j.at("rel").get<std::string>());
    r.src = j.at("src").get<std::string>();
    r.dst = j.at("dst").get<std::string>();
    return r;
  }
  if (kind == "flow") {
    FlowEvent f;
    f.id = id;
    f.timestamp = ts;
    f.entity = j.at("entity").get<std::string>();
    f.from_agent = j.at("from_agent").get<std::string>();
    f.to_agent = j.at("to_agent").get<std::string>();
    f.boundary = parse_boundary(j.at("boundary").get<std::string>());
    return f;
  }
  ProvNode n;
  n.id = id;
  n.timestamp = ts;
  n.kind = parse_node_kind(kind);
  n.attrs = j.value("attrs", Attrs::object());
  check_attrs(n.attrs);
  return n;
}

std::string record_content_hash(const Payload& p, const std::string& prev_hash) {
  return sha256_hex(payload_to_json(p).dump() + prev_hash);
}

nlohmann::json record_to_json(const LogRecord& r) {
  nlohmann::json j = payload_to_json(r.payload);
  j["prev_hash"] = r.prev_hash;
  j["hash"] = r.hash;
  return j;
}

LogRecord record_from_json(const nlohmann::json& j) {
  LogRecord r;
  r.payload = payload_from_json(j);
  r.prev_hash = j.at("prev_hash").get<std::string>();
  r.hash = j.at("hash").get<std::string>();
  return r;
}

}  // namespace decprov
