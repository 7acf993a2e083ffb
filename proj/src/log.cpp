#include "decprov/log.hpp"

#include <algorithm>
#include <fstream>

#include "decprov/errors.hpp"
#include "decprov/sha256.hpp"

namespace decprov {

namespace {

const std::vector<std::size_t> kEmptyIndex;

struct Endpoints {
  NodeKind src;
  NodeKind dst;
};

Endpoints required_endpoints(RelKind r) {
  switch (r) {
    case RelKind::Used: return {NodeKind::Activity, NodeKind::Entity};
    case RelKind::Generated: return {NodeKind::Entity, NodeKind::Activity};
    case RelKind::DerivedFrom: return {NodeKind::Entity, NodeKind::Entity};
    case RelKind::AttributedTo: return {NodeKind::Entity, NodeKind::Agent};
    case RelKind::AssociatedWith: return {NodeKind::Activity, NodeKind::Agent};
  }
  return {NodeKind::Entity, NodeKind::Entity};
}

bool is_temporal(RelKind r) {
  return r == RelKind::Used || r == RelKind::Generated || r == RelKind::DerivedFrom;
}

}  // namespace

std::string ProvLog::head_hash() const {
  return records_.empty() ? kZeroHash : records_.back().hash;
}

std::size_t ProvLog::index_of(const NodeId& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error(Errc::UnknownId, id);
  return it->second;
}

const ProvNode& ProvLog::node(const NodeId& id) const {
  const auto* n = std::get_if<ProvNode>(&records_.at(index_of(id)).payload);
  if (!n) throw Error(Errc::UnknownId, id + " is not a node");
  return *n;
}

const ProvRelation& ProvLog::relation(const NodeId& id) const {
  const auto* r = std::get_if<ProvRelation>(&records_.at(index_of(id)).payload);
  if (!r) throw Error(Errc::UnknownId, id + " is not a relation");
  return *r;
}

const FlowEvent& ProvLog::flow(const NodeId& id) const {
  const auto* f = std::get_if<FlowEvent>(&records_.at(index_of(id)).payload);
  if (!f) throw Error(Errc::UnknownId, id + " is not a flow");
  return *f;
}

void ProvLog::validate(const Payload& p) const {
  if (const auto* n = std::get_if<ProvNode>(&p)) {
    (void)n;
    return;
  }
  if (const auto* r = std::get_if<ProvRelation>(&p)) {
    auto want = required_endpoints(r->rel);
    auto src_it = by_id_.find(r->src);
    auto dst_it = by_id_.find(r->dst);
    if (src_it == by_id_.end()) throw Error(Errc::DanglingReference, "src " + r->src);
    if (dst_it == by_id_.end()) throw Error(Errc::DanglingReference, "dst " + r->dst);
    const auto* src = std::get_if<ProvNode>(&records_[src_it->second].payload);
    const auto* dst = std::get_if<ProvNode>(&records_[dst_it->second].payload);
    if (!src || src->kind != want.src)
      throw Error(Errc::DanglingReference,
                  std::string("src of ") + to_string(r->rel) + " must be " + to_string(want.src));
    if (!dst || dst->kind != want.dst)
      throw Error(Errc::DanglingReference,
                  std::string("dst of ") + to_string(r->rel) + " must be " + to_string(want.dst));
    // Downstream element never precedes its upstream element.
    if (is_temporal(r->rel) && src->timestamp < dst->timestamp)
      throw Error(Errc::TemporalViolation,
                  r->src + " (" + format_instant(src->timestamp) + ") precedes " + r->dst + " (" +
                      format_instant(dst->timestamp) + ")");
    return;
  }
  const auto& f = std::get<FlowEvent>(p);
  for (const NodeId* id : {&f.entity, &f.from_agent, &f.to_agent}) {
    auto it = by_id_.find(*id);
    if (it == by_id_.end()) throw Error(Errc::DanglingReference, *id);
  }
  if (node(f.entity).kind != NodeKind::Entity)
    throw Error(Errc::DanglingReference, f.entity + " is not an entity");
  if (node(f.from_agent).kind != NodeKind::Agent || node(f.to_agent).kind != NodeKind::Agent)
    throw Error(Errc::DanglingReference, "flow endpoints must be agents");
  if (f.boundary != Boundary::None && f.from_agent == f.to_agent)
    throw Error(Errc::ParseError, "boundary flow with identical agents");
}

NodeId ProvLog::append_impl(Payload p, std::optional<std::string> stored_prev,
                            std::optional<std::string> stored_hash) {
  NodeId& id_ref = std::visit([](auto& v) -> NodeId& { return v.id; }, p);
  if (id_ref.empty()) id_ref = make_node_id(records_.size() + 1);
  NodeId id = id_ref;  // copy before the payload is moved into the record
  if (by_id_.count(id)) throw Error(Errc::DuplicateId, id);
  validate(p);

  LogRecord rec;
  rec.payload = std::move(p);
  rec.prev_hash = stored_prev ? *stored_prev : head_hash();
  rec.hash = stored_hash ? *stored_hash : record_content_hash(rec.payload, rec.prev_hash);
  records_.push_back(std::move(rec));
  index_record(records_.size() - 1);
  return id;
}

NodeId ProvLog::append(Payload p) { return append_impl(std::move(p), {}, {}); }

void ProvLog::index_record(std::size_t idx) {
  const LogRecord& rec = records_[idx];
  by_id_.emplace(payload_id(rec.payload), idx);
  if (std::holds_alternative<ProvNode>(rec.payload)) {
    node_indices_.push_back(idx);
  } else if (const auto* r = std::get_if<ProvRelation>(&rec.payload)) {
    rel_indices_.push_back(idx);
    rels_from_[r->src].push_back(idx);
    rels_to_[r->dst].push_back(idx);
  } else {
    const auto& f = std::get<FlowEvent>(rec.payload);
    flow_indices_.push_back(idx);
    flows_by_entity_[f.entity].push_back(idx);
  }
}

std::vector<NodeId> ProvLog::neighbors(const NodeId& id, Direction dir,
                                       std::optional<RelKind> rel_filter) const {
  (void)node(id);  // UnknownId if absent or not a node
  const auto& incident = dir == Direction::Upstream ? relations_from(id) : relations_to(id);
  std::vector<NodeId> out;
  for (std::size_t idx : incident) {
    const auto& r = std::get<ProvRelation>(records_[idx].payload);
    if (rel_filter && r.rel != *rel_filter) continue;
    out.push_back(dir == Direction::Upstream ? r.dst : r.src);
  }
  std::sort(out.begin(), out.end(), [this](const NodeId& a, const NodeId& b) {
    Instant ta = node(a).timestamp, tb = node(b).timestamp;
    return ta != tb ? ta < tb : a < b;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const std::vector<std::size_t>& ProvLog::relations_from(const NodeId& src) const {
  auto it = rels_from_.find(src);
  return it == rels_from_.end() ? kEmptyIndex : it->second;
}

const std::vector<std::size_t>& ProvLog::relations_to(const NodeId& dst) const {
  auto it = rels_to_.find(dst);
  return it == rels_to_.end() ? kEmptyIndex : it->second;
}

const std::vector<std::size_t>& ProvLog::flows_of_entity(const NodeId& entity) const {
  auto it = flows_by_entity_.find(entity);
  return it == flows_by_entity_.end() ? kEmptyIndex : it->second;
}

VerifyReport ProvLog::verify() const {
  std::string prev = kZeroHash;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const LogRecord& r = records_[i];
    if (r.prev_hash != prev || r.hash != record_content_hash(r.payload, r.prev_hash))
      return {false, i};
    prev = r.hash;
  }
  return {true, {}};
}

void ProvLog::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path);
  for (const auto& rec : records_) out << record_to_json(rec).dump() << '\n';
  if (!out) throw Error(Errc::IoFailure, "write failed: " + path);
}

ProvLog ProvLog::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  ProvLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw Error(Errc::ParseError, path + ":" + std::to_string(lineno) + ": bad JSON");
    LogRecord rec = record_from_json(j);
    log.append_impl(std::move(rec.payload), rec.prev_hash, rec.hash);
  }
  return log;
}

VerifyReport ProvLog::verify_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  std::string line, prev = kZeroHash;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) return {false, i};
    LogRecord rec;
    try {
      rec = record_from_json(j);
    } catch (const std::exception&) {
      return {false, i};
    }
    // Any byte change that survives parsing either alters the canonical
    // re-serialization or the recomputed hash.
    if (record_to_json(rec).dump() != line) return {false, i};
    if (rec.prev_hash != prev || rec.hash != record_content_hash(rec.payload, rec.prev_hash))
      return {false, i};
    prev = rec.hash;
    ++i;
  }
  return {true, {}};
}

}  // namespace decprov
