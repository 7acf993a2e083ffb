#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "decprov/types.hpp"

namespace decprov {

struct VerifyReport {
  bool ok = true;
  std::optional<std::size_t> first_bad_index;
};

enum class Direction { Upstream, Downstream };

// Append-only, hash-chained provenance log with an in-memory graph index.
//
// Single-writer contract: at most one appender at a time. Read paths take no
// locks; callers share the log across threads only once appends have stopped
// (or operate on a loaded copy).
class ProvLog {
 public:
  // Appends a payload. If the payload id is empty an id is assigned from the
  // sequence counter; otherwise the given id is kept (replay path).
  // Throws DanglingReference, TemporalViolation, DuplicateId, ParseError.
  NodeId append(Payload p);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const LogRecord& record(std::size_t i) const { return records_.at(i); }
  const std::vector<LogRecord>& records() const { return records_; }
  std::string head_hash() const;  // hash of the last record, zero hash if empty

  bool has(const NodeId& id) const { return by_id_.count(id) != 0; }
  // Record index of any payload id (node, relation or flow).
  std::size_t index_of(const NodeId& id) const;  // throws UnknownId

  const ProvNode& node(const NodeId& id) const;          // throws UnknownId
  const ProvRelation& relation(const NodeId& id) const;  // throws UnknownId
  const FlowEvent& flow(const NodeId& id) const;         // throws UnknownId

  // Neighbor node ids across relation edges. Upstream follows src->dst from
  // `id` (its inputs / sources), Downstream the reverse. Deterministic order:
  // (timestamp, NodeId).
  std::vector<NodeId> neighbors(const NodeId& id, Direction dir,
                                std::optional<RelKind> rel_filter = {}) const;

  // Relation record indices incident to a node.
  const std::vector<std::size_t>& relations_from(const NodeId& src) const;
  const std::vector<std::size_t>& relations_to(const NodeId& dst) const;
  const std::vector<std::size_t>& flows_of_entity(const NodeId& entity) const;
  const std::vector<std::size_t>& all_flows() const { return flow_indices_; }
  const std::vector<std::size_t>& all_relations() const { return rel_indices_; }
  const std::vector<std::size_t>& all_nodes() const { return node_indices_; }

  // Recomputes every hash and link over the in-memory records.
  VerifyReport verify() const;

  void save(const std::string& path) const;  // throws IoFailure
  // Loads and re-indexes a JSONL log. Structural invariants are enforced;
  // stored hashes are kept as-is so a tampered file can still be inspected
  // (verify() / verify_file() report the damage).
  static ProvLog load(const std::string& path);  // throws IoFailure, ParseError

  // Line-level verification of a log file: each line must be the canonical
  // serialization of its record, hash to its stored hash, and link to its
  // predecessor. Unparseable or non-canonical lines count as bad.
  static VerifyReport verify_file(const std::string& path);  // throws IoFailure

 private:
  NodeId append_impl(Payload p, std::optional<std::string> stored_prev,
                     std::optional<std::string> stored_hash);
  void validate(const Payload& p) const;
  void index_record(std::size_t idx);

  std::vector<LogRecord> records_;
  std::unordered_map<NodeId, std::size_t> by_id_;
  std::unordered_map<NodeId, std::vector<std::size_t>> rels_from_;
  std::unordered_map<NodeId, std::vector<std::size_t>> rels_to_;
  std::unordered_map<NodeId, std::vector<std::size_t>> flows_by_entity_;
  std::vector<std::size_t> node_indices_;
  std::vector<std::size_t> rel_indices_;
  std::vector<std::size_t> flow_indices_;
};

}  // namespace decprov
