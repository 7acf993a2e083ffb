// Test-only oracles, independent of the library implementation paths they
// check: a from-scratch SHA-256, brute-force reachability over raw records,
// and a random temporal-DAG generator.
#pragma once

#include <cstdint>
#include <cstring>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "decprov/log.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Independent SHA-256 (FIPS 180-4), used to cross-check the hash chain.
// ---------------------------------------------------------------------------
inline std::string ref_sha256(const std::string& input) {
  static const std::uint32_t K[64] = {
      0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
      0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
      0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
      0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
      0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
      0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
      0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
      0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
      0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
      0xc67178f2};
  std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                        0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::vector<unsigned char> msg(input.begin(), input.end());
  std::uint64_t bitlen = std::uint64_t(msg.size()) * 8;
  msg.push_back(0x80);
  while (msg.size() % 64 != 56) msg.push_back(0);
  for (int i = 7; i >= 0; --i) msg.push_back((bitlen >> (i * 8)) & 0xff);

  auto rotr = [](std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); };
  for (std::size_t off = 0; off < msg.size(); off += 64) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(msg[off + i * 4]) << 24) | (std::uint32_t(msg[off + i * 4 + 1]) << 16) |
             (std::uint32_t(msg[off + i * 4 + 2]) << 8) | std::uint32_t(msg[off + i * 4 + 3]);
    for (int i = 16; i < 64; ++i) {
      std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
      std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      std::uint32_t ch = (e & f) ^ (~e & g);
      std::uint32_t t1 = hh + S1 + ch + K[i] + w[i];
      std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      std::uint32_t t2 = S0 + maj;
      hh = g; g = f; f = e; e = d + t1; d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (std::uint32_t v : h)
    for (int i = 7; i >= 0; --i) out.push_back(hex[(v >> (i * 4)) & 0xf]);
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force transitive closure over Used/Generated/DerivedFrom edges,
// scanning raw records (no use of the library's index or traversal).
// closure[a] = set of ids reachable from a following src->dst.
// ---------------------------------------------------------------------------
inline std::map<decprov::NodeId, std::set<decprov::NodeId>> reach_closure(
    const decprov::ProvLog& log) {
  using namespace decprov;
  std::vector<NodeId> ids;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& rec : log.records()) {
    if (const auto* n = std::get_if<ProvNode>(&rec.payload)) ids.push_back(n->id);
    if (const auto* r = std::get_if<ProvRelation>(&rec.payload))
      if (r->rel == RelKind::Used || r->rel == RelKind::Generated ||
          r->rel == RelKind::DerivedFrom)
        edges.emplace_back(r->src, r->dst);
  }
  std::map<NodeId, std::set<NodeId>> reach;
  for (const auto& id : ids) reach[id].insert(id);
  for (const auto& [s, d] : edges) reach[s].insert(d);
  // Floyd–Warshall style saturation.
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [a, set_a] : reach) {
      std::set<NodeId> grown = set_a;
      for (const auto& b : set_a)
        for (const auto& c : reach[b]) grown.insert(c);
      if (grown.size() != set_a.size()) {
        set_a = std::move(grown);
        changed = true;
      }
    }
  }
  return reach;
}

// ---------------------------------------------------------------------------
// Random temporal DAG: timestamps strictly increase with creation order, and
// every trace edge points from a later node back to an earlier one, so the
// temporal precondition holds by construction.
// ---------------------------------------------------------------------------
struct RandomGraph {
  decprov::ProvLog log;
  std::vector<decprov::NodeId> trace_nodes;  // entities + activities
  std::vector<decprov::NodeId> agents;
};

inline RandomGraph make_random_dag(std::mt19937_64& rng, int max_nodes = 50,
                                   double edge_prob = 0.15) {
  using namespace decprov;
  RandomGraph g;
  int n = 2 + int(rng() % std::uint64_t(max_nodes - 1));
  Instant base = 1750000000000;

  int n_agents = 1 + int(rng() % 3);
  for (int i = 0; i < n_agents; ++i) {
    ProvNode a;
    a.kind = NodeKind::Agent;
    a.timestamp = base;
    a.attrs["name"] = "agent-" + std::to_string(i);
    g.agents.push_back(g.log.append(a));
  }

  std::vector<NodeKind> kinds;
  for (int i = 0; i < n; ++i) {
    ProvNode node;
    node.kind = rng() % 2 == 0 ? NodeKind::Entity : NodeKind::Activity;
    node.timestamp = base + (i + 1) * 1000;
    node.attrs["idx"] = i;
    kinds.push_back(node.kind);
    g.trace_nodes.push_back(g.log.append(node));
    if (node.kind == NodeKind::Entity && rng() % 3 == 0) {
      ProvRelation attr;
      attr.rel = RelKind::AttributedTo;
      attr.src = g.trace_nodes.back();
      attr.dst = g.agents[rng() % g.agents.size()];
      attr.timestamp = node.timestamp;
      g.log.append(attr);
    }
  }

  std::uint64_t den = 1000000;
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (double(rng() % den) / double(den) >= edge_prob) continue;
      std::optional<RelKind> rel;
      if (kinds[i] == NodeKind::Activity && kinds[j] == NodeKind::Entity)
        rel = RelKind::Used;
      else if (kinds[i] == NodeKind::Entity && kinds[j] == NodeKind::Activity)
        rel = RelKind::Generated;
      else if (kinds[i] == NodeKind::Entity && kinds[j] == NodeKind::Entity)
        rel = RelKind::DerivedFrom;
      if (!rel) continue;
      ProvRelation r;
      r.rel = *rel;
      r.src = g.trace_nodes[i];
      r.dst = g.trace_nodes[j];
      r.timestamp = base + (i + 1) * 1000;
      g.log.append(r);
    }
  }

  if (g.agents.size() >= 2) {
    for (int i = 0; i < n; ++i) {
      if (kinds[i] != NodeKind::Entity || rng() % 4 != 0) continue;
      FlowEvent f;
      f.entity = g.trace_nodes[i];
      std::size_t a = rng() % g.agents.size();
      std::size_t b = (a + 1 + rng() % (g.agents.size() - 1)) % g.agents.size();
      f.from_agent = g.agents[a];
      f.to_agent = g.agents[b];
      f.boundary = rng() % 2 == 0 ? Boundary::Technical : Boundary::Administrative;
      f.timestamp = base + (i + 1) * 1000;
      g.log.append(f);
    }
  }
  return g;
}

}  // namespace oracle
