#pragma once

#include <string>
#include <vector>

#include "decprov/log.hpp"
#include "decprov/query.hpp"

namespace decprov {

struct Datasheet {
  std::string collection_method;
  std::vector<NodeId> preprocessing;  // activity ids
  std::string legal_basis;
  std::vector<std::string> known_biases;
};

struct ModelCard {
  std::string intended_context;
  std::int64_t version = 1;
  Instant last_updated = 0;
  std::vector<std::pair<std::string, double>> benchmarks;  // condition -> accuracy in [0,1]
};

// Stores the artifact as an Entity linked DerivedFrom the target.
// Throws CategoryMismatch when the target is not a dataset/model entity;
// model card versions must increase per model.
NodeId attach_datasheet(ProvLog& log, const NodeId& dataset_entity, const Datasheet& sheet);
NodeId attach_model_card(ProvLog& log, const NodeId& model_entity, const ModelCard& card);

// Model-card entities attached to a model, oldest first.
std::vector<NodeId> model_cards_of(const ProvLog& log, const NodeId& model_entity);

// GDPR Art. 30 record of processing for a controller agent. Every field
// group carries the node ids it was derived from; empty groups are listed
// under completeness_warnings.
nlohmann::json export_art30(const ProvLog& log, const NodeId& controller);
std::string art30_text(const nlohmann::json& record);

// Audience-targeted audit report around a decision node. Audience is one of
// regulator / developer / user; the appropriateness metrics (relevant,
// accurate, proportionate, comprehensible) are computed as documented in the
// README.
nlohmann::json render_report(const ProvLog& log, const NodeId& root, const std::string& audience,
                             double proportionality_cap = 1.0);
std::string report_text(const nlohmann::json& report);

}  // namespace decprov
