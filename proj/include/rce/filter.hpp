#pragma once

#include <cstdint>
#include <vector>

#include "rce/encoder.hpp"
#include "rce/kge.hpp"
#include "rce/qa.hpp"

namespace rce {

struct ScoredCandidate {
  EntityId entity = 0;
  double score = 0.0;
};

// Stage one: question encoder + projection over a frozen embedding table.
// Scores every entity as a candidate answer for (topic, question).
struct FilterModel {
  Vocabulary vocab;
  EncoderParams encoder;
  Projection projection;
  const ComplexEmbeddingTable* table = nullptr;  // frozen, not owned
  bool use_attention = true;
  bool mask_topic = false;

  static FilterModel init(const Vocabulary& vocab, int hidden, int dim,
                          const ComplexEmbeddingTable& table, bool use_attention, Rng& rng);
  std::vector<Parameter*> trainable();
};

struct FilterTrainConfig {
  int epochs = 200;
  int batch_size = 128;
  OptimizerConfig optimizer{OptKind::Sgd, 1e-5};
  double negative_weight = 1.0;  // down-weighting for the n-|gold| negatives
  int eval_every = 10;           // dev hit@1 early-stopping cadence
  std::uint64_t seed = 0;
  bool verbose = false;
};

// All-entity scores for one question, sorted by descending score with ties
// broken by ascending entity id. The topic entity is excluded, so the
// result always has entity_count-1 rows.
std::vector<ScoredCandidate> score_all_entities(FilterModel& model, EntityId topic,
                                                const TokenSequence& tokens);

// Binary cross-entropy over all entities per example, target 1 on gold
// answers. Touches only encoder and projection parameters; the embedding
// table stays bit-identical.
FilterModel train_filter(const KnowledgeGraph& kg, const ComplexEmbeddingTable& table,
                         const std::vector<QAExample>& train_set,
                         const std::vector<QAExample>* dev_set, const FilterTrainConfig& config,
                         int hidden, bool use_attention = true);

// First min(n, size) candidates, order preserved.
std::vector<ScoredCandidate> top_n(const std::vector<ScoredCandidate>& ranked, int n);

// Fraction of examples whose top-k candidates intersect the gold set.
double filter_hit_at_k(FilterModel& model, const KnowledgeGraph& kg,
                       const std::vector<QAExample>& eval_set, int k);

}  // namespace rce
