#pragma once

#include <cstdint>
#include <vector>

#include "rce/kg.hpp"
#include "rce/optim.hpp"
#include "rce/rng.hpp"
#include "rce/tape.hpp"

namespace rce {

// Borrowed view of one complex embedding row.
struct ComplexVectorView {
  const double* re = nullptr;
  const double* im = nullptr;
  int dim = 0;
};

// Complex-valued entity and relation embeddings, stored as parallel real
// and imaginary tables so the real-valued differentiation core applies.
struct ComplexEmbeddingTable {
  int dim = 0;
  Parameter entity_re, entity_im;      // {n, d}
  Parameter relation_re, relation_im;  // {m, d}

  static ComplexEmbeddingTable random(std::size_t n_entities, std::size_t n_relations, int dim,
                                      Rng& rng);

  std::size_t entity_count() const { return static_cast<std::size_t>(entity_re.value.rows()); }
  std::size_t relation_count() const { return static_cast<std::size_t>(relation_re.value.rows()); }

  ComplexVectorView entity(EntityId e) const;
  ComplexVectorView relation(RelationId r) const;

  std::vector<Parameter*> params();

  // Entities as an {n, 2d} real matrix (real block then imaginary block per
  // row), the layout used by whole-table scoring scans.
  Tensor entity_matrix() const;
  // Relations as an {m, 2d} real matrix.
  Tensor relation_matrix() const;
};

// Re(sum_k h_k * r_k * conj(t_k)).
double complex_score(const ComplexVectorView& h, const ComplexVectorView& r,
                     const ComplexVectorView& t);

// Scores every entity as tail for fixed head and relation vectors given as
// packed 2d-real arrays [re | im]; entities is the {n, 2d} table layout.
void complex_score_all(const Tensor& entities, const double* head2d, const double* rel2d, int dim,
                       std::vector<double>& out);

struct EmbeddingTrainConfig {
  int dim = 200;
  int negatives_per_positive = 50;
  int epochs = 200;
  int batch_size = 128;
  OptimizerConfig optimizer{OptKind::Adam, 0.05};
  double l2_weight = 1e-3;
  std::uint64_t seed = 0;
  bool corrupt_head = false;  // tail/relation corruption only unless enabled
  bool verbose = false;
};

// Draws k corrupted triples, each differing from `triple` in its tail or
// relation (head too when enabled), none of which is a true triple and no
// two of which coincide. Throws when the graph cannot supply k of them.
std::vector<Triple> sample_negatives(const Triple& triple, const KnowledgeGraph& kg, int k,
                                     Rng& rng, bool corrupt_head = false);

// Logistic-loss training: positives pushed above 0, sampled negatives below,
// plus l2_weight * ||params||^2.
ComplexEmbeddingTable train_embeddings(const KnowledgeGraph& kg,
                                       const EmbeddingTrainConfig& config);

struct LinkPredictionReport {
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  double mrr = 0.0;
};

// Filtered tail ranking over (h, r, ?) queries: known true tails other than
// the query's own are excluded from the ranking.
LinkPredictionReport link_prediction_eval(const ComplexEmbeddingTable& table,
                                          const KnowledgeGraph& kg,
                                          const std::vector<Triple>& held_out);

}  // namespace rce
