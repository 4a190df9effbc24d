#include "rce/kge.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace rce {

ComplexEmbeddingTable ComplexEmbeddingTable::random(std::size_t n_entities,
                                                    std::size_t n_relations, int dim, Rng& rng) {
  if (n_entities == 0 || n_relations == 0 || dim <= 0)
    throw std::invalid_argument("embedding table requires entities, relations and dim > 0");
  ComplexEmbeddingTable t;
  t.dim = dim;
  double limit = 1.0 / std::sqrt(static_cast<double>(dim));
  int n = static_cast<int>(n_entities), m = static_cast<int>(n_relations);
  t.entity_re = Parameter(uniform_init({n, dim}, limit, rng));
  t.entity_im = Parameter(uniform_init({n, dim}, limit, rng));
  t.relation_re = Parameter(uniform_init({m, dim}, limit, rng));
  t.relation_im = Parameter(uniform_init({m, dim}, limit, rng));
  return t;
}

ComplexVectorView ComplexEmbeddingTable::entity(EntityId e) const {
  if (e >= entity_count()) throw std::out_of_range("entity id out of range");
  return {entity_re.value.data() + static_cast<std::size_t>(e) * dim,
          entity_im.value.data() + static_cast<std::size_t>(e) * dim, dim};
}

ComplexVectorView ComplexEmbeddingTable::relation(RelationId r) const {
  if (r >= relation_count()) throw std::out_of_range("relation id out of range");
  return {relation_re.value.data() + static_cast<std::size_t>(r) * dim,
          relation_im.value.data() + static_cast<std::size_t>(r) * dim, dim};
}

std::vector<Parameter*> ComplexEmbeddingTable::params() {
  return {&entity_re, &entity_im, &relation_re, &relation_im};
}

Tensor ComplexEmbeddingTable::entity_matrix() const {
  std::size_t n = entity_count();
  Tensor out({static_cast<int>(n), 2 * dim});
  for (std::size_t e = 0; e < n; ++e) {
    const double* re = entity_re.value.data() + e * dim;
    const double* im = entity_im.value.data() + e * dim;
    double* dst = out.data() + e * 2 * dim;
    for (int k = 0; k < dim; ++k) dst[k] = re[k];
    for (int k = 0; k < dim; ++k) dst[dim + k] = im[k];
  }
  return out;
}

Tensor ComplexEmbeddingTable::relation_matrix() const {
  std::size_t m = relation_count();
  Tensor out({static_cast<int>(m), 2 * dim});
  for (std::size_t r = 0; r < m; ++r) {
    const double* re = relation_re.value.data() + r * dim;
    const double* im = relation_im.value.data() + r * dim;
    double* dst = out.data() + r * 2 * dim;
    for (int k = 0; k < dim; ++k) dst[k] = re[k];
    for (int k = 0; k < dim; ++k) dst[dim + k] = im[k];
  }
  return out;
}

double complex_score(const ComplexVectorView& h, const ComplexVectorView& r,
                     const ComplexVectorView& t) {
  if (h.dim != r.dim || r.dim != t.dim)
    throw std::invalid_argument("complex_score: dimension mismatch");
  // Re(h r conj(t)) expands to four real inner products per component.
  double acc = 0.0;
  for (int k = 0; k < h.dim; ++k) {
    double u = h.re[k] * r.re[k] - h.im[k] * r.im[k];
    double v = h.re[k] * r.im[k] + h.im[k] * r.re[k];
    acc += u * t.re[k] + v * t.im[k];
  }
  return acc;
}

void complex_score_all(const Tensor& entities, const double* head2d, const double* rel2d, int dim,
                       std::vector<double>& out) {
  int n = entities.rows();
  out.assign(static_cast<std::size_t>(n), 0.0);
  // score(t) = t_re . u + t_im . v with u, v the component products below.
  std::vector<double> uv(static_cast<std::size_t>(2 * dim));
  for (int k = 0; k < dim; ++k) {
    uv[k] = head2d[k] * rel2d[k] - head2d[dim + k] * rel2d[dim + k];
    uv[dim + k] = head2d[k] * rel2d[dim + k] + head2d[dim + k] * rel2d[k];
  }
  for (int e = 0; e < n; ++e) {
    const double* row = entities.data() + static_cast<std::size_t>(e) * 2 * dim;
    double acc = 0.0;
    for (int k = 0; k < 2 * dim; ++k) acc += row[k] * uv[k];
    out[static_cast<std::size_t>(e)] = acc;
  }
}

std::vector<Triple> sample_negatives(const Triple& triple, const KnowledgeGraph& kg, int k,
                                     Rng& rng, bool corrupt_head) {
  if (k < 1) throw std::invalid_argument("sample_negatives: k must be >= 1");
  std::size_t n = kg.entity_count(), m = kg.relation_count();
  std::vector<Triple> out;
  out.reserve(static_cast<std::size_t>(k));
  std::unordered_set<Triple, TripleHash> used;

  auto try_add = [&](const Triple& cand) {
    if (cand == triple) return false;
    if (kg.contains(cand)) return false;
    if (!used.insert(cand).second) return false;
    out.push_back(cand);
    return true;
  };

  std::size_t attempts = 0;
  std::size_t cap = 1000 + 200 * static_cast<std::size_t>(k);
  while (out.size() < static_cast<std::size_t>(k) && attempts < cap) {
    ++attempts;
    int mode = corrupt_head ? static_cast<int>(rng.index(3)) : static_cast<int>(rng.index(2));
    Triple cand = triple;
    if (mode == 0) {
      EntityId t = static_cast<EntityId>(rng.index(n));
      if (t == triple.tail) continue;
      cand.tail = t;
    } else if (mode == 1) {
      RelationId r = static_cast<RelationId>(rng.index(m));
      if (r == triple.relation) continue;
      cand.relation = r;
    } else {
      EntityId h = static_cast<EntityId>(rng.index(n));
      if (h == triple.head) continue;
      cand.head = h;
    }
    try_add(cand);
  }

  // The sampler can stall only when the filtered corruption pool is nearly
  // exhausted; fill (or fail) deterministically by enumeration.
  if (out.size() < static_cast<std::size_t>(k)) {
    for (EntityId t = 0; t < n && out.size() < static_cast<std::size_t>(k); ++t)
      if (t != triple.tail) try_add({triple.head, triple.relation, t});
    for (RelationId r = 0; r < m && out.size() < static_cast<std::size_t>(k); ++r)
      if (r != triple.relation) try_add({triple.head, r, triple.tail});
    if (corrupt_head)
      for (EntityId h = 0; h < n && out.size() < static_cast<std::size_t>(k); ++h)
        if (h != triple.head) try_add({h, triple.relation, triple.tail});
  }
  if (out.size() < static_cast<std::size_t>(k))
    throw std::runtime_error("sample_negatives: graph too small for " + std::to_string(k) +
                             " distinct filtered negatives (found " + std::to_string(out.size()) +
                             ")");
  return out;
}

ComplexEmbeddingTable train_embeddings(const KnowledgeGraph& kg,
                                       const EmbeddingTrainConfig& config) {
  if (kg.triple_count() == 0) throw std::invalid_argument("train_embeddings: empty graph");
  if (config.negatives_per_positive < 1)
    throw std::invalid_argument("train_embeddings: negatives_per_positive must be >= 1");

  Rng rng(config.seed);
  ComplexEmbeddingTable table =
      ComplexEmbeddingTable::random(kg.entity_count(), kg.relation_count(), config.dim, rng);
  Optimizer opt(config.optimizer, table.params());

  const auto& triples = kg.triples();
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  int k = config.negatives_per_positive;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<int> hi, ri, ti;
      std::size_t total = (end - begin) * static_cast<std::size_t>(1 + k);
      hi.reserve(total);
      ri.reserve(total);
      ti.reserve(total);
      Tensor targets({static_cast<int>(total)});
      std::size_t pos = 0;
      for (std::size_t s = begin; s < end; ++s) {
        const Triple& tr = triples[order[s]];
        hi.push_back(static_cast<int>(tr.head));
        ri.push_back(static_cast<int>(tr.relation));
        ti.push_back(static_cast<int>(tr.tail));
        targets[pos++] = 1.0;
        for (const Triple& neg : sample_negatives(tr, kg, k, rng, config.corrupt_head)) {
          hi.push_back(static_cast<int>(neg.head));
          ri.push_back(static_cast<int>(neg.relation));
          ti.push_back(static_cast<int>(neg.tail));
          targets[pos++] = 0.0;
        }
      }

      Tape tape;
      Var ere = tape.param(table.entity_re), eim = tape.param(table.entity_im);
      Var rre = tape.param(table.relation_re), rim = tape.param(table.relation_im);
      Var h_re = tape.rows(ere, hi), h_im = tape.rows(eim, hi);
      Var r_re = tape.rows(rre, ri), r_im = tape.rows(rim, ri);
      Var t_re = tape.rows(ere, ti), t_im = tape.rows(eim, ti);
      Var u = tape.sub(tape.mul(h_re, r_re), tape.mul(h_im, r_im));
      Var v = tape.add(tape.mul(h_re, r_im), tape.mul(h_im, r_re));
      Var phi = tape.sum_cols(tape.add(tape.mul(u, t_re), tape.mul(v, t_im)));
      Var loss = tape.bce_with_logits(phi, targets);
      if (config.l2_weight > 0.0) {
        Var reg = tape.add(tape.add(tape.sum(tape.mul(ere, ere)), tape.sum(tape.mul(eim, eim))),
                           tape.add(tape.sum(tape.mul(rre, rre)), tape.sum(tape.mul(rim, rim))));
        loss = tape.add(loss, tape.scale(reg, config.l2_weight));
      }
      double lv = tape.value(loss)[0];
      if (!std::isfinite(lv))
        throw std::runtime_error("train_embeddings: non-finite loss at epoch " +
                                 std::to_string(epoch) + " (lr too high or inputs degenerate)");
      epoch_loss += lv;
      ++batches;
      opt.zero_grad();
      tape.backward(loss);
      opt.step();
    }
    if (config.verbose && (epoch % 10 == 0 || epoch + 1 == config.epochs))
      std::cerr << "kge epoch " << epoch << " loss " << epoch_loss / std::max<std::size_t>(1, batches)
                << "\n";
  }
  return table;
}

LinkPredictionReport link_prediction_eval(const ComplexEmbeddingTable& table,
                                          const KnowledgeGraph& kg,
                                          const std::vector<Triple>& held_out) {
  if (held_out.empty()) throw std::invalid_argument("link_prediction_eval: empty held-out set");

  // Known true tails per (h, r), pooled over training graph and held-out set.
  std::unordered_map<std::uint64_t, std::vector<EntityId>> known;
  auto key = [](EntityId h, RelationId r) {
    return (static_cast<std::uint64_t>(h) << 32) | static_cast<std::uint64_t>(r);
  };
  for (const Triple& t : kg.triples()) known[key(t.head, t.relation)].push_back(t.tail);
  for (const Triple& t : held_out) known[key(t.head, t.relation)].push_back(t.tail);

  Tensor entities = table.entity_matrix();
  std::vector<double> scores;
  std::vector<double> head2d(static_cast<std::size_t>(2 * table.dim));
  std::vector<double> rel2d(static_cast<std::size_t>(2 * table.dim));
  LinkPredictionReport rep;
  for (const Triple& q : held_out) {
    ComplexVectorView h = table.entity(q.head), r = table.relation(q.relation);
    for (int k = 0; k < table.dim; ++k) {
      head2d[k] = h.re[k];
      head2d[table.dim + k] = h.im[k];
      rel2d[k] = r.re[k];
      rel2d[table.dim + k] = r.im[k];
    }
    complex_score_all(entities, head2d.data(), rel2d.data(), table.dim, scores);
    double true_score = scores[q.tail];
    std::vector<char> excluded(scores.size(), 0);
    for (EntityId t : known[key(q.head, q.relation)])
      if (t != q.tail) excluded[t] = 1;
    std::size_t rank = 1;
    for (std::size_t e = 0; e < scores.size(); ++e)
      if (!excluded[e] && e != q.tail && scores[e] > true_score) ++rank;
    if (rank <= 1) rep.hits1 += 1.0;
    if (rank <= 3) rep.hits3 += 1.0;
    if (rank <= 10) rep.hits10 += 1.0;
    rep.mrr += 1.0 / static_cast<double>(rank);
  }
  double n = static_cast<double>(held_out.size());
  rep.hits1 /= n;
  rep.hits3 /= n;
  rep.hits10 /= n;
  rep.mrr /= n;
  return rep;
}

}  // namespace rce
