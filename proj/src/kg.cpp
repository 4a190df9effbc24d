#include "rce/kg.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "rce/rng.hpp"

namespace rce {

namespace {

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool has_reverse_suffix(const std::string& label) {
  static const std::string kSuffix = "_reverse";
  return label.size() > kSuffix.size() &&
         label.compare(label.size() - kSuffix.size(), kSuffix.size(), kSuffix) == 0;
}

std::string reverse_base(const std::string& label) {
  return label.substr(0, label.size() - std::string("_reverse").size());
}

}  // namespace

void KnowledgeGraph::add_triple(const Triple& t) {
  if (!triple_set_.insert(t).second) return;
  triples_.push_back(t);
  out_index_[t.head].push_back({t.relation, t.tail});
  in_index_[t.tail].push_back({t.relation, t.head});
}

void KnowledgeGraph::check_entity(EntityId e) const {
  if (e >= entity_labels_.size())
    throw std::out_of_range("unknown entity id " + std::to_string(e));
}

KnowledgeGraph KnowledgeGraph::load(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open triple file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return from_lines(lines, delimiter, path);
}

KnowledgeGraph KnowledgeGraph::from_lines(const std::vector<std::string>& lines, char delimiter,
                                          const std::string& origin) {
  KnowledgeGraph kg;
  auto entity_id = [&kg](const std::string& label) {
    auto it = kg.entity_ids_.find(label);
    if (it != kg.entity_ids_.end()) return it->second;
    EntityId id = static_cast<EntityId>(kg.entity_labels_.size());
    kg.entity_labels_.push_back(label);
    kg.entity_ids_.emplace(label, id);
    kg.out_index_.emplace_back();
    kg.in_index_.emplace_back();
    return id;
  };
  auto relation_id = [&kg](const std::string& label) {
    auto it = kg.relation_ids_.find(label);
    if (it != kg.relation_ids_.end()) return it->second;
    RelationId id = static_cast<RelationId>(kg.relation_labels_.size());
    kg.relation_labels_.push_back(label);
    kg.relation_ids_.emplace(label, id);
    kg.is_reverse_.push_back(false);
    return id;
  };

  std::size_t line_no = 0;
  for (const std::string& raw : lines) {
    ++line_no;
    std::string text = strip_cr(raw);
    if (text.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = text.find(delimiter, start);
      if (pos == std::string::npos) {
        fields.push_back(text.substr(start));
        break;
      }
      fields.push_back(text.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected 3 non-empty fields separated by '" +
                               std::string(1, delimiter) + "', got " +
                               std::to_string(fields.size()));
    Triple t{entity_id(fields[0]), relation_id(fields[1]), entity_id(fields[2])};
    kg.add_triple(t);
  }
  if (kg.triples_.empty())
    throw std::runtime_error(origin + ": no triples found");
  return kg;
}

const std::string& KnowledgeGraph::entity_label(EntityId e) const {
  check_entity(e);
  return entity_labels_[e];
}

const std::string& KnowledgeGraph::relation_label(RelationId r) const {
  if (r >= relation_labels_.size())
    throw std::out_of_range("unknown relation id " + std::to_string(r));
  return relation_labels_[r];
}

std::optional<EntityId> KnowledgeGraph::find_entity(const std::string& label) const {
  auto it = entity_ids_.find(label);
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(const std::string& label) const {
  auto it = relation_ids_.find(label);
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

bool KnowledgeGraph::relation_is_reverse(RelationId r) const {
  if (r >= is_reverse_.size()) throw std::out_of_range("unknown relation id " + std::to_string(r));
  return is_reverse_[r];
}

RelationId KnowledgeGraph::reverse_relation(RelationId r) const {
  if (!augmented_) throw std::logic_error("reverse_relation: graph is not reverse-augmented");
  if (r >= reverse_of_.size()) throw std::out_of_range("unknown relation id " + std::to_string(r));
  return reverse_of_[r];
}

const std::vector<KnowledgeGraph::Edge>& KnowledgeGraph::neighbors(EntityId e) const {
  check_entity(e);
  return out_index_[e];
}

const std::vector<KnowledgeGraph::Edge>& KnowledgeGraph::incoming(EntityId e) const {
  check_entity(e);
  return in_index_[e];
}

KnowledgeGraph KnowledgeGraph::augment_reverse() const {
  if (augmented_) throw std::logic_error("augment_reverse: graph is already augmented");

  KnowledgeGraph kg;
  kg.entity_labels_ = entity_labels_;
  kg.entity_ids_ = entity_ids_;
  kg.out_index_.resize(entity_labels_.size());
  kg.in_index_.resize(entity_labels_.size());
  kg.relation_labels_ = relation_labels_;
  kg.relation_ids_ = relation_ids_;

  std::size_t m = relation_labels_.size();
  kg.reverse_of_.assign(m, 0);
  kg.is_reverse_.assign(m, false);
  std::vector<bool> paired(m, false);

  // Pair relations whose reverse already exists by label; they came from
  // the source file rather than a previous augmentation.
  for (RelationId r = 0; r < m; ++r) {
    const std::string& label = kg.relation_labels_[r];
    if (!has_reverse_suffix(label)) continue;
    auto base = kg.relation_ids_.find(reverse_base(label));
    if (base == kg.relation_ids_.end()) continue;
    RelationId b = base->second;
    if (paired[b] || paired[r]) continue;
    kg.reverse_of_[b] = r;
    kg.reverse_of_[r] = b;
    kg.is_reverse_[r] = true;
    paired[b] = paired[r] = true;
  }
  for (RelationId r = 0; r < m; ++r) {
    if (paired[r]) continue;
    RelationId rev = static_cast<RelationId>(kg.relation_labels_.size());
    kg.relation_labels_.push_back(kg.relation_labels_[r] + "_reverse");
    kg.relation_ids_.emplace(kg.relation_labels_.back(), rev);
    kg.is_reverse_.push_back(true);
    kg.reverse_of_.push_back(r);
    kg.reverse_of_[r] = rev;
  }

  for (const Triple& t : triples_) kg.add_triple(t);
  for (const Triple& t : triples_)
    kg.add_triple({t.tail, kg.reverse_of_[t.relation], t.head});

  kg.augmented_ = true;
  return kg;
}

KnowledgeGraph KnowledgeGraph::prune(double keep_probability, std::uint64_t seed) const {
  if (keep_probability < 0.0 || keep_probability > 1.0)
    throw std::invalid_argument("prune: keep_probability must be in [0,1], got " +
                                std::to_string(keep_probability));
  if (augmented_)
    throw std::logic_error("prune: must run on forward triples, before reverse augmentation");

  KnowledgeGraph kg;
  kg.entity_labels_ = entity_labels_;
  kg.entity_ids_ = entity_ids_;
  kg.relation_labels_ = relation_labels_;
  kg.relation_ids_ = relation_ids_;
  kg.is_reverse_ = is_reverse_;
  kg.out_index_.resize(entity_labels_.size());
  kg.in_index_.resize(entity_labels_.size());

  Rng rng(seed);
  for (const Triple& t : triples_)
    if (rng.uniform() < keep_probability) kg.add_triple(t);
  return kg;
}

std::optional<RelationalChain> KnowledgeGraph::shortest_relational_chain(EntityId source,
                                                                         EntityId target,
                                                                         int max_len) const {
  check_entity(source);
  check_entity(target);
  if (max_len < 1) throw std::invalid_argument("shortest_relational_chain: max_len must be >= 1");
  if (source == target) return RelationalChain{};

  // Distance-to-target for every node within max_len hops, via reverse BFS.
  constexpr int kUnreached = -1;
  std::vector<int> dist(entity_labels_.size(), kUnreached);
  dist[target] = 0;
  std::queue<EntityId> q;
  q.push(target);
  while (!q.empty()) {
    EntityId u = q.front();
    q.pop();
    if (dist[u] >= max_len) continue;
    for (const Edge& e : in_index_[u]) {
      if (dist[e.entity] != kUnreached) continue;
      dist[e.entity] = dist[u] + 1;
      q.push(e.entity);
    }
  }
  if (dist[source] == kUnreached || dist[source] > max_len) return std::nullopt;

  // Walk forward greedily. All frontier nodes sit at the same remaining
  // distance; picking the minimum feasible relation id at each step and
  // keeping every node it can reach yields the lexicographically smallest
  // relation sequence among all shortest chains.
  RelationalChain chain;
  std::vector<EntityId> frontier{source};
  std::vector<bool> in_next(entity_labels_.size(), false);
  for (int remaining = dist[source]; remaining > 0; --remaining) {
    RelationId best = 0;
    bool found = false;
    for (EntityId u : frontier)
      for (const Edge& e : out_index_[u]) {
        if (dist[e.entity] != remaining - 1) continue;
        if (!found || e.relation < best) {
          best = e.relation;
          found = true;
        }
      }
    // Reverse BFS guarantees a continuation exists.
    if (!found) throw std::logic_error("shortest_relational_chain: internal frontier error");
    std::vector<EntityId> next;
    for (EntityId u : frontier)
      for (const Edge& e : out_index_[u]) {
        if (e.relation != best || dist[e.entity] != remaining - 1) continue;
        if (in_next[e.entity]) continue;
        in_next[e.entity] = true;
        next.push_back(e.entity);
      }
    for (EntityId u : next) in_next[u] = false;
    chain.relations.push_back(best);
    frontier = std::move(next);
  }
  return chain;
}

}  // namespace rce
