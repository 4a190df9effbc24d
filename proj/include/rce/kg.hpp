#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rce {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  bool operator==(const Triple&) const = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const {
    std::uint64_t h = t.head;
    h = h * 0x9e3779b97f4a7c15ULL + t.relation;
    h = h * 0x9e3779b97f4a7c15ULL + t.tail;
    return static_cast<std::size_t>(h ^ (h >> 32));
  }
};

// Ordered relation sequence along a directed path. Empty means the
// source and target coincide.
struct RelationalChain {
  std::vector<RelationId> relations;

  std::size_t length() const { return relations.size(); }
  bool operator==(const RelationalChain&) const = default;
};

// Immutable directed multigraph of factoid triples with dense ids,
// per-entity adjacency indexes, and optional reverse-edge augmentation.
class KnowledgeGraph {
 public:
  struct Edge {
    RelationId relation;
    EntityId entity;  // tail for out-edges, head for in-edges
  };

  // Parses a delimited triple file: one triple per line, three fields,
  // UTF-8, no header. Duplicate triples are stored once; ids are dense
  // in first-appearance order.
  static KnowledgeGraph load(const std::string& path, char delimiter = '|');
  static KnowledgeGraph from_lines(const std::vector<std::string>& lines, char delimiter = '|',
                                   const std::string& origin = "<memory>");

  std::size_t entity_count() const { return entity_labels_.size(); }
  std::size_t relation_count() const { return relation_labels_.size(); }
  std::size_t triple_count() const { return triples_.size(); }

  const std::string& entity_label(EntityId e) const;
  const std::string& relation_label(RelationId r) const;
  std::optional<EntityId> find_entity(const std::string& label) const;
  std::optional<RelationId> find_relation(const std::string& label) const;

  bool relation_is_reverse(RelationId r) const;
  // Partner under reverse augmentation; only valid once augmented.
  RelationId reverse_relation(RelationId r) const;
  bool augmented() const { return augmented_; }

  const std::vector<Triple>& triples() const { return triples_; }
  bool contains(const Triple& t) const { return triple_set_.count(t) > 0; }

  // Out-edges of e in triple insertion order.
  const std::vector<Edge>& neighbors(EntityId e) const;
  const std::vector<Edge>& incoming(EntityId e) const;

  // Adds (t, r_reverse, h) for every (h, r, t) and a reverse counterpart
  // for every relation. A loaded relation whose label already carries the
  // "_reverse" suffix of another loaded label is paired with it instead of
  // getting a fresh counterpart; duplicate triples collapse.
  KnowledgeGraph augment_reverse() const;

  // Keeps each forward triple independently with keep_probability using
  // the seeded generator. Must run before reverse augmentation so that
  // dropping a fact drops both directions. Entity/relation tables are
  // preserved so ids stay stable across the full and pruned graphs.
  KnowledgeGraph prune(double keep_probability, std::uint64_t seed) const;

  // Minimum-length relation sequence along directed edges source->target,
  // at most max_len hops. Among equal-length chains the lexicographically
  // smallest relation-id sequence is returned. nullopt when the target is
  // not reachable within max_len.
  std::optional<RelationalChain> shortest_relational_chain(EntityId source, EntityId target,
                                                           int max_len) const;

 private:
  KnowledgeGraph() = default;
  void add_triple(const Triple& t);
  void check_entity(EntityId e) const;

  std::vector<std::string> entity_labels_;
  std::vector<std::string> relation_labels_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  std::vector<RelationId> reverse_of_;  // valid when augmented_
  std::vector<bool> is_reverse_;
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> triple_set_;
  std::vector<std::vector<Edge>> out_index_;
  std::vector<std::vector<Edge>> in_index_;
  bool augmented_ = false;
};

}  // namespace rce
