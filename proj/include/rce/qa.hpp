#pragma once

#include <string>
#include <vector>

#include "rce/kg.hpp"
#include "rce/text.hpp"

namespace rce {

// One question with its bracketed topic mention and gold answer set.
struct QAExample {
  std::string question;       // original text, topic mention in [brackets]
  std::string topic_mention;  // bracket contents
  std::vector<std::string> answers;
};

// Parses "question with [topic]\tanswer1|answer2|..." lines.
std::vector<QAExample> load_qa_dataset(const std::string& path);
std::vector<QAExample> parse_qa_lines(const std::vector<std::string>& lines,
                                      const std::string& origin = "<memory>");
std::string format_qa_line(const QAExample& ex);

// QAExample with ids resolved against a knowledge graph.
struct ResolvedExample {
  std::size_t source_index = 0;  // position in the input list
  EntityId topic = 0;
  std::vector<EntityId> answers;  // resolvable gold answers, deduplicated
  TokenSequence tokens;
};

struct ResolutionStats {
  std::size_t resolved = 0;
  std::size_t skipped = 0;  // unresolvable topic or zero resolvable answers
};

// Drops examples whose topic or whole answer set cannot be linked to the
// graph; linking failures are counted, not fatal.
std::vector<ResolvedExample> resolve_examples(const std::vector<QAExample>& examples,
                                              const KnowledgeGraph& kg, const Vocabulary& vocab,
                                              bool mask_topic, ResolutionStats* stats = nullptr);

// Tokenized question texts for vocabulary construction (mask applied the
// same way the consumer will).
std::vector<std::vector<std::string>> question_token_lists(const std::vector<QAExample>& examples,
                                                           bool mask_topic);

}  // namespace rce
