#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rce {

// Token <-> id bijection with reserved slots for padding, unknown tokens,
// and the topic-entity mask token "NE".
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kTopicMask = 2;  // "NE"

  Vocabulary();

  int add(const std::string& token);          // idempotent, returns id
  int id(const std::string& token) const;     // kUnk for unseen tokens
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(const std::string& token) const { return ids_.count(token) > 0; }

  // Ordered token list; index equals id. Reserved tokens come first, so a
  // round trip through this list reproduces the vocabulary exactly.
  const std::vector<std::string>& tokens() const { return tokens_; }
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  // Builds from tokenized texts, every token kept (min frequency 1).
  static Vocabulary build(const std::vector<std::vector<std::string>>& token_lists);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct TokenSequence {
  std::vector<int> ids;
  std::optional<std::pair<int, int>> topic_span;  // [start, end) token range
};

// Lowercase text into word and single-character punctuation tokens.
// Square brackets act as topic-mention markup and never surface as tokens.
std::vector<std::string> tokenize_text(const std::string& text);

// Tokenizes a question, optionally collapsing the topic mention to the
// "NE" mask token. Throws when mask_topic is set and the mention does not
// occur in the question.
TokenSequence tokenize(const std::string& question, const std::string& topic_mention,
                       const Vocabulary& vocab, bool mask_topic);

}  // namespace rce
