#include "rce/text.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace rce {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Case-insensitive search; returns npos when absent.
std::size_t find_ci(const std::string& haystack, const std::string& needle) {
  std::size_t pos = haystack.find(needle);
  if (pos != std::string::npos) return pos;
  std::string h = lower(haystack), n = lower(needle);
  return h.find(n);
}

constexpr char kMaskMarker = '\x01';

}  // namespace

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
  add("NE");
}

int Vocabulary::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocabulary id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  if (tokens.size() < 3 || tokens[0] != "<pad>" || tokens[1] != "<unk>" || tokens[2] != "NE")
    throw std::invalid_argument("vocabulary token list must start with <pad>, <unk>, NE");
  for (std::size_t i = 3; i < tokens.size(); ++i) v.add(tokens[i]);
  if (v.tokens_.size() != tokens.size())
    throw std::invalid_argument("vocabulary token list contains duplicates");
  return v;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& token_lists) {
  Vocabulary v;
  for (const auto& list : token_lists)
    for (const std::string& tok : list) v.add(tok);
  return v;
}

std::vector<std::string> tokenize_text(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(word);
      word.clear();
    }
  };
  for (unsigned char c : text) {
    if (c == kMaskMarker) {
      flush();
      out.push_back("NE");
    } else if (c == '[' || c == ']') {
      flush();
    } else if (std::isspace(c)) {
      flush();
    } else if (std::isalnum(c) || c >= 0x80 || c == '_' || c == '\'') {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      out.push_back(std::string(1, static_cast<char>(c)));
    }
  }
  flush();
  return out;
}

TokenSequence tokenize(const std::string& question, const std::string& topic_mention,
                       const Vocabulary& vocab, bool mask_topic) {
  if (question.empty()) throw std::invalid_argument("tokenize: empty question");

  std::string text = question;
  std::optional<std::pair<int, int>> span;
  std::size_t pos = topic_mention.empty() ? std::string::npos : find_ci(text, topic_mention);
  if (mask_topic) {
    if (pos == std::string::npos)
      throw std::invalid_argument("tokenize: topic mention '" + topic_mention +
                                  "' not found in question");
    text = text.substr(0, pos) + std::string(1, kMaskMarker) +
           text.substr(pos + topic_mention.size());
  }

  std::vector<std::string> words = tokenize_text(text);
  TokenSequence seq;
  seq.ids.reserve(words.size());
  for (const std::string& w : words) seq.ids.push_back(vocab.id(w));

  if (mask_topic) {
    for (std::size_t i = 0; i < words.size(); ++i)
      if (words[i] == "NE") {
        span = {static_cast<int>(i), static_cast<int>(i) + 1};
        break;
      }
  } else if (pos != std::string::npos) {
    std::size_t before = tokenize_text(text.substr(0, pos)).size();
    std::size_t len = tokenize_text(topic_mention).size();
    if (len > 0) span = {static_cast<int>(before), static_cast<int>(before + len)};
  }
  seq.topic_span = span;
  if (seq.ids.empty()) throw std::invalid_argument("tokenize: question has no tokens");
  return seq;
}

}  // namespace rce
