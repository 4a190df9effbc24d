#include "rce/qa.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace rce {

namespace {
std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}
}  // namespace

std::vector<QAExample> load_qa_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open QA file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return parse_qa_lines(lines, path);
}

std::vector<QAExample> parse_qa_lines(const std::vector<std::string>& lines,
                                      const std::string& origin) {
  std::vector<QAExample> out;
  std::size_t line_no = 0;
  for (const std::string& raw : lines) {
    ++line_no;
    std::string text = strip_cr(raw);
    if (text.empty()) continue;
    auto fail = [&](const std::string& what) -> std::runtime_error {
      return std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + what);
    };
    std::size_t tab = text.find('\t');
    if (tab == std::string::npos) throw fail("missing tab between question and answers");
    QAExample ex;
    ex.question = text.substr(0, tab);
    std::size_t lb = ex.question.find('[');
    std::size_t rb = ex.question.find(']');
    if (lb == std::string::npos || rb == std::string::npos || rb <= lb + 1)
      throw fail("missing [topic] bracket span in question");
    ex.topic_mention = ex.question.substr(lb + 1, rb - lb - 1);
    std::string answers = text.substr(tab + 1);
    if (answers.empty()) throw fail("empty answer list");
    std::size_t start = 0;
    while (true) {
      std::size_t pos = answers.find('|', start);
      std::string a =
          pos == std::string::npos ? answers.substr(start) : answers.substr(start, pos - start);
      if (a.empty()) throw fail("empty answer field");
      ex.answers.push_back(std::move(a));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::string format_qa_line(const QAExample& ex) {
  std::string line = ex.question;
  line += '\t';
  for (std::size_t i = 0; i < ex.answers.size(); ++i) {
    if (i) line += '|';
    line += ex.answers[i];
  }
  return line;
}

std::vector<ResolvedExample> resolve_examples(const std::vector<QAExample>& examples,
                                              const KnowledgeGraph& kg, const Vocabulary& vocab,
                                              bool mask_topic, ResolutionStats* stats) {
  std::vector<ResolvedExample> out;
  ResolutionStats local;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const QAExample& ex = examples[i];
    auto topic = kg.find_entity(ex.topic_mention);
    if (!topic) {
      ++local.skipped;
      continue;
    }
    ResolvedExample r;
    r.source_index = i;
    r.topic = *topic;
    std::unordered_set<EntityId> seen;
    for (const std::string& a : ex.answers)
      if (auto id = kg.find_entity(a); id && seen.insert(*id).second) r.answers.push_back(*id);
    if (r.answers.empty()) {
      ++local.skipped;
      continue;
    }
    r.tokens = tokenize(ex.question, ex.topic_mention, vocab, mask_topic);
    out.push_back(std::move(r));
    ++local.resolved;
  }
  if (stats) *stats = local;
  return out;
}

std::vector<std::vector<std::string>> question_token_lists(const std::vector<QAExample>& examples,
                                                           bool mask_topic) {
  std::vector<std::vector<std::string>> out;
  out.reserve(examples.size());
  for (const QAExample& ex : examples) {
    std::string text = ex.question;
    if (mask_topic) {
      std::size_t pos = text.find(ex.topic_mention);
      if (pos != std::string::npos)
        text = text.substr(0, pos) + "\x01" + text.substr(pos + ex.topic_mention.size());
    }
    out.push_back(tokenize_text(text));
  }
  return out;
}

}  // namespace rce
