#include "seqqa/inference.hpp"

#include <istream>
#include <ostream>

#include "seqqa/errors.hpp"

namespace seqqa {

namespace {

bool attaches_left(const std::string& token) {
  return token.size() == 1 && std::string_view(".,!?;:").find(token[0]) != std::string_view::npos;
}

}  // namespace

std::string detokenize(const Tokens& tokens) {
  std::string out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (k > 0 && !attaches_left(tokens[k])) out += ' ';
    for (char ch : tokens[k]) out += ch == '_' ? ' ' : ch;
  }
  for (auto& ch : out) {
    if ((ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z')) {
      if (ch >= 'a') ch = static_cast<char>(ch - 'a' + 'A');
      break;
    }
  }
  return out;
}

AnswerResult answer(std::string_view question, const ModelParams<float>& params, const Vocabulary& vocab,
                    const AnswerConfig& config) {
  Tokens tokens = tokenize(question);
  if (tokens.empty()) throw InputError("question is empty");
  if (config.lexicon) tokens = merge_terms(tokens, *config.lexicon);
  if (tokens.size() > config.max_len) tokens.resize(config.max_len);

  AnswerResult result;
  const auto ids = vocab.ids(tokens);
  for (auto id : ids) result.unk_in_question = result.unk_in_question || id == kUnk;

  const auto state = encode<float>(ids, ids.size(), params);
  const auto decoded = decode_greedy<float>(state, params, config.max_steps);
  result.terminated = decoded.terminated;
  for (auto id : decoded.ids) {
    if (id == kUnk) {
      result.answer_tokens.emplace_back("unk");
    } else if (id >= kNumSpecials) {
      result.answer_tokens.push_back(vocab.token(id));
    }
  }
  result.answer_text = detokenize(result.answer_tokens);
  return result;
}

int repl(std::istream& in, std::ostream& out, const Checkpoint& model, const AnswerConfig& config) {
  std::string line;
  while (true) {
    out << "Q: " << std::flush;
    if (!std::getline(in, line)) break;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "/quit") break;
    if (tokenize(line).empty()) continue;
    out << "A: " << answer(line, model.params, model.vocab, config).answer_text << '\n';
  }
  out << '\n';
  return 0;
}

}  // namespace seqqa
