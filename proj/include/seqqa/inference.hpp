#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "seqqa/checkpoint.hpp"
#include "seqqa/corpus.hpp"
#include "seqqa/seq2seq.hpp"

namespace seqqa {

struct AnswerConfig {
  std::size_t max_len = 10;    // question tokens kept (the rest are truncated)
  std::size_t max_steps = 20;  // decode cap
  const TermLexicon* lexicon = nullptr;
};

struct AnswerResult {
  std::string answer_text;
  Tokens answer_tokens;
  bool terminated = false;
  bool unk_in_question = false;
  friend bool operator==(const AnswerResult&, const AnswerResult&) = default;
};

/// Joins with single spaces except before `. , ! ? ; :`, expands `_` to a
/// space and capitalizes the first letter.
std::string detokenize(const Tokens& tokens);

/// Throws InputError when the question has no tokens.
AnswerResult answer(std::string_view question, const ModelParams<float>& params, const Vocabulary& vocab,
                    const AnswerConfig& config = {});

/// `Q: ` / `A: ` loop until `/quit` or end of input. Returns the exit code.
int repl(std::istream& in, std::ostream& out, const Checkpoint& model, const AnswerConfig& config = {});

}  // namespace seqqa
