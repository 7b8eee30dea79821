#include <doctest.h>

#include <sstream>

#include "seqqa/inference.hpp"
#include "support.hpp"

using namespace seqqa;

namespace {

Checkpoint zero_model() {
  const auto vocab = test::small_vocab();
  return {ModelParams<float>::zeros(Hyper{vocab.size(), 4, 4, 2}), vocab};
}

// Always emits "hello" and never <eos>.
Checkpoint chatty_model() {
  auto model = zero_model();
  model.params.projection_b[model.vocab.id("hello")] = 3.0f;
  return model;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("detokenize examples") {
  CHECK(detokenize({"i'm", "sam", "!"}) == "I'm sam!");
  CHECK(detokenize({}) == "");
  CHECK(detokenize({"human_immunodeficiency_virus"}) == "Human immunodeficiency virus");
  CHECK(detokenize({"hi", "."}) == "Hi.");
  CHECK(detokenize({"?", "ok", ",", "sure"}) == "? Ok, sure");
}

TEST_CASE("zero parameters answer with nothing") {
  const auto model = zero_model();
  const auto r = answer("Hi there", model.params, model.vocab);
  CHECK(r.answer_tokens.empty());
  CHECK(r.answer_text == "");
  CHECK(r.terminated);
  CHECK_FALSE(r.unk_in_question);
}

TEST_CASE("out-of-vocabulary words are flagged") {
  const auto model = zero_model();
  CHECK(answer("hi zebra", model.params, model.vocab).unk_in_question);
  CHECK_THROWS_AS(answer("   ", model.params, model.vocab), InputError);
}

TEST_CASE("decode cap and long questions") {
  const auto model = chatty_model();
  AnswerConfig config;
  config.max_steps = 3;
  config.max_len = 2;
  const auto r = answer("hi hi hi hi hi hi hi hi hi hi hi hi hi", model.params, model.vocab, config);
  CHECK(r.answer_tokens == Tokens{"hello", "hello", "hello"});
  CHECK(r.answer_text == "Hello hello hello");
  CHECK_FALSE(r.terminated);
}

TEST_CASE("answers merge lexicon terms in the question") {
  auto model = zero_model();
  model.vocab = Vocabulary({"<pad>", "<go>", "<eos>", "<unk>", "hi", "hello", "new_york"});
  const TermLexicon lex({"new york"});
  AnswerConfig config;
  config.lexicon = &lex;
  CHECK_FALSE(answer("New York", model.params, model.vocab, config).unk_in_question);
  CHECK(answer("New York", model.params, model.vocab).unk_in_question);
}

TEST_CASE("repl quits cleanly") {
  const auto model = zero_model();
  std::istringstream in("/quit\nhi\n");
  std::ostringstream out;
  CHECK(repl(in, out, model) == 0);
  CHECK(count(out.str(), "A: ") == 0);
}

TEST_CASE("repl re-prompts on blank lines and answers each question once") {
  const auto model = chatty_model();
  std::istringstream in("\n   \nhi\nhello there\n");
  std::ostringstream out;
  CHECK(repl(in, out, model) == 0);
  CHECK(count(out.str(), "Q: ") == 5);
  CHECK(count(out.str(), "A: ") == 2);
  CHECK(out.str().find("A: Hello hello") != std::string::npos);
}
