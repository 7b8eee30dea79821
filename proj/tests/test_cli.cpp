#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "seqqa/checkpoint.hpp"
#include "seqqa/cli.hpp"
#include "support.hpp"

using namespace seqqa;
using seqqa::test::fixture;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = dispatch(std::move(args), in, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json first_error(const std::string& err) {
  return nlohmann::json::parse(err.substr(0, err.find('\n')));
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  const auto none = run({});
  CHECK(none.code == 1);
  const auto unknown = run({"dance"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(first_error(unknown.err)["error"]["kind"] == "usage");
  CHECK(run({"train", "--pairs", "x.tsv"}).code == 1);
  CHECK(run({"serve", "--checkpoint", "x", "--addr", "nowhere"}).code != 0);
  CHECK(run({"preprocess", "--format", "cornell", "--out", "x.tsv"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("gradcheck subcommand") {
  const auto r = run({"gradcheck"});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS overall") != std::string::npos);
}

TEST_CASE("pipeline from the cornell fixture to chat") {
  test::TempDir dir;
  const auto pairs = (dir / "pairs.tsv").string();
  const auto vocab = (dir / "vocab.txt").string();
  const auto ckpt = (dir / "ckpt").string();
  const auto loss = (dir / "loss.csv").string();

  const auto pre = run({"preprocess", "--format", "cornell", "--lines", fixture("movie_lines.txt").string(), "--convs",
                        fixture("movie_conversations.txt").string(), "--merge-lexicon",
                        fixture("lexicon.txt").string(), "--out", pairs});
  REQUIRE(pre.code == 0);
  CHECK(pre.out.find("wrote 5 pairs") != std::string::npos);
  CHECK(pre.err.find("warning:") != std::string::npos);

  REQUIRE(run({"build-vocab", "--pairs", pairs, "--min-count", "1", "--max-size", "100", "--out", vocab}).code == 0);
  CHECK(Vocabulary::read_file(vocab).size() > 4);

  const auto tr = run({"train", "--pairs", pairs, "--vocab", vocab, "--epochs", "2", "--batch-size", "2", "--hidden",
                       "8", "--embed", "8", "--eval-fraction", "0", "--checkpoint-dir", ckpt, "--loss-log", loss});
  REQUIRE(tr.code == 0);
  CHECK(tr.out.find("trained 2 epochs") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "ckpt/best.sqac"));
  CHECK(load_checkpoint(dir / "ckpt/best.sqac").hyper() == Hyper{Vocabulary::read_file(vocab).size(), 8, 8, 2});

  const auto ev = run({"eval", "--checkpoint", (dir / "ckpt/best.sqac").string(), "--pairs", pairs});
  REQUIRE(ev.code == 0);
  const auto report = nlohmann::json::parse(ev.out);
  CHECK(report["examples"] == 5);
  CHECK(report["perplexity"].get<double>() > 1.0);

  const auto chat = run({"chat", "--checkpoint", (dir / "ckpt/best.sqac").string()}, "hi\n/quit\n");
  CHECK(chat.code == 0);
  CHECK(chat.out.find("A: ") != std::string::npos);
}

TEST_CASE("runtime errors exit 2 with a JSON error line") {
  test::TempDir dir;
  std::ofstream(dir / "bad.sqac") << "nope";
  const auto r = run({"eval", "--checkpoint", (dir / "bad.sqac").string(), "--pairs", fixture("pairs.tsv").string()});
  CHECK(r.code == 2);
  const auto e = first_error(r.err);
  CHECK(e["error"]["kind"] == "checkpoint_error");
  CHECK(e["error"]["message"] == "not a checkpoint");

  const auto missing = run({"build-vocab", "--pairs", (dir / "none.tsv").string(), "--out", (dir / "v").string()});
  CHECK(missing.code == 2);
}

TEST_CASE("train flag defaults mirror the training config") {
  const auto help = run({"train", "--help"});
  CHECK(help.code == 0);
  for (const auto* expected : {"--epochs", "--batch-size", "--lr", "--clip-norm", "--eval-fraction", "--patience"}) {
    CHECK(help.out.find(expected) != std::string::npos);
  }
  CHECK(help.out.find("30") != std::string::npos);
  CHECK(help.out.find("100") != std::string::npos);
}
