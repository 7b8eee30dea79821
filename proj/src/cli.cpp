#include "seqqa/cli.hpp"

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqqa/checkpoint.hpp"
#include "seqqa/corpus.hpp"
#include "seqqa/errors.hpp"
#include "seqqa/gradcheck.hpp"
#include "seqqa/inference.hpp"
#include "seqqa/service.hpp"
#include "seqqa/trainer.hpp"

namespace seqqa {

namespace {

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
}

struct PreprocessArgs {
  std::string format = "tsv";
  std::string lines, convs, pairs, lexicon, out;
};

struct VocabArgs {
  std::string pairs, out;
  std::size_t min_count = 1;
  std::size_t max_size = 20000;
};

struct TrainArgs {
  std::string pairs, vocab, pretrained, checkpoint_dir, loss_log, optimizer = "adam";
  std::size_t hidden = 256, embed = 256, layers = 2, max_iterations = 0;
  TrainConfig config;
};

struct EvalArgs {
  std::string checkpoint, pairs;
  std::size_t max_len = 10;
};

struct ChatArgs {
  std::string checkpoint, lexicon, addr, allow_origin;
  std::size_t max_len = 10, max_steps = 20;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

int run_preprocess(const PreprocessArgs& a, std::ostream& out, std::ostream& err) {
  ParseResult parsed;
  if (a.format == "cornell") {
    if (a.lines.empty() || a.convs.empty()) throw InputError("--format cornell needs --lines and --convs");
    parsed = parse_cornell_files(a.lines, a.convs);
  } else {
    if (a.pairs.empty()) throw InputError("--format tsv needs --pairs");
    parsed = parse_tsv_file(a.pairs);
  }
  print_warnings(err, parsed.warnings);
  if (!a.lexicon.empty()) {
    const auto lexicon = TermLexicon::read_file(a.lexicon);
    for (auto& p : parsed.pairs) {
      p.question = merge_terms(p.question, lexicon);
      p.answer = merge_terms(p.answer, lexicon);
    }
  }
  auto file = open_output(a.out);
  write_tsv(file, parsed.pairs);
  out << "wrote " << parsed.pairs.size() << " pairs to " << a.out << " (" << parsed.warnings.size()
      << " warnings)\n";
  return kExitOk;
}

int run_build_vocab(const VocabArgs& a, std::ostream& out, std::ostream& err) {
  const auto parsed = parse_tsv_file(a.pairs);
  print_warnings(err, parsed.warnings);
  const auto vocab = build_vocab(parsed.pairs, a.min_count, a.max_size);
  vocab.write_file(a.out);
  out << "wrote " << vocab.size() << " tokens to " << a.out << '\n';
  return kExitOk;
}

int run_train(TrainArgs a, std::ostream& out, std::ostream& err) {
  const auto parsed = parse_tsv_file(a.pairs);
  print_warnings(err, parsed.warnings);
  const auto vocab = Vocabulary::read_file(a.vocab);
  const auto corpus = encode_corpus(parsed.pairs, vocab, a.config.max_len);
  out << "encoded " << corpus.examples.size() << " pairs, rejected " << corpus.rejected << " longer than "
      << a.config.max_len << " tokens\n";
  if (corpus.examples.empty()) throw CorpusError("no trainable pairs within max_len");

  const Hyper hyper{vocab.size(), a.embed, a.hidden, a.layers};
  std::optional<PretrainedEmbeddings> pretrained;
  if (!a.pretrained.empty()) {
    pretrained = load_pretrained_embeddings_file(a.pretrained, vocab, a.embed);
    out << "pretrained vectors cover " << pretrained->coverage << " of " << vocab.size() << " tokens\n";
  }
  auto params = init_params<float>(hyper, a.config.seed, pretrained ? &*pretrained : nullptr);

  a.config.optimizer = parse_optimizer(a.optimizer);
  a.config.checkpoint_dir = a.checkpoint_dir;
  a.config.loss_log = a.loss_log;
  if (a.max_iterations) a.config.max_iterations = a.max_iterations;
  a.config.progress = &out;
  const auto result = train<float>(a.config, corpus.examples, std::move(params), vocab);
  out << "trained " << result.log.rows.size() << " epochs, " << result.iterations << " iterations; best epoch "
      << result.best_epoch << " -> " << result.best_checkpoint.string() << '\n';
  return kExitOk;
}

int run_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = load_checkpoint(a.checkpoint);
  const auto parsed = parse_tsv_file(a.pairs);
  print_warnings(err, parsed.warnings);
  const auto corpus = encode_corpus(parsed.pairs, model.vocab, a.max_len);
  if (corpus.examples.empty()) throw CorpusError("no evaluable pairs within max_len");
  const auto report = evaluate<float>(model.params, corpus.examples);
  out << nlohmann::json{{"examples", report.examples},
                        {"rejected", corpus.rejected},
                        {"mean_loss", report.mean_loss},
                        {"perplexity", report.perplexity},
                        {"exact_match", report.exact_match}}
             .dump()
      << '\n';
  return kExitOk;
}

AnswerConfig answer_config(const ChatArgs& a, std::optional<TermLexicon>& lexicon) {
  if (!a.lexicon.empty()) lexicon = TermLexicon::read_file(a.lexicon);
  return {a.max_len, a.max_steps, lexicon ? &*lexicon : nullptr};
}

int run_chat(const ChatArgs& a, std::istream& in, std::ostream& out) {
  const auto model = load_checkpoint(a.checkpoint);
  std::optional<TermLexicon> lexicon;
  return repl(in, out, model, answer_config(a, lexicon));
}

InferenceServer* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server) g_server->stop();
}

int run_serve(const ChatArgs& a, std::ostream& out) {
  auto model = std::make_shared<const Checkpoint>(load_checkpoint(a.checkpoint));
  std::optional<TermLexicon> lexicon;
  ServiceOptions options{a.allow_origin, answer_config(a, lexicon)};
  const auto [host, port] = parse_address(a.addr);
  InferenceServer server(model, options);
  const int bound = server.bind(host, port);
  out << "serving " << a.checkpoint << " on " << host << ":" << bound << std::endl;
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  server.listen();
  g_server = nullptr;
  return kExitOk;
}

int run_gradcheck(std::ostream& out) {
  const auto suite = run_gradcheck_suite();
  print_gradcheck(out, suite);
  return suite.passed ? kExitOk : kExitRuntime;
}

}  // namespace

int dispatch(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequence-to-sequence question answering: preprocess, train, evaluate and serve", "seqqa"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* preprocess = app.add_subcommand("preprocess", "Parse a dialog corpus into pairs.tsv");
  preprocess->add_option("--format", pre.format, "Input format")->check(CLI::IsMember({"cornell", "tsv"}));
  preprocess->add_option("--lines", pre.lines, "Cornell movie_lines file");
  preprocess->add_option("--convs", pre.convs, "Cornell movie_conversations file");
  preprocess->add_option("--pairs", pre.pairs, "question<TAB>answer file");
  preprocess->add_option("--merge-lexicon", pre.lexicon, "Multi-word term lexicon");
  preprocess->add_option("--out", pre.out, "Output pairs.tsv")->required();

  VocabArgs voc;
  auto* build = app.add_subcommand("build-vocab", "Build vocab.txt from pairs.tsv");
  build->add_option("--pairs", voc.pairs)->required();
  build->add_option("--min-count", voc.min_count)->capture_default_str()->check(CLI::PositiveNumber);
  build->add_option("--max-size", voc.max_size)->capture_default_str()->check(CLI::Range(4, 1 << 30));
  build->add_option("--out", voc.out)->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the encoder-decoder");
  train_cmd->add_option("--pairs", tr.pairs)->required();
  train_cmd->add_option("--vocab", tr.vocab)->required();
  train_cmd->add_option("--epochs", tr.config.epochs)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch-size", tr.config.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden", tr.hidden)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--embed", tr.embed)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--layers", tr.layers)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-len", tr.config.max_len)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr.config.learning_rate)->capture_default_str();
  train_cmd->add_option("--optimizer", tr.optimizer)->capture_default_str()->check(CLI::IsMember({"adam", "sgd"}));
  train_cmd->add_option("--clip-norm", tr.config.clip_norm)->capture_default_str();
  train_cmd->add_option("--eval-fraction", tr.config.eval_fraction)->capture_default_str();
  train_cmd->add_option("--patience", tr.config.patience)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tr.config.seed)->capture_default_str();
  train_cmd->add_option("--max-iterations", tr.max_iterations, "Cap on optimizer steps (0 = none)");
  train_cmd->add_option("--pretrained", tr.pretrained, "Pretrained vectors: token v1 ... vD per line");
  train_cmd->add_option("--checkpoint-dir", tr.checkpoint_dir)->required();
  train_cmd->add_option("--loss-log", tr.loss_log)->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Loss, perplexity and greedy exact match on pairs.tsv");
  eval_cmd->add_option("--checkpoint", ev.checkpoint)->required();
  eval_cmd->add_option("--pairs", ev.pairs)->required();
  eval_cmd->add_option("--max-len", ev.max_len)->capture_default_str()->check(CLI::PositiveNumber);

  ChatArgs ch;
  auto* chat = app.add_subcommand("chat", "Interactive Q/A loop");
  chat->add_option("--checkpoint", ch.checkpoint)->required();
  chat->add_option("--merge-lexicon", ch.lexicon);
  chat->add_option("--max-len", ch.max_len)->capture_default_str()->check(CLI::PositiveNumber);
  chat->add_option("--max-steps", ch.max_steps)->capture_default_str()->check(CLI::PositiveNumber);

  ChatArgs sv;
  auto* serve = app.add_subcommand("serve", "HTTP service: POST /ask, GET /health");
  serve->add_option("--checkpoint", sv.checkpoint)->required();
  serve->add_option("--addr", sv.addr, "HOST:PORT")->required();
  serve->add_option("--allow-origin", sv.allow_origin, "Access-Control-Allow-Origin value");
  serve->add_option("--merge-lexicon", sv.lexicon);
  serve->add_option("--max-len", sv.max_len)->capture_default_str()->check(CLI::PositiveNumber);
  serve->add_option("--max-steps", sv.max_steps)->capture_default_str()->check(CLI::PositiveNumber);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every backward rule");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    err << app.help();
    return kExitUsage;
  }

  try {
    if (preprocess->parsed()) return run_preprocess(pre, out, err);
    if (build->parsed()) return run_build_vocab(voc, out, err);
    if (train_cmd->parsed()) return run_train(tr, out, err);
    if (eval_cmd->parsed()) return run_eval(ev, out, err);
    if (chat->parsed()) return run_chat(ch, in, out);
    if (serve->parsed()) return run_serve(sv, out);
    if (gradcheck->parsed()) return run_gradcheck(out);
  } catch (const InputError& e) {
    report_error(err, e.kind(), e.what());
    return kExitUsage;
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    report_error(err, "runtime_error", e.what());
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace seqqa
