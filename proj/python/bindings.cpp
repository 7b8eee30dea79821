#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "seqqa/checkpoint.hpp"
#include "seqqa/corpus.hpp"
#include "seqqa/errors.hpp"
#include "seqqa/gradcheck.hpp"
#include "seqqa/inference.hpp"
#include "seqqa/trainer.hpp"

namespace py = pybind11;
using namespace seqqa;

namespace {

using PyPair = std::pair<Tokens, Tokens>;

std::vector<QAPair> to_pairs(const std::vector<PyPair>& pairs) {
  std::vector<QAPair> out;
  out.reserve(pairs.size());
  for (const auto& [q, a] : pairs) out.push_back({q, a});
  return out;
}

std::vector<PyPair> from_pairs(const std::vector<QAPair>& pairs) {
  std::vector<PyPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.emplace_back(p.question, p.answer);
  return out;
}

py::dict hyper_dict(const Hyper& h) {
  py::dict d;
  d["vocab_size"] = h.vocab_size;
  d["embed_size"] = h.embed_size;
  d["hidden_size"] = h.hidden_size;
  d["num_layers"] = h.num_layers;
  return d;
}

py::tuple parse_result(const ParseResult& r) { return py::make_tuple(from_pairs(r.pairs), r.warnings); }

}  // namespace

PYBIND11_MODULE(_seqqa, m) {
  m.doc() = "Seq2seq question answering core (C++).";

  py::register_exception<Error>(m, "SeqqaError", PyExc_ValueError);

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def(
      "merge_terms",
      [](const Tokens& tokens, const std::vector<std::string>& phrases) {
        return merge_terms(tokens, TermLexicon(phrases));
      },
      py::arg("tokens"), py::arg("phrases"));
  m.def("detokenize", &detokenize, py::arg("tokens"));
  m.def(
      "parse_tsv_file", [](const std::filesystem::path& p) { return parse_result(parse_tsv_file(p)); },
      py::arg("path"), "Returns (pairs, warnings).");
  m.def(
      "parse_cornell_files",
      [](const std::filesystem::path& lines, const std::filesystem::path& convs) {
        return parse_result(parse_cornell_files(lines, convs));
      },
      py::arg("lines"), py::arg("conversations"), "Returns (pairs, warnings).");
  m.def(
      "make_copy_task",
      [](std::size_t n, std::size_t tokens, std::size_t max_len, std::uint64_t seed) {
        return from_pairs(make_copy_task(n, tokens, max_len, seed));
      },
      py::arg("num_pairs"), py::arg("content_tokens"), py::arg("max_len"), py::arg("seed"));

  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<>())
      .def(py::init<std::vector<std::string>>(), py::arg("tokens"))
      .def_static("read_file", &Vocabulary::read_file, py::arg("path"))
      .def("write_file", &Vocabulary::write_file, py::arg("path"))
      .def_property_readonly("tokens", &Vocabulary::tokens)
      .def("id", &Vocabulary::id, py::arg("token"))
      .def("token", &Vocabulary::token, py::arg("id"))
      .def("__len__", &Vocabulary::size)
      .def("__contains__", &Vocabulary::contains)
      .def("__eq__", [](const Vocabulary& a, const Vocabulary& b) { return a == b; });

  m.def(
      "build_vocab",
      [](const std::vector<PyPair>& pairs, std::size_t min_count, std::size_t max_size) {
        return build_vocab(to_pairs(pairs), min_count, max_size);
      },
      py::arg("pairs"), py::arg("min_count") = 1, py::arg("max_size") = 20000);

  m.def(
      "detect_overfit",
      [](const std::vector<double>& eval_losses, std::size_t patience) -> py::object {
        LossLog log;
        for (std::size_t k = 0; k < eval_losses.size(); ++k) log.rows.push_back({k + 1, 0.0, eval_losses[k]});
        const auto flag = detect_overfit(log, patience);
        if (!flag) return py::none();
        return py::make_tuple(flag->flagged_epoch, flag->best_epoch);
      },
      py::arg("eval_losses"), py::arg("patience"), "Returns (flagged_epoch, best_epoch) or None.");

  py::class_<Checkpoint>(m, "Model")
      .def_static("load", &load_checkpoint, py::arg("path"))
      .def("save", [](const Checkpoint& c, const std::filesystem::path& p) { save_checkpoint(p, c.params, c.vocab); },
           py::arg("path"))
      .def_property_readonly("hyper", [](const Checkpoint& c) { return hyper_dict(c.hyper()); })
      .def_readonly("vocab", &Checkpoint::vocab)
      .def_property_readonly("checksum", [](const Checkpoint& c) { return params_checksum(c.params); })
      .def(
          "answer",
          [](const Checkpoint& c, const std::string& question, std::size_t max_len, std::size_t max_steps) {
            const auto r = [&] {
              py::gil_scoped_release release;
              return answer(question, c.params, c.vocab, {max_len, max_steps, nullptr});
            }();
            py::dict d;
            d["answer"] = r.answer_text;
            d["tokens"] = r.answer_tokens;
            d["terminated"] = r.terminated;
            d["unk_in_question"] = r.unk_in_question;
            return d;
          },
          py::arg("question"), py::arg("max_len") = 10, py::arg("max_steps") = 20);

  m.def(
      "train",
      [](const std::vector<PyPair>& pairs, const Vocabulary& vocab, std::size_t epochs, std::size_t batch_size,
         std::size_t embed, std::size_t hidden, std::size_t layers, double lr, const std::string& optimizer,
         double clip_norm, std::size_t max_len, double eval_fraction, std::size_t patience, std::uint64_t seed,
         std::optional<std::size_t> max_iterations, std::optional<std::filesystem::path> checkpoint_dir,
         std::optional<std::filesystem::path> loss_log) {
        TrainConfig config;
        config.epochs = epochs;
        config.batch_size = batch_size;
        config.learning_rate = lr;
        config.optimizer = parse_optimizer(optimizer);
        config.clip_norm = clip_norm;
        config.max_len = max_len;
        config.eval_fraction = eval_fraction;
        config.patience = patience;
        config.seed = seed;
        config.max_iterations = max_iterations;
        if (checkpoint_dir) config.checkpoint_dir = *checkpoint_dir;
        if (loss_log) config.loss_log = *loss_log;
        const auto corpus = encode_corpus(to_pairs(pairs), vocab, max_len);
        const auto result = [&] {
          py::gil_scoped_release release;
          return train<float>(config, corpus.examples, init_params<float>({vocab.size(), embed, hidden, layers}, seed),
                              vocab);
        }();
        py::list log;
        for (const auto& row : result.log.rows) {
          log.append(py::make_tuple(row.epoch, row.train_loss,
                                    row.eval_loss ? py::cast(*row.eval_loss) : py::object(py::none())));
        }
        py::dict d;
        d["log"] = log;
        d["iterations"] = result.iterations;
        d["best_epoch"] = result.best_epoch;
        d["rejected"] = corpus.rejected;
        d["best_checkpoint"] = result.best_checkpoint.string();
        d["overfit"] = result.overfit ? py::object(py::make_tuple(result.overfit->flagged_epoch, result.overfit->best_epoch))
                                      : py::object(py::none());
        d["model"] = Checkpoint{result.params, vocab};
        return d;
      },
      py::arg("pairs"), py::arg("vocab"), py::kw_only(), py::arg("epochs") = 30, py::arg("batch_size") = 100,
      py::arg("embed") = 256, py::arg("hidden") = 256, py::arg("layers") = 2, py::arg("lr") = 1e-3,
      py::arg("optimizer") = "adam", py::arg("clip_norm") = 5.0, py::arg("max_len") = 10,
      py::arg("eval_fraction") = 0.1, py::arg("patience") = 3, py::arg("seed") = 1234,
      py::arg("max_iterations") = py::none(), py::arg("checkpoint_dir") = py::none(), py::arg("loss_log") = py::none());

  m.def(
      "gradcheck",
      [] {
        const auto suite = [] {
          py::gil_scoped_release release;
          return run_gradcheck_suite();
        }();
        py::dict cases;
        for (const auto& c : suite.cases) cases[py::str(c.name)] = c.report.max_rel_error;
        py::dict d;
        d["passed"] = suite.passed;
        d["max_rel_error"] = suite.max_rel_error;
        d["seconds"] = suite.seconds;
        d["cases"] = cases;
        return d;
      },
      "Runs the finite-difference gradient suite in double precision.");
}
