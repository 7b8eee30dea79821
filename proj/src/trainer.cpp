#include "seqqa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <limits>
#include <ostream>
#include <type_traits>

#include "seqqa/checkpoint.hpp"
#include "seqqa/errors.hpp"
#include "seqqa/random.hpp"

namespace seqqa {

Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "sgd") return Optimizer::sgd;
  throw InputError("unknown optimizer '" + name + "' (expected adam or sgd)");
}

std::string to_string(Optimizer opt) { return opt == Optimizer::adam ? "adam" : "sgd"; }

void TrainConfig::validate() const {
  if (epochs < 1) throw ContractError("epochs must be >= 1");
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (!(eval_fraction >= 0.0 && eval_fraction < 1.0)) throw ContractError("eval_fraction must be in [0, 1)");
  if (patience < 1) throw ContractError("patience must be >= 1");
  if (!(clip_norm > 0.0)) throw ContractError("clip_norm must be > 0");
  if (!(learning_rate > 0.0)) throw ContractError("learning_rate must be > 0");
  if (max_len < 1) throw ContractError("max_len must be >= 1");
}

template <typename T>
AdamState<T> AdamState<T>::fresh(const Hyper& hyper) {
  return {ModelParams<T>::zeros(hyper), ModelParams<T>::zeros(hyper), 0};
}

namespace {

template <typename T>
void require_finite(const ModelParams<T>& grads) {
  for (const auto& [name, t] : grads.named_tensors()) {
    for (T v : t->data()) {
      if (!std::isfinite(v)) throw DivergenceError("non-finite gradient in " + name);
    }
  }
}

}  // namespace

template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grads, AdamState<T>& state, double lr,
               const AdamHyper& hyper) {
  require_finite(grads);
  ++state.t;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  auto p = params.named_tensors();
  auto g = grads.named_tensors();
  auto m = state.m.named_tensors();
  auto v = state.v.named_tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto pw = p[k].second->data();
    auto gw = g[k].second->data();
    auto mw = m[k].second->data();
    auto vw = v[k].second->data();
    if (pw.size() != gw.size()) throw ShapeError("gradient shape mismatch for " + p[k].first);
    for (std::size_t i = 0; i < pw.size(); ++i) {
      const double gi = gw[i];
      const double mi = hyper.beta1 * mw[i] + (1.0 - hyper.beta1) * gi;
      const double vi = hyper.beta2 * vw[i] + (1.0 - hyper.beta2) * gi * gi;
      mw[i] = static_cast<T>(mi);
      vw[i] = static_cast<T>(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      pw[i] = static_cast<T>(pw[i] - lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon));
    }
  }
}

template <typename T>
void sgd_step(ModelParams<T>& params, const ModelParams<T>& grads, double lr) {
  require_finite(grads);
  auto p = params.named_tensors();
  auto g = grads.named_tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto pw = p[k].second->data();
    auto gw = g[k].second->data();
    for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = static_cast<T>(pw[i] - lr * gw[i]);
  }
}

template <typename T>
double global_norm(const ModelParams<T>& grads) {
  double sq = 0.0;
  for (const auto& [name, t] : grads.named_tensors()) {
    for (T v : t->data()) sq += static_cast<double>(v) * static_cast<double>(v);
  }
  return std::sqrt(sq);
}

template <typename T>
double clip_gradients(ModelParams<T>& grads, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ContractError("clip_norm must be > 0");
  const double norm = global_norm(grads);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (auto& [name, t] : grads.named_tensors()) {
      for (auto& v : t->data()) v = static_cast<T>(v * scale);
    }
  }
  return norm;
}

void LossLog::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,eval_loss\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.train_loss << ',';
    if (r.eval_loss) out << *r.eval_loss;
    out << '\n';
  }
}

void LossLog::write_csv_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(out);
}

std::optional<OverfitFlag> detect_overfit(const LossLog& log, std::size_t patience) {
  if (patience < 1) throw ContractError("patience must be >= 1");
  const auto& rows = log.rows;
  if (rows.size() < patience + 1) return std::nullopt;
  if (std::any_of(rows.begin(), rows.end(), [](const LossRow& r) { return !r.eval_loss; })) return std::nullopt;

  std::size_t rising = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    rising = *rows[k].eval_loss > *rows[k - 1].eval_loss ? rising + 1 : 0;
    if (rising >= patience) {
      std::size_t best = 0;
      for (std::size_t j = 1; j <= k; ++j) {
        if (*rows[j].eval_loss < *rows[best].eval_loss) best = j;
      }
      return OverfitFlag{rows[k].epoch, rows[best].epoch};
    }
  }
  return std::nullopt;
}

DataSplit split_indices(std::size_t n, double eval_fraction, std::uint64_t seed) {
  if (!(eval_fraction >= 0.0 && eval_fraction < 1.0)) throw ContractError("eval_fraction must be in [0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_eval = static_cast<std::size_t>(std::floor(static_cast<double>(n) * eval_fraction));
  DataSplit split;
  split.eval.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_eval));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_eval), order.end());
  std::sort(split.eval.begin(), split.eval.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

template <typename T>
LossTotal dataset_loss(const ModelParams<T>& params, const std::vector<EncodedExample>& examples,
                       std::size_t batch_size) {
  LossTotal total;
  if (examples.empty()) return total;
  for (const auto& batch : make_batches(examples, batch_size, std::nullopt)) {
    const auto part = batch_loss(batch, params);
    total.sum += part.sum;
    total.tokens += part.tokens;
  }
  return total;
}

template <typename T>
EvalReport evaluate(const ModelParams<T>& params, const std::vector<EncodedExample>& examples,
                    std::size_t batch_size) {
  EvalReport report;
  report.examples = examples.size();
  if (examples.empty()) return report;
  report.mean_loss = dataset_loss(params, examples, batch_size).mean();
  report.perplexity = std::exp(report.mean_loss);
  std::size_t hits = 0;
  for (const auto& ex : examples) {
    std::vector<TokenId> answer;
    for (std::size_t t = 0; t < ex.decoder_target.size(); ++t) {
      if (ex.mask[t] && ex.decoder_target[t] != kEos) answer.push_back(ex.decoder_target[t]);
    }
    std::size_t src_len = ex.source.size();
    while (src_len > 1 && ex.source[src_len - 1] == kPad) --src_len;
    const auto state = encode<T>(ex.source, src_len, params);
    const auto decoded = decode_greedy<T>(state, params, answer.size() + 1);
    if (decoded.terminated && decoded.ids == answer) ++hits;
  }
  report.exact_match = static_cast<double>(hits) / static_cast<double>(examples.size());
  return report;
}

template <typename T>
TrainResult<T> train(const TrainConfig& config, const std::vector<EncodedExample>& examples, ModelParams<T> params,
                     const Vocabulary& vocab) {
  config.validate();
  if (vocab.size() != params.hyper.vocab_size) throw ContractError("vocabulary size does not match the model");
  const auto split = split_indices(examples.size(), config.eval_fraction, config.seed);
  if (split.train.empty()) throw CorpusError("no training examples after the eval split");
  std::vector<EncodedExample> train_set, eval_set;
  for (auto i : split.train) train_set.push_back(examples[i]);
  for (auto i : split.eval) eval_set.push_back(examples[i]);

  const bool checkpoints = !config.checkpoint_dir.empty();
  if (checkpoints) std::filesystem::create_directories(config.checkpoint_dir);
  const auto save = [&](const std::filesystem::path& path) {
    if constexpr (std::is_same_v<T, float>) {
      save_checkpoint(path, params, vocab);
    } else {
      save_checkpoint(path, cast_params<float>(params), vocab);
    }
  };

  TrainResult<T> result{};
  AdamState<T> adam = AdamState<T>::fresh(params.hyper);
  std::filesystem::path last_good;
  double best_metric = std::numeric_limits<double>::infinity();
  bool capped = false;

  for (std::size_t epoch = 1; epoch <= config.epochs && !capped; ++epoch) {
    const auto batches = make_batches(train_set, config.batch_size, config.seed + epoch);
    double loss_sum = 0.0;
    std::size_t tokens = 0, presented = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      try {
        auto fb = forward_backward<T>(batches[b], params, b);
        clip_gradients(fb.grads, config.clip_norm);
        if (config.optimizer == Optimizer::adam) {
          adam_step(params, fb.grads, adam, config.learning_rate);
        } else {
          sgd_step(params, fb.grads, config.learning_rate);
        }
        loss_sum += static_cast<double>(fb.loss) * static_cast<double>(fb.tokens);
        tokens += fb.tokens;
      } catch (const DivergenceError& e) {
        throw DivergenceError("epoch " + std::to_string(epoch) + ": " + e.what(), last_good.string());
      }
      presented += batches[b].size();
      ++result.iterations;
      if (config.max_iterations && result.iterations >= *config.max_iterations) {
        capped = true;
        break;
      }
    }
    result.presentations.push_back(presented);

    LossRow row{epoch, loss_sum / static_cast<double>(tokens), std::nullopt};
    if (!eval_set.empty()) row.eval_loss = dataset_loss(params, eval_set, config.batch_size).mean();
    result.log.rows.push_back(row);
    if (!config.loss_log.empty()) result.log.write_csv_file(config.loss_log);

    const double metric = row.eval_loss.value_or(row.train_loss);
    if (checkpoints) {
      last_good = config.checkpoint_dir / ("epoch_" + std::to_string(epoch) + ".sqac");
      save(last_good);
    }
    if (metric < best_metric) {
      best_metric = metric;
      result.best_epoch = epoch;
      if (checkpoints) {
        result.best_checkpoint = config.checkpoint_dir / "best.sqac";
        save(result.best_checkpoint);
      }
    }
    if (config.progress) {
      *config.progress << "epoch " << epoch << "/" << config.epochs << " train_loss=" << row.train_loss;
      if (row.eval_loss) *config.progress << " eval_loss=" << *row.eval_loss;
      *config.progress << std::endl;
    }
    if (!eval_set.empty()) {
      result.overfit = detect_overfit(result.log, config.patience);
      if (result.overfit) {
        if (config.progress) {
          *config.progress << "eval loss rising for " << config.patience << " epochs; stopping at epoch "
                           << result.overfit->flagged_epoch << " (best epoch " << result.overfit->best_epoch << ")"
                           << std::endl;
        }
        break;
      }
    }
  }
  result.params = std::move(params);
  return result;
}

#define SEQQA_INSTANTIATE(T)                                                                                  \
  template struct AdamState<T>;                                                                               \
  template void adam_step<T>(ModelParams<T>&, const ModelParams<T>&, AdamState<T>&, double, const AdamHyper&); \
  template void sgd_step<T>(ModelParams<T>&, const ModelParams<T>&, double);                                  \
  template double global_norm<T>(const ModelParams<T>&);                                                      \
  template double clip_gradients<T>(ModelParams<T>&, double);                                                 \
  template LossTotal dataset_loss<T>(const ModelParams<T>&, const std::vector<EncodedExample>&, std::size_t); \
  template EvalReport evaluate<T>(const ModelParams<T>&, const std::vector<EncodedExample>&, std::size_t);    \
  template TrainResult<T> train<T>(const TrainConfig&, const std::vector<EncodedExample>&, ModelParams<T>,    \
                                   const Vocabulary&);

SEQQA_INSTANTIATE(float)
SEQQA_INSTANTIATE(double)

#undef SEQQA_INSTANTIATE

}  // namespace seqqa
