#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqqa/corpus.hpp"
#include "seqqa/seq2seq.hpp"

namespace seqqa {

enum class Optimizer { adam, sgd };

Optimizer parse_optimizer(const std::string& name);
std::string to_string(Optimizer opt);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 100;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adam;
  double clip_norm = 5.0;
  std::size_t max_len = 10;
  double eval_fraction = 0.1;
  std::size_t patience = 3;
  std::uint64_t seed = 1234;
  std::optional<std::size_t> max_iterations;  // optional cap on optimizer steps
  std::filesystem::path checkpoint_dir;       // empty: no checkpoints written
  std::filesystem::path loss_log;             // empty: no loss.csv written
  std::ostream* progress = nullptr;

  /// Throws ContractError on out-of-range fields.
  void validate() const;
};

template <typename T>
struct AdamState {
  ModelParams<T> m;
  ModelParams<T> v;
  std::uint64_t t = 0;

  static AdamState fresh(const Hyper& hyper);
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam; `state.t` is incremented before use.
template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grads, AdamState<T>& state, double lr,
               const AdamHyper& hyper = {});

template <typename T>
void sgd_step(ModelParams<T>& params, const ModelParams<T>& grads, double lr);

template <typename T>
double global_norm(const ModelParams<T>& grads);

/// Scales all gradients by clip_norm/norm when the global L2 norm exceeds
/// clip_norm. Returns the norm before clipping.
template <typename T>
double clip_gradients(ModelParams<T>& grads, double clip_norm);

struct LossRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> eval_loss;
};

struct LossLog {
  std::vector<LossRow> rows;

  void write_csv(std::ostream& out) const;
  void write_csv_file(const std::filesystem::path& path) const;
};

struct OverfitFlag {
  std::size_t flagged_epoch = 0;
  std::size_t best_epoch = 0;
  friend bool operator==(const OverfitFlag&, const OverfitFlag&) = default;
};

/// Flags the first epoch at which eval loss has risen for `patience`
/// consecutive epochs, each relative to the epoch before it.
std::optional<OverfitFlag> detect_overfit(const LossLog& log, std::size_t patience);

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

/// Seeded, disjoint split; eval gets floor(n · fraction) indices.
DataSplit split_indices(std::size_t n, double eval_fraction, std::uint64_t seed);

template <typename T>
struct TrainResult {
  ModelParams<T> params;
  LossLog log;
  std::filesystem::path best_checkpoint;
  std::size_t best_epoch = 0;
  std::optional<OverfitFlag> overfit;
  std::size_t iterations = 0;
  std::vector<std::size_t> presentations;  // examples seen per epoch
};

template <typename T>
TrainResult<T> train(const TrainConfig& config, const std::vector<EncodedExample>& examples, ModelParams<T> params,
                     const Vocabulary& vocab);

struct EvalReport {
  double mean_loss = 0.0;
  double perplexity = 0.0;
  double exact_match = 0.0;
  std::size_t examples = 0;
};

/// Token-weighted loss, e^loss, and the fraction of examples whose greedy
/// decode reproduces the answer exactly and terminates.
template <typename T>
EvalReport evaluate(const ModelParams<T>& params, const std::vector<EncodedExample>& examples,
                    std::size_t batch_size = 100);

template <typename T>
LossTotal dataset_loss(const ModelParams<T>& params, const std::vector<EncodedExample>& examples,
                       std::size_t batch_size = 100);

}  // namespace seqqa
