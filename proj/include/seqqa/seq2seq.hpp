#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqqa/corpus.hpp"
#include "seqqa/tensor.hpp"

namespace seqqa {

struct Hyper {
  std::size_t vocab_size = 0;
  std::size_t embed_size = 256;
  std::size_t hidden_size = 256;
  std::size_t num_layers = 2;
  friend bool operator==(const Hyper&, const Hyper&) = default;
};

/// One LSTM layer. Gate rows are stacked in the order (i, f, g, o), each block
/// `hidden` rows tall.
template <typename T>
struct LstmLayer {
  Tensor<T> W;  // [4H × D_in]
  Tensor<T> U;  // [4H × H]
  Tensor<T> b;  // [4H]

  static LstmLayer zeros(std::size_t input_size, std::size_t hidden_size);
  std::size_t hidden_size() const { return U.dim(1); }
  std::size_t input_size() const { return W.dim(1); }
  friend bool operator==(const LstmLayer&, const LstmLayer&) = default;
};

template <typename T>
struct ModelParams {
  Hyper hyper;
  Tensor<T> embedding;  // [V × E], shared by encoder and decoder
  std::vector<LstmLayer<T>> encoder;
  std::vector<LstmLayer<T>> decoder;
  Tensor<T> projection_W;  // [V × H]
  Tensor<T> projection_b;  // [V]

  static ModelParams zeros(const Hyper& hyper);

  /// Every tensor with its checkpoint name, in checkpoint order: embedding,
  /// encoder layers (W, U, b), decoder layers (W, U, b), projection W and b.
  std::vector<std::pair<std::string, Tensor<T>*>> named_tensors();
  std::vector<std::pair<std::string, const Tensor<T>*>> named_tensors() const;

  std::size_t parameter_count() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Expected shapes for `hyper`, in checkpoint order.
std::vector<std::pair<std::string, Shape>> parameter_layout(const Hyper& hyper);

template <typename To, typename From>
ModelParams<To> cast_params(const ModelParams<From>& params);

template <typename T>
struct LstmState {
  std::vector<Tensor<T>> h;  // one [H] per layer
  std::vector<Tensor<T>> c;

  static LstmState zeros(std::size_t layers, std::size_t hidden_size);
  std::size_t layers() const { return h.size(); }
  friend bool operator==(const LstmState&, const LstmState&) = default;
};

template <typename T>
struct CellOutput {
  Tensor<T> h;
  Tensor<T> c;
};

/// Everything the backward rule of one cell step needs.
template <typename T>
struct LstmCellCache {
  std::vector<T> x, h_prev, c_prev;
  std::vector<T> i, f, g, o;  // post-activation gates
  std::vector<T> c, tanh_c, h;
};

template <typename T>
struct CellInputGrads {
  std::vector<T> x, h_prev, c_prev;
};

/// i=σ(W_i x+U_i h+b_i), f=σ(..), g=tanh(..), o=σ(..); c'=f⊙c+i⊙g; h'=o⊙tanh(c').
template <typename T>
CellOutput<T> lstm_cell_forward(const Tensor<T>& x, const Tensor<T>& h, const Tensor<T>& c, const LstmLayer<T>& p);

template <typename T>
void lstm_cell_forward_cached(std::span<const T> x, std::span<const T> h, std::span<const T> c,
                              const LstmLayer<T>& p, LstmCellCache<T>& cache);

/// Accumulates parameter gradients into `grads` and returns the gradients
/// of the cell inputs, given dL/dh' and dL/dc'.
template <typename T>
CellInputGrads<T> lstm_cell_backward(const LstmCellCache<T>& cache, std::span<const T> dh, std::span<const T> dc,
                                     const LstmLayer<T>& p, LstmLayer<T>& grads);

// ---------------------------------------------------------------------------
// Encoder / decoder

template <typename T>
struct StackTrace {
  std::vector<TokenId> ids;                          // consumed tokens
  std::vector<std::vector<LstmCellCache<T>>> steps;  // [time][layer]
  LstmState<T> final_state;
};

template <typename T>
StackTrace<T> encode_traced(std::span<const TokenId> source, std::size_t source_length, const ModelParams<T>& params);

/// Final per-layer state after reading exactly `source_length` tokens from a
/// zero state; anything past `source_length` is ignored.
template <typename T>
LstmState<T> encode(std::span<const TokenId> source, std::size_t source_length, const ModelParams<T>& params);

template <typename T>
void encode_backward(const StackTrace<T>& trace, const LstmState<T>& grad_final, const ModelParams<T>& params,
                     ModelParams<T>& grads);

template <typename T>
struct DecoderTrace {
  StackTrace<T> stack;
  Tensor<T> logits;  // [T × V]
};

template <typename T>
DecoderTrace<T> decode_traced(std::span<const TokenId> decoder_input, const LstmState<T>& init,
                              const ModelParams<T>& params);

/// Teacher-forced decoder logits. `decoder_input` must start with <go>.
template <typename T>
Tensor<T> decode_train(std::span<const TokenId> decoder_input, const LstmState<T>& init,
                       const ModelParams<T>& params);

/// Backpropagates logit gradients through the projection and decoder stack;
/// returns dL/d(init state).
template <typename T>
LstmState<T> decode_backward(const DecoderTrace<T>& trace, const Tensor<T>& grad_logits, const ModelParams<T>& params,
                             ModelParams<T>& grads);

// ---------------------------------------------------------------------------
// Loss

/// Mean masked cross entropy over rows of `logits`.
template <typename T>
T sequence_loss(const Tensor<T>& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask);

/// Sum of masked cross entropies and their gradient w.r.t. `logits`, scaled
/// by `scale` (the caller's 1/token-count).
template <typename T>
T sequence_loss_sum(const Tensor<T>& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                    T scale, Tensor<T>* grad_logits);

template <typename T>
struct ForwardBackward {
  T loss;                  // mean over all mask-1 tokens of the batch
  std::size_t tokens = 0;  // number of mask-1 tokens
  ModelParams<T> grads;
};

template <typename T>
ForwardBackward<T> forward_backward(const Batch& batch, const ModelParams<T>& params, std::size_t batch_index = 0);

struct LossTotal {
  double sum = 0.0;
  std::size_t tokens = 0;
  double mean() const { return tokens ? sum / static_cast<double>(tokens) : 0.0; }
};

/// Forward-only loss of a batch.
template <typename T>
LossTotal batch_loss(const Batch& batch, const ModelParams<T>& params);

// ---------------------------------------------------------------------------
// Inference and initialization

struct GreedyResult {
  std::vector<TokenId> ids;
  bool terminated = false;
};

/// Feeds back the argmax token (<pad>, <go> excluded; lowest id on ties) from
/// <go> until <eos> or `max_steps` tokens.
template <typename T>
GreedyResult decode_greedy(const LstmState<T>& init, const ModelParams<T>& params, std::size_t max_steps);

inline constexpr double kInitRange = 0.08;

/// Uniform(−0.08, 0.08) weights, zero biases except forget-gate slices at 1.
template <typename T>
ModelParams<T> init_params(const Hyper& hyper, std::uint64_t seed, const PretrainedEmbeddings* pretrained = nullptr);

/// FNV-1a over the raw bytes of every tensor.
template <typename T>
std::uint64_t params_checksum(const ModelParams<T>& params);

}  // namespace seqqa
