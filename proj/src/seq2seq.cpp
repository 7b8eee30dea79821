#include "seqqa/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "seqqa/errors.hpp"
#include "seqqa/random.hpp"

namespace seqqa {

template <typename T>
LstmLayer<T> LstmLayer<T>::zeros(std::size_t input_size, std::size_t hidden_size) {
  return {Tensor<T>({4 * hidden_size, input_size}), Tensor<T>({4 * hidden_size, hidden_size}),
          Tensor<T>({4 * hidden_size})};
}

template <typename T>
ModelParams<T> ModelParams<T>::zeros(const Hyper& hyper) {
  if (hyper.vocab_size < 3 || hyper.embed_size < 1 || hyper.hidden_size < 1 || hyper.num_layers < 1) {
    throw ContractError("invalid hyperparameters: V=" + std::to_string(hyper.vocab_size) +
                        " E=" + std::to_string(hyper.embed_size) + " H=" + std::to_string(hyper.hidden_size) +
                        " layers=" + std::to_string(hyper.num_layers));
  }
  ModelParams p;
  p.hyper = hyper;
  p.embedding = Tensor<T>({hyper.vocab_size, hyper.embed_size});
  for (std::size_t l = 0; l < hyper.num_layers; ++l) {
    const std::size_t in = l == 0 ? hyper.embed_size : hyper.hidden_size;
    p.encoder.push_back(LstmLayer<T>::zeros(in, hyper.hidden_size));
    p.decoder.push_back(LstmLayer<T>::zeros(in, hyper.hidden_size));
  }
  p.projection_W = Tensor<T>({hyper.vocab_size, hyper.hidden_size});
  p.projection_b = Tensor<T>({hyper.vocab_size});
  return p;
}

namespace {

template <typename Params, typename Out>
void collect_named(Params& p, Out& out) {
  out.emplace_back("embedding", &p.embedding);
  for (const char* side : {"encoder", "decoder"}) {
    auto& layers = std::string_view(side) == "encoder" ? p.encoder : p.decoder;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string prefix = std::string(side) + "." + std::to_string(l) + ".";
      out.emplace_back(prefix + "W", &layers[l].W);
      out.emplace_back(prefix + "U", &layers[l].U);
      out.emplace_back(prefix + "b", &layers[l].b);
    }
  }
  out.emplace_back("projection.W", &p.projection_W);
  out.emplace_back("projection.b", &p.projection_b);
}

}  // namespace

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> ModelParams<T>::named_tensors() {
  std::vector<std::pair<std::string, Tensor<T>*>> out;
  collect_named(*this, out);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> ModelParams<T>::named_tensors() const {
  std::vector<std::pair<std::string, const Tensor<T>*>> out;
  collect_named(*this, out);
  return out;
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_tensors()) n += t->size();
  return n;
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const Hyper& hyper) {
  // Shapes only; avoid materializing a full model just to list them.
  std::vector<std::pair<std::string, Shape>> out;
  const std::size_t V = hyper.vocab_size, E = hyper.embed_size, H = hyper.hidden_size;
  out.emplace_back("embedding", Shape{V, E});
  for (const char* side : {"encoder", "decoder"}) {
    for (std::size_t l = 0; l < hyper.num_layers; ++l) {
      const std::string prefix = std::string(side) + "." + std::to_string(l) + ".";
      out.emplace_back(prefix + "W", Shape{4 * H, l == 0 ? E : H});
      out.emplace_back(prefix + "U", Shape{4 * H, H});
      out.emplace_back(prefix + "b", Shape{4 * H});
    }
  }
  out.emplace_back("projection.W", Shape{V, H});
  out.emplace_back("projection.b", Shape{V});
  return out;
}

template <typename To, typename From>
ModelParams<To> cast_params(const ModelParams<From>& params) {
  auto out = ModelParams<To>::zeros(params.hyper);
  auto dst = out.named_tensors();
  auto src = params.named_tensors();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    auto d = dst[k].second->data();
    auto s = src[k].second->data();
    std::transform(s.begin(), s.end(), d.begin(), [](From v) { return static_cast<To>(v); });
  }
  return out;
}

template <typename T>
LstmState<T> LstmState<T>::zeros(std::size_t layers, std::size_t hidden_size) {
  LstmState s;
  s.h.assign(layers, Tensor<T>({hidden_size}));
  s.c.assign(layers, Tensor<T>({hidden_size}));
  return s;
}

// ---------------------------------------------------------------------------
// Cell

template <typename T>
void lstm_cell_forward_cached(std::span<const T> x, std::span<const T> h, std::span<const T> c,
                              const LstmLayer<T>& p, LstmCellCache<T>& cache) {
  const std::size_t H = p.hidden_size();
  if (x.size() != p.input_size() || h.size() != H || c.size() != H) {
    throw ShapeError("lstm cell expects x[" + std::to_string(p.input_size()) + "] h[" + std::to_string(H) + "] c[" +
                     std::to_string(H) + "], got x[" + std::to_string(x.size()) + "] h[" + std::to_string(h.size()) +
                     "] c[" + std::to_string(c.size()) + "]");
  }
  std::vector<T> z(p.b.data().begin(), p.b.data().end());
  matvec_add<T>(p.W, x, z);
  matvec_add<T>(p.U, h, z);

  cache.x.assign(x.begin(), x.end());
  cache.h_prev.assign(h.begin(), h.end());
  cache.c_prev.assign(c.begin(), c.end());
  cache.i.resize(H);
  cache.f.resize(H);
  cache.g.resize(H);
  cache.o.resize(H);
  cache.c.resize(H);
  cache.tanh_c.resize(H);
  cache.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    cache.i[k] = sigmoid(z[k]);
    cache.f[k] = sigmoid(z[H + k]);
    cache.g[k] = std::tanh(z[2 * H + k]);
    cache.o[k] = sigmoid(z[3 * H + k]);
    cache.c[k] = cache.f[k] * c[k] + cache.i[k] * cache.g[k];
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    cache.h[k] = cache.o[k] * cache.tanh_c[k];
  }
}

template <typename T>
CellOutput<T> lstm_cell_forward(const Tensor<T>& x, const Tensor<T>& h, const Tensor<T>& c, const LstmLayer<T>& p) {
  LstmCellCache<T> cache;
  lstm_cell_forward_cached<T>(x.data(), h.data(), c.data(), p, cache);
  const std::size_t H = p.hidden_size();
  return {Tensor<T>({H}, std::move(cache.h)), Tensor<T>({H}, std::move(cache.c))};
}

template <typename T>
CellInputGrads<T> lstm_cell_backward(const LstmCellCache<T>& cache, std::span<const T> dh, std::span<const T> dc,
                                     const LstmLayer<T>& p, LstmLayer<T>& grads) {
  const std::size_t H = p.hidden_size();
  if (dh.size() != H || dc.size() != H) throw ShapeError("lstm cell backward: gradient width mismatch");
  std::vector<T> dz(4 * H);
  CellInputGrads<T> out{std::vector<T>(p.input_size()), std::vector<T>(H), std::vector<T>(H)};
  for (std::size_t k = 0; k < H; ++k) {
    const T i = cache.i[k], f = cache.f[k], g = cache.g[k], o = cache.o[k], tc = cache.tanh_c[k];
    const T d_o = dh[k] * tc;
    const T d_c = dc[k] + dh[k] * o * (T{1} - tc * tc);
    dz[k] = d_c * g * i * (T{1} - i);
    dz[H + k] = d_c * cache.c_prev[k] * f * (T{1} - f);
    dz[2 * H + k] = d_c * i * (T{1} - g * g);
    dz[3 * H + k] = d_o * o * (T{1} - o);
    out.c_prev[k] = d_c * f;
  }
  outer_add<T>(grads.W, dz, cache.x);
  outer_add<T>(grads.U, dz, cache.h_prev);
  for (std::size_t k = 0; k < 4 * H; ++k) grads.b[k] += dz[k];
  matvec_transposed_add<T>(p.W, dz, out.x);
  matvec_transposed_add<T>(p.U, dz, out.h_prev);
  return out;
}

// ---------------------------------------------------------------------------
// Stacks

namespace {

void check_ids(std::span<const TokenId> ids, std::size_t vocab_size) {
  for (auto id : ids) {
    if (id >= vocab_size) {
      throw IndexError("token id " + std::to_string(id) + " out of range for vocabulary of " +
                       std::to_string(vocab_size));
    }
  }
}

// Advances every layer by one token; fills `step` with one cache per layer.
template <typename T>
void stack_step(TokenId id, const std::vector<LstmLayer<T>>& layers, const Tensor<T>& embedding, LstmState<T>& state,
                std::vector<LstmCellCache<T>>& step) {
  step.resize(layers.size());
  std::span<const T> x = embedding.row(id);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    lstm_cell_forward_cached<T>(x, state.h[l].data(), state.c[l].data(), layers[l], step[l]);
    std::copy(step[l].h.begin(), step[l].h.end(), state.h[l].data().begin());
    std::copy(step[l].c.begin(), step[l].c.end(), state.c[l].data().begin());
    x = step[l].h;
  }
}

template <typename T>
StackTrace<T> run_stack(std::span<const TokenId> ids, LstmState<T> state, const std::vector<LstmLayer<T>>& layers,
                        const Tensor<T>& embedding) {
  StackTrace<T> trace;
  trace.ids.assign(ids.begin(), ids.end());
  trace.steps.resize(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t) stack_step(ids[t], layers, embedding, state, trace.steps[t]);
  trace.final_state = std::move(state);
  return trace;
}

// BPTT through a stack. `top_grads`, when given, injects dL/dh of the top
// layer at each step. Returns dL/d(initial state).
template <typename T>
LstmState<T> stack_backward(const StackTrace<T>& trace, const LstmState<T>& grad_final,
                            const Tensor<T>* top_grads, const std::vector<LstmLayer<T>>& layers,
                            std::vector<LstmLayer<T>>& layer_grads, Tensor<T>& embedding_grad) {
  const std::size_t L = layers.size();
  std::vector<std::vector<T>> dh(L), dc(L);
  for (std::size_t l = 0; l < L; ++l) {
    dh[l].assign(grad_final.h[l].data().begin(), grad_final.h[l].data().end());
    dc[l].assign(grad_final.c[l].data().begin(), grad_final.c[l].data().end());
  }
  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    std::vector<T> from_above;
    if (top_grads) {
      auto row = top_grads->row(t);
      from_above.assign(row.begin(), row.end());
    }
    for (std::size_t l = L; l-- > 0;) {
      if (!from_above.empty()) {
        for (std::size_t k = 0; k < dh[l].size(); ++k) dh[l][k] += from_above[k];
      }
      auto g = lstm_cell_backward<T>(trace.steps[t][l], dh[l], dc[l], layers[l], layer_grads[l]);
      dh[l] = std::move(g.h_prev);
      dc[l] = std::move(g.c_prev);
      from_above = std::move(g.x);
    }
    auto emb_row = embedding_grad.row(trace.ids[t]);
    for (std::size_t k = 0; k < emb_row.size(); ++k) emb_row[k] += from_above[k];
  }
  LstmState<T> out;
  for (std::size_t l = 0; l < L; ++l) {
    out.h.emplace_back(Shape{dh[l].size()}, std::move(dh[l]));
    out.c.emplace_back(Shape{dc[l].size()}, std::move(dc[l]));
  }
  return out;
}

template <typename T>
void project(const ModelParams<T>& params, std::span<const T> h_top, std::span<T> logits) {
  std::copy(params.projection_b.data().begin(), params.projection_b.data().end(), logits.begin());
  matvec_add<T>(params.projection_W, h_top, logits);
}

}  // namespace

template <typename T>
StackTrace<T> encode_traced(std::span<const TokenId> source, std::size_t source_length, const ModelParams<T>& params) {
  if (source_length < 1 || source_length > source.size()) {
    throw ContractError("source_length " + std::to_string(source_length) + " outside [1, " +
                        std::to_string(source.size()) + "]");
  }
  const auto ids = source.first(source_length);
  check_ids(ids, params.hyper.vocab_size);
  return run_stack(ids, LstmState<T>::zeros(params.hyper.num_layers, params.hyper.hidden_size), params.encoder,
                   params.embedding);
}

template <typename T>
LstmState<T> encode(std::span<const TokenId> source, std::size_t source_length, const ModelParams<T>& params) {
  return encode_traced(source, source_length, params).final_state;
}

template <typename T>
void encode_backward(const StackTrace<T>& trace, const LstmState<T>& grad_final, const ModelParams<T>& params,
                     ModelParams<T>& grads) {
  stack_backward<T>(trace, grad_final, nullptr, params.encoder, grads.encoder, grads.embedding);
}

template <typename T>
DecoderTrace<T> decode_traced(std::span<const TokenId> decoder_input, const LstmState<T>& init,
                              const ModelParams<T>& params) {
  if (decoder_input.empty() || decoder_input.front() != kGo) {
    throw ContractError("decoder input must start with <go>");
  }
  if (init.layers() != params.hyper.num_layers) throw ShapeError("initial state layer count mismatch");
  check_ids(decoder_input, params.hyper.vocab_size);
  DecoderTrace<T> out{run_stack(decoder_input, init, params.decoder, params.embedding),
                      Tensor<T>({decoder_input.size(), params.hyper.vocab_size})};
  for (std::size_t t = 0; t < decoder_input.size(); ++t) {
    project<T>(params, out.stack.steps[t].back().h, out.logits.row(t));
  }
  return out;
}

template <typename T>
Tensor<T> decode_train(std::span<const TokenId> decoder_input, const LstmState<T>& init,
                       const ModelParams<T>& params) {
  return decode_traced(decoder_input, init, params).logits;
}

template <typename T>
LstmState<T> decode_backward(const DecoderTrace<T>& trace, const Tensor<T>& grad_logits, const ModelParams<T>& params,
                             ModelParams<T>& grads) {
  const std::size_t steps = trace.stack.steps.size();
  const std::size_t H = params.hyper.hidden_size;
  if (grad_logits.shape() != trace.logits.shape()) throw ShapeError("decoder logits gradient shape mismatch");
  Tensor<T> top_grads({steps, H});
  for (std::size_t t = 0; t < steps; ++t) {
    const auto g = grad_logits.row(t);
    const auto& h_top = trace.stack.steps[t].back().h;
    outer_add<T>(grads.projection_W, g, h_top);
    for (std::size_t v = 0; v < g.size(); ++v) grads.projection_b[v] += g[v];
    matvec_transposed_add<T>(params.projection_W, g, top_grads.row(t));
  }
  return stack_backward<T>(trace.stack,
                           LstmState<T>::zeros(params.hyper.num_layers, H), &top_grads, params.decoder,
                           grads.decoder, grads.embedding);
}

// ---------------------------------------------------------------------------
// Loss

template <typename T>
T sequence_loss_sum(const Tensor<T>& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                    T scale, Tensor<T>* grad_logits) {
  if (logits.rank() != 2 || logits.dim(0) != targets.size() || targets.size() != mask.size()) {
    throw ShapeError("sequence loss: logits " + logits.shape_string() + " vs " + std::to_string(targets.size()) +
                     " targets and " + std::to_string(mask.size()) + " mask entries");
  }
  T sum{0};
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (!mask[t]) continue;
    auto r = softmax_xent<T>(logits.row(t), targets[t]);
    sum += r.loss;
    if (grad_logits) {
      auto row = grad_logits->row(t);
      for (std::size_t v = 0; v < row.size(); ++v) row[v] = scale * r.grad[v];
    }
  }
  return sum;
}

template <typename T>
T sequence_loss(const Tensor<T>& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask) {
  const auto count = static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
  if (count == 0) throw ContractError("sequence loss with an all-zero mask (no supervised positions)");
  return sequence_loss_sum<T>(logits, targets, mask, T{1}, nullptr) / static_cast<T>(count);
}

namespace {

std::size_t supervised_length(const EncodedExample& ex) {
  for (std::size_t t = ex.mask.size(); t-- > 0;) {
    if (ex.mask[t]) return t + 1;
  }
  return 0;
}

std::size_t count_tokens(const Batch& batch) {
  std::size_t n = 0;
  for (const auto& ex : batch.examples) n += static_cast<std::size_t>(std::count(ex.mask.begin(), ex.mask.end(), 1));
  return n;
}

}  // namespace

template <typename T>
ForwardBackward<T> forward_backward(const Batch& batch, const ModelParams<T>& params, std::size_t batch_index) {
  if (batch.examples.empty()) throw ContractError("forward_backward on an empty batch");
  const std::size_t tokens = count_tokens(batch);
  if (tokens == 0) throw ContractError("batch " + std::to_string(batch_index) + " has no supervised positions");

  ForwardBackward<T> out{T{0}, tokens, ModelParams<T>::zeros(params.hyper)};
  const T scale = T{1} / static_cast<T>(tokens);
  T sum{0};
  for (std::size_t j = 0; j < batch.examples.size(); ++j) {
    const auto& ex = batch.examples[j];
    const std::size_t steps = supervised_length(ex);
    if (steps == 0) continue;
    const auto enc = encode_traced<T>(ex.source, batch.source_lengths.at(j), params);
    const auto dec = decode_traced<T>(std::span(ex.decoder_input).first(steps), enc.final_state, params);
    Tensor<T> grad_logits(dec.logits.shape());
    sum += sequence_loss_sum<T>(dec.logits, std::span(ex.decoder_target).first(steps), std::span(ex.mask).first(steps),
                                scale, &grad_logits);
    const auto grad_init = decode_backward<T>(dec, grad_logits, params, out.grads);
    encode_backward<T>(enc, grad_init, params, out.grads);
  }
  out.loss = sum / static_cast<T>(tokens);
  if (!std::isfinite(out.loss)) {
    throw DivergenceError("non-finite loss in batch " + std::to_string(batch_index));
  }
  return out;
}

template <typename T>
LossTotal batch_loss(const Batch& batch, const ModelParams<T>& params) {
  LossTotal total;
  for (std::size_t j = 0; j < batch.examples.size(); ++j) {
    const auto& ex = batch.examples[j];
    const std::size_t steps = supervised_length(ex);
    if (steps == 0) continue;
    const auto state = encode<T>(ex.source, batch.source_lengths.at(j), params);
    const auto logits = decode_train<T>(std::span(ex.decoder_input).first(steps), state, params);
    total.sum += static_cast<double>(sequence_loss_sum<T>(logits, std::span(ex.decoder_target).first(steps),
                                                          std::span(ex.mask).first(steps), T{1}, nullptr));
    total.tokens += static_cast<std::size_t>(std::count(ex.mask.begin(), ex.mask.end(), 1));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Greedy decoding

template <typename T>
GreedyResult decode_greedy(const LstmState<T>& init, const ModelParams<T>& params, std::size_t max_steps) {
  if (max_steps < 1) throw ContractError("max_steps must be >= 1");
  if (init.layers() != params.hyper.num_layers) throw ShapeError("initial state layer count mismatch");
  GreedyResult out;
  LstmState<T> state = init;
  std::vector<LstmCellCache<T>> step;
  std::vector<T> logits(params.hyper.vocab_size);
  TokenId token = kGo;
  for (std::size_t s = 0; s < max_steps; ++s) {
    stack_step(token, params.decoder, params.embedding, state, step);
    project<T>(params, step.back().h, logits);
    TokenId best = kEos;
    for (TokenId v = kEos + 1; v < logits.size(); ++v) {
      if (logits[v] > logits[best]) best = v;
    }
    if (best == kEos) {
      out.terminated = true;
      return out;
    }
    out.ids.push_back(best);
    token = best;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Initialization

template <typename T>
ModelParams<T> init_params(const Hyper& hyper, std::uint64_t seed, const PretrainedEmbeddings* pretrained) {
  if (hyper.vocab_size < 5) throw ContractError("vocabulary must have at least 5 tokens");
  auto params = ModelParams<T>::zeros(hyper);
  Rng rng(seed);
  const auto fill_uniform = [&](Tensor<T>& t) {
    for (auto& v : t.data()) v = static_cast<T>(rng.uniform(-kInitRange, kInitRange));
  };
  fill_uniform(params.embedding);
  for (auto* layers : {&params.encoder, &params.decoder}) {
    for (auto& layer : *layers) {
      fill_uniform(layer.W);
      fill_uniform(layer.U);
      const std::size_t H = layer.hidden_size();
      for (std::size_t k = H; k < 2 * H; ++k) layer.b[k] = T{1};
    }
  }
  fill_uniform(params.projection_W);

  if (pretrained) {
    for (const auto& [id, row] : pretrained->rows) {
      if (row.size() != hyper.embed_size) {
        throw FormatError("pretrained row for id " + std::to_string(id) + " has width " + std::to_string(row.size()) +
                          ", embedding size is " + std::to_string(hyper.embed_size));
      }
      if (id >= hyper.vocab_size) throw IndexError("pretrained row id " + std::to_string(id) + " out of range");
      auto dst = params.embedding.row(id);
      std::transform(row.begin(), row.end(), dst.begin(), [](double v) { return static_cast<T>(v); });
    }
  }
  return params;
}

template <typename T>
std::uint64_t params_checksum(const ModelParams<T>& params) {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& [name, t] : params.named_tensors()) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(t->data().data());
    for (std::size_t k = 0; k < t->size() * sizeof(T); ++k) {
      h ^= bytes[k];
      h *= 1099511628211ull;
    }
  }
  return h;
}

#define SEQQA_INSTANTIATE(T)                                                                                       \
  template struct LstmLayer<T>;                                                                                    \
  template struct ModelParams<T>;                                                                                  \
  template struct LstmState<T>;                                                                                    \
  template CellOutput<T> lstm_cell_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,                \
                                              const LstmLayer<T>&);                                                \
  template void lstm_cell_forward_cached<T>(std::span<const T>, std::span<const T>, std::span<const T>,            \
                                            const LstmLayer<T>&, LstmCellCache<T>&);                               \
  template CellInputGrads<T> lstm_cell_backward<T>(const LstmCellCache<T>&, std::span<const T>, std::span<const T>, \
                                                   const LstmLayer<T>&, LstmLayer<T>&);                            \
  template StackTrace<T> encode_traced<T>(std::span<const TokenId>, std::size_t, const ModelParams<T>&);           \
  template LstmState<T> encode<T>(std::span<const TokenId>, std::size_t, const ModelParams<T>&);                   \
  template void encode_backward<T>(const StackTrace<T>&, const LstmState<T>&, const ModelParams<T>&,               \
                                   ModelParams<T>&);                                                               \
  template DecoderTrace<T> decode_traced<T>(std::span<const TokenId>, const LstmState<T>&, const ModelParams<T>&); \
  template Tensor<T> decode_train<T>(std::span<const TokenId>, const LstmState<T>&, const ModelParams<T>&);        \
  template LstmState<T> decode_backward<T>(const DecoderTrace<T>&, const Tensor<T>&, const ModelParams<T>&,        \
                                           ModelParams<T>&);                                                       \
  template T sequence_loss<T>(const Tensor<T>&, std::span<const TokenId>, std::span<const std::uint8_t>);          \
  template T sequence_loss_sum<T>(const Tensor<T>&, std::span<const TokenId>, std::span<const std::uint8_t>, T,    \
                                  Tensor<T>*);                                                                     \
  template ForwardBackward<T> forward_backward<T>(const Batch&, const ModelParams<T>&, std::size_t);               \
  template LossTotal batch_loss<T>(const Batch&, const ModelParams<T>&);                                           \
  template GreedyResult decode_greedy<T>(const LstmState<T>&, const ModelParams<T>&, std::size_t);                 \
  template ModelParams<T> init_params<T>(const Hyper&, std::uint64_t, const PretrainedEmbeddings*);                \
  template std::uint64_t params_checksum<T>(const ModelParams<T>&);

SEQQA_INSTANTIATE(float)
SEQQA_INSTANTIATE(double)

#undef SEQQA_INSTANTIATE

template ModelParams<float> cast_params<float, double>(const ModelParams<double>&);
template ModelParams<double> cast_params<double, float>(const ModelParams<float>&);
template ModelParams<float> cast_params<float, float>(const ModelParams<float>&);
template ModelParams<double> cast_params<double, double>(const ModelParams<double>&);

}  // namespace seqqa
