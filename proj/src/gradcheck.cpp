#include "seqqa/gradcheck.hpp"

#include <chrono>
#include <iomanip>
#include <ostream>

#include "seqqa/corpus.hpp"
#include "seqqa/random.hpp"
#include "seqqa/seq2seq.hpp"

namespace seqqa {

namespace {

using D = double;

Tensor<D> random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor<D> t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

D weighted_sum(std::span<const D> weights, std::span<const D> values) {
  D s = 0;
  for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
  return s;
}

ModelParams<D> random_model(const Hyper& hyper, Rng& rng, double scale = 0.5) {
  auto p = ModelParams<D>::zeros(hyper);
  for (auto& [name, t] : p.named_tensors()) {
    for (auto& v : t->data()) v = rng.uniform(-scale, scale);
  }
  return p;
}

std::vector<GradCheckParam> model_params(ModelParams<D>& p, const ModelParams<D>& g) {
  std::vector<GradCheckParam> out;
  auto pn = p.named_tensors();
  auto gn = g.named_tensors();
  for (std::size_t k = 0; k < pn.size(); ++k) out.push_back({pn[k].first, pn[k].second, gn[k].second});
  return out;
}

GradCheckCase check_matmul(Rng& rng, const GradCheckOptions& opt) {
  auto a = random_tensor({3, 4}, rng);
  auto b = random_tensor({4, 2}, rng);
  const auto r = random_tensor({3, 2}, rng);
  const auto g = matmul_backward(a, b, r);
  const auto loss = [&] { return weighted_sum(r.data(), matmul(a, b).data()); };
  const GradCheckParam params[] = {{"a", &a, &g.a}, {"b", &b, &g.b}};
  return {"matmul", grad_check(loss, params, opt)};
}

GradCheckCase check_activation(Rng& rng, const GradCheckOptions& opt, Activation kind) {
  auto x = random_tensor({6}, rng, 3.0);
  const auto r = random_tensor({6}, rng);
  const auto g = activate_backward(activate(x, kind), r, kind);
  const auto loss = [&] { return weighted_sum(r.data(), activate(x, kind).data()); };
  const GradCheckParam params[] = {{"x", &x, &g}};
  return {kind == Activation::sigmoid ? "sigmoid" : "tanh", grad_check(loss, params, opt)};
}

GradCheckCase check_softmax_xent(Rng& rng, const GradCheckOptions& opt) {
  auto logits = random_tensor({5}, rng, 2.0);
  const std::size_t target = 3;
  const auto r = softmax_xent<D>(logits.data(), target);
  const Tensor<D> g({5}, r.grad);
  const auto loss = [&] { return softmax_xent<D>(logits.data(), target).loss; };
  const GradCheckParam params[] = {{"logits", &logits, &g}};
  return {"softmax_xent", grad_check(loss, params, opt)};
}

GradCheckCase check_embedding(Rng& rng, const GradCheckOptions& opt) {
  auto table = random_tensor({5, 3}, rng);
  const std::vector<TokenId> ids = {1, 3, 1, 4};
  const auto r = random_tensor({ids.size(), 3}, rng);
  Tensor<D> g = table.zeros_like();
  embedding_backward(g, ids, r);
  const auto loss = [&] { return weighted_sum(r.data(), embedding_lookup(table, ids).data()); };
  const GradCheckParam params[] = {{"table", &table, &g}};
  return {"embedding_lookup", grad_check(loss, params, opt)};
}

GradCheckCase check_lstm_cell(Rng& rng, const GradCheckOptions& opt) {
  const std::size_t D_in = 3, H = 2;
  LstmLayer<D> layer{random_tensor({4 * H, D_in}, rng), random_tensor({4 * H, H}, rng), random_tensor({4 * H}, rng)};
  auto x = random_tensor({D_in}, rng);
  auto h = random_tensor({H}, rng);
  auto c = random_tensor({H}, rng);
  const auto rh = random_tensor({H}, rng);
  const auto rc = random_tensor({H}, rng);

  LstmCellCache<D> cache;
  lstm_cell_forward_cached<D>(x.data(), h.data(), c.data(), layer, cache);
  auto grads = LstmLayer<D>::zeros(D_in, H);
  const auto in = lstm_cell_backward<D>(cache, rh.data(), rc.data(), layer, grads);
  const Tensor<D> gx({D_in}, in.x), gh({H}, in.h_prev), gc({H}, in.c_prev);

  const auto loss = [&] {
    const auto out = lstm_cell_forward(x, h, c, layer);
    return weighted_sum(rh.data(), out.h.data()) + weighted_sum(rc.data(), out.c.data());
  };
  const GradCheckParam params[] = {{"W", &layer.W, &grads.W}, {"U", &layer.U, &grads.U}, {"b", &layer.b, &grads.b},
                                   {"x", &x, &gx},            {"h", &h, &gh},             {"c", &c, &gc}};
  return {"lstm_cell", grad_check(loss, params, opt)};
}

const Hyper kSmall{5, 4, 3, 2};

GradCheckCase check_encoder(Rng& rng, const GradCheckOptions& opt) {
  auto p = random_model(kSmall, rng);
  const std::vector<TokenId> source = {4, 2, 3, 4};
  std::vector<Tensor<D>> rh, rc;
  for (std::size_t l = 0; l < kSmall.num_layers; ++l) {
    rh.push_back(random_tensor({kSmall.hidden_size}, rng));
    rc.push_back(random_tensor({kSmall.hidden_size}, rng));
  }
  const auto trace = encode_traced<D>(source, source.size(), p);
  LstmState<D> grad_final{rh, rc};
  auto g = ModelParams<D>::zeros(kSmall);
  encode_backward<D>(trace, grad_final, p, g);

  const auto loss = [&] {
    const auto s = encode<D>(source, source.size(), p);
    D total = 0;
    for (std::size_t l = 0; l < s.layers(); ++l) {
      total += weighted_sum(rh[l].data(), s.h[l].data()) + weighted_sum(rc[l].data(), s.c[l].data());
    }
    return total;
  };
  std::vector<GradCheckParam> params;
  for (auto& gp : model_params(p, g)) {
    if (gp.name == "embedding" || gp.name.starts_with("encoder")) params.push_back(gp);
  }
  return {"encoder_stack", grad_check(loss, params, opt)};
}

GradCheckCase check_decoder(Rng& rng, const GradCheckOptions& opt) {
  auto p = random_model(kSmall, rng);
  const std::vector<TokenId> input = {kGo, 4, 3};
  auto init = LstmState<D>::zeros(kSmall.num_layers, kSmall.hidden_size);
  for (std::size_t l = 0; l < kSmall.num_layers; ++l) {
    init.h[l] = random_tensor({kSmall.hidden_size}, rng);
    init.c[l] = random_tensor({kSmall.hidden_size}, rng);
  }
  const auto r = random_tensor({input.size(), kSmall.vocab_size}, rng);
  const auto trace = decode_traced<D>(input, init, p);
  auto g = ModelParams<D>::zeros(kSmall);
  const auto g_init = decode_backward<D>(trace, r, p, g);

  const auto loss = [&] { return weighted_sum(r.data(), decode_train<D>(input, init, p).data()); };
  std::vector<GradCheckParam> params;
  for (auto& gp : model_params(p, g)) {
    if (!gp.name.starts_with("encoder")) params.push_back(gp);
  }
  for (std::size_t l = 0; l < kSmall.num_layers; ++l) {
    params.push_back({"init.h" + std::to_string(l), &init.h[l], &g_init.h[l]});
    params.push_back({"init.c" + std::to_string(l), &init.c[l], &g_init.c[l]});
  }
  return {"decoder_stack_projection", grad_check(loss, params, opt)};
}

GradCheckCase check_sequence_loss(Rng& rng, const GradCheckOptions& opt) {
  auto logits = random_tensor({4, 5}, rng, 2.0);
  const std::vector<TokenId> targets = {1, 4, 0, 2};
  const std::vector<std::uint8_t> mask = {1, 1, 0, 1};
  Tensor<D> g = logits.zeros_like();
  sequence_loss_sum<D>(logits, targets, mask, 1.0 / 3.0, &g);
  const auto loss = [&] { return sequence_loss<D>(logits, targets, mask); };
  const GradCheckParam params[] = {{"logits", &logits, &g}};
  return {"sequence_loss", grad_check(loss, params, opt)};
}

constexpr std::uint64_t kFullModelSeed = 1;

GradCheckCase check_full_model(const GradCheckOptions& opt) {
  Rng rng(kFullModelSeed);
  auto p = random_model(kSmall, rng, 1.0);
  Vocabulary vocab({"<pad>", "<go>", "<eos>", "<unk>", "hi"});
  std::vector<EncodedExample> examples;
  for (const auto& pair : {QAPair{{"hi", "hi", "hi"}, {"hi"}}, QAPair{{"hi"}, {"hi", "zz", "hi"}}}) {
    examples.push_back(std::get<EncodedExample>(encode_example(pair, vocab, 10)));
  }
  const auto batch = make_batches(examples, 2, std::nullopt).front();
  const auto fb = forward_backward<D>(batch, p);
  const auto loss = [&] { return batch_loss<D>(batch, p).mean(); };
  const auto params = model_params(p, fb.grads);
  return {"seq2seq_batch_loss", grad_check(loss, params, opt)};
}

}  // namespace

GradCheckSuite run_gradcheck_suite(const GradCheckOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(options.seed);
  GradCheckSuite suite;
  suite.cases.push_back(check_matmul(rng, options));
  suite.cases.push_back(check_activation(rng, options, Activation::sigmoid));
  suite.cases.push_back(check_activation(rng, options, Activation::tanh));
  suite.cases.push_back(check_softmax_xent(rng, options));
  suite.cases.push_back(check_embedding(rng, options));
  suite.cases.push_back(check_lstm_cell(rng, options));
  suite.cases.push_back(check_encoder(rng, options));
  suite.cases.push_back(check_decoder(rng, options));
  suite.cases.push_back(check_sequence_loss(rng, options));
  suite.cases.push_back(check_full_model(options));
  for (const auto& c : suite.cases) {
    suite.max_rel_error = std::max(suite.max_rel_error, c.report.max_rel_error);
    suite.passed = suite.passed && c.report.passed;
  }
  suite.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return suite;
}

void print_gradcheck(std::ostream& out, const GradCheckSuite& suite) {
  out << std::scientific << std::setprecision(3);
  for (const auto& c : suite.cases) {
    out << (c.report.passed ? "PASS " : "FAIL ") << c.name << " max_rel_err=" << c.report.max_rel_error << '\n';
    for (const auto& e : c.report.entries) {
      out << "    " << std::left << std::setw(14) << e.name << " rel_err=" << e.max_rel_error << " checked=" << e.checked
          << '\n';
    }
  }
  out << (suite.passed ? "PASS" : "FAIL") << " overall max_rel_err=" << suite.max_rel_error << std::defaultfloat
      << " time=" << suite.seconds << "s\n";
}

}  // namespace seqqa
