#include <doctest.h>

#include <cmath>

#include "seqqa/random.hpp"
#include "seqqa/tensor.hpp"

using namespace seqqa;

namespace {

Tensor<double> random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor<double> t({r, c});
  for (auto& v : t.data()) v = rng.uniform(-1, 1);
  return t;
}

}  // namespace

TEST_CASE("matmul by the identity returns the input") {
  const auto a = Tensor<double>::matrix({{1, 2}, {3, 4}});
  const auto eye = Tensor<double>::matrix({{1, 0}, {0, 1}});
  CHECK(matmul(a, eye) == a);
}

TEST_CASE("matmul hand arithmetic") {
  const auto a = Tensor<double>::matrix({{1, 2}, {3, 4}});
  const auto b = Tensor<double>::matrix({{5, 6}, {7, 8}});
  CHECK(matmul(a, b) == Tensor<double>::matrix({{19, 22}, {43, 50}}));
}

TEST_CASE("matmul rejects incompatible shapes") {
  const Tensor<double> a({2, 3}), b({2, 3});
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
  try {
    matmul(a, b);
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("[2x3] x [2x3]") != std::string::npos);
    CHECK(e.kind() == "shape_error");
  }
}

TEST_CASE("tensor construction validates shape against data") {
  CHECK_THROWS_AS(Tensor<float>({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor<float>(Shape{0, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor<double>::matrix({{1, 2}, {3}}), ShapeError);
  const auto t = Tensor<float>::matrix({{1, 2, 3}, {4, 5, 6}});
  CHECK(t.at(1, 2) == 6.0f);
  CHECK(t.row(1)[0] == 4.0f);
}

TEST_CASE("matmul is associative on random chains") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_matrix(3, 4, rng), b = random_matrix(4, 2, rng), c = random_matrix(2, 5, rng);
    const auto left = matmul(matmul(a, b), c);
    const auto right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) {
      CHECK(std::abs(left[i] - right[i]) <= 1e-9 * std::max(1.0, std::abs(left[i])));
    }
  }
}

TEST_CASE("activations at reference points") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(std::tanh(0.0) == 0.0);
  CHECK(activate(Tensor<double>::vector({0}), Activation::tanh)[0] == 0.0);
  CHECK(std::abs(sigmoid(1.0) - 0.7310586) <= 1e-6);
  CHECK(std::abs(sigmoid(1.0f) - 0.7310586f) <= 1e-6f);
  CHECK(sigmoid(-800.0) == doctest::Approx(0.0));
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(std::isfinite(sigmoid(-800.0f)));
}

TEST_CASE("sigmoid is symmetric and bounded") {
  Rng rng(9);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.uniform(-30, 30);
    const double s = sigmoid(x);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(std::abs(s + sigmoid(-x) - 1.0) <= 1e-12);
  }
}

TEST_CASE("softmax cross entropy closed forms") {
  const std::vector<double> uniform(4, 0.3);
  const auto u = softmax_xent<double>(uniform, 1);
  CHECK(std::abs(u.loss - std::log(4.0)) <= 1e-12);

  const std::vector<double> peaked = {10, 0, 0, 0};
  const auto p = softmax_xent<double>(peaked, 0);
  CHECK(std::abs(p.loss - 1.362e-4) <= 1e-7);
  CHECK(std::abs(p.loss - std::log1p(3 * std::exp(-10.0))) <= 1e-15);

  const auto g = softmax_xent<double>(uniform, 2);
  const std::vector<double> expected = {0.25, 0.25, -0.75, 0.25};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(g.grad[i] - expected[i]) <= 1e-15);
}

TEST_CASE("softmax probabilities sum to one and survive huge logits") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(7);
    for (auto& v : logits) v = rng.uniform(-500, 500);
    const auto r = softmax_xent<double>(logits, 3);
    CHECK(std::isfinite(r.loss));
    double s = 0;
    for (auto v : r.grad) s += v;
    CHECK(std::abs(s) <= 1e-12);  // probabilities sum to 1, minus the one-hot
  }
}

TEST_CASE("embedding lookup and scatter") {
  const auto table = Tensor<double>::matrix({{0, 0}, {1, 2}, {3, 4}});
  const std::vector<std::uint32_t> ids = {2, 1, 2};
  const auto rows = embedding_lookup<double>(table, ids);
  CHECK(rows == Tensor<double>::matrix({{3, 4}, {1, 2}, {3, 4}}));

  Tensor<double> grad = table.zeros_like();
  embedding_backward<double>(grad, ids, Tensor<double>::matrix({{1, 1}, {2, 2}, {1, 1}}));
  CHECK(grad == Tensor<double>::matrix({{0, 0}, {2, 2}, {2, 2}}));

  const std::vector<std::uint32_t> bad = {3};
  CHECK_THROWS_AS(embedding_lookup<double>(table, bad), IndexError);
}

TEST_CASE("grad_check on a quadratic is exact") {
  Tensor<double> w = Tensor<double>::vector({3.0});
  const Tensor<double> analytic = Tensor<double>::vector({6.0});
  const GradCheckParam params[] = {{"w", &w, &analytic}};
  const auto report = grad_check([&] { return w[0] * w[0]; }, params);
  CHECK(report.passed);
  CHECK(report.max_rel_error < 1e-9);
  CHECK(w[0] == 3.0);
}

TEST_CASE("grad_check flags doubled gradients") {
  Tensor<double> w = Tensor<double>::vector({3.0, -1.5});
  const Tensor<double> analytic = Tensor<double>::vector({12.0, -6.0});
  const GradCheckParam params[] = {{"w", &w, &analytic}};
  const auto report = grad_check([&] { return w[0] * w[0] + w[1] * w[1]; }, params);
  CHECK_FALSE(report.passed);
  CHECK(report.max_rel_error == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("grad_check samples large tensors") {
  Tensor<double> w(Shape{40, 40}, 0.5);
  Tensor<double> analytic(Shape{40, 40}, 1.0);
  const GradCheckParam params[] = {{"w", &w, &analytic}};
  const auto report = grad_check(
      [&] {
        double s = 0;
        for (auto v : w.data()) s += v * v;
        return s;
      },
      params);
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].checked >= 200);
  CHECK(report.entries[0].checked < 1600);
  CHECK(report.passed);
}

TEST_CASE("relative error uses a floor") {
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(1e-12, 0.0) == doctest::Approx(1e-4));
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
}
