#include "seqqa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "seqqa/random.hpp"

namespace seqqa {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor shape " + shape_to_string(shape) + " has a zero dimension");
  }
}

template <typename T>
void require_matrix(const Tensor<T>& t, const char* what) {
  if (t.rank() != 2) throw ShapeError(std::string(what) + " must be 2-D, got " + t.shape_string());
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_numel(shape_), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (shape_numel(shape_) != data_.size()) {
    throw ShapeError("shape " + shape_to_string(shape_) + " does not match " + std::to_string(data_.size()) +
                     " values");
  }
}

template <typename T>
Tensor<T> Tensor<T>::matrix(std::initializer_list<std::initializer_list<T>> rows) {
  const std::size_t width = rows.size() ? rows.begin()->size() : 0;
  std::vector<T> data;
  data.reserve(rows.size() * width);
  for (const auto& r : rows) {
    if (r.size() != width) throw ShapeError("ragged rows in matrix literal");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), width}, std::move(data));
}

template <typename T>
Tensor<T> Tensor<T>::vector(std::initializer_list<T> values) {
  return Tensor({values.size()}, std::vector<T>(values));
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
T sigmoid(T x) {
  // Split on sign so exp() never overflows for large |x|.
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_matrix(a, "matmul lhs");
  require_matrix(b, "matmul rhs");
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shape mismatch: " + a.shape_string() + " x " + b.shape_string());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor<T> out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    auto out_row = out.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a.at(i, p);
      auto b_row = b.row(p);
      for (std::size_t j = 0; j < n; ++j) out_row[j] += av * b_row[j];
    }
  }
  return out;
}

template <typename T>
MatmulGrads<T> matmul_backward(const Tensor<T>& a, const Tensor<T>& b, const Tensor<T>& grad_out) {
  require_matrix(grad_out, "matmul grad");
  if (grad_out.dim(0) != a.dim(0) || grad_out.dim(1) != b.dim(1)) {
    throw ShapeError("matmul grad shape " + grad_out.shape_string() + " inconsistent with " + a.shape_string() +
                     " x " + b.shape_string());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  MatmulGrads<T> g{a.zeros_like(), b.zeros_like()};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      T acc{0};
      for (std::size_t j = 0; j < n; ++j) {
        acc += grad_out.at(i, j) * b.at(p, j);
        g.b.at(p, j) += a.at(i, p) * grad_out.at(i, j);
      }
      g.a.at(i, p) = acc;
    }
  }
  return g;
}

template <typename T>
void matvec_add(const Tensor<T>& m, std::span<const T> x, std::span<T> out) {
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  if (x.size() != cols || out.size() != rows) {
    throw ShapeError("matvec shape mismatch: " + m.shape_string() + " x [" + std::to_string(x.size()) + "]");
  }
  const T* w = m.data().data();
  for (std::size_t r = 0; r < rows; ++r, w += cols) {
    T acc{0};
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * x[c];
    out[r] += acc;
  }
}

template <typename T>
void matvec_transposed_add(const Tensor<T>& m, std::span<const T> y, std::span<T> out) {
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  if (y.size() != rows || out.size() != cols) {
    throw ShapeError("transposed matvec shape mismatch: " + m.shape_string() + "^T x [" +
                     std::to_string(y.size()) + "]");
  }
  const T* w = m.data().data();
  for (std::size_t r = 0; r < rows; ++r, w += cols) {
    const T yr = y[r];
    if (yr == T{0}) continue;
    for (std::size_t c = 0; c < cols; ++c) out[c] += w[c] * yr;
  }
}

template <typename T>
void outer_add(Tensor<T>& m, std::span<const T> y, std::span<const T> x) {
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  if (y.size() != rows || x.size() != cols) throw ShapeError("outer product shape mismatch: " + m.shape_string());
  T* w = m.data().data();
  for (std::size_t r = 0; r < rows; ++r, w += cols) {
    const T yr = y[r];
    if (yr == T{0}) continue;
    for (std::size_t c = 0; c < cols; ++c) w[c] += yr * x[c];
  }
}

template <typename T>
Tensor<T> activate(const Tensor<T>& x, Activation kind) {
  Tensor<T> y = x;
  for (auto& v : y.data()) v = kind == Activation::sigmoid ? sigmoid(v) : std::tanh(v);
  return y;
}

template <typename T>
Tensor<T> activate_backward(const Tensor<T>& y, const Tensor<T>& grad_y, Activation kind) {
  if (y.shape() != grad_y.shape()) {
    throw ShapeError("activation grad shape " + grad_y.shape_string() + " vs output " + y.shape_string());
  }
  Tensor<T> g = y.zeros_like();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const T d = kind == Activation::sigmoid ? y[i] * (T{1} - y[i]) : T{1} - y[i] * y[i];
    g[i] = grad_y[i] * d;
  }
  return g;
}

template <typename T>
XentResult<T> softmax_xent(std::span<const T> logits, std::size_t target) {
  if (logits.size() < 2) throw ShapeError("softmax_xent needs at least 2 classes");
  if (target >= logits.size()) {
    throw IndexError("target " + std::to_string(target) + " out of range for " + std::to_string(logits.size()) +
                     " classes");
  }
  const T max_logit = *std::max_element(logits.begin(), logits.end());
  XentResult<T> r{T{0}, std::vector<T>(logits.size())};
  T sum{0};
  for (std::size_t i = 0; i < logits.size(); ++i) {
    r.grad[i] = std::exp(logits[i] - max_logit);
    sum += r.grad[i];
  }
  for (auto& p : r.grad) p /= sum;
  r.loss = std::log(sum) - (logits[target] - max_logit);
  r.grad[target] -= T{1};
  return r;
}

template <typename T>
Tensor<T> embedding_lookup(const Tensor<T>& table, std::span<const std::uint32_t> ids) {
  require_matrix(table, "embedding table");
  if (ids.empty()) throw ShapeError("embedding lookup of an empty id list");
  Tensor<T> out({ids.size(), table.dim(1)});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table.dim(0)) {
      throw IndexError("token id " + std::to_string(ids[i]) + " out of range for vocabulary of " +
                       std::to_string(table.dim(0)));
    }
    std::copy_n(table.row(ids[i]).begin(), table.dim(1), out.row(i).begin());
  }
  return out;
}

template <typename T>
void embedding_backward(Tensor<T>& table_grad, std::span<const std::uint32_t> ids, const Tensor<T>& grad_rows) {
  if (grad_rows.rank() != 2 || grad_rows.dim(0) != ids.size() || grad_rows.dim(1) != table_grad.dim(1)) {
    throw ShapeError("embedding grad shape " + grad_rows.shape_string() + " inconsistent with table " +
                     table_grad.shape_string());
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table_grad.dim(0)) throw IndexError("token id " + std::to_string(ids[i]) + " out of range");
    auto dst = table_grad.row(ids[i]);
    auto src = grad_rows.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

GradCheckReport grad_check(const std::function<double()>& loss, std::span<const GradCheckParam> params,
                           const GradCheckOptions& options) {
  GradCheckReport report;
  Rng rng(options.seed);
  for (const auto& p : params) {
    if (p.value->shape() != p.analytic->shape()) {
      throw ShapeError("analytic gradient for " + p.name + " has shape " + p.analytic->shape_string() +
                       ", parameter has " + p.value->shape_string());
    }
    std::vector<std::size_t> indices;
    const std::size_t n = p.value->size();
    if (n <= options.full_check_limit) {
      indices.resize(n);
      std::iota(indices.begin(), indices.end(), std::size_t{0});
    } else {
      for (std::size_t s = 0; s < options.sample_count; ++s) indices.push_back(rng.below(n));
    }

    GradCheckEntry entry{p.name};
    for (auto idx : indices) {
      double& w = (*p.value)[idx];
      const double saved = w;
      w = saved + options.epsilon;
      const double up = loss();
      w = saved - options.epsilon;
      const double down = loss();
      w = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw Error("gradcheck", "non-finite loss when perturbing " + p.name + "[" + std::to_string(idx) + "]");
      }
      const double numeric = (up - down) / (2.0 * options.epsilon);
      entry.max_rel_error = std::max(entry.max_rel_error, relative_error((*p.analytic)[idx], numeric));
      ++entry.checked;
    }
    entry.passed = entry.max_rel_error <= options.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.passed = report.passed && entry.passed;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

#define SEQQA_INSTANTIATE(T)                                                                         \
  template class Tensor<T>;                                                                          \
  template T sigmoid<T>(T);                                                                          \
  template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                                  \
  template MatmulGrads<T> matmul_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);  \
  template void matvec_add<T>(const Tensor<T>&, std::span<const T>, std::span<T>);                   \
  template void matvec_transposed_add<T>(const Tensor<T>&, std::span<const T>, std::span<T>);        \
  template void outer_add<T>(Tensor<T>&, std::span<const T>, std::span<const T>);                    \
  template Tensor<T> activate<T>(const Tensor<T>&, Activation);                                      \
  template Tensor<T> activate_backward<T>(const Tensor<T>&, const Tensor<T>&, Activation);           \
  template XentResult<T> softmax_xent<T>(std::span<const T>, std::size_t);                           \
  template Tensor<T> embedding_lookup<T>(const Tensor<T>&, std::span<const std::uint32_t>);          \
  template void embedding_backward<T>(Tensor<T>&, std::span<const std::uint32_t>, const Tensor<T>&);

SEQQA_INSTANTIATE(float)
SEQQA_INSTANTIATE(double)

#undef SEQQA_INSTANTIATE

}  // namespace seqqa
