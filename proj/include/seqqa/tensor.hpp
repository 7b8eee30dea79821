#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "seqqa/errors.hpp"

namespace seqqa {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Dense row-major array tagged with its shape. Every dimension is positive
/// and `size() == product(shape)`.
///
/// Instantiated for float (training and serving) and double (gradient checks).
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0});
  Tensor(Shape shape, std::vector<T> data);

  /// Builds a 2-D tensor from nested rows; all rows must have equal width.
  static Tensor matrix(std::initializer_list<std::initializer_list<T>> rows);
  static Tensor vector(std::initializer_list<T> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  const T& at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  /// View of row `r` of a 2-D tensor.
  std::span<T> row(std::size_t r) { return std::span<T>(data_).subspan(r * shape_[1], shape_[1]); }
  std::span<const T> row(std::size_t r) const {
    return std::span<const T>(data_).subspan(r * shape_[1], shape_[1]);
  }

  void fill(T value);
  void set_zero() { fill(T{0}); }
  Tensor zeros_like() const { return Tensor(shape_); }

  std::string shape_string() const { return shape_to_string(shape_); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

enum class Activation { sigmoid, tanh };

template <typename T>
T sigmoid(T x);

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
struct MatmulGrads {
  Tensor<T> a;
  Tensor<T> b;
};

/// Gradients of `matmul(a, b)` given the upstream gradient of its output.
template <typename T>
MatmulGrads<T> matmul_backward(const Tensor<T>& a, const Tensor<T>& b, const Tensor<T>& grad_out);

/// out += m · x for a 2-D `m` of shape [rows×cols].
template <typename T>
void matvec_add(const Tensor<T>& m, std::span<const T> x, std::span<T> out);

/// out += mᵀ · y.
template <typename T>
void matvec_transposed_add(const Tensor<T>& m, std::span<const T> y, std::span<T> out);

/// m += y · xᵀ.
template <typename T>
void outer_add(Tensor<T>& m, std::span<const T> y, std::span<const T> x);

template <typename T>
Tensor<T> activate(const Tensor<T>& x, Activation kind);

/// Gradient w.r.t. the activation input, expressed through the activation
/// output `y` (σ' = y(1−y), tanh' = 1−y²).
template <typename T>
Tensor<T> activate_backward(const Tensor<T>& y, const Tensor<T>& grad_y, Activation kind);

template <typename T>
struct XentResult {
  T loss;
  std::vector<T> grad;  // softmax(logits) − onehot(target)
};

/// Cross entropy of a softmax over `logits` against `target`, with the max
/// logit subtracted first.
template <typename T>
XentResult<T> softmax_xent(std::span<const T> logits, std::size_t target);

/// Rows of `table` selected by `ids`, stacked into [ids.size() × dim].
template <typename T>
Tensor<T> embedding_lookup(const Tensor<T>& table, std::span<const std::uint32_t> ids);

/// Scatter-adds each row of `grad_rows` into `table_grad` at the matching id.
template <typename T>
void embedding_backward(Tensor<T>& table_grad, std::span<const std::uint32_t> ids,
                        const Tensor<T>& grad_rows);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking (64-bit only).

struct GradCheckOptions {
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  std::size_t full_check_limit = 1000;  // tensors up to this size are checked exhaustively
  std::size_t sample_count = 200;       // components sampled from larger tensors
  std::uint64_t seed = 17;
};

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradCheckParam {
  std::string name;
  Tensor<double>* value;           // perturbed in place, restored afterwards
  const Tensor<double>* analytic;  // gradient to verify
};

double relative_error(double analytic, double numeric);

/// Compares analytic gradients against central differences of `loss`.
/// Throws Error("gradcheck") if the loss is non-finite at a perturbed point.
GradCheckReport grad_check(const std::function<double()>& loss, std::span<const GradCheckParam> params,
                           const GradCheckOptions& options = {});

}  // namespace seqqa
