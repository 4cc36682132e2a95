// Dense real tensors with lexicographic (last-index-fastest) storage, plus the
// multilinear operations built on them: outer products, linear transforms along
// all modes, and the entrywise scalar product.
#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace otd {

// Shape of a dense tensor: dimensions (n_1,...,n_d), every n_i >= 1, d >= 1.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<std::int64_t> dims);
  Shape(std::initializer_list<std::int64_t> dims);

  const std::vector<std::int64_t>& dims() const { return dims_; }
  std::int64_t dim(std::int64_t mode) const;  // 1-based mode number
  std::int64_t degree() const { return static_cast<std::int64_t>(dims_.size()); }
  std::int64_t element_count() const;
  std::string to_string() const;

  friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }
  friend bool operator!=(const Shape& a, const Shape& b) { return !(a == b); }

 private:
  std::vector<std::int64_t> dims_;
};

// Row-major strides for a shape: stride of the last mode is 1.
std::vector<std::int64_t> strides_of(const Shape& shape);

// Dense tensor of doubles. Entries are stored flat in lexicographic order with
// the LAST index varying fastest; external entry access is 1-based.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<double> values);

  // Builds a tensor by evaluating f at every (1-based) multi-index.
  static Tensor from_entries(
      const Shape& shape,
      const std::function<double(std::span<const std::int64_t>)>& f);

  const Shape& shape() const { return shape_; }
  std::int64_t degree() const { return shape_.degree(); }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Checked 1-based entry access; throws std::out_of_range on bad indices.
  double entry(std::span<const std::int64_t> idx) const;
  double entry(std::initializer_list<std::int64_t> idx) const;

  // Unchecked 0-based flat access for inner loops.
  double operator[](std::int64_t flat) const { return values_[flat]; }
  double& operator[](std::int64_t flat) { return values_[flat]; }

  // 0-based flat offset of a 1-based multi-index; throws on bad indices.
  std::int64_t flat_index(std::span<const std::int64_t> idx) const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double factor);

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Degree-2 tensor with named rows/cols; row-major storage, which coincides
// with the tensor layout, so conversions are plain buffer copies.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::int64_t rows, std::int64_t cols);  // zero-filled
  Matrix(std::int64_t rows, std::int64_t cols, std::vector<double> values);

  static Matrix identity(std::int64_t n);
  static Matrix from_tensor(const Tensor& t);  // requires degree 2
  Tensor to_tensor() const;

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Unchecked 0-based access.
  double operator()(std::int64_t i, std::int64_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::int64_t i, std::int64_t j) { return values_[i * cols_ + j]; }

  Matrix transposed() const;
  std::vector<double> column(std::int64_t j) const;
  void set_column(std::int64_t j, std::span<const double> v);

  friend Matrix operator*(const Matrix& a, const Matrix& b);

 private:
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<double> values_;
};

// (A o T): applies A along every mode of T. Requires every dim of T to equal
// A.cols(); the result has every dim equal to A.rows(). Computed as d
// successive mode-wise contractions, never as the naive d-fold sum.
Tensor apply_linear(const Matrix& a, const Tensor& t);

// Plain matrix-vector product.
std::vector<double> apply_linear_vec(const Matrix& a, std::span<const double> v);

// Outer product; result shape is the concatenation of the operand shapes.
Tensor outer_product(const Tensor& a, const Tensor& b);

// Left fold of outer_product over two or more operands.
Tensor outer_product(std::span<const Tensor> operands);

// v^{(x)d}: the d-fold outer power of a vector, shape n^{x d}; d >= 1.
Tensor outer_power(std::span<const double> v, std::int64_t d);

// Entrywise scalar product; requires identical shapes.
double scalar_product(const Tensor& a, const Tensor& b);

double frobenius_norm(const Tensor& t);

// Euclidean norm / scalar product of plain vectors.
double vec_norm(std::span<const double> v);
double vec_dot(std::span<const double> a, std::span<const double> b);

// Reorders modes: dest_of_src[p] (1-based, a permutation of [d]) is the mode
// position in the result where source mode p+1 lands.
Tensor permute_modes(const Tensor& t, std::span<const std::int64_t> dest_of_src);

}  // namespace otd
