#include "otd/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace otd {

Shape::Shape(std::vector<std::int64_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) {
    throw std::invalid_argument("Shape: degree must be >= 1");
  }
  for (std::int64_t n : dims_) {
    if (n < 1) {
      throw std::invalid_argument("Shape: every dimension must be >= 1, got " +
                                  std::to_string(n));
    }
  }
}

Shape::Shape(std::initializer_list<std::int64_t> dims)
    : Shape(std::vector<std::int64_t>(dims)) {}

std::int64_t Shape::dim(std::int64_t mode) const {
  if (mode < 1 || mode > degree()) {
    throw std::out_of_range("Shape: mode " + std::to_string(mode) +
                            " outside [1," + std::to_string(degree()) + "]");
  }
  return dims_[mode - 1];
}

std::int64_t Shape::element_count() const {
  std::int64_t count = 1;
  for (std::int64_t n : dims_) count *= n;
  return count;
}

std::string Shape::to_string() const {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i > 0) out << ",";
    out << dims_[i];
  }
  out << ")";
  return out.str();
}

std::vector<std::int64_t> strides_of(const Shape& shape) {
  const auto& dims = shape.dims();
  std::vector<std::int64_t> strides(dims.size(), 1);
  for (std::int64_t p = static_cast<std::int64_t>(dims.size()) - 2; p >= 0; --p) {
    strides[p] = strides[p + 1] * dims[p + 1];
  }
  return strides;
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), values_(shape_.element_count(), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (static_cast<std::int64_t>(values_.size()) != shape_.element_count()) {
    throw std::invalid_argument(
        "Tensor: value count " + std::to_string(values_.size()) +
        " does not match shape " + shape_.to_string());
  }
}

Tensor Tensor::from_entries(
    const Shape& shape,
    const std::function<double(std::span<const std::int64_t>)>& f) {
  Tensor t(shape);
  const auto& dims = shape.dims();
  const std::int64_t d = shape.degree();
  std::vector<std::int64_t> idx(d, 1);
  for (std::int64_t flat = 0; flat < t.size(); ++flat) {
    t.values_[flat] = f(idx);
    for (std::int64_t p = d - 1; p >= 0; --p) {
      if (++idx[p] <= dims[p]) break;
      idx[p] = 1;
    }
  }
  return t;
}

std::int64_t Tensor::flat_index(std::span<const std::int64_t> idx) const {
  const auto& dims = shape_.dims();
  if (degree() == 0) {
    throw std::out_of_range("Tensor: entry access on an empty tensor");
  }
  if (static_cast<std::int64_t>(idx.size()) != degree()) {
    throw std::out_of_range("Tensor: index of length " +
                            std::to_string(idx.size()) + " against shape " +
                            shape_.to_string());
  }
  std::int64_t flat = 0;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    if (idx[p] < 1 || idx[p] > dims[p]) {
      throw std::out_of_range("Tensor: index " + std::to_string(idx[p]) +
                              " at mode " + std::to_string(p + 1) +
                              " outside [1," + std::to_string(dims[p]) + "]");
    }
    flat = flat * dims[p] + (idx[p] - 1);
  }
  return flat;
}

double Tensor::entry(std::span<const std::int64_t> idx) const {
  return values_[flat_index(idx)];
}

double Tensor::entry(std::initializer_list<std::int64_t> idx) const {
  return entry(std::span<const std::int64_t>(idx.begin(), idx.size()));
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (shape_ != other.shape_) {
    throw std::invalid_argument("Tensor::operator+=: shape mismatch " +
                                shape_.to_string() + " vs " +
                                other.shape_.to_string());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  if (shape_ != other.shape_) {
    throw std::invalid_argument("Tensor::operator-=: shape mismatch " +
                                shape_.to_string() + " vs " +
                                other.shape_.to_string());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Tensor& Tensor::operator*=(double factor) {
  for (double& v : values_) v *= factor;
  return *this;
}

Matrix::Matrix(std::int64_t rows, std::int64_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("Matrix: dimensions must be >= 1");
  }
}

Matrix::Matrix(std::int64_t rows, std::int64_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("Matrix: dimensions must be >= 1");
  }
  if (static_cast<std::int64_t>(values_.size()) != rows * cols) {
    throw std::invalid_argument("Matrix: value count " +
                                std::to_string(values_.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

Matrix Matrix::identity(std::int64_t n) {
  Matrix m(n, n);
  for (std::int64_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_tensor(const Tensor& t) {
  if (t.degree() != 2) {
    throw std::invalid_argument("Matrix::from_tensor: tensor of degree " +
                                std::to_string(t.degree()) + ", expected 2");
  }
  return Matrix(t.shape().dim(1), t.shape().dim(2), t.values());
}

Tensor Matrix::to_tensor() const {
  return Tensor(Shape{rows_, cols_}, values_);
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::int64_t i = 0; i < rows_; ++i) {
    for (std::int64_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

std::vector<double> Matrix::column(std::int64_t j) const {
  std::vector<double> col(rows_);
  for (std::int64_t i = 0; i < rows_; ++i) col[i] = (*this)(i, j);
  return col;
}

void Matrix::set_column(std::int64_t j, std::span<const double> v) {
  if (static_cast<std::int64_t>(v.size()) != rows_) {
    throw std::invalid_argument("Matrix::set_column: length mismatch");
  }
  for (std::int64_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) {
    throw std::invalid_argument("Matrix product: inner dimensions " +
                                std::to_string(a.cols_) + " vs " +
                                std::to_string(b.rows_));
  }
  Matrix c(a.rows_, b.cols_);
  for (std::int64_t i = 0; i < a.rows_; ++i) {
    for (std::int64_t k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::int64_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Tensor apply_linear(const Matrix& a, const Tensor& t) {
  const std::int64_t d = t.degree();
  const std::int64_t n = a.cols();
  const std::int64_t m = a.rows();
  for (std::int64_t p = 1; p <= d; ++p) {
    if (t.shape().dim(p) != n) {
      throw std::invalid_argument(
          "apply_linear: tensor mode " + std::to_string(p) + " has dimension " +
          std::to_string(t.shape().dim(p)) + ", expected " + std::to_string(n));
    }
  }
  // One mode per pass: contract the trailing mode with A, then rotate the new
  // mode to the front. After d passes the mode order is restored.
  std::vector<double> cur = t.values();
  std::vector<std::int64_t> dims = t.shape().dims();
  for (std::int64_t pass = 0; pass < d; ++pass) {
    const std::int64_t inner = dims.back();
    const std::int64_t rows = static_cast<std::int64_t>(cur.size()) / inner;
    std::vector<double> next(rows * m, 0.0);
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* src = cur.data() + r * inner;
      for (std::int64_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::int64_t j = 0; j < inner; ++j) acc += a(i, j) * src[j];
        next[i * rows + r] = acc;  // transposed write rotates the mode to front
      }
    }
    cur = std::move(next);
    dims.pop_back();
    dims.insert(dims.begin(), m);
  }
  return Tensor(Shape(dims), std::move(cur));
}

std::vector<double> apply_linear_vec(const Matrix& a, std::span<const double> v) {
  if (static_cast<std::int64_t>(v.size()) != a.cols()) {
    throw std::invalid_argument("apply_linear_vec: vector length " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(a.cols()));
  }
  std::vector<double> out(a.rows(), 0.0);
  for (std::int64_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::int64_t j = 0; j < a.cols(); ++j) acc += a(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

Tensor outer_product(const Tensor& a, const Tensor& b) {
  std::vector<std::int64_t> dims = a.shape().dims();
  const auto& bdims = b.shape().dims();
  dims.insert(dims.end(), bdims.begin(), bdims.end());
  Tensor out(Shape(std::move(dims)));
  const std::int64_t nb = b.size();
  for (std::int64_t ia = 0; ia < a.size(); ++ia) {
    const double va = a[ia];
    double* dst = out.values().data() + ia * nb;
    for (std::int64_t ib = 0; ib < nb; ++ib) dst[ib] = va * b[ib];
  }
  return out;
}

Tensor outer_product(std::span<const Tensor> operands) {
  if (operands.empty()) {
    throw std::invalid_argument("outer_product: at least one operand required");
  }
  Tensor acc = operands[0];
  for (std::size_t i = 1; i < operands.size(); ++i) {
    acc = outer_product(acc, operands[i]);
  }
  return acc;
}

Tensor outer_power(std::span<const double> v, std::int64_t d) {
  if (d < 1) {
    throw std::invalid_argument("outer_power: degree must be >= 1, got " +
                                std::to_string(d));
  }
  const std::int64_t n = static_cast<std::int64_t>(v.size());
  Tensor base(Shape{n}, std::vector<double>(v.begin(), v.end()));
  Tensor acc = base;
  for (std::int64_t k = 1; k < d; ++k) acc = outer_product(acc, base);
  return acc;
}

double scalar_product(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("scalar_product: shape mismatch " +
                                a.shape().to_string() + " vs " +
                                b.shape().to_string());
  }
  double acc = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double frobenius_norm(const Tensor& t) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < t.size(); ++i) acc += t[i] * t[i];
  return std::sqrt(acc);
}

double vec_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double vec_dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("vec_dot: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Tensor permute_modes(const Tensor& t, std::span<const std::int64_t> dest_of_src) {
  const std::int64_t d = t.degree();
  if (static_cast<std::int64_t>(dest_of_src.size()) != d) {
    throw std::invalid_argument("permute_modes: permutation length " +
                                std::to_string(dest_of_src.size()) +
                                " against degree " + std::to_string(d));
  }
  std::vector<bool> seen(d, false);
  for (std::int64_t dest : dest_of_src) {
    if (dest < 1 || dest > d || seen[dest - 1]) {
      throw std::invalid_argument(
          "permute_modes: not a permutation of 1.." + std::to_string(d));
    }
    seen[dest - 1] = true;
  }
  const auto& sdims = t.shape().dims();
  std::vector<std::int64_t> rdims(d);
  for (std::int64_t p = 0; p < d; ++p) rdims[dest_of_src[p] - 1] = sdims[p];
  Tensor out{Shape(rdims)};
  const std::vector<std::int64_t> rstrides = strides_of(out.shape());
  std::vector<std::int64_t> weight(d);
  for (std::int64_t p = 0; p < d; ++p) weight[p] = rstrides[dest_of_src[p] - 1];

  std::vector<std::int64_t> idx(d, 0);
  std::int64_t dst = 0;
  for (std::int64_t flat = 0; flat < t.size(); ++flat) {
    out[dst] = t[flat];
    for (std::int64_t p = d - 1; p >= 0; --p) {
      if (++idx[p] < sdims[p]) {
        dst += weight[p];
        break;
      }
      idx[p] = 0;
      dst -= (sdims[p] - 1) * weight[p];
    }
  }
  return out;
}

}  // namespace otd
