#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "otd/rng.hpp"
#include "otd/tensor.hpp"
#include "support/test_support.hpp"

using otd::Matrix;
using otd::Shape;
using otd::Tensor;

TEST_CASE("entry access is 1-based lexicographic with the last index fastest") {
  const Tensor t(Shape({2, 2, 2}), {1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(t.entry({1, 1, 1}) == 1.0);
  CHECK(t.entry({1, 2, 2}) == 4.0);
  CHECK(t.entry({2, 1, 2}) == 6.0);
  CHECK(t.entry({2, 2, 1}) == 7.0);

  const Tensor id = Matrix::identity(2).to_tensor();
  CHECK(id.entry({1, 1}) == 1.0);
  CHECK(id.entry({1, 2}) == 0.0);
}

TEST_CASE("entry access rejects out-of-range and wrong-degree indices") {
  const Tensor t(Shape({2, 3}), std::vector<double>(6, 0.0));
  CHECK_THROWS_AS((void)t.entry({0, 1}), std::out_of_range);
  CHECK_THROWS_AS((void)t.entry({2, 4}), std::out_of_range);
  CHECK_THROWS_AS((void)t.entry({1, 1, 1}), std::out_of_range);
  CHECK_THROWS_AS((void)Tensor().entry({1}), std::out_of_range);
}

TEST_CASE("from_entries fills every multi-index in storage order") {
  const auto t = Tensor::from_entries(Shape({2, 3}), [](std::span<const std::int64_t> idx) {
    return static_cast<double>(10 * idx[0] + idx[1]);
  });
  CHECK(t.values() == std::vector<double>{11, 12, 13, 21, 22, 23});
  // Round trip: reading back through entry reproduces the defining function.
  for (std::int64_t i = 1; i <= 2; ++i) {
    for (std::int64_t j = 1; j <= 3; ++j) {
      CHECK(t.entry({i, j}) == static_cast<double>(10 * i + j));
    }
  }
}

TEST_CASE("shape validation rejects empty and non-positive dimensions") {
  CHECK_THROWS_AS(Shape(std::vector<std::int64_t>{}), std::invalid_argument);
  CHECK_THROWS_AS(Shape({2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(Shape({-1}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor(Shape({2, 2}), {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("apply_linear with the identity returns the tensor unchanged") {
  otd::Rng rng(11);
  const auto t = support::random_tensor(rng, Shape({3, 3, 3}));
  const auto out = otd::apply_linear(Matrix::identity(3), t);
  CHECK(support::max_abs_diff(t, out) == 0.0);
}

TEST_CASE("apply_linear matches the literal multi-sum definition") {
  otd::Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const std::int64_t d = support::rand_int(rng, 1, 3);
    const std::int64_t n = support::rand_int(rng, 1, 4);
    const std::int64_t m = support::rand_int(rng, 1, 4);
    const auto t = support::random_tensor(rng, Shape(std::vector<std::int64_t>(d, n)));
    const auto a = support::random_matrix(rng, m, n);
    const auto fast = otd::apply_linear(a, t);
    const auto slow = support::naive_apply_linear(a, t);
    REQUIRE(fast.shape() == slow.shape());
    const double scale = std::max(1.0, otd::frobenius_norm(slow));
    CHECK(support::max_abs_diff(fast, slow) <= 1e-12 * scale);
  }
}

TEST_CASE("apply_linear composes contravariantly") {
  otd::Rng rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    const auto t = support::random_tensor(rng, Shape({3, 3, 3}));
    const auto a = support::random_matrix(rng, 4, 3);
    const auto b = support::random_matrix(rng, 2, 4);
    const auto once = otd::apply_linear(b * a, t);
    const auto twice = otd::apply_linear(b, otd::apply_linear(a, t));
    const double scale = std::max(1.0, otd::frobenius_norm(once));
    CHECK(support::max_abs_diff(once, twice) <= 1e-12 * scale);
  }
}

TEST_CASE("apply_linear rejects dimension mismatches") {
  const Tensor t(Shape({2, 3}), std::vector<double>(6, 1.0));
  CHECK_THROWS_AS(otd::apply_linear(Matrix::identity(2), t), std::invalid_argument);
}

TEST_CASE("apply_linear_vec is the plain matrix-vector product") {
  const Matrix a(2, 2, {1, 1, 0, 1});
  const std::vector<double> v{1, 2};
  CHECK(otd::apply_linear_vec(a, v) == std::vector<double>{3, 2});
  CHECK(otd::apply_linear_vec(Matrix::identity(3), std::vector<double>{4, 5, 6}) ==
        std::vector<double>{4, 5, 6});
}

TEST_CASE("transforming a power equals powering the transformed vector") {
  otd::Rng rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    const auto a = support::random_matrix(rng, 3, 3);
    const auto v = rng.gaussian_vector(3);
    const auto lhs = otd::apply_linear(a, otd::outer_power(v, 3));
    const auto rhs = otd::outer_power(otd::apply_linear_vec(a, v), 3);
    const double scale = std::max(1.0, otd::frobenius_norm(rhs));
    CHECK(support::max_abs_diff(lhs, rhs) <= 1e-12 * scale);
  }
}

TEST_CASE("outer_product lays out entries as products of its operands") {
  const Tensor a(Shape({2}), {1, 2});
  const Tensor b(Shape({2}), {3, 4});
  const auto ab = otd::outer_product(a, b);
  CHECK(ab.shape() == Shape({2, 2}));
  CHECK(ab.values() == std::vector<double>{3, 4, 6, 8});

  // Appending a singleton mode only reshapes.
  const Tensor one(Shape({1}), {1});
  const auto a1 = otd::outer_product(a, one);
  CHECK(a1.shape() == Shape({2, 1}));
  CHECK(a1.values() == a.values());
}

TEST_CASE("outer_product over a span folds left") {
  const Tensor a(Shape({2}), {1, 2});
  const Tensor b(Shape({3}), {1, 0, 1});
  const Tensor c(Shape({2}), {5, 7});
  const std::vector<Tensor> ops{a, b, c};
  const auto folded = otd::outer_product(ops);
  const auto manual = otd::outer_product(otd::outer_product(a, b), c);
  CHECK(folded.shape() == Shape({2, 3, 2}));
  CHECK(folded.values() == manual.values());
  CHECK_THROWS_AS(otd::outer_product(std::span<const Tensor>{}), std::invalid_argument);
}

TEST_CASE("scalar products of outer products factor over the operands") {
  otd::Rng rng(15);
  for (int rep = 0; rep < 20; ++rep) {
    const auto sa = support::random_shape(rng, 2, 3);
    const auto sb = support::random_shape(rng, 2, 3);
    const auto a = support::random_tensor(rng, sa);
    const auto b = support::random_tensor(rng, sb);
    const auto c = support::random_tensor(rng, sa);
    const auto d = support::random_tensor(rng, sb);
    const double lhs = otd::scalar_product(otd::outer_product(a, b), otd::outer_product(c, d));
    const double rhs = otd::scalar_product(a, c) * otd::scalar_product(b, d);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("outer_power places a basis vector's power at one corner") {
  const std::vector<double> e1{1, 0, 0};
  const auto p = otd::outer_power(e1, 3);
  CHECK(p.shape() == Shape({3, 3, 3}));
  CHECK(p.entry({1, 1, 1}) == 1.0);
  CHECK(otd::frobenius_norm(p) == 1.0);

  const std::vector<double> v{1, -1};
  const auto q = otd::outer_power(v, 2);
  CHECK(q.values() == std::vector<double>{1, -1, -1, 1});
  CHECK_THROWS_AS(otd::outer_power(v, 0), std::invalid_argument);
}

TEST_CASE("powers of orthogonal vectors stay orthogonal") {
  otd::Rng rng(16);
  for (int rep = 0; rep < 10; ++rep) {
    auto u = rng.unit_vector(4);
    auto v = rng.unit_vector(4);
    const double d = otd::vec_dot(u, v);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= d * u[k];
    const double nrm = otd::vec_norm(v);
    REQUIRE(nrm > 1e-8);
    for (double& x : v) x /= nrm;
    const double cross = otd::scalar_product(otd::outer_power(u, 3), otd::outer_power(v, 3));
    CHECK(std::abs(cross) <= 1e-12);
  }
}

TEST_CASE("scalar_product sums entrywise products") {
  const Tensor eye = Matrix::identity(2).to_tensor();
  const Tensor off(Shape({2, 2}), {0, 1, 1, 0});
  CHECK(otd::scalar_product(eye, off) == 0.0);

  const Tensor t(Shape({2, 2}), {1, 2, 3, 4});
  CHECK(otd::scalar_product(t, t) == 30.0);
  CHECK_THROWS_AS(otd::scalar_product(t, Tensor(Shape({4}), {1, 2, 3, 4})),
                  std::invalid_argument);
}

TEST_CASE("degree-2 scalar product equals the matrix trace product") {
  otd::Rng rng(17);
  const auto a = support::random_matrix(rng, 3, 4);
  const auto b = support::random_matrix(rng, 3, 4);
  double trace = 0.0;
  const auto atb = a.transposed() * b;
  for (std::int64_t k = 0; k < 4; ++k) trace += atb(k, k);
  CHECK(otd::scalar_product(a.to_tensor(), b.to_tensor()) ==
        doctest::Approx(trace).epsilon(1e-12));
}

TEST_CASE("frobenius_norm on basic inputs") {
  CHECK(otd::frobenius_norm(Tensor(Shape({2, 2}))) == 0.0);
  CHECK(otd::frobenius_norm(otd::outer_power(std::vector<double>{0, 1, 0}, 3)) == 1.0);
  const Tensor t(Shape({2}), {2.0, 0.0});
  CHECK(otd::frobenius_norm(t) == 2.0);
}

TEST_CASE("permute_modes relocates each source mode to its destination") {
  const Tensor t(Shape({2, 3}), {1, 2, 3, 4, 5, 6});
  const std::vector<std::int64_t> swap{2, 1};
  const auto tt = otd::permute_modes(t, swap);
  CHECK(tt.shape() == Shape({3, 2}));
  for (std::int64_t i = 1; i <= 2; ++i) {
    for (std::int64_t j = 1; j <= 3; ++j) CHECK(tt.entry({j, i}) == t.entry({i, j}));
  }
}

TEST_CASE("permute_modes composed with its inverse is the identity") {
  otd::Rng rng(18);
  for (int rep = 0; rep < 10; ++rep) {
    const auto shape = support::random_shape(rng, 4, 4);
    const auto t = support::random_tensor(rng, shape);
    const std::int64_t d = shape.degree();
    std::vector<std::int64_t> dest(static_cast<std::size_t>(d));
    {
      auto idx = support::random_flattening(rng, d, d).assignment();
      dest = idx;  // a random permutation of 1..d
    }
    std::vector<std::int64_t> inverse(static_cast<std::size_t>(d));
    for (std::int64_t p = 0; p < d; ++p) inverse[static_cast<std::size_t>(dest[static_cast<std::size_t>(p)] - 1)] = p + 1;
    const auto round = otd::permute_modes(otd::permute_modes(t, dest), inverse);
    REQUIRE(round.shape() == t.shape());
    CHECK(round.values() == t.values());
  }
}

TEST_CASE("matrix products and transposes behave as expected") {
  const Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix b(3, 2, {7, 8, 9, 10, 11, 12});
  const auto ab = a * b;
  CHECK(ab.rows() == 2);
  CHECK(ab.cols() == 2);
  CHECK(ab(0, 0) == 58.0);
  CHECK(ab(1, 1) == 154.0);
  const auto at = a.transposed();
  CHECK(at.rows() == 3);
  CHECK(at(2, 1) == 6.0);
  CHECK_THROWS_AS(b * Matrix(3, 1, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("matrix/tensor conversion requires degree 2 and preserves layout") {
  const Tensor t(Shape({2, 3}), {1, 2, 3, 4, 5, 6});
  const auto m = Matrix::from_tensor(t);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 0) == 4.0);
  CHECK(m.to_tensor().values() == t.values());
  CHECK_THROWS_AS(Matrix::from_tensor(Tensor(Shape({2, 2, 2}))), std::invalid_argument);
  CHECK(m.column(1) == std::vector<double>{2, 5});
}
