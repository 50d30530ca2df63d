#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace logifold {

using Point = std::vector<double>;

/// x -> M x + b with M stored row-major (rows x cols).
///
/// Row evaluation always sums `offset + m[i][0] x[0] + ... + m[i][n-1] x[n-1]`
/// left to right; guards, forward passes and semilinear membership all go
/// through `row_value` so that identical rows give bit-identical results.
class AffineMap {
 public:
  AffineMap() = default;
  AffineMap(std::size_t rows, std::size_t cols);
  AffineMap(std::size_t rows, std::size_t cols, std::vector<double> matrix, std::vector<double> offset);

  static AffineMap identity(std::size_t n);
  static AffineMap from_rows(const std::vector<std::vector<double>>& rows, const std::vector<double>& offset);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return matrix_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return matrix_[r * cols_ + c]; }
  double& offset(std::size_t r) { return offset_[r]; }
  double offset(std::size_t r) const { return offset_[r]; }

  std::span<const double> row(std::size_t r) const { return {matrix_.data() + r * cols_, cols_}; }
  const std::vector<double>& matrix() const { return matrix_; }
  const std::vector<double>& offsets() const { return offset_; }

  double row_value(std::size_t r, std::span<const double> x) const;
  Point apply(std::span<const double> x) const;

  /// True when every coefficient of row r is exactly zero.
  bool row_is_constant(std::size_t r) const;

  /// this ∘ inner
  AffineMap compose(const AffineMap& inner) const;
  AffineMap negated() const;
  /// Inserts `before` zero columns in front and `after` zero columns behind.
  AffineMap padded(std::size_t before, std::size_t after) const;
  AffineMap stacked(const AffineMap& below) const;
  AffineMap select_rows(const std::vector<std::size_t>& indices) const;

  bool all_finite() const;
  bool operator==(const AffineMap&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> matrix_;
  std::vector<double> offset_;
};

enum class Sign : char { Plus = '+', Minus = '-' };

/// Chamber membership of a point with respect to an affine map.
/// Component i is PLUS iff l_i(x) >= 0.
class SignVector {
 public:
  SignVector() = default;
  explicit SignVector(std::string signs);

  static bool is_valid_key(const std::string& s);

  std::size_t size() const { return signs_.size(); }
  Sign operator[](std::size_t i) const { return static_cast<Sign>(signs_[i]); }
  void push_back(Sign s) { signs_.push_back(static_cast<char>(s)); }
  const std::string& str() const { return signs_; }

  auto operator<=>(const SignVector&) const = default;

 private:
  std::string signs_;
};

SignVector sign_vector(const AffineMap& l, std::span<const double> x);

/// All 2^k sign vectors of length k in lexicographic order ('+' < '-').
std::vector<SignVector> all_sign_vectors(std::size_t k);

/// "%.17g" formatting used for every number written as text.
std::string format_double(double v);
std::string format_point(std::span<const double> x);

}  // namespace logifold
