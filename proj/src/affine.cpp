#include "logifold/affine.hpp"

#include <cmath>
#include <cstdio>

#include "logifold/error.hpp"

namespace logifold {

AffineMap::AffineMap(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), matrix_(rows * cols, 0.0), offset_(rows, 0.0) {}

AffineMap::AffineMap(std::size_t rows, std::size_t cols, std::vector<double> matrix, std::vector<double> offset)
    : rows_(rows), cols_(cols), matrix_(std::move(matrix)), offset_(std::move(offset)) {
  if (matrix_.size() != rows_ * cols_ || offset_.size() != rows_) {
    fail(ErrorCode::DimensionMismatch, "affine map data does not match " + std::to_string(rows_) + "x" +
                                           std::to_string(cols_));
  }
}

AffineMap AffineMap::identity(std::size_t n) {
  AffineMap m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

AffineMap AffineMap::from_rows(const std::vector<std::vector<double>>& rows, const std::vector<double>& offset) {
  if (rows.size() != offset.size()) fail(ErrorCode::DimensionMismatch, "row count differs from offset length");
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  AffineMap m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) fail(ErrorCode::DimensionMismatch, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rows[r][c];
    m.offset(r) = offset[r];
  }
  return m;
}

double AffineMap::row_value(std::size_t r, std::span<const double> x) const {
  const double* row = matrix_.data() + r * cols_;
  double acc = offset_[r];
  for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * x[c];
  return acc;
}

Point AffineMap::apply(std::span<const double> x) const {
  if (x.size() != cols_) {
    fail(ErrorCode::DimensionMismatch,
         "point of dimension " + std::to_string(x.size()) + " for map with " + std::to_string(cols_) + " columns");
  }
  Point y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) y[r] = row_value(r, x);
  return y;
}

bool AffineMap::row_is_constant(std::size_t r) const {
  for (double v : row(r)) {
    if (v != 0.0) return false;
  }
  return true;
}

AffineMap AffineMap::compose(const AffineMap& inner) const {
  if (inner.rows_ != cols_) fail(ErrorCode::DimensionMismatch, "composition of incompatible affine maps");
  AffineMap out(rows_, inner.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    double b = offset_[r];
    for (std::size_t k = 0; k < cols_; ++k) b += at(r, k) * inner.offset_[k];
    out.offset_[r] = b;
    for (std::size_t c = 0; c < inner.cols_; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < cols_; ++k) acc += at(r, k) * inner.at(k, c);
      out.at(r, c) = acc;
    }
  }
  return out;
}

AffineMap AffineMap::negated() const {
  AffineMap out = *this;
  for (double& v : out.matrix_) v = -v;
  for (double& v : out.offset_) v = -v;
  return out;
}

AffineMap AffineMap::padded(std::size_t before, std::size_t after) const {
  AffineMap out(rows_, before + cols_ + after);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out.at(r, before + c) = at(r, c);
    out.offset_[r] = offset_[r];
  }
  return out;
}

AffineMap AffineMap::stacked(const AffineMap& below) const {
  if (rows_ == 0) return below;
  if (below.rows_ == 0) return *this;
  if (below.cols_ != cols_) fail(ErrorCode::DimensionMismatch, "stacking maps with different column counts");
  AffineMap out = *this;
  out.rows_ += below.rows_;
  out.matrix_.insert(out.matrix_.end(), below.matrix_.begin(), below.matrix_.end());
  out.offset_.insert(out.offset_.end(), below.offset_.begin(), below.offset_.end());
  return out;
}

AffineMap AffineMap::select_rows(const std::vector<std::size_t>& indices) const {
  AffineMap out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    for (std::size_t c = 0; c < cols_; ++c) out.at(i, c) = at(indices[i], c);
    out.offset_[i] = offset_[indices[i]];
  }
  return out;
}

bool AffineMap::all_finite() const {
  for (double v : matrix_) {
    if (!std::isfinite(v)) return false;
  }
  for (double v : offset_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

SignVector::SignVector(std::string signs) : signs_(std::move(signs)) {
  if (!is_valid_key(signs_)) fail(ErrorCode::InvalidArgument, "sign string '" + signs_ + "' must use only + and -");
}

bool SignVector::is_valid_key(const std::string& s) {
  for (char c : s) {
    if (c != '+' && c != '-') return false;
  }
  return true;
}

SignVector sign_vector(const AffineMap& l, std::span<const double> x) {
  if (x.size() != l.cols()) {
    fail(ErrorCode::DimensionMismatch,
         "point of dimension " + std::to_string(x.size()) + " for guard with " + std::to_string(l.cols()) + " columns");
  }
  SignVector s;
  for (std::size_t r = 0; r < l.rows(); ++r) s.push_back(l.row_value(r, x) >= 0.0 ? Sign::Plus : Sign::Minus);
  return s;
}

std::vector<SignVector> all_sign_vectors(std::size_t k) {
  std::vector<SignVector> out;
  const std::size_t count = std::size_t{1} << k;
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::string s(k, '+');
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (std::size_t{1} << (k - 1 - i))) s[i] = '-';
    }
    out.emplace_back(std::move(s));
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_point(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ",";
    s += format_double(x[i]);
  }
  return s + ")";
}

}  // namespace logifold
