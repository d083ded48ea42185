#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace quesim {

using Vec = std::vector<double>;

// Row-major dense matrix. The only linear algebra the model needs is
// matrix-vector products and rank-1 accumulation, so this stays minimal.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) {
    assert(i < rows_);
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    assert(i < rows_);
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> flat() { return {data_.data(), data_.size()}; }
  std::span<const double> flat() const { return {data_.data(), data_.size()}; }

  void fill(double v) { data_.assign(data_.size(), v); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

// y += A * x
inline void matvec_add(const Matrix& a, std::span<const double> x, Vec& y) {
  assert(a.cols() == x.size() && a.rows() == y.size());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[j];
    y[i] += acc;
  }
}

// y += A^T * x
inline void matvec_t_add(const Matrix& a, std::span<const double> x, Vec& y) {
  assert(a.rows() == x.size() && a.cols() == y.size());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) y[j] += r[j] * x[i];
  }
}

// A += u * v^T
inline void outer_add(Matrix& a, std::span<const double> u,
                      std::span<const double> v) {
  assert(a.rows() == u.size() && a.cols() == v.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < v.size(); ++j) r[j] += u[i] * v[j];
  }
}

}  // namespace quesim
