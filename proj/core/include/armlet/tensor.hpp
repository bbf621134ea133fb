#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace armlet {

/// Dense row-major matrix of doubles.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Tensor2 from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor2 identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(double v);
  bool same_shape(const Tensor2& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;
  double max_abs() const;
  double l2_norm() const;

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Standard product; throws a shape error when a.cols() != b.rows().
Tensor2 matmul(const Tensor2& a, const Tensor2& b);

Tensor2 transpose(const Tensor2& a);

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace armlet
