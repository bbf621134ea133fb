#include "armlet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "armlet/error.hpp"

namespace armlet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kData: return "data";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kArgument: return "argument";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kOptimizer: return "optimizer";
    case ErrorKind::kMetric: return "metric";
    case ErrorKind::kForward: return "forward";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kLookup: return "lookup";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kTraining: return "training";
  }
  return "unknown";
}

Tensor2 Tensor2::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Tensor2 t(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorKind::kShape, "ragged initializer");
    for (double v : row) t.data_[i++] = v;
  }
  return t;
}

Tensor2 Tensor2::identity(std::size_t n) {
  Tensor2 t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor2::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor2::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor2::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor2::l2_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::kShape, "matmul " + std::to_string(a.rows()) + "x" +
                                       std::to_string(a.cols()) + " by " +
                                       std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Tensor2 out(a.rows(), b.cols());
  // i-k-j order keeps the inner loop contiguous in both b and out.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Tensor2 transpose(const Tensor2& a) {
  Tensor2 t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kShape, "dot length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::kShape, "axpy length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace armlet
