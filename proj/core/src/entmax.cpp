#include "armlet/entmax.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "armlet/error.hpp"

namespace armlet {

namespace {

void require_nonempty(std::span<const double> z) {
  if (z.empty()) throw Error(ErrorKind::kArgument, "empty score vector");
}

double max_of(std::span<const double> z) { return *std::max_element(z.begin(), z.end()); }

void softmax_into(std::span<const double> z, std::span<double> out) {
  const double zmax = max_of(z);
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - zmax);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
}

void sparsemax_into(std::span<const double> z, std::span<double> out) {
  const double zmax = max_of(z);
  std::vector<double> sorted(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) sorted[i] = z[i] - zmax;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    const double kk = static_cast<double>(k + 1);
    // The first element (x = 0) always qualifies since 1 > 0.
    if (1.0 + kk * sorted[k] > cumsum) tau = (cumsum - 1.0) / kk;
    else break;
  }
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::max(z[i] - zmax - tau, 0.0);
}

// Raises a nonnegative base to 1/(alpha-1); integer exponents skip pow().
struct PowerFn {
  explicit PowerFn(double alpha) : exponent(1.0 / (alpha - 1.0)) {
    const double r = std::round(exponent);
    if (std::abs(exponent - r) < 1e-12 && r >= 1.0 && r <= 4.0) integer = static_cast<int>(r);
  }
  double operator()(double base) const {
    switch (integer) {
      case 1: return base;
      case 2: return base * base;
      case 3: return base * base * base;
      case 4: { const double b2 = base * base; return b2 * b2; }
      default: return std::pow(base, exponent);
    }
  }
  double exponent;
  int integer = 0;
};

void bisect_into(std::span<const double> z, double alpha, const BisectionOptions& opts,
                 std::span<double> out) {
  const double zmax = max_of(z);
  const double am1 = alpha - 1.0;
  const PowerFn power(alpha);
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = am1 * (z[i] - zmax);

  auto mass = [&](double tau) {
    double s = 0.0;
    for (double x : out) {
      const double d = x - tau;
      if (d > 0.0) s += power(d);
    }
    return s;
  };

  // mass(-1) >= 1 because the maximal coordinate contributes exactly 1.
  double lo = -1.0;
  double hi = 0.0;
  double tau = 0.5 * (lo + hi);
  double f = mass(tau) - 1.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    tau = 0.5 * (lo + hi);
    f = mass(tau) - 1.0;
    if (std::abs(f) < opts.tol) break;
    if (f > 0.0) lo = tau;
    else hi = tau;
  }
  if (!(std::abs(f) < 1e-6)) {
    throw Error(ErrorKind::kNumeric, "entmax bisection did not converge (residual " +
                                         std::to_string(f) + ")");
  }
  double sum = 0.0;
  for (auto& x : out) {
    const double d = x - tau;
    x = d > 0.0 ? power(d) : 0.0;
    sum += x;
  }
  for (auto& x : out) x /= sum;
}

// For 1 < alpha < 2 the mass is convex and decreasing in tau, so Newton from
// the left end never overshoots and converges quadratically.
void newton_into(std::span<const double> z, double alpha, std::span<double> out) {
  const double zmax = max_of(z);
  const double am1 = alpha - 1.0;
  const double p = 1.0 / am1;
  const PowerFn power(alpha);
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = am1 * (z[i] - zmax);

  // Jensen on the convex terms: tau* >= mean - m^(1-alpha). Also tau* >= -1.
  double mean = 0.0;
  for (double x : out) mean += x;
  const double m = static_cast<double>(out.size());
  mean /= m;
  double tau = std::max(-1.0, mean - std::pow(m, -am1));
  for (int it = 0; it < 100; ++it) {
    double f = -1.0, df = 0.0;
    for (double x : out) {
      const double d = x - tau;
      if (d > 0.0) {
        const double pd = power(d);
        f += pd;
        df += pd / d;
      }
    }
    if (f < 1e-14) break;
    const double step = f / (p * df);
    tau += step;
    if (step < 1e-16 * (1.0 + std::abs(tau))) break;
  }
  double sum = 0.0;
  for (auto& x : out) {
    const double d = x - tau;
    x = d > 0.0 ? power(d) : 0.0;
    sum += x;
  }
  for (auto& x : out) x /= sum;
}

void check_alpha(double alpha) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::kArgument, "entmax alpha must be >= 1");
}

}  // namespace

std::vector<double> softmax(std::span<const double> z) {
  require_nonempty(z);
  std::vector<double> out(z.size());
  softmax_into(z, out);
  return out;
}

std::vector<double> sparsemax_sort(std::span<const double> z) {
  require_nonempty(z);
  std::vector<double> out(z.size());
  sparsemax_into(z, out);
  return out;
}

std::vector<double> entmax_bisect(std::span<const double> z, double alpha,
                                  const BisectionOptions& opts) {
  require_nonempty(z);
  if (!(alpha > 1.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::kArgument, "bisection entmax needs alpha > 1");
  std::vector<double> out(z.size());
  bisect_into(z, alpha, opts, out);
  return out;
}

void entmax_into(std::span<const double> z, double alpha, std::span<double> out) {
  require_nonempty(z);
  check_alpha(alpha);
  if (out.size() != z.size()) throw Error(ErrorKind::kShape, "entmax output length mismatch");
  for (double v : z)
    if (!std::isfinite(v)) throw Error(ErrorKind::kNumeric, "non-finite entmax score");
  if (alpha == 1.0) softmax_into(z, out);
  else if (alpha == 2.0) sparsemax_into(z, out);
  else if (alpha < 2.0) newton_into(z, alpha, out);
  else bisect_into(z, alpha, BisectionOptions{}, out);
}

std::vector<double> entmax(std::span<const double> z, double alpha) {
  std::vector<double> out(z.size());
  entmax_into(z, alpha, out);
  return out;
}

void entmax_jvp_into(std::span<const double> p, double alpha, std::span<const double> dout,
                     std::span<double> out) {
  if (p.size() != dout.size() || p.size() != out.size())
    throw Error(ErrorKind::kShape, "entmax_jvp length mismatch");
  check_alpha(alpha);
  const double power = 2.0 - alpha;
  double s_sum = 0.0;
  double s_dot = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double s = 0.0;
    if (p[i] > 0.0) {
      if (power == 1.0) s = p[i];
      else if (power == 0.0) s = 1.0;
      else if (power == 0.5) s = std::sqrt(p[i]);
      else s = std::pow(p[i], power);
    }
    out[i] = s;
    s_sum += s;
    s_dot += s * dout[i];
  }
  const double scale = s_dot / s_sum;
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = out[i] * (dout[i] - scale);
}

std::vector<double> entmax_jvp(std::span<const double> p, double alpha,
                               std::span<const double> dout) {
  std::vector<double> out(p.size());
  entmax_jvp_into(p, alpha, dout, out);
  return out;
}

}  // namespace armlet
