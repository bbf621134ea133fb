#pragma once

#include <span>
#include <vector>

namespace armlet {

/// Max-subtracted softmax. Throws an argument error on empty input.
std::vector<double> softmax(std::span<const double> z);

/// Sparsemax (alpha = 2) by sorting and the closed-form threshold.
std::vector<double> sparsemax_sort(std::span<const double> z);

struct BisectionOptions {
  int max_iter = 64;
  double tol = 1e-12;
};

/// alpha-entmax by bisection on the threshold tau of
///   sum_j max((alpha-1) z_j - tau, 0)^(1/(alpha-1)) = 1.
/// Valid for any alpha > 1, including alpha = 2.
std::vector<double> entmax_bisect(std::span<const double> z, double alpha,
                                  const BisectionOptions& opts = {});

/// argmax_p <p, z> + H_alpha(p) over the simplex. Dispatches to softmax for
/// alpha = 1, the sort-based projection for alpha = 2, Newton on tau for
/// 1 < alpha < 2 and bisection above 2.
std::vector<double> entmax(std::span<const double> z, double alpha);

/// J^T dout for the entmax output p, with J = diag(s) - s s^T / sum(s) and
/// s_i = p_i^(2-alpha) on the support, 0 elsewhere.
std::vector<double> entmax_jvp(std::span<const double> p, double alpha,
                               std::span<const double> dout);

/// In-place variant used by the model backward passes.
void entmax_jvp_into(std::span<const double> p, double alpha, std::span<const double> dout,
                     std::span<double> out);

/// Writes entmax(z) into out (same length as z).
void entmax_into(std::span<const double> z, double alpha, std::span<double> out);

}  // namespace armlet
