#include "armlet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "armlet/error.hpp"

namespace armlet {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logloss_one(double logit, int label) {
  return std::max(logit, 0.0) - logit * static_cast<double>(label) +
         std::log1p(std::exp(-std::abs(logit)));
}

double logloss(std::span<const double> logits, std::span<const int> labels) {
  if (logits.empty()) throw Error(ErrorKind::kArgument, "logloss of an empty set");
  if (logits.size() != labels.size()) throw Error(ErrorKind::kShape, "logloss length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) s += logloss_one(logits[i], labels[i]);
  return s / static_cast<double>(logits.size());
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::kShape, "auc length mismatch");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y != 0 ? 1 : 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw Error(ErrorKind::kMetric, "AUC needs both positive and negative labels");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of 1-based average ranks of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] != 0) rank_sum += avg_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

}  // namespace armlet
