#pragma once

#include <span>

namespace armlet {

/// Mean binary cross entropy of sigmoid(logits), evaluated as
/// max(l, 0) - l*y + log1p(exp(-|l|)).
double logloss(std::span<const double> logits, std::span<const int> labels);

/// Per-instance term of logloss.
double logloss_one(double logit, int label);

double sigmoid(double x);

/// Mann-Whitney U / (#pos * #neg) with average ranks for ties. Throws a
/// metric error unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace armlet
