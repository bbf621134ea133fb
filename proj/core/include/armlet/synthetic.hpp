#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "armlet/dataset.hpp"

namespace armlet {

struct PlantedTerm {
  std::vector<std::size_t> fields;
  double coeff = 0.0;
};

/// Categorical-only generator with multiplicative planted interactions:
///   y ~ Bernoulli(sigmoid(bias + sum_t coeff_t * prod_{j in t} u[j][x_j] + noise))
/// where every u[j][c] ~ N(0, 1) is drawn once per seed.
struct SyntheticSpec {
  std::size_t m = 0;
  std::vector<std::size_t> cardinalities;
  std::vector<PlantedTerm> terms;
  double bias = 0.0;
  double noise = 0.0;  // stddev of Gaussian noise added to the logit
  std::size_t n = 0;
};

struct SyntheticData {
  Dataset data;
  std::vector<std::vector<double>> latents;  // [field][category]
  std::vector<PlantedTerm> terms;
  std::vector<double> true_logits;  // per instance, noise excluded
};

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

SyntheticSpec parse_synthetic_spec(const std::string& text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

/// All-categorical schema with fields named f0, f1, ...
Schema synthetic_schema(const std::vector<std::size_t>& cardinalities);

}  // namespace armlet
