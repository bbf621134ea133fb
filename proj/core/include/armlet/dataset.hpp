#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "armlet/schema.hpp"

namespace armlet {

/// Category index used for tokens outside a field's vocabulary.
inline constexpr std::int32_t kUnknownCategory = -1;

/// Lower bound applied after min-max scaling so that a numerical field
/// never multiplies its embedding by zero.
inline constexpr double kScaleFloor = 1e-6;

struct FeatureValue {
  std::int32_t index = 0;  // category index, 0 for numerical fields
  double value = 1.0;      // scaled value in (0,1] for numerical fields
};

struct Instance {
  std::vector<FeatureValue> features;  // schema field order
  int label = 0;
};

struct Dataset {
  std::shared_ptr<const Schema> schema;
  std::vector<Instance> instances;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }
};

enum class DataFormat { kCsv, kIndexed };

struct LoadReport {
  std::size_t rows = 0;
  std::size_t clamped = 0;
  std::size_t unknown_tokens = 0;
  std::vector<std::string> warnings;
};

/// Min-max scaling into (0,1] with the kScaleFloor floor; values outside
/// [min, max] are clamped first.
double scale_numeric(const FieldSpec& field, double raw);

/// Throws a data error unless `x` conforms to `schema`.
void validate_instance(const Instance& x, const Schema& schema);

Dataset load_dataset(const std::filesystem::path& path, std::shared_ptr<const Schema> schema,
                     DataFormat format, LoadReport* report = nullptr);
Dataset parse_dataset(const std::string& text, std::shared_ptr<const Schema> schema,
                      DataFormat format, LoadReport* report = nullptr);

/// Writes instances in the indexed format. Numerical values are mapped back
/// to the raw range, so a reload reproduces them up to the scale floor.
std::string to_indexed(const Dataset& data);

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

/// Shuffled disjoint partition; valid/test get floor(ratio * N) rows and the
/// remainder goes to train.
std::tuple<Dataset, Dataset, Dataset> split(const Dataset& data, const SplitRatios& ratios,
                                            std::uint64_t seed);

DataFormat parse_format(const std::string& name);
/// Picks the format from the file extension: .csv or anything else = indexed.
DataFormat guess_format(const std::filesystem::path& path);

}  // namespace armlet
