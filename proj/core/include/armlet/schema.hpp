#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace armlet {

enum class FieldKind { kCategorical, kNumerical };

struct FieldSpec {
  std::size_t field_id = 0;
  FieldKind kind = FieldKind::kCategorical;
  std::size_t cardinality = 0;  // categorical only
  double min = 0.0;             // numerical only
  double max = 1.0;             // numerical only
  std::string name;
  // Optional token vocabulary for CSV input; position = category index.
  std::vector<std::string> vocab;

  bool categorical() const { return kind == FieldKind::kCategorical; }
};

/// Ordered attribute fields. Every categorical field owns cardinality + 1
/// embedding rows: row 0 of the block is the shared "unknown" slot and
/// category c lives at row c + 1. A numerical field owns a single row.
class Schema {
 public:
  Schema() = default;
  /// Validates the fields and precomputes the embedding layout.
  explicit Schema(std::vector<FieldSpec> fields);

  const std::vector<FieldSpec>& fields() const { return fields_; }
  const FieldSpec& field(std::size_t pos) const { return fields_[pos]; }
  /// Number of attribute fields.
  std::size_t m() const { return fields_.size(); }
  /// Distinct features: categorical cardinalities plus one per numerical field.
  std::size_t M() const { return distinct_; }
  std::size_t num_categorical() const { return num_categorical_; }
  /// Rows of a full embedding table, unknown slots included.
  std::size_t embedding_rows() const { return distinct_ + num_categorical_; }
  std::size_t row_offset(std::size_t pos) const { return offsets_[pos]; }

  std::optional<std::size_t> position_of_id(std::size_t field_id) const;
  std::optional<std::size_t> position_of_name(const std::string& name) const;

  bool operator==(const Schema& other) const;

 private:
  std::vector<FieldSpec> fields_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> id_to_pos_;
  std::size_t distinct_ = 0;
  std::size_t num_categorical_ = 0;
};

/// Parses the JSON schema document; errors carry the offending line.
Schema parse_schema(const std::string& text);
Schema load_schema(const std::filesystem::path& path);
std::string schema_to_json(const Schema& schema, int indent = 2);

}  // namespace armlet
