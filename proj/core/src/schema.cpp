#include "armlet/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "armlet/error.hpp"

namespace armlet {

using nlohmann::json;

Schema::Schema(std::vector<FieldSpec> fields) : fields_(std::move(fields)) {
  if (fields_.empty()) throw Error(ErrorKind::kSchema, "schema needs at least one field");
  const std::size_t m = fields_.size();
  id_to_pos_.assign(m, m);
  std::size_t offset = 0;
  for (std::size_t pos = 0; pos < m; ++pos) {
    const auto& f = fields_[pos];
    if (f.field_id >= m) {
      throw Error(ErrorKind::kSchema, "field_id " + std::to_string(f.field_id) +
                                          " out of range for " + std::to_string(m) + " fields");
    }
    if (id_to_pos_[f.field_id] != m)
      throw Error(ErrorKind::kSchema, "duplicate field_id " + std::to_string(f.field_id));
    id_to_pos_[f.field_id] = pos;
    offsets_.push_back(offset);
    if (f.categorical()) {
      if (f.cardinality < 1)
        throw Error(ErrorKind::kSchema, "field '" + f.name + "' needs cardinality >= 1");
      if (!f.vocab.empty() && f.vocab.size() != f.cardinality)
        throw Error(ErrorKind::kSchema, "field '" + f.name + "' vocab size != cardinality");
      distinct_ += f.cardinality;
      ++num_categorical_;
      offset += f.cardinality + 1;
    } else {
      if (!(f.max > f.min) || !std::isfinite(f.min) || !std::isfinite(f.max))
        throw Error(ErrorKind::kSchema, "field '" + f.name + "' needs max > min");
      distinct_ += 1;
      offset += 1;
    }
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      if (!fields_[a].name.empty() && fields_[a].name == fields_[b].name)
        throw Error(ErrorKind::kSchema, "duplicate field name '" + fields_[a].name + "'");
}

std::optional<std::size_t> Schema::position_of_id(std::size_t field_id) const {
  if (field_id >= id_to_pos_.size()) return std::nullopt;
  return id_to_pos_[field_id];
}

std::optional<std::size_t> Schema::position_of_name(const std::string& name) const {
  for (std::size_t i = 0; i < fields_.size(); ++i)
    if (fields_[i].name == name) return i;
  return std::nullopt;
}

bool Schema::operator==(const Schema& other) const {
  if (m() != other.m()) return false;
  for (std::size_t i = 0; i < m(); ++i) {
    const auto& a = fields_[i];
    const auto& b = other.fields_[i];
    if (a.field_id != b.field_id || a.kind != b.kind || a.name != b.name || a.vocab != b.vocab)
      return false;
    if (a.categorical() ? a.cardinality != b.cardinality : (a.min != b.min || a.max != b.max))
      return false;
  }
  return true;
}

namespace {

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

Schema parse_schema(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse,
                "schema line " + std::to_string(line_of_byte(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("fields") || !doc["fields"].is_array())
    throw Error(ErrorKind::kParse, "schema line 1: expected an object with a 'fields' list");

  std::vector<FieldSpec> fields;
  std::size_t pos = 0;
  for (const auto& jf : doc["fields"]) {
    const std::string where = "field #" + std::to_string(pos);
    try {
      FieldSpec f;
      f.field_id = jf.value("id", pos);
      f.name = jf.at("name").get<std::string>();
      const auto kind = jf.at("kind").get<std::string>();
      if (kind == "categorical") {
        f.kind = FieldKind::kCategorical;
        const auto card = jf.at("cardinality").get<long long>();
        if (card < 1) throw Error(ErrorKind::kSchema, where + " needs cardinality >= 1");
        f.cardinality = static_cast<std::size_t>(card);
        if (jf.contains("vocab")) f.vocab = jf["vocab"].get<std::vector<std::string>>();
      } else if (kind == "numerical") {
        f.kind = FieldKind::kNumerical;
        const auto range = jf.at("range").get<std::vector<double>>();
        if (range.size() != 2) throw Error(ErrorKind::kSchema, where + " range must be [min,max]");
        f.min = range[0];
        f.max = range[1];
      } else {
        throw Error(ErrorKind::kSchema, where + " has unknown kind '" + kind + "'");
      }
      fields.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
    ++pos;
  }
  return Schema(std::move(fields));
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open schema '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

std::string schema_to_json(const Schema& schema, int indent) {
  json fields = json::array();
  for (const auto& f : schema.fields()) {
    json jf = {{"id", f.field_id}, {"name", f.name}};
    if (f.categorical()) {
      jf["kind"] = "categorical";
      jf["cardinality"] = f.cardinality;
      if (!f.vocab.empty()) jf["vocab"] = f.vocab;
    } else {
      jf["kind"] = "numerical";
      jf["range"] = {f.min, f.max};
    }
    fields.push_back(std::move(jf));
  }
  return json{{"fields", fields}}.dump(indent);
}

}  // namespace armlet
