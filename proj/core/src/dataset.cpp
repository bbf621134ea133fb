#include "armlet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "armlet/error.hpp"
#include "armlet/rng.hpp"

namespace armlet {

namespace {

std::string row_tag(std::size_t line_no) { return "row " + std::to_string(line_no) + ": "; }

bool parse_int(std::string_view s, long long& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_real(std::string_view s, double& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

int parse_label(std::string_view tok, std::size_t line_no) {
  long long v;
  if (parse_int(tok, v) && (v == 0 || v == 1)) return static_cast<int>(v);
  double d;
  if (parse_real(tok, d) && (d == 0.0 || d == 1.0)) return static_cast<int>(d);
  throw Error(ErrorKind::kData, row_tag(line_no) + "label must be 0 or 1, got '" +
                                    std::string(tok) + "'");
}

FeatureValue numeric_feature(const FieldSpec& f, double raw, std::size_t line_no,
                             LoadReport& report) {
  if (raw < f.min || raw > f.max) {
    ++report.clamped;
    report.warnings.push_back(row_tag(line_no) + "field '" + f.name + "' value " +
                              std::to_string(raw) + " clamped to [" + std::to_string(f.min) +
                              ", " + std::to_string(f.max) + "]");
  }
  return {0, scale_numeric(f, raw)};
}

FeatureValue category_feature(const FieldSpec& f, long long index, std::size_t line_no) {
  if (index == kUnknownCategory) return {kUnknownCategory, 1.0};
  if (index < 0 || static_cast<std::size_t>(index) >= f.cardinality) {
    throw Error(ErrorKind::kData, row_tag(line_no) + "field '" + f.name + "' category " +
                                      std::to_string(index) + " outside [0, " +
                                      std::to_string(f.cardinality) + ")");
  }
  return {static_cast<std::int32_t>(index), 1.0};
}

void parse_indexed(std::istream& in, const Schema& schema, Dataset& out, LoadReport& report) {
  std::string line;
  std::size_t line_no = 0;
  const std::size_t m = schema.m();
  std::vector<bool> seen(m);
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = split_ws(body);
    if (tokens.size() != m + 1) {
      throw Error(ErrorKind::kData, row_tag(line_no) + "expected label and " + std::to_string(m) +
                                        " features, got " + std::to_string(tokens.size()) +
                                        " tokens");
    }
    Instance x;
    x.label = parse_label(tokens[0], line_no);
    x.features.assign(m, FeatureValue{});
    std::fill(seen.begin(), seen.end(), false);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto parts = split_on(tokens[t], ':');
      long long field_id, feature;
      double value;
      if (parts.size() != 3 || !parse_int(parts[0], field_id) || !parse_int(parts[1], feature) ||
          !parse_real(parts[2], value)) {
        throw Error(ErrorKind::kParse, row_tag(line_no) + "malformed token '" +
                                           std::string(tokens[t]) + "'");
      }
      const auto pos = field_id < 0 ? std::nullopt
                                     : schema.position_of_id(static_cast<std::size_t>(field_id));
      if (!pos) {
        throw Error(ErrorKind::kData,
                    row_tag(line_no) + "unknown field id " + std::to_string(field_id));
      }
      if (seen[*pos]) {
        throw Error(ErrorKind::kData,
                    row_tag(line_no) + "field id " + std::to_string(field_id) + " repeated");
      }
      seen[*pos] = true;
      const auto& f = schema.field(*pos);
      if (f.categorical()) {
        x.features[*pos] = category_feature(f, feature, line_no);
      } else {
        if (feature != 0) {
          throw Error(ErrorKind::kData, row_tag(line_no) + "numerical field '" + f.name +
                                            "' must use feature index 0");
        }
        x.features[*pos] = numeric_feature(f, value, line_no, report);
      }
    }
    out.instances.push_back(std::move(x));
    ++report.rows;
  }
}

void parse_csv(std::istream& in, const Schema& schema, Dataset& out, LoadReport& report) {
  std::string line;
  std::size_t line_no = 0;
  const std::size_t m = schema.m();
  std::vector<std::size_t> column_to_pos;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    auto cells = split_on(body, ',');
    for (auto& c : cells) c = trim(c);
    if (!have_header) {
      if (cells.size() != m + 1 || cells.back() != "label") {
        throw Error(ErrorKind::kParse, row_tag(line_no) + "CSV header must list the " +
                                           std::to_string(m) + " schema fields then 'label'");
      }
      std::vector<bool> seen(m, false);
      for (std::size_t c = 0; c < m; ++c) {
        const auto pos = schema.position_of_name(std::string(cells[c]));
        if (!pos || seen[*pos]) {
          throw Error(ErrorKind::kParse, row_tag(line_no) + "CSV header column '" +
                                             std::string(cells[c]) +
                                             "' does not match the schema");
        }
        seen[*pos] = true;
        column_to_pos.push_back(*pos);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != m + 1) {
      throw Error(ErrorKind::kData, row_tag(line_no) + "expected " + std::to_string(m + 1) +
                                        " cells, got " + std::to_string(cells.size()));
    }
    Instance x;
    x.features.assign(m, FeatureValue{});
    x.label = parse_label(cells[m], line_no);
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t pos = column_to_pos[c];
      const auto& f = schema.field(pos);
      const auto cell = cells[c];
      if (f.categorical()) {
        if (!f.vocab.empty()) {
          const auto it = std::find(f.vocab.begin(), f.vocab.end(), cell);
          if (it == f.vocab.end()) {
            ++report.unknown_tokens;
            x.features[pos] = {kUnknownCategory, 1.0};
          } else {
            x.features[pos] = {static_cast<std::int32_t>(it - f.vocab.begin()), 1.0};
          }
        } else {
          long long idx;
          if (parse_int(cell, idx)) {
            x.features[pos] = category_feature(f, idx, line_no);
          } else {
            ++report.unknown_tokens;
            x.features[pos] = {kUnknownCategory, 1.0};
          }
        }
      } else {
        double raw;
        if (!parse_real(cell, raw)) {
          throw Error(ErrorKind::kParse, row_tag(line_no) + "field '" + f.name +
                                             "' is not a number: '" + std::string(cell) + "'");
        }
        x.features[pos] = numeric_feature(f, raw, line_no, report);
      }
    }
    out.instances.push_back(std::move(x));
    ++report.rows;
  }
}

}  // namespace

double scale_numeric(const FieldSpec& field, double raw) {
  const double clamped = std::clamp(raw, field.min, field.max);
  const double scaled = (clamped - field.min) / (field.max - field.min);
  return std::max(scaled, kScaleFloor);
}

void validate_instance(const Instance& x, const Schema& schema) {
  if (x.features.size() != schema.m()) {
    throw Error(ErrorKind::kData, "instance has " + std::to_string(x.features.size()) +
                                      " features, schema has " + std::to_string(schema.m()));
  }
  if (x.label != 0 && x.label != 1) throw Error(ErrorKind::kData, "label must be 0 or 1");
  for (std::size_t j = 0; j < schema.m(); ++j) {
    const auto& f = schema.field(j);
    const auto& fv = x.features[j];
    if (f.categorical()) {
      if (fv.index != kUnknownCategory &&
          (fv.index < 0 || static_cast<std::size_t>(fv.index) >= f.cardinality)) {
        throw Error(ErrorKind::kData, "field '" + f.name + "' category out of range");
      }
    } else if (!(fv.value > 0.0 && fv.value <= 1.0)) {
      throw Error(ErrorKind::kData, "field '" + f.name + "' scaled value outside (0,1]");
    }
  }
}

Dataset parse_dataset(const std::string& text, std::shared_ptr<const Schema> schema,
                      DataFormat format, LoadReport* report) {
  std::istringstream in(text);
  Dataset out;
  out.schema = schema;
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  if (format == DataFormat::kIndexed) parse_indexed(in, *schema, out, rep);
  else parse_csv(in, *schema, out, rep);
  if (out.instances.empty()) rep.warnings.emplace_back("dataset is empty");
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, std::shared_ptr<const Schema> schema,
                     DataFormat format, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open data file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), std::move(schema), format, report);
}

std::string to_indexed(const Dataset& data) {
  std::ostringstream out;
  out.precision(17);
  const auto& schema = *data.schema;
  for (const auto& x : data.instances) {
    out << x.label;
    for (std::size_t j = 0; j < schema.m(); ++j) {
      const auto& f = schema.field(j);
      const auto& fv = x.features[j];
      if (f.categorical()) {
        out << ' ' << f.field_id << ':' << fv.index << ":1";
      } else {
        out << ' ' << f.field_id << ":0:" << (f.min + fv.value * (f.max - f.min));
      }
    }
    out << '\n';
  }
  return out.str();
}

std::tuple<Dataset, Dataset, Dataset> split(const Dataset& data, const SplitRatios& ratios,
                                            std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.valid > 0.0 && ratios.test > 0.0))
    throw Error(ErrorKind::kArgument, "split ratios must be positive");
  if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9)
    throw Error(ErrorKind::kArgument, "split ratios must sum to 1");
  const std::size_t n = data.size();
  if (n < 3) throw Error(ErrorKind::kArgument, "split needs at least 3 instances");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const auto n_valid = static_cast<std::size_t>(std::floor(ratios.valid * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::floor(ratios.test * static_cast<double>(n)));
  const std::size_t n_train = n - n_valid - n_test;

  Dataset train{data.schema, {}}, valid{data.schema, {}}, test{data.schema, {}};
  train.instances.reserve(n_train);
  valid.instances.reserve(n_valid);
  test.instances.reserve(n_test);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = data.instances[order[i]];
    if (i < n_train) train.instances.push_back(x);
    else if (i < n_train + n_valid) valid.instances.push_back(x);
    else test.instances.push_back(x);
  }
  return {std::move(train), std::move(valid), std::move(test)};
}

DataFormat parse_format(const std::string& name) {
  if (name == "csv") return DataFormat::kCsv;
  if (name == "indexed") return DataFormat::kIndexed;
  throw Error(ErrorKind::kArgument, "unknown data format '" + name + "'");
}

DataFormat guess_format(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DataFormat::kCsv : DataFormat::kIndexed;
}

}  // namespace armlet
