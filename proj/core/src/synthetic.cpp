#include "armlet/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "armlet/error.hpp"
#include "armlet/rng.hpp"

namespace armlet {

Schema synthetic_schema(const std::vector<std::size_t>& cardinalities) {
  std::vector<FieldSpec> fields;
  for (std::size_t j = 0; j < cardinalities.size(); ++j) {
    FieldSpec f;
    f.field_id = j;
    f.kind = FieldKind::kCategorical;
    f.cardinality = cardinalities[j];
    f.name = "f" + std::to_string(j);
    fields.push_back(std::move(f));
  }
  return Schema(std::move(fields));
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.m == 0 || spec.cardinalities.size() != spec.m)
    throw Error(ErrorKind::kArgument, "synthetic spec needs one cardinality per field");
  for (const auto& t : spec.terms) {
    if (t.fields.empty()) throw Error(ErrorKind::kArgument, "planted term with no fields");
    for (auto j : t.fields)
      if (j >= spec.m)
        throw Error(ErrorKind::kArgument, "planted term references unknown field " +
                                              std::to_string(j));
  }
  if (spec.noise < 0.0) throw Error(ErrorKind::kArgument, "noise must be >= 0");

  SyntheticData out;
  out.terms = spec.terms;
  out.data.schema = std::make_shared<const Schema>(synthetic_schema(spec.cardinalities));

  Rng rng(seed);
  out.latents.resize(spec.m);
  for (std::size_t j = 0; j < spec.m; ++j) {
    out.latents[j].resize(spec.cardinalities[j]);
    for (auto& u : out.latents[j]) u = rng.normal(0.0, 1.0);
  }

  out.data.instances.reserve(spec.n);
  out.true_logits.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    Instance x;
    x.features.resize(spec.m);
    for (std::size_t j = 0; j < spec.m; ++j)
      x.features[j] = {static_cast<std::int32_t>(rng.below(spec.cardinalities[j])), 1.0};
    double logit = spec.bias;
    for (const auto& t : spec.terms) {
      double prod = t.coeff;
      for (auto j : t.fields) prod *= out.latents[j][x.features[j].index];
      logit += prod;
    }
    out.true_logits.push_back(logit);
    const double noisy = spec.noise > 0.0 ? logit + rng.normal(0.0, spec.noise) : logit;
    const double p = 1.0 / (1.0 + std::exp(-noisy));
    x.label = rng.next_double() < p ? 1 : 0;
    out.data.instances.push_back(std::move(x));
  }
  return out;
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("synthetic spec: ") + e.what());
  }
  SyntheticSpec spec;
  try {
    spec.cardinalities = doc.at("cardinalities").get<std::vector<std::size_t>>();
    spec.m = doc.value("m", spec.cardinalities.size());
    spec.bias = doc.value("bias", 0.0);
    spec.noise = doc.value("noise", 0.0);
    spec.n = doc.at("n").get<std::size_t>();
    if (doc.contains("terms")) {
      for (const auto& jt : doc["terms"]) {
        PlantedTerm t;
        t.fields = jt.at("fields").get<std::vector<std::size_t>>();
        t.coeff = jt.at("coeff").get<double>();
        spec.terms.push_back(std::move(t));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("synthetic spec: ") + e.what());
  }
  if (spec.m != spec.cardinalities.size())
    throw Error(ErrorKind::kArgument, "synthetic spec: m does not match cardinalities");
  for (const auto& t : spec.terms)
    for (auto j : t.fields)
      if (j >= spec.m)
        throw Error(ErrorKind::kArgument, "synthetic spec: term references unknown field " +
                                              std::to_string(j));
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open synthetic spec '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_synthetic_spec(buf.str());
}

}  // namespace armlet
