#include "armlet/interpret.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "armlet/error.hpp"

namespace armlet {

namespace {

// Normalizes in place; an all-zero vector becomes uniform and reports true.
bool normalize(std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (!(sum > 0.0)) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    return true;
  }
  for (auto& x : v) x /= sum;
  return false;
}

void require_arm(const ArmParams& params) {
  if (!params.layout.has_arm)
    throw Error(ErrorKind::kArgument, "attribution needs a model with an ARM branch");
}

}  // namespace

GlobalImportance global_importance(const ArmParams& params) {
  require_arm(params);
  GlobalImportance g;
  g.scores.assign(params.m(), 0.0);
  for (const auto& head : params.layout.heads) {
    const Tensor2& v = params.store[head.v].value;
    for (std::size_t j = 0; j < v.rows(); ++j)
      for (std::size_t i = 0; i < v.cols(); ++i) g.scores[j] += std::abs(v(j, i));
  }
  g.degenerate = normalize(g.scores);
  return g;
}

LocalAttribution local_attribution(const Instance& x, const ArmParams& params) {
  require_arm(params);
  const auto trace = arm_forward(x, params, Mode::kEval);
  const std::size_t m = params.m();
  const std::size_t o = params.cfg.neurons;
  LocalAttribution a;
  a.neuron_weights = Tensor2(trace.heads.size() * o, m);
  a.scores.assign(m, 0.0);
  for (std::size_t k = 0; k < trace.heads.size(); ++k) {
    const Tensor2& w = trace.heads[k].weights;
    for (std::size_t i = 0; i < o; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double mag = std::abs(w(i, j));
        a.neuron_weights(k * o + i, j) = mag;
        a.scores[j] += mag;
      }
  }
  a.degenerate = normalize(a.scores);
  return a;
}

InteractionCatalog interaction_catalog(const Dataset& data, const ArmParams& params,
                                       std::size_t top_n) {
  require_arm(params);
  InteractionCatalog cat;
  cat.neurons = params.cfg.heads * params.cfg.neurons;
  if (data.empty()) throw Error(ErrorKind::kArgument, "interaction catalog of an empty dataset");

  const auto& schema = *params.schema;
  const AttentionCache cache = build_attention_cache(params);
  std::map<std::vector<std::size_t>, std::size_t> counts;
  std::size_t empty = 0;
  std::vector<std::size_t> term;
  for (const auto& x : data.instances) {
    const auto trace = arm_forward(x, params, Mode::kEval, nullptr, &cache);
    for (std::size_t k = 0; k < trace.heads.size(); ++k) {
      const Tensor2& z = trace.heads[k].gates;
      const Tensor2& v = params.store[params.layout.heads[k].v].value;
      for (std::size_t i = 0; i < z.rows(); ++i) {
        term.clear();
        for (std::size_t j = 0; j < z.cols(); ++j)
          if (z(i, j) > 0.0 && v(j, i) != 0.0) term.push_back(schema.field(j).field_id);
        if (term.empty()) {
          ++empty;
          continue;
        }
        std::sort(term.begin(), term.end());
        ++counts[term];
      }
    }
  }

  const double n = static_cast<double>(data.size());
  std::vector<InteractionTerm> all;
  all.reserve(counts.size());
  std::size_t total = 0;
  for (const auto& [fields, count] : counts) {
    all.push_back({fields, static_cast<double>(count) / n});
    total += count;
  }
  cat.distinct_terms = all.size();
  cat.total_frequency = static_cast<double>(total) / n;
  cat.empty_frequency = static_cast<double>(empty) / n;
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.fields.size() < b.fields.size();
  });
  if (all.size() > top_n) all.resize(top_n);
  cat.terms = std::move(all);
  return cat;
}

std::string attribution_report_json(const ArmParams& params, const GlobalImportance& global,
                                    const InteractionCatalog& catalog,
                                    const std::map<std::size_t, LocalAttribution>& local,
                                    int indent) {
  using nlohmann::json;
  const auto& schema = *params.schema;
  auto name_of_id = [&](std::size_t id) { return schema.field(*schema.position_of_id(id)).name; };

  json doc;
  json g = json::object();
  for (std::size_t j = 0; j < schema.m(); ++j) g[schema.field(j).name] = global.scores[j];
  doc["global"] = g;
  doc["global_degenerate"] = global.degenerate;

  json terms = json::array();
  for (const auto& t : catalog.terms) {
    json names = json::array();
    for (auto id : t.fields) names.push_back(name_of_id(id));
    terms.push_back({{"fields", names}, {"field_ids", t.fields}, {"frequency", t.frequency},
                     {"order", t.order()}});
  }
  doc["terms"] = terms;
  doc["catalog"] = {{"neurons", catalog.neurons},
                    {"distinct_terms", catalog.distinct_terms},
                    {"total_frequency", catalog.total_frequency},
                    {"empty_frequency", catalog.empty_frequency}};

  if (!local.empty()) {
    json loc = json::object();
    for (const auto& [index, attr] : local) {
      json scores = json::object();
      for (std::size_t j = 0; j < schema.m(); ++j) scores[schema.field(j).name] = attr.scores[j];
      json rows = json::array();
      for (std::size_t r = 0; r < attr.neuron_weights.rows(); ++r) {
        const auto row = attr.neuron_weights.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
      }
      loc[std::to_string(index)] = {
          {"scores", scores}, {"neurons", rows}, {"degenerate", attr.degenerate}};
    }
    doc["local"] = loc;
  }
  return doc.dump(indent);
}

}  // namespace armlet
