#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "armlet/arm.hpp"
#include "armlet/dataset.hpp"

namespace armlet {

/// Per-field importance in schema order, nonnegative, summing to 1.
struct GlobalImportance {
  std::vector<double> scores;
  bool degenerate = false;  // all value vectors were zero; scores are uniform
};

struct LocalAttribution {
  std::vector<double> scores;  // per field, sums to 1
  Tensor2 neuron_weights;      // (K*o) x m, |w_ij| from the eval-mode trace
  bool degenerate = false;     // every interaction weight was zero
};

struct InteractionTerm {
  std::vector<std::size_t> fields;  // sorted field ids
  double frequency = 0.0;           // mean occurrences per instance
  std::size_t order() const { return fields.size(); }
};

struct InteractionCatalog {
  std::vector<InteractionTerm> terms;  // top_n by frequency, descending
  std::size_t distinct_terms = 0;      // before truncation
  double total_frequency = 0.0;        // over all distinct terms
  /// Mean per-instance count of neurons whose captured set was empty
  /// (no field with both a nonzero gate and a nonzero value weight).
  double empty_frequency = 0.0;
  std::size_t neurons = 0;             // K*o
};

/// score_j = sum_k sum_i |V^(k)_{j,i}|, normalized.
GlobalImportance global_importance(const ArmParams& params);

/// Aggregates |w_i| over all K*o neurons of an eval-mode forward pass.
LocalAttribution local_attribution(const Instance& x, const ArmParams& params);

/// The field set captured by neuron i is {j : z_ij > 0 and v_ji != 0}.
/// Terms are keyed by field set; frequencies are counts divided by N.
InteractionCatalog interaction_catalog(const Dataset& data, const ArmParams& params,
                                       std::size_t top_n);

/// Report document: {"global": {name: score}, "terms": [{fields, frequency,
/// order}], "local": {"<index>": {...}}} with field names from the schema.
std::string attribution_report_json(const ArmParams& params, const GlobalImportance& global,
                                    const InteractionCatalog& catalog,
                                    const std::map<std::size_t, LocalAttribution>& local,
                                    int indent = 2);

}  // namespace armlet
