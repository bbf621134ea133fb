#include <cmath>

#include <nlohmann/json.hpp>

#include "armlet/error.hpp"
#include "armlet/interpret.hpp"
#include "armlet/synthetic.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace armlet;

namespace {

ArmConfig cfg(double alpha) {
  ArmConfig c;
  c.n_e = 3;
  c.heads = 2;
  c.neurons = 3;
  c.alpha = alpha;
  c.mlp_widths = {};
  c.n_h = 3;
  return c;
}

Dataset sample_data(std::shared_ptr<const Schema> s, std::size_t n, std::uint64_t seed) {
  Dataset d{s, {}};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) d.instances.push_back(oracle::random_instance(*s, rng));
  return d;
}

// Scores (0, ..., 5 on `field`, ..., 0) for every neuron: one-hot sparsemax gate.
void force_one_hot(ArmParams& p, std::size_t field) {
  for (const auto& h : p.layout.heads) {
    p.store[h.w_att].value = Tensor2::identity(p.cfg.n_e);
    auto& q = p.store[h.q].value;
    q.fill(0.0);
    for (std::size_t i = 0; i < p.cfg.neurons; ++i) q(0, i) = 1.0;
  }
  auto& e = p.store[p.layout.embedding].value;
  e.fill(0.0);
  const auto& s = *p.schema;
  for (std::size_t r = s.row_offset(field); r < s.row_offset(field) + s.field(field).cardinality + 1; ++r)
    e(r, 0) = 5.0;
}

}  // namespace

TEST_CASE("global importance") {
  auto s = std::make_shared<const Schema>(oracle::mixed_schema({3, 3, 3, 3}, 0));
  auto p = init_params(cfg(1.5), s, 1);
  oracle::rescale_params(p.store, 0.5, 2);

  SUBCASE("matches the double loop") {
    std::vector<double> ref(4, 0.0);
    double total = 0.0;
    for (const auto& h : p.layout.heads) {
      const auto& v = p.store[h.v].value;
      for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t i = 0; i < v.cols(); ++i) {
          ref[j] += std::abs(v(j, i));
          total += std::abs(v(j, i));
        }
    }
    const auto g = global_importance(p);
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(std::abs(g.scores[j] - ref[j] / total) <= 1e-12);
      sum += g.scores[j];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(g.degenerate);
  }
  SUBCASE("identical rows give uniform importance") {
    for (const auto& h : p.layout.heads) {
      auto& v = p.store[h.v].value;
      for (std::size_t j = 1; j < 4; ++j)
        for (std::size_t i = 0; i < v.cols(); ++i) v(j, i) = v(0, i);
    }
    for (double x : global_importance(p).scores) CHECK(x == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("only field 0 nonzero") {
    for (const auto& h : p.layout.heads) {
      auto& v = p.store[h.v].value;
      for (std::size_t j = 1; j < 4; ++j)
        for (std::size_t i = 0; i < v.cols(); ++i) v(j, i) = 0.0;
    }
    const auto g = global_importance(p);
    CHECK(g.scores[0] == 1.0);
    CHECK(g.scores[1] == 0.0);
  }
  SUBCASE("all zero is flagged and uniform") {
    for (const auto& h : p.layout.heads) p.store[h.v].value.fill(0.0);
    const auto g = global_importance(p);
    CHECK(g.degenerate);
    CHECK(g.scores[2] == 0.25);
  }
}

TEST_CASE("local attribution") {
  auto s = std::make_shared<const Schema>(oracle::mixed_schema({3, 4, 2}, 1));
  auto p = init_params(cfg(1.5), s, 3);
  oracle::rescale_params(p.store, 0.5, 4);
  Rng rng(5);

  SUBCASE("rows match the trace and scores are their normalised column sums") {
    const auto x = oracle::random_instance(*s, rng);
    const auto a = local_attribution(x, p);
    const auto t = arm_forward(x, p, Mode::kEval);
    std::vector<double> col(4, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
          CHECK(a.neuron_weights(k * 3 + i, j) == std::abs(t.heads[k].weights(i, j)));
          col[j] += std::abs(t.heads[k].weights(i, j));
          total += std::abs(t.heads[k].weights(i, j));
        }
    for (std::size_t j = 0; j < 4; ++j) CHECK(a.scores[j] == doctest::Approx(col[j] / total).epsilon(1e-12));
  }
  SUBCASE("zero value vectors are degenerate") {
    for (const auto& h : p.layout.heads) p.store[h.v].value.fill(0.0);
    const auto a = local_attribution(oracle::random_instance(*s, rng), p);
    CHECK(a.degenerate);
    for (double v : a.scores) CHECK(v == 0.25);
  }
  SUBCASE("one-hot gates give single-entry rows") {
    auto q = init_params(cfg(2.0), s, 6);
    oracle::rescale_params(q.store, 0.5, 7);
    force_one_hot(q, 1);
    const auto a = local_attribution(oracle::random_instance(*s, rng), q);
    for (std::size_t r = 0; r < a.neuron_weights.rows(); ++r) {
      std::size_t nz = 0;
      for (double v : a.neuron_weights.row(r)) nz += v != 0.0;
      CHECK(nz == 1);
      CHECK(a.neuron_weights(r, 1) != 0.0);
    }
  }
  SUBCASE("identical instances give identical attributions") {
    const auto x = oracle::random_instance(*s, rng);
    const auto a = local_attribution(x, p), b = local_attribution(x, p);
    CHECK(a.scores == b.scores);
    CHECK(a.neuron_weights == b.neuron_weights);
  }
  SUBCASE("fields with zero score carry no gate mass") {
    auto q = init_params(cfg(2.0), s, 8);
    oracle::rescale_params(q.store, 1.5, 9);
    for (int rep = 0; rep < 30; ++rep) {
      const auto x = oracle::random_instance(*s, rng);
      const auto a = local_attribution(x, q);
      const auto t = arm_forward(x, q, Mode::kEval);
      for (std::size_t j = 0; j < 4; ++j) {
        if (a.scores[j] != 0.0) continue;
        for (std::size_t k = 0; k < 2; ++k)
          for (std::size_t i = 0; i < 3; ++i) {
            const double v = q.store[q.layout.heads[k].v].value(j, i);
            if (v != 0.0) CHECK(t.heads[k].gates(i, j) == 0.0);
          }
      }
    }
  }
}

TEST_CASE("interaction catalog") {
  auto s = std::make_shared<const Schema>(oracle::mixed_schema({3, 4, 5}, 1));
  const auto data = sample_data(s, 40, 1);

  SUBCASE("dense softmax captures the full field set") {
    auto p = init_params(cfg(1.0), s, 2);
    oracle::rescale_params(p.store, 0.5, 3);
    const auto c = interaction_catalog(data, p, 8);
    REQUIRE(c.terms.size() == 1);
    CHECK(c.terms[0].fields == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(c.terms[0].frequency == 6.0);
    CHECK(c.terms[0].order() == 4);
  }
  SUBCASE("constructed one-hot gate on field 2") {
    auto p = init_params(cfg(2.0), s, 4);
    oracle::rescale_params(p.store, 0.5, 5);
    force_one_hot(p, 2);
    const auto c = interaction_catalog(data, p, 8);
    REQUIRE(c.terms.size() == 1);
    CHECK(c.terms[0].fields == std::vector<std::size_t>{2});
    CHECK(c.terms[0].frequency == 6.0);
    CHECK(c.terms[0].order() == 1);
  }
  SUBCASE("conservation with the empty adjustment") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto p = init_params(cfg(seed % 2 ? 2.0 : 1.5), s, seed);
      oracle::rescale_params(p.store, 1.0 + seed * 0.3, seed + 100);
      // Zero a few value entries so some neurons go empty.
      auto& v = p.store[p.layout.heads[0].v].value;
      for (std::size_t j = 0; j < v.rows(); ++j) v(j, seed % v.cols()) = 0.0;
      const auto c = interaction_catalog(data, p, 1000);
      double sum = 0.0;
      for (const auto& t : c.terms) sum += t.frequency;
      CHECK(c.empty_frequency > 0.0);
      CHECK(sum + c.empty_frequency == doctest::Approx(6.0).epsilon(1e-12));
      CHECK(c.total_frequency + c.empty_frequency == doctest::Approx(6.0).epsilon(1e-12));
      for (std::size_t i = 1; i < c.terms.size(); ++i) CHECK(c.terms[i - 1].frequency >= c.terms[i].frequency);
    }
  }
  SUBCASE("top_n truncates; zero gives an empty list") {
    auto p = init_params(cfg(2.0), s, 6);
    oracle::rescale_params(p.store, 2.0, 7);
    const auto full = interaction_catalog(data, p, 1000);
    const auto top = interaction_catalog(data, p, 2);
    CHECK(top.terms.size() == std::min<std::size_t>(2, full.terms.size()));
    CHECK(top.distinct_terms == full.distinct_terms);
    CHECK(interaction_catalog(data, p, 0).terms.empty());
  }
}

TEST_CASE("attribution report") {
  auto s = std::make_shared<const Schema>(oracle::mixed_schema({3, 4}, 1));
  auto p = init_params(cfg(1.5), s, 1);
  oracle::rescale_params(p.store, 0.5, 2);
  const auto data = sample_data(s, 10, 3);
  const auto g = global_importance(p);
  const auto c = interaction_catalog(data, p, 8);

  auto doc = nlohmann::json::parse(attribution_report_json(p, g, c, {}));
  CHECK(doc.contains("global"));
  CHECK(doc["global"].contains("c0"));
  CHECK(doc["global"].contains("n2"));
  CHECK(doc["terms"].is_array());
  CHECK_FALSE(doc.contains("local"));

  std::map<std::size_t, LocalAttribution> local;
  local.emplace(4, local_attribution(data.instances[4], p));
  doc = nlohmann::json::parse(attribution_report_json(p, g, c, local));
  CHECK(doc["local"].contains("4"));
  CHECK(doc["local"]["4"]["neurons"].size() == 6);
}
