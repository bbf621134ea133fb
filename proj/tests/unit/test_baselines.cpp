#include <cmath>

#include "armlet/baselines.hpp"
#include "armlet/error.hpp"
#include "armlet/model.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace armlet;

namespace {

std::shared_ptr<const Schema> schema() {
  return std::make_shared<const Schema>(oracle::mixed_schema({4, 3, 5}, 2));
}

oracle::GateOutcome fm_gate(FmParams& p, const std::vector<Instance>& xs) {
  const double inv = 1.0 / static_cast<double>(xs.size());
  p.store.zero_grad();
  for (const auto& x : xs) {
    const auto t = fm_plus_forward_trace(x, p);
    fm_backward(t, (oracle::sigmoid(t.logit) - x.label) * inv, p);
  }
  auto eval = [&](const ParamStore& s) {
    FmParams probe = p;
    probe.store.copy_values_from(s);
    double loss = 0.0;
    std::vector<char> sig;
    for (const auto& x : xs) {
      const auto t = fm_plus_forward_trace(x, probe);
      for (double z : t.bank.gates.flat()) sig.push_back(z > 0.0);
      for (double s2 : t.bank.exponent.flat()) sig.push_back(std::abs(s2) < p.exp_clamp);
      loss += oracle::logloss_ref(t.logit, x.label);
    }
    return std::make_pair(loss * inv, sig);
  };
  return oracle::gradient_gate(p.store, eval);
}

}  // namespace

TEST_CASE("LR is bias plus one weight per active feature") {
  auto s = schema();
  auto p = init_lr_params(s, 1);
  oracle::rescale_params(p.store, 0.5, 2);
  Rng rng(3);
  const auto& w = p.store[p.linear].value;
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = oracle::random_instance(*s, rng);
    double expect = p.store[p.bias].value[0];
    for (std::size_t j = 0; j < s->m(); ++j) {
      const auto& f = s->field(j);
      if (f.categorical()) expect += w[s->row_offset(j) + 1 + x.features[j].index];
      else expect += x.features[j].value * w[s->row_offset(j)];
    }
    CHECK(lr_forward(x, p) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("FM") {
  auto s = schema();
  auto p = init_fm_params(s, 3, 4);
  oracle::rescale_params(p.store, 0.5, 5);
  Rng rng(6);

  SUBCASE("zero latent vectors reduce to LR") {
    p.store[p.latent].value.fill(0.0);
    const auto x = oracle::random_instance(*s, rng);
    CHECK(fm_forward(x, p) == lr_forward(x, p));
  }
  SUBCASE("pairwise term matches the double loop") {
    for (int rep = 0; rep < 50; ++rep) {
      const auto x = oracle::random_instance(*s, rng);
      const auto t = fm_plus_forward_trace(x, p);
      auto lr_only = p;
      lr_only.has_latent = false;
      const double pair = t.logit - fm_plus_forward_trace(x, lr_only).logit;
      CHECK(std::abs(pair - oracle::fm_pairwise(t.emb)) <= 1e-10);
    }
  }
  SUBCASE("gradient check") {
    std::vector<Instance> xs;
    for (int i = 0; i < 5; ++i) xs.push_back(oracle::random_instance(*s, rng));
    const auto out = fm_gate(p, xs);
    INFO(out.worst);
    CHECK(out.max_rel_err < 1e-4);
  }
}

TEST_CASE("LR gradient check") {
  auto s = schema();
  auto p = init_lr_params(s, 7);
  oracle::rescale_params(p.store, 0.5, 8);
  Rng rng(9);
  std::vector<Instance> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(oracle::random_instance(*s, rng));
  const auto out = fm_gate(p, xs);
  INFO(out.worst);
  CHECK(out.max_rel_err < 1e-4);
}

TEST_CASE("FM with neurons") {
  auto s = schema();
  ArmConfig cfg;
  cfg.n_e = 3;
  Rng rng(10);

  SUBCASE("zero neurons equal FM exactly") {
    cfg.fm_neurons = 0;
    const auto plus = init_fm_plus_params(s, cfg, 11);
    const auto fm = init_fm_params(s, 3, 11);
    for (int rep = 0; rep < 10; ++rep) {
      const auto x = oracle::random_instance(*s, rng);
      CHECK(fm_plus_neurons_forward(x, plus) == fm_forward(x, fm));
    }
  }
  SUBCASE("bank only adds to the FM logit") {
    cfg.fm_neurons = 2;
    auto plus = init_fm_plus_params(s, cfg, 11);
    plus.store[plus.readout].value.fill(0.0);
    const auto fm = init_fm_params(s, 3, 11);
    const auto x = oracle::random_instance(*s, rng);
    CHECK(fm_plus_neurons_forward(x, plus) == fm_forward(x, fm));
  }
  SUBCASE("gradient check") {
    for (double alpha : {1.0, 1.5, 2.0}) {
      cfg.alpha = alpha;
      cfg.fm_neurons = 3;
      auto p = init_fm_plus_params(s, cfg, 12);
      oracle::rescale_params(p.store, 0.4, 13);
      std::vector<Instance> xs;
      for (int i = 0; i < 5; ++i) xs.push_back(oracle::random_instance(*s, rng));
      const auto out = fm_gate(p, xs);
      INFO("alpha " << alpha << " " << out.worst);
      CHECK(out.max_rel_err < 1e-4);
    }
  }
}

TEST_CASE("make_model covers every kind") {
  auto s = schema();
  ArmConfig cfg;
  cfg.n_e = 3;
  cfg.heads = 1;
  cfg.neurons = 2;
  cfg.mlp_widths = {};
  cfg.n_h = 3;
  cfg.dnn_widths = {3};
  cfg.fm_neurons = 2;
  for (auto kind : {ModelKind::kArm, ModelKind::kArmPlus, ModelKind::kLr, ModelKind::kFm,
                    ModelKind::kFmPlus, ModelKind::kDnn}) {
    auto m = make_model(kind, cfg, s, 1);
    CHECK(m->kind() == kind);
    CHECK(parse_model_kind(to_string(kind)) == kind);
    CHECK((m->arm_params() != nullptr) == (kind == ModelKind::kArm || kind == ModelKind::kArmPlus));
    auto c = m->clone();
    Rng rng(2);
    const auto x = oracle::random_instance(*s, rng);
    CHECK(c->predict_one(x) == m->predict_one(x));
  }
  CHECK_THROWS_AS(parse_model_kind("svm"), Error);
  cfg.n_p = 2;
  CHECK_THROWS_AS(make_model(ModelKind::kArm, cfg, s, 1), Error);
}
