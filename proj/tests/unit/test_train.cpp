#include <cmath>
#include <sstream>

#include "armlet/error.hpp"
#include "armlet/metrics.hpp"
#include "armlet/synthetic.hpp"
#include "armlet/train.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace armlet;

namespace {

// Label = 1 iff field 0 category is in the upper half: separable for LR.
Dataset separable(std::size_t n, std::uint64_t seed) {
  auto s = std::make_shared<const Schema>(oracle::mixed_schema({6, 4}, 0));
  Dataset d{s, {}};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Instance x;
    const auto a = static_cast<std::int32_t>(rng.below(6));
    x.features = {{a, 1.0}, {static_cast<std::int32_t>(rng.below(4)), 1.0}};
    x.label = a >= 3;
    d.instances.push_back(x);
  }
  return d;
}

ArmConfig tiny_arm() {
  ArmConfig cfg;
  cfg.n_e = 3;
  cfg.heads = 1;
  cfg.neurons = 2;
  cfg.alpha = 1.5;
  cfg.mlp_widths = {};
  cfg.n_h = 4;
  cfg.dnn_widths = {4};
  return cfg;
}

}  // namespace

TEST_CASE("lr = 0 leaves parameters unchanged and the history flat") {
  const auto d = separable(200, 1);
  auto model = make_model(ModelKind::kArm, tiny_arm(), d.schema, 2);
  ParamStore before = model->params();
  TrainConfig t;
  t.lr = 0.0;
  t.max_epochs = 3;
  t.batch_size = 32;
  t.patience = 5;
  const auto r = train(*model, d, d, t);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(model->params()[i].value == before[i].value);
  REQUIRE(r.history.size() == 3);
  for (const auto& h : r.history) {
    CHECK(h.valid_auc == r.history[0].valid_auc);
    CHECK(h.valid_logloss == r.history[0].valid_logloss);
  }
}

TEST_CASE("LR separates a separable set") {
  const auto d = separable(400, 3);
  auto model = make_model(ModelKind::kLr, {}, d.schema, 4);
  TrainConfig t;
  t.lr = 0.05;
  t.batch_size = 32;
  t.max_epochs = 50;
  t.patience = 50;
  train(*model, d, d, t);
  CHECK(evaluate(*model, d).auc == 1.0);
}

TEST_CASE("training is deterministic end to end") {
  const auto d = separable(300, 5);
  TrainConfig t;
  t.lr = 0.01;
  t.batch_size = 16;
  t.max_epochs = 4;
  t.seed = 9;
  for (auto kind : {ModelKind::kArm, ModelKind::kArmPlus, ModelKind::kFmPlus, ModelKind::kDnn}) {
    auto cfg = tiny_arm();
    cfg.dropout = kind == ModelKind::kDnn ? 0.2 : 0.0;
    cfg.fm_neurons = 2;
    const auto a = train_model(kind, cfg, d, d, t, 1);
    const auto b = train_model(kind, cfg, d, d, t, 1);
    REQUIRE(a.result.history.size() == b.result.history.size());
    for (std::size_t i = 0; i < a.result.history.size(); ++i) {
      CHECK(a.result.history[i].train_logloss == b.result.history[i].train_logloss);
      CHECK(a.result.history[i].valid_auc == b.result.history[i].valid_auc);
    }
    for (std::size_t i = 0; i < a.model->params().size(); ++i)
      CHECK(a.model->params()[i].value == b.model->params()[i].value);
  }
}

TEST_CASE("LR training logloss decreases on a fixed tiny set") {
  SyntheticSpec spec{3, {4, 4, 4}, {{{0}, 1.5}, {{1}, -1.0}}, 0.2, 0.0, 200};
  const auto s = generate_synthetic(spec, 3);
  auto model = make_model(ModelKind::kLr, {}, s.data.schema, 1);
  TrainConfig t;
  t.lr = 0.005;
  t.batch_size = 200;  // full batch
  t.max_epochs = 20;
  t.patience = 100;
  double prev = evaluate(*model, s.data).logloss;
  const auto r = train(*model, s.data, s.data, t, [&](const HistoryRecord& rec) {
    CHECK(rec.valid_logloss < prev);
    prev = rec.valid_logloss;
  });
  CHECK(r.history.size() == 20);
}

TEST_CASE("early stopping returns the parameters of the best evaluation") {
  SyntheticSpec spec{4, {5, 5, 5, 5}, {{{0, 1}, 2.0}}, 0.0, 0.5, 600};
  const auto s = generate_synthetic(spec, 11);
  const auto [tr, va, te] = split(s.data, {}, 1);
  TrainConfig t;
  t.lr = 0.05;
  t.batch_size = 32;
  t.max_epochs = 40;
  t.patience = 2;
  t.seed = 3;
  auto model = make_model(ModelKind::kArm, tiny_arm(), tr.schema, 5);
  const auto r = train(*model, tr, va, t);
  double best = 0.0;
  for (const auto& h : r.history) best = std::max(best, h.valid_auc);
  CHECK(r.best_valid_auc == best);
  CHECK(r.history[r.best_record].valid_auc == best);
  CHECK(evaluate(*model, va).auc == best);
  if (r.early_stopped) CHECK(r.history.size() == r.best_record + 1 + t.patience);
}

TEST_CASE("step-based evaluation cadence") {
  const auto d = separable(100, 7);
  auto model = make_model(ModelKind::kLr, {}, d.schema, 1);
  TrainConfig t;
  t.lr = 0.01;
  t.batch_size = 10;
  t.max_epochs = 2;
  t.eval_every = 5;
  t.patience = 100;
  const auto r = train(*model, d, d, t);
  REQUIRE(r.history.size() == 4);
  CHECK(r.history[0].step == 5);
  CHECK(r.history[3].step == 20);
  CHECK(r.history[3].epoch == 2);
}

TEST_CASE("non-finite loss aborts with diagnostics") {
  const auto d = separable(50, 8);
  auto model = make_model(ModelKind::kLr, {}, d.schema, 1);
  model->params()[model->params().find("lr.b").value()].value[0] = 1e308;
  model->params()[model->params().find("lr.w").value()].value.fill(1e308);
  TrainConfig t;
  t.max_epochs = 1;
  try {
    train(*model, d, d, t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::kTraining || e.kind() == ErrorKind::kForward));
  }
}

TEST_CASE("train config validation and history lines") {
  TrainConfig t;
  t.batch_size = 0;
  CHECK_THROWS_AS(t.validate(), Error);
  t = {};
  t.patience = 0;
  CHECK_THROWS_AS(t.validate(), Error);
  t = {};
  t.lr = -1.0;
  CHECK_THROWS_AS(t.validate(), Error);

  std::ostringstream out;
  write_history_line(out, {2, 40, 0.5, 0.75, 0.6});
  CHECK(out.str().rfind("2, 40, ", 0) == 0);
}

TEST_CASE("predict_logits does not depend on the thread count") {
  const auto d = separable(97, 9);
  auto model = make_model(ModelKind::kArm, tiny_arm(), d.schema, 1);
  oracle::rescale_params(model->params(), 0.3, 2);
  const auto one = predict_logits(*model, d.instances, 1);
  CHECK(predict_logits(*model, d.instances, 4) == one);
  CHECK(evaluate(*model, d, 1).auc == evaluate(*model, d, 3).auc);
}
