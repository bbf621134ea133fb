#include <cmath>
#include <filesystem>
#include <fstream>

#include "armlet/error.hpp"
#include "armlet/persist.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace armlet;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("armlet_persist_" + name);
}

ArmConfig small() {
  ArmConfig c;
  c.n_e = 4;
  c.heads = 2;
  c.neurons = 3;
  c.alpha = 1.7;
  c.mlp_widths = {6};
  c.n_h = 5;
  c.dnn_widths = {5, 4};
  c.fm_neurons = 2;
  return c;
}

}  // namespace

TEST_CASE("save and load restore eval logits within 1e-6") {
  auto s = std::make_shared<const Schema>(oracle::mixed_schema({5, 7, 3}, 2));
  Rng rng(1);
  std::vector<Instance> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(oracle::random_instance(*s, rng));
  for (auto kind : {ModelKind::kArm, ModelKind::kArmPlus, ModelKind::kLr, ModelKind::kFm,
                    ModelKind::kFmPlus, ModelKind::kDnn}) {
    auto model = make_model(kind, small(), s, 2);
    oracle::rescale_params(model->params(), 0.3, 3);
    model->params().set_step(17);
    const auto path = temp_path(std::string(to_string(kind)) + ".json");
    save_model(*model, path);
    const auto loaded = load_model(path);
    std::filesystem::remove(path);
    CHECK(loaded->kind() == kind);
    CHECK(*loaded->schema() == *s);
    CHECK(loaded->params().step() == 17);
    const auto a = predict_logits(*model, xs);
    const auto b = predict_logits(*loaded, xs);
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    INFO(to_string(kind) << " worst " << worst);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("float64 precision is exact") {
  auto s = std::make_shared<const Schema>(oracle::mixed_schema({4, 4}, 1));
  auto model = make_model(ModelKind::kArm, small(), s, 5);
  const auto doc = model_to_json(*model, Precision::kFloat64);
  CHECK(doc["precision"] == "float64");
  const auto loaded = model_from_json(doc);
  for (std::size_t i = 0; i < model->params().size(); ++i)
    CHECK(loaded->params()[i].value == model->params()[i].value);
}

TEST_CASE("header carries the config") {
  auto s = std::make_shared<const Schema>(oracle::mixed_schema({4, 4}, 1));
  ArmConfig cfg = small();
  cfg.heads = 8;
  cfg.neurons = 32;
  cfg.alpha = 2.0;
  auto model = make_model(ModelKind::kArm, cfg, s, 1);
  const auto doc = model_to_json(*model);
  CHECK(doc["format_version"] == kModelFormatVersion);
  CHECK(doc["precision"] == "float32");
  CHECK(doc["config"]["K"] == 8);
  CHECK(doc["config"]["o"] == 32);
  CHECK(doc["config"]["alpha"] == 2.0);
  const auto back = config_from_json(doc["config"]);
  CHECK(back.heads == 8);
  CHECK(back.neurons == 32);
  CHECK(back.mlp_widths == cfg.mlp_widths);
}

TEST_CASE("corrupt model files") {
  auto s = std::make_shared<const Schema>(oracle::mixed_schema({4}, 0));
  auto model = make_model(ModelKind::kLr, {}, s, 1);
  auto doc = model_to_json(*model);

  auto bad_version = doc;
  bad_version["format_version"] = 99;
  CHECK_THROWS_AS(model_from_json(bad_version), Error);

  auto missing = doc;
  missing["tensors"].erase("lr.w");
  CHECK_THROWS_AS(model_from_json(missing), Error);

  auto shape = doc;
  shape["tensors"]["lr.w"]["rows"] = 1;
  CHECK_THROWS_AS(model_from_json(shape), Error);

  const auto path = temp_path("garbage.json");
  {
    std::ofstream out(path);
    out << "{not json";
  }
  try {
    load_model(path);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), Error);
}
