#include "armlet/model.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

#include "armlet/error.hpp"

namespace armlet {

double Model::predict_one(const Instance& x) const {
  double out = 0.0;
  predict(std::span<const Instance>(&x, 1), std::span<double>(&out, 1));
  return out;
}

namespace {

void require_binary(const ArmConfig& cfg) {
  if (cfg.n_p != 1) throw Error(ErrorKind::kArgument, "trainable models need n_p = 1");
}

void require_sizes(std::span<const Instance> xs, std::span<double> out) {
  if (xs.size() != out.size()) throw Error(ErrorKind::kShape, "predict output length mismatch");
}

class ArmModel final : public Model {
 public:
  ArmModel(ModelKind kind, ArmParams params) : kind_(kind), params_(std::move(params)) {}

  ModelKind kind() const override { return kind_; }
  const ArmConfig& config() const override { return params_.cfg; }
  const std::shared_ptr<const Schema>& schema() const override { return params_.schema; }
  ParamStore& params() override { return params_.store; }
  const ParamStore& params() const override { return params_.store; }
  const ArmParams* arm_params() const override { return &params_; }
  ArmParams* arm_params() override { return &params_; }

  void predict(std::span<const Instance> xs, std::span<double> logits) const override {
    require_sizes(xs, logits);
    const AttentionCache cache = build_attention_cache(params_);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (kind_ == ModelKind::kArmPlus)
        logits[i] = ensemble_forward(xs[i], params_, Mode::kEval, nullptr, &cache).logits[0];
      else
        logits[i] = arm_forward(xs[i], params_, Mode::kEval, nullptr, &cache).logits[0];
    }
  }

  void begin_batch() override { cache_ = build_attention_cache(params_); }

  double forward_backward(const Instance& x, Rng& rng,
                          const std::function<double(double)>& dloss) override {
    if (cache_.alignment.size() != params_.layout.heads.size()) begin_batch();
    if (kind_ == ModelKind::kArmPlus) {
      auto t = ensemble_forward(x, params_, Mode::kTrain, &rng, &cache_);
      const double g = dloss(t.logits[0]);
      ensemble_backward(t, std::span<const double>(&g, 1), params_, &cache_);
      return t.logits[0];
    }
    auto t = arm_forward(x, params_, Mode::kTrain, &rng, &cache_);
    const double g = dloss(t.logits[0]);
    arm_backward(t, std::span<const double>(&g, 1), params_, &cache_);
    return t.logits[0];
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<ArmModel>(*this); }

 private:
  ModelKind kind_;
  ArmParams params_;
  AttentionCache cache_;
};

class DnnModel final : public Model {
 public:
  explicit DnnModel(ArmParams params) : params_(std::move(params)) {}

  ModelKind kind() const override { return ModelKind::kDnn; }
  const ArmConfig& config() const override { return params_.cfg; }
  const std::shared_ptr<const Schema>& schema() const override { return params_.schema; }
  ParamStore& params() override { return params_.store; }
  const ParamStore& params() const override { return params_.store; }

  void predict(std::span<const Instance> xs, std::span<double> logits) const override {
    require_sizes(xs, logits);
    for (std::size_t i = 0; i < xs.size(); ++i)
      logits[i] = dnn_forward(xs[i], params_, Mode::kEval).logits[0];
  }

  double forward_backward(const Instance& x, Rng& rng,
                          const std::function<double(double)>& dloss) override {
    auto t = dnn_forward(x, params_, Mode::kTrain, &rng);
    const double g = dloss(t.logits[0]);
    dnn_backward(t, std::span<const double>(&g, 1), params_);
    return t.logits[0];
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<DnnModel>(*this); }

 private:
  ArmParams params_;
};

class FmModel final : public Model {
 public:
  FmModel(ModelKind kind, const ArmConfig& cfg, FmParams params)
      : kind_(kind), cfg_(cfg), params_(std::move(params)) {}

  ModelKind kind() const override { return kind_; }
  const ArmConfig& config() const override { return cfg_; }
  const std::shared_ptr<const Schema>& schema() const override { return params_.schema; }
  ParamStore& params() override { return params_.store; }
  const ParamStore& params() const override { return params_.store; }

  void predict(std::span<const Instance> xs, std::span<double> logits) const override {
    require_sizes(xs, logits);
    for (std::size_t i = 0; i < xs.size(); ++i) logits[i] = fm_plus_neurons_forward(xs[i], params_);
  }

  double forward_backward(const Instance& x, Rng&,
                          const std::function<double(double)>& dloss) override {
    auto t = fm_plus_forward_trace(x, params_);
    fm_backward(t, dloss(t.logit), params_);
    return t.logit;
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<FmModel>(*this); }

 private:
  ModelKind kind_;
  ArmConfig cfg_;
  FmParams params_;
};

}  // namespace

std::unique_ptr<Model> make_model(ModelKind kind, const ArmConfig& cfg,
                                  std::shared_ptr<const Schema> schema, std::uint64_t seed) {
  cfg.validate();
  require_binary(cfg);
  switch (kind) {
    case ModelKind::kArm:
      return std::make_unique<ArmModel>(kind, init_params(cfg, std::move(schema), seed, false));
    case ModelKind::kArmPlus:
      return std::make_unique<ArmModel>(kind, init_params(cfg, std::move(schema), seed, true));
    case ModelKind::kDnn:
      return std::make_unique<DnnModel>(init_dnn_params(cfg, std::move(schema), seed));
    case ModelKind::kLr:
      return std::make_unique<FmModel>(kind, cfg, init_lr_params(std::move(schema), seed));
    case ModelKind::kFm:
      return std::make_unique<FmModel>(kind, cfg, init_fm_params(std::move(schema), cfg.n_e, seed));
    case ModelKind::kFmPlus:
      return std::make_unique<FmModel>(kind, cfg, init_fm_plus_params(std::move(schema), cfg, seed));
  }
  throw Error(ErrorKind::kArgument, "unknown model kind");
}

std::size_t env_threads() {
  const char* v = std::getenv("ARMLET_THREADS");
  if (v == nullptr) return 1;
  try {
    const long n = std::stol(v);
    return n >= 1 ? static_cast<std::size_t>(n) : 1;
  } catch (...) {
    return 1;
  }
}

std::vector<double> predict_logits(const Model& model, std::span<const Instance> xs,
                                   std::size_t threads) {
  std::vector<double> out(xs.size());
  threads = std::max<std::size_t>(1, std::min(threads, xs.size() / 256 + 1));
  if (threads == 1) {
    model.predict(xs, out);
    return out;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (xs.size() + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(xs.size(), lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&, t, lo, hi] {
      try {
        model.predict(xs.subspan(lo, hi - lo), std::span<double>(out).subspan(lo, hi - lo));
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace armlet
