#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <vector>

#include "armlet/dataset.hpp"
#include "armlet/model.hpp"
#include "armlet/param_store.hpp"

namespace armlet {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 50;
  std::size_t patience = 3;    // evaluations without validation-AUC improvement
  std::size_t eval_every = 0;  // steps between evaluations; 0 = once per epoch
  std::uint64_t seed = 0;      // shuffling and dropout
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t threads = 1;     // evaluation workers

  void validate() const;
};

struct EvalReport {
  double auc = 0.0;
  double logloss = 0.0;
  std::size_t n = 0;
};

/// One line of training history, written at every evaluation point.
struct HistoryRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double train_logloss = 0.0;  // mean over the instances seen since the last record
  double valid_auc = 0.0;
  double valid_logloss = 0.0;
};

/// "epoch, step, train_logloss, valid_auc, valid_logloss"
void write_history_line(std::ostream& out, const HistoryRecord& r);

struct TrainResult {
  std::vector<HistoryRecord> history;
  std::size_t best_record = 0;
  double best_valid_auc = 0.0;
  bool early_stopped = false;
};

EvalReport evaluate(const Model& model, const Dataset& data, std::size_t threads = 1);

/// Mini-batch Adam on the mean logloss with early stopping on validation
/// AUC. On return the model holds the parameters of the best evaluation.
/// `on_record` (optional) sees each history record as it is produced.
TrainResult train(Model& model, const Dataset& train_set, const Dataset& valid_set,
                  const TrainConfig& tcfg,
                  const std::function<void(const HistoryRecord&)>& on_record = {});

struct TrainedModel {
  std::unique_ptr<Model> model;
  TrainResult result;
};

/// Builds a fresh model of `kind` (init seed `init_seed`) and trains it.
TrainedModel train_model(ModelKind kind, const ArmConfig& cfg, const Dataset& train_set,
                         const Dataset& valid_set, const TrainConfig& tcfg,
                         std::uint64_t init_seed);

}  // namespace armlet
