#include "armlet/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "armlet/error.hpp"
#include "armlet/metrics.hpp"

namespace armlet {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error(ErrorKind::kArgument, "lr must be >= 0");
  if (batch_size < 1) throw Error(ErrorKind::kArgument, "batch_size must be >= 1");
  if (patience < 1) throw Error(ErrorKind::kArgument, "patience must be >= 1");
  if (max_epochs < 1) throw Error(ErrorKind::kArgument, "max_epochs must be >= 1");
}

void write_history_line(std::ostream& out, const HistoryRecord& r) {
  const auto flags = out.flags();
  const auto prec = out.precision(10);
  out << r.epoch << ", " << r.step << ", " << r.train_logloss << ", " << r.valid_auc << ", "
      << r.valid_logloss << '\n';
  out.flags(flags);
  out.precision(prec);
}

EvalReport evaluate(const Model& model, const Dataset& data, std::size_t threads) {
  if (data.empty()) throw Error(ErrorKind::kMetric, "cannot evaluate an empty dataset");
  const auto logits = predict_logits(model, data.instances, threads);
  std::vector<int> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) labels[i] = data.instances[i].label;
  EvalReport r;
  r.n = data.size();
  r.logloss = logloss(logits, labels);
  r.auc = auc(logits, labels);
  return r;
}

namespace {

std::string norms_summary(const ParamStore& store) {
  std::ostringstream out;
  out.precision(4);
  for (const auto& p : store)
    out << ' ' << p.name << "=|" << p.value.l2_norm() << "|/grad|" << p.grad.l2_norm() << '|';
  return out.str();
}

}  // namespace

TrainResult train(Model& model, const Dataset& train_set, const Dataset& valid_set,
                  const TrainConfig& tcfg,
                  const std::function<void(const HistoryRecord&)>& on_record) {
  tcfg.validate();
  if (train_set.empty()) throw Error(ErrorKind::kArgument, "training set is empty");
  if (valid_set.empty()) throw Error(ErrorKind::kArgument, "validation set is empty");

  ParamStore& store = model.params();
  const AdamConfig adam{tcfg.lr, tcfg.beta1, tcfg.beta2, tcfg.eps};
  Rng shuffle_rng(tcfg.seed);
  Rng dropout_rng(tcfg.seed ^ 0xD1B54A32D192ED03ULL);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.best_valid_auc = -std::numeric_limits<double>::infinity();
  std::vector<Tensor2> best;
  for (const auto& p : store) best.push_back(p.value);

  std::size_t step = 0;
  std::size_t stale = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  bool stop = false;

  auto eval_point = [&](std::size_t epoch) {
    const auto rep = evaluate(model, valid_set, tcfg.threads);
    HistoryRecord rec{epoch, step, loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0,
                      rep.auc, rep.logloss};
    loss_sum = 0.0;
    loss_count = 0;
    result.history.push_back(rec);
    if (on_record) on_record(rec);
    if (rep.auc > result.best_valid_auc) {
      result.best_valid_auc = rep.auc;
      result.best_record = result.history.size() - 1;
      for (std::size_t i = 0; i < store.size(); ++i) best[i] = store[i].value;
      stale = 0;
    } else if (++stale >= tcfg.patience) {
      stop = true;
      result.early_stopped = true;
    }
  };

  for (std::size_t epoch = 1; epoch <= tcfg.max_epochs && !stop; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size() && !stop; start += tcfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      store.zero_grad();
      model.begin_batch();
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const Instance& x = train_set.instances[order[k]];
        const int y = x.label;
        const double logit = model.forward_backward(
            x, dropout_rng, [&](double l) { return (sigmoid(l) - static_cast<double>(y)) * inv; });
        batch_loss += logloss_one(logit, y);
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::kTraining,
                    "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batch_index) + "; tensor norms:" + norms_summary(store));
      }
      loss_sum += batch_loss;
      loss_count += end - start;
      adam_step(store, adam);
      ++step;
      ++batch_index;
      if (tcfg.eval_every > 0 && step % tcfg.eval_every == 0) eval_point(epoch);
    }
    if (tcfg.eval_every == 0 && !stop) eval_point(epoch);
  }

  for (std::size_t i = 0; i < store.size(); ++i) store[i].value = best[i];
  return result;
}

TrainedModel train_model(ModelKind kind, const ArmConfig& cfg, const Dataset& train_set,
                         const Dataset& valid_set, const TrainConfig& tcfg,
                         std::uint64_t init_seed) {
  TrainedModel out;
  out.model = make_model(kind, cfg, train_set.schema, init_seed);
  out.result = train(*out.model, train_set, valid_set, tcfg);
  return out;
}

}  // namespace armlet
