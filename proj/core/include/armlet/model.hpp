#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "armlet/arm.hpp"
#include "armlet/baselines.hpp"
#include "armlet/config.hpp"
#include "armlet/dataset.hpp"

namespace armlet {

/// Uniform surface over every model kind for training, evaluation and
/// persistence. Binary heads only: every model emits one logit.
class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  virtual const ArmConfig& config() const = 0;
  virtual const std::shared_ptr<const Schema>& schema() const = 0;
  virtual ParamStore& params() = 0;
  virtual const ParamStore& params() const = 0;

  /// Eval-mode logits. Per-call caches make the result bit-identical to
  /// calling predict on each instance separately.
  virtual void predict(std::span<const Instance> xs, std::span<double> logits) const = 0;
  double predict_one(const Instance& x) const;

  /// Refreshes caches derived from the parameters. Parameters must not change
  /// between begin_batch() and the last forward_backward() of the batch.
  virtual void begin_batch() {}

  /// Train-mode forward and backward for one instance. `dloss` maps the logit
  /// to dL/dlogit; gradients accumulate in params(). Returns the logit.
  virtual double forward_backward(const Instance& x, Rng& rng,
                                  const std::function<double(double)>& dloss) = 0;

  virtual std::unique_ptr<Model> clone() const = 0;

  /// Non-null for the ARM kinds (arm, arm_plus).
  virtual const ArmParams* arm_params() const { return nullptr; }
  virtual ArmParams* arm_params() { return nullptr; }
};

std::unique_ptr<Model> make_model(ModelKind kind, const ArmConfig& cfg,
                                  std::shared_ptr<const Schema> schema, std::uint64_t seed);

/// Value of ARMLET_THREADS, or 1 when unset or unparsable.
std::size_t env_threads();

/// Eval logits for a whole dataset, split across up to `threads` workers
/// in contiguous chunks (the output does not depend on the thread count).
std::vector<double> predict_logits(const Model& model, std::span<const Instance> xs,
                                   std::size_t threads = 1);

}  // namespace armlet
