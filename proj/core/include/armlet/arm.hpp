#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "armlet/config.hpp"
#include "armlet/dataset.hpp"
#include "armlet/layers.hpp"
#include "armlet/param_store.hpp"

namespace armlet {

/// Parameter slots of the ARM network. The DNN branch and ensemble scalars
/// exist only for the ensemble (ARM-Net+) variant.
struct ArmLayout {
  bool has_arm = true;
  std::size_t embedding = 0;        // embedding_rows x n_e
  std::vector<NeuronHead> heads;    // K heads of o neurons
  // K*o*n_e -> mlp_widths -> n_h with ReLU, then the linear prediction
  // layer W_p (n_p x n_h), b_p as the stack's output layer.
  DenseStack mlp;

  bool has_dnn = false;
  std::size_t dnn_embedding = 0;
  DenseStack dnn;                   // m*n_e -> dnn_widths (ReLU) -> n_p
  std::size_t ens_w1 = 0, ens_w2 = 0, ens_bias = 0;
};

/// Every learnable tensor of the ARM network plus the config and schema
/// it was built for.
struct ArmParams {
  ArmConfig cfg;
  std::shared_ptr<const Schema> schema;
  ParamStore store;
  ArmLayout layout;

  std::size_t m() const { return schema->m(); }
};

/// Embeddings ~ N(0, 0.01), attention vectors ~ N(0, 0.01), weight
/// matrices Xavier-uniform, biases 0, ensemble weights w1 = w2 = 0.5.
ArmParams init_params(const ArmConfig& cfg, std::shared_ptr<const Schema> schema,
                      std::uint64_t seed, bool with_ensemble = false);

/// DNN-only parameters (the standalone DNN baseline).
ArmParams init_dnn_params(const ArmConfig& cfg, std::shared_ptr<const Schema> schema,
                          std::uint64_t seed);

/// Per-head Q^T W_att, valid until the parameters change.
struct AttentionCache {
  std::vector<Tensor2> alignment;
};
AttentionCache build_attention_cache(const ArmParams& params);

/// Row j = E[:, x_j] for categorical fields, x_j * ê_j for numerical ones.
Tensor2 embed_fields(const Instance& x, const ArmParams& params);

struct GateResult {
  Tensor2 gates;    // o x m
  Tensor2 weights;  // o x m
};
GateResult gated_attention(const Tensor2& emb, std::size_t head, const ArmParams& params);

/// Y (o x n_e) with y_i = exp(clamp(sum_j w_ij e_j)).
Tensor2 exponential_neurons(const Tensor2& emb, const Tensor2& weights, double clamp);

struct ForwardTrace {
  Mode mode = Mode::kEval;
  FieldRows rows;
  Tensor2 emb;                    // m x n_e
  std::vector<HeadTrace> heads;   // per head
  DenseTrace mlp;                 // acts[0] is the concatenated y
  std::vector<double> logits;     // n_p
};

/// `cache` may be null, in which case the alignments are computed on the fly
/// with the same arithmetic.
ForwardTrace arm_forward(const Instance& x, const ArmParams& params, Mode mode,
                         Rng* rng = nullptr, const AttentionCache* cache = nullptr);

/// Accumulates dL/dθ for the ARM branch into params.store gradients.
void arm_backward(const ForwardTrace& trace, std::span<const double> dlogits, ArmParams& params,
                  const AttentionCache* cache = nullptr);

struct DnnTrace {
  FieldRows rows;
  DenseTrace net;
  std::vector<double> logits;
};
DnnTrace dnn_forward(const Instance& x, const ArmParams& params, Mode mode, Rng* rng = nullptr);
void dnn_backward(const DnnTrace& trace, std::span<const double> dlogits, ArmParams& params);

struct EnsembleTrace {
  ForwardTrace arm;
  DnnTrace dnn;
  std::vector<double> logits;
};
/// w1 * arm + w2 * dnn + b_f
EnsembleTrace ensemble_forward(const Instance& x, const ArmParams& params, Mode mode,
                               Rng* rng = nullptr, const AttentionCache* cache = nullptr);
void ensemble_backward(const EnsembleTrace& trace, std::span<const double> dlogits,
                       ArmParams& params, const AttentionCache* cache = nullptr);

}  // namespace armlet
