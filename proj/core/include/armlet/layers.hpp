#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "armlet/config.hpp"
#include "armlet/dataset.hpp"
#include "armlet/param_store.hpp"
#include "armlet/rng.hpp"
#include "armlet/tensor.hpp"

// Building blocks shared by the ARM network and the baselines. Each block
// records parameter slots (indices into a ParamStore) and offers a forward
// pass plus a hand-derived backward pass that accumulates into the store's
// gradient buffers.

namespace armlet {

/// Per-instance rows of a field embedding table laid out as in Schema.
struct FieldRows {
  std::vector<std::size_t> rows;
  std::vector<double> scales;  // 1 for categorical, scaled value for numerical
};

FieldRows field_rows(const Instance& x, const Schema& schema);

/// out(j, :) = scale_j * table(row_j, :)
void gather_embeddings(const FieldRows& fr, const Tensor2& table, Tensor2& out);
/// grad(row_j, :) += scale_j * d_out(j, :)
void scatter_embedding_grad(const FieldRows& fr, const Tensor2& d_out, Tensor2& grad);

/// Fully connected ReLU stack followed by an optional linear output layer.
struct DenseStack {
  struct Layer {
    std::size_t weight = 0;  // out x in
    std::size_t bias = 0;    // out x 1
  };
  std::vector<Layer> hidden;  // ReLU layers
  bool has_output = false;
  Layer output;               // linear
  double dropout = 0.0;

  static DenseStack create(ParamStore& store, const std::string& prefix, std::size_t in,
                           const std::vector<std::size_t>& hidden_widths, std::size_t out,
                           bool linear_output, double dropout, Rng& rng);
};

struct DenseTrace {
  std::vector<std::vector<double>> acts;   // acts[0] = input, then every layer output
  std::vector<std::vector<double>> masks;  // dropout multipliers per hidden layer (train only)
};

/// Runs the stack; the result is trace.acts.back().
void dense_forward(const DenseStack& net, const ParamStore& store, std::vector<double> input,
                   Mode mode, Rng* rng, DenseTrace& trace);
/// Accumulates parameter gradients; returns d(input).
std::vector<double> dense_backward(const DenseStack& net, ParamStore& store,
                                   const DenseTrace& trace, std::span<const double> d_out);

/// One attention head of exponential neurons: query vectors Q (n_e x o),
/// value vectors V (m x o) and the bilinear matrix W_att (n_e x n_e).
struct NeuronHead {
  std::size_t q = 0;
  std::size_t v = 0;
  std::size_t w_att = 0;
};

struct HeadTrace {
  Tensor2 scores;   // o x m, q_i^T W_att e_j
  Tensor2 gates;    // o x m, entmax rows
  Tensor2 weights;  // o x m, gates * v
  Tensor2 exponent; // o x n_e, sum_j w_ij e_j before clamping
  Tensor2 outputs;  // o x n_e, exp of the clamped exponent
};

/// Q^T W_att (o x n_e): the query alignment that can be computed once per
/// parameter state and reused for every instance.
Tensor2 head_alignment(const NeuronHead& head, const ParamStore& store);

/// Scores, entmax gates and gated interaction weights for one head.
void head_gates(const NeuronHead& head, const ParamStore& store, const Tensor2& alignment,
                const Tensor2& emb, double alpha, HeadTrace& trace);

/// y_i = exp(clamp(sum_j w_ij e_j, -clamp, clamp)); fills exponent and outputs.
void exponential_neurons_into(const Tensor2& emb, const Tensor2& weights, double clamp,
                              Tensor2& exponent, Tensor2& outputs);

/// Backward through one head given dL/dY (o x n_e). Accumulates into the
/// Q, V and W_att gradients and into d_emb.
void head_backward(const NeuronHead& head, ParamStore& store, const Tensor2& alignment,
                   const Tensor2& emb, double alpha, double clamp, const HeadTrace& trace,
                   const Tensor2& d_outputs, Tensor2& d_emb);

NeuronHead create_head(ParamStore& store, const std::string& prefix, std::size_t m,
                       std::size_t n_e, std::size_t neurons, Rng& rng);

/// Xavier-uniform matrix, U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)).
Tensor2 xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng);
Tensor2 normal_init(std::size_t rows, std::size_t cols, double stddev, Rng& rng);

}  // namespace armlet
