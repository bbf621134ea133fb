#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "armlet/config.hpp"
#include "armlet/dataset.hpp"
#include "armlet/layers.hpp"
#include "armlet/param_store.hpp"

namespace armlet {

/// Logistic regression, factorization machine, and the FM augmented with a
/// bank of exponential neurons over the FM embeddings. One struct holds all
/// three; which parts exist depends on how it was created.
struct FmParams {
  std::shared_ptr<const Schema> schema;
  std::size_t n_e = 0;       // latent size (0 for plain LR)
  std::size_t neurons = 0;   // exponential neurons in the bank
  double alpha = 1.0;
  double exp_clamp = 15.0;
  ParamStore store;

  std::size_t linear = 0;    // embedding_rows x 1
  std::size_t bias = 0;      // 1 x 1
  bool has_latent = false;
  std::size_t latent = 0;    // embedding_rows x n_e
  bool has_bank = false;
  NeuronHead bank;
  std::size_t readout = 0;   // 1 x (neurons * n_e)
};

FmParams init_lr_params(std::shared_ptr<const Schema> schema, std::uint64_t seed);
FmParams init_fm_params(std::shared_ptr<const Schema> schema, std::size_t n_e,
                        std::uint64_t seed);
/// FM plus `neurons` exponential neurons; neurons = 0 gives a plain FM.
FmParams init_fm_plus_params(std::shared_ptr<const Schema> schema, const ArmConfig& cfg,
                             std::uint64_t seed);

/// b + sum_j x_j w[row_j]
double lr_forward(const Instance& x, const FmParams& params);
/// LR + sum_{i<j} <e_i, e_j> via the square-of-sums identity.
double fm_forward(const Instance& x, const FmParams& params);

struct FmTrace {
  FieldRows rows;
  Tensor2 emb;           // m x n_e, FM latent rows scaled by x_j
  std::vector<double> sum;  // per latent dim: sum_j e_jd
  HeadTrace bank;
  Tensor2 alignment;
  double logit = 0.0;
};

/// Full forward for any FmParams (LR, FM or FM with neurons).
FmTrace fm_plus_forward_trace(const Instance& x, const FmParams& params);
double fm_plus_neurons_forward(const Instance& x, const FmParams& params);
void fm_backward(const FmTrace& trace, double dlogit, FmParams& params);

}  // namespace armlet
