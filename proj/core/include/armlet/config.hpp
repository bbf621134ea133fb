#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace armlet {

enum class ModelKind { kArm, kArmPlus, kLr, kFm, kFmPlus, kDnn };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

enum class Mode { kTrain, kEval };

/// Hyperparameters shared by every model kind. Fields a kind does not use
/// are ignored (e.g. the LR baseline only reads the schema).
struct ArmConfig {
  std::size_t n_e = 10;       // embedding size
  std::size_t heads = 4;      // K, attention heads
  std::size_t neurons = 16;   // o, exponential neurons per head
  double alpha = 1.7;         // entmax exponent shared by all heads
  std::vector<std::size_t> mlp_widths{64};
  std::size_t n_h = 32;       // width of h, the last MLP layer
  std::size_t n_p = 1;        // prediction targets
  double exp_clamp = 15.0;    // bound on the exponent of every neuron
  std::vector<std::size_t> dnn_widths{64, 64};
  double dropout = 0.0;
  std::size_t fm_neurons = 0; // size of the exponential-neuron bank in fm_plus

  /// Throws an argument error when an invariant is violated.
  void validate() const;
};

}  // namespace armlet
