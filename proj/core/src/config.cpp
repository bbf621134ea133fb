#include "armlet/config.hpp"

#include <cmath>

#include "armlet/error.hpp"

namespace armlet {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kArm: return "arm";
    case ModelKind::kArmPlus: return "arm_plus";
    case ModelKind::kLr: return "lr";
    case ModelKind::kFm: return "fm";
    case ModelKind::kFmPlus: return "fm_plus";
    case ModelKind::kDnn: return "dnn";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  for (auto k : {ModelKind::kArm, ModelKind::kArmPlus, ModelKind::kLr, ModelKind::kFm,
                 ModelKind::kFmPlus, ModelKind::kDnn})
    if (name == to_string(k)) return k;
  throw Error(ErrorKind::kArgument, "unknown model kind '" + name + "'");
}

void ArmConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kArgument, msg); };
  if (n_e < 1) fail("n_e must be >= 1");
  if (heads < 1) fail("K (heads) must be >= 1");
  if (neurons < 1) fail("o (neurons per head) must be >= 1");
  if (n_p < 1) fail("n_p must be >= 1");
  if (n_h < 1) fail("n_h must be >= 1");
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) fail("alpha must be >= 1");
  if (!(exp_clamp > 0.0)) fail("exp_clamp must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  for (auto w : mlp_widths)
    if (w < 1) fail("MLP widths must be >= 1");
  for (auto w : dnn_widths)
    if (w < 1) fail("DNN widths must be >= 1");
}

}  // namespace armlet
