#include "hybviton/preprocess.hpp"

namespace hybviton {

PreprocessMode parse_preprocess_mode(const std::string& s) {
  if (s == "train") return PreprocessMode::train;
  if (s == "infer") return PreprocessMode::infer;
  throw std::invalid_argument("unknown preprocess mode '" + s + "' (expected train|infer)");
}

std::string to_string(PreprocessMode mode) {
  return mode == PreprocessMode::train ? "train" : "infer";
}

void PreprocessConfig::validate() const {
  if (torso_labels.empty()) throw std::invalid_argument("PreprocessConfig: torso_labels is empty");
  require_odd_kernel(erosion_kernel, "PreprocessConfig.erosion_kernel");
  require_odd_kernel(bilateral_kernel, "PreprocessConfig.bilateral_kernel");
  if (!(sigma_d > 0.0)) throw std::invalid_argument("PreprocessConfig: sigma_d must be positive");
  if (!(sigma_r_train > 0.0) || !(sigma_r_infer > 0.0)) {
    throw std::invalid_argument("PreprocessConfig: sigma_r values must be positive");
  }
}

}  // namespace hybviton
