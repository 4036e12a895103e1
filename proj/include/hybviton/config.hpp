#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "hybviton/attention.hpp"
#include "hybviton/preprocess.hpp"

namespace hybviton {

/// Flat `key = value` store. Lines starting with '#' are comments.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::filesystem::path& path);
/// One `key = value` per line, keys sorted.
std::string format_key_values(const KeyValues& kv);

/// Shortest decimal that round-trips to the same double.
std::string format_real(double v);

struct ComposeSettings {
  int encode_factor = 8;
  double mask_threshold = 0.5;
  int label_count = 25;
};

struct DiffusionSettings {
  int train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int steps = 50;
  double strength = 1.0;
  std::uint64_t seed = 0;
  int trajectories = 10000;
};

struct AttentionSettings {
  AttentionMode mode = AttentionMode::full;
  double alpha_init = AttentionLayerState::kInitialAlpha;
};

/// Input and output locations. Empty means "not provided".
struct PathSettings {
  std::filesystem::path garment;        // warped garment C^w_EX (or person image for ground-truth runs)
  std::filesystem::path garment_mask;   // M^w_EX
  std::filesystem::path segmentation;   // label map S
  std::filesystem::path agnostic;       // I_a, any fill outside the keep mask
  std::filesystem::path keep_mask;      // M_a
  std::filesystem::path warped;         // preprocessed C^w
  std::filesystem::path warped_mask;    // preprocessed M^w
  std::filesystem::path composed;       // I_in, input to demo-sample
  std::filesystem::path golden_dir;
  std::filesystem::path out = ".";
};

/// What the garment input holds: an externally warped garment, or the
/// ground-truth person image whose garment region is cut out (training).
enum class GarmentSource { warped, ground_truth };

struct RunConfig {
  PreprocessConfig preprocess;
  GarmentSource garment_source = GarmentSource::warped;
  ComposeSettings compose;
  DiffusionSettings diffusion;
  AttentionSettings attention;
  PathSettings paths;

  void validate() const;

  /// Applies `key = value` overrides; unknown keys are rejected. Relative paths
  /// are resolved against `base_dir`.
  void apply(const KeyValues& kv, const std::filesystem::path& base_dir = {});

  /// Every parameter, including the sigma_r selected by the preprocess mode.
  KeyValues to_key_values() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace hybviton
