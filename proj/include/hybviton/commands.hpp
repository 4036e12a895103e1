#pragma once

#include <filesystem>
#include <ostream>

#include "hybviton/config.hpp"

namespace hybviton {

// Artifact file names written under RunConfig::paths.out.
inline constexpr const char* kWarpedFile = "cw.ppm";
inline constexpr const char* kWarpedMaskFile = "mw.pgm";
inline constexpr const char* kPreprocessManifest = "preprocess_manifest.txt";
inline constexpr const char* kComposedFile = "i_in.ppm";
inline constexpr const char* kComposedMaskFile = "m_in.pgm";
inline constexpr const char* kComposedMaskResizedFile = "m_in_resized.pgm";
inline constexpr const char* kWarpedMaskResizedFile = "mw_resized.pgm";
inline constexpr const char* kComposeManifest = "compose_manifest.txt";
inline constexpr const char* kDemoStatsFile = "demo_stats.txt";
inline constexpr const char* kDemoRenderFile = "demo_render.ppm";
inline constexpr const char* kDemoManifest = "demo_manifest.txt";

/// Acceptance bands for demo-sample statistics against the analytic target.
inline constexpr double kDemoMeanTolerance = 0.05;
inline constexpr double kDemoVarianceRelTolerance = 0.05;

// Each command returns a process exit status (0 success, 1 failure) and
// reports diagnostics on `err`. Outputs of a command are committed together
// or not at all.

int cmd_preprocess(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compose(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_demo_sample(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_ssim(const std::filesystem::path& a, const std::filesystem::path& b, std::ostream& out, std::ostream& err);
/// Runs preprocess + compose into a scratch directory and byte-compares with
/// the goldens; with `update` the goldens are rewritten instead.
int cmd_golden(const RunConfig& cfg, bool update, std::ostream& out, std::ostream& err);

/// Raster artifacts covered by the golden suite.
const std::vector<const char*>& golden_artifacts();

}  // namespace hybviton
