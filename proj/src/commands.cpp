#include "hybviton/commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <vector>

#include "hybviton/attention.hpp"
#include "hybviton/compose.hpp"
#include "hybviton/diffusion.hpp"
#include "hybviton/metrics.hpp"
#include "hybviton/preprocess.hpp"
#include "hybviton/raster_io.hpp"

namespace hybviton {
namespace fs = std::filesystem;
namespace {

void require_file(const fs::path& p, const char* key) {
  if (p.empty()) throw std::invalid_argument(std::string("config: ") + key + " is not set");
  if (!fs::is_regular_file(p)) throw IoError(std::string(key) + ": no such file " + p.string());
}

fs::path or_default(const fs::path& p, const fs::path& dir, const char* name) {
  return p.empty() ? dir / name : p;
}

void require_out_dir(const fs::path& dir) {
  fs::create_directories(dir);
  if (!fs::is_directory(dir)) throw IoError("output directory unavailable: " + dir.string());
}

std::string manifest(const RunConfig& cfg) { return format_key_values(cfg.to_key_values()); }

template <typename Fn>
int guarded(const char* name, std::ostream& err, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const std::exception& e) {
    err << name << ": " << e.what() << "\n";
    return 1;
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string join_reals(const Eigen::ArrayXd& v) {
  std::string s;
  for (Index k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_real(v[k]);
  return s;
}

/// Latent channels 0..2 mapped to [0,1] by clamp(0.5 + v/4), nearest-upsampled by `factor`.
RasterImage render_latent(const Latent& z, Index factor) {
  std::array<Plane<double>, 3> planes;
  for (int c = 0; c < 3; ++c) {
    const Index src = std::min<Index>(c, z.channels() - 1);
    planes[c].resize(z.height() * factor, z.width() * factor);
    for (Index i = 0; i < planes[c].rows(); ++i)
      for (Index j = 0; j < planes[c].cols(); ++j)
        planes[c](i, j) = std::clamp(0.5 + 0.25 * z(src, i / factor, j / factor), 0.0, 1.0);
  }
  return RasterImage(std::move(planes));
}

}  // namespace

const std::vector<const char*>& golden_artifacts() {
  static const std::vector<const char*> names{kWarpedFile,     kWarpedMaskFile,          kComposedFile,
                                              kComposedMaskFile, kComposedMaskResizedFile, kWarpedMaskResizedFile};
  return names;
}

int cmd_preprocess(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("preprocess", err, [&] {
    cfg.validate();
    require_file(cfg.paths.garment, "paths.garment");
    require_file(cfg.paths.garment_mask, "paths.garment_mask");
    require_file(cfg.paths.segmentation, "paths.segmentation");
    require_out_dir(cfg.paths.out);

    const RasterImage garment = load_image(cfg.paths.garment);
    const BinaryMask mask = load_mask(cfg.paths.garment_mask, cfg.compose.mask_threshold);
    const SegmentationMap seg = load_segmentation(cfg.paths.segmentation, cfg.compose.label_count);

    MaskedGarment<double> source{garment, mask};
    if (cfg.garment_source == GarmentSource::ground_truth) source = ground_truth_garment(garment, mask);
    const MaskedGarment<double> result = preprocess_warped_garment(source.image, source.mask, seg, cfg.preprocess);

    AtomicFileBatch batch;
    batch.add(cfg.paths.out / kWarpedFile, encode_image(result.image));
    batch.add(cfg.paths.out / kWarpedMaskFile, encode_mask(result.mask));
    batch.add(cfg.paths.out / kPreprocessManifest, manifest(cfg));
    batch.commit();
    out << "preprocess: mode=" << to_string(cfg.preprocess.mode) << " sigma_r=" << format_real(cfg.preprocess.sigma_r())
        << " kept " << result.mask.count() << " garment pixels\n";
  });
}

int cmd_compose(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("compose", err, [&] {
    cfg.validate();
    const fs::path warped_path = or_default(cfg.paths.warped, cfg.paths.out, kWarpedFile);
    const fs::path warped_mask_path = or_default(cfg.paths.warped_mask, cfg.paths.out, kWarpedMaskFile);
    require_file(cfg.paths.agnostic, "paths.agnostic");
    require_file(cfg.paths.keep_mask, "paths.keep_mask");
    require_file(warped_path, "paths.warped");
    require_file(warped_mask_path, "paths.warped_mask");
    require_out_dir(cfg.paths.out);

    const RasterImage agnostic_raw = load_image(cfg.paths.agnostic);
    const BinaryMask keep = load_mask(cfg.paths.keep_mask, cfg.compose.mask_threshold);
    const RasterImage warped = load_image(warped_path);
    const BinaryMask warped_mask = load_mask(warped_mask_path, cfg.compose.mask_threshold);

    require_same_size(agnostic_raw.height(), agnostic_raw.width(), keep.height(), keep.width(), "compose");
    const auto agnostic = AgnosticPerson<double>::from_filled(agnostic_raw, keep);
    const ComposedInput<double> composed = compose_input(agnostic, warped, warped_mask);

    const Index f = cfg.compose.encode_factor;
    if (composed.image.height() % f != 0 || composed.image.width() % f != 0) {
      throw std::invalid_argument("compose: encode factor " + std::to_string(f) + " does not divide image size");
    }
    const Index lh = composed.image.height() / f;
    const Index lw = composed.image.width() / f;

    AtomicFileBatch batch;
    batch.add(cfg.paths.out / kComposedFile, encode_image(composed.image));
    batch.add(cfg.paths.out / kComposedMaskFile, encode_mask(composed.mask));
    batch.add(cfg.paths.out / kComposedMaskResizedFile, encode_mask(resize_mask(composed.mask, lh, lw)));
    batch.add(cfg.paths.out / kWarpedMaskResizedFile, encode_mask(resize_mask(warped_mask, lh, lw)));
    batch.add(cfg.paths.out / kComposeManifest, manifest(cfg));
    batch.commit();
    out << "compose: " << composed.image.height() << "x" << composed.image.width() << " -> latent " << lh << "x"
        << lw << "\n";
  });
}

int cmd_demo_sample(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("demo-sample", err, [&] {
    cfg.validate();
    const fs::path composed_path = or_default(cfg.paths.composed, cfg.paths.out, kComposedFile);
    const fs::path warped_mask_path = or_default(cfg.paths.warped_mask, cfg.paths.out, kWarpedMaskFile);
    require_file(composed_path, "paths.composed");
    require_file(warped_mask_path, "paths.warped_mask");
    require_out_dir(cfg.paths.out);

    const RasterImage composed = load_image(composed_path);
    const BinaryMask warped_mask = load_mask(warped_mask_path, cfg.compose.mask_threshold);
    const Index f = cfg.compose.encode_factor;
    const Latent encoded = encode_stub(composed, f);
    const BinaryMask mask_latent = resize_mask(warped_mask, encoded.height(), encoded.width());

    const NoiseSchedule sched =
        make_linear_schedule(cfg.diffusion.train_steps, cfg.diffusion.beta_start, cfg.diffusion.beta_end);
    const GaussianDataDenoiser denoiser(sched);

    const int n = cfg.diffusion.trajectories;
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(encoded.size());
    Eigen::ArrayXd sum_sq = Eigen::ArrayXd::Zero(encoded.size());
    Latent first;
    int t_start = 0;
    int steps = 0;
    for (int k = 0; k < n; ++k) {
      const SdeditStart start =
          sdedit_init(encoded, cfg.diffusion.strength, sched, splitmix64(cfg.diffusion.seed ^ splitmix64(k)));
      t_start = start.timestep;
      steps = std::min(cfg.diffusion.steps, t_start + 1);
      const Latent z = plms_sample(denoiser, start.latent, start.timestep, sched, steps);
      sum += z.values();
      sum_sq += z.values().square();
      if (k == 0) first = z;
    }
    const Eigen::ArrayXd mean = sum / n;
    const Eigen::ArrayXd variance = n > 1 ? ((sum_sq - n * mean.square()) / (n - 1)).eval() : Eigen::ArrayXd::Zero(mean.size()).eval();

    // The probability-flow map of N(0, I) data is the identity, so samples
    // follow the start distribution N(sqrt(ab) * x, 1 - ab).
    const double ab = cfg.diffusion.strength == 0.0 ? 1.0 : sched.alpha_bar(t_start);
    const Eigen::ArrayXd target_mean = std::sqrt(ab) * encoded.values();
    const double target_variance = 1.0 - ab;
    const double mean_error = (mean - target_mean).abs().maxCoeff();
    const double variance_error = target_variance > 0.0
                                      ? ((variance - target_variance).abs() / target_variance).maxCoeff()
                                      : variance.abs().maxCoeff();
    const bool within = mean_error <= kDemoMeanTolerance && variance_error <= kDemoVarianceRelTolerance;

    KeyValues stats;
    stats["trajectories"] = std::to_string(n);
    stats["steps"] = std::to_string(steps);
    stats["start_timestep"] = std::to_string(t_start);
    stats["latent_shape"] = std::to_string(encoded.channels()) + "x" + std::to_string(encoded.height()) + "x" +
                            std::to_string(encoded.width());
    stats["mean"] = join_reals(mean);
    stats["variance"] = join_reals(variance);
    stats["target_mean"] = join_reals(target_mean);
    stats["target_variance"] = format_real(target_variance);
    stats["max_mean_error"] = format_real(mean_error);
    stats["max_variance_rel_error"] = format_real(variance_error);
    stats["mean_tolerance"] = format_real(kDemoMeanTolerance);
    stats["variance_rel_tolerance"] = format_real(kDemoVarianceRelTolerance);
    stats["within_tolerance"] = within ? "true" : "false";

    const AttentionLayerState state(first.channels(), first.height(), first.width(), cfg.attention.mode,
                                    cfg.attention.alpha_init);
    const Latent adjusted = adjust_attention(first, mask_latent, state);

    AtomicFileBatch batch;
    batch.add(cfg.paths.out / kDemoStatsFile, format_key_values(stats));
    batch.add(cfg.paths.out / kDemoRenderFile, encode_image(render_latent(adjusted, f)));
    batch.add(cfg.paths.out / kDemoManifest, manifest(cfg));
    batch.commit();
    out << "demo-sample: " << n << " trajectories, " << steps << " steps from t=" << t_start
        << "; max mean error " << format_real(mean_error) << ", max variance rel error " << format_real(variance_error)
        << (within ? " (within tolerance)" : " (OUTSIDE tolerance)") << "\n";
  });
}

int cmd_ssim(const fs::path& a, const fs::path& b, std::ostream& out, std::ostream& err) {
  return guarded("ssim", err, [&] { out << format_real(ssim(load_image(a), load_image(b))) << "\n"; });
}

int cmd_golden(const RunConfig& cfg, bool update, std::ostream& out, std::ostream& err) {
  return guarded("golden", err, [&] {
    if (cfg.paths.golden_dir.empty()) throw std::invalid_argument("config: paths.golden_dir is not set");
    RunConfig run = cfg;
    run.paths.out = cfg.paths.out / "golden_run";
    run.paths.warped.clear();
    run.paths.warped_mask.clear();
    fs::remove_all(run.paths.out);
    if (cmd_preprocess(run, out, err) != 0) throw std::runtime_error("preprocess stage failed");
    if (cmd_compose(run, out, err) != 0) throw std::runtime_error("compose stage failed");

    if (update) {
      fs::create_directories(cfg.paths.golden_dir);
      for (const char* name : golden_artifacts()) {
        write_file_atomic(cfg.paths.golden_dir / name, read_file(run.paths.out / name));
      }
      out << "golden: updated " << golden_artifacts().size() << " artifacts in " << cfg.paths.golden_dir.string()
          << "\n";
      return;
    }
    for (const char* name : golden_artifacts()) {
      const fs::path expected = cfg.paths.golden_dir / name;
      if (!fs::is_regular_file(expected)) throw IoError("missing golden artifact " + expected.string());
      if (read_file(run.paths.out / name) != read_file(expected)) {
        throw std::runtime_error(std::string("mismatch in ") + name);
      }
    }
    out << "golden: " << golden_artifacts().size() << " artifacts match\n";
  });
}

}  // namespace hybviton
