#include <sstream>

#include <gtest/gtest.h>

#include "hybviton/commands.hpp"
#include "hybviton/compose.hpp"
#include "hybviton/raster_io.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace hybviton;
namespace fs = std::filesystem;

namespace {

RunConfig fixture_config(const fs::path& out) {
  RunConfig cfg = load_run_config(fixture_dir() / "golden.cfg");
  cfg.paths.out = out;
  return cfg;
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

TEST(KeyValues, ParseFormatRoundTrip) {
  const KeyValues kv = parse_key_values("# comment\n b = 2 \n\na=x y\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("a"), "x y");
  EXPECT_EQ(kv.at("b"), "2");
  EXPECT_EQ(format_key_values(kv), "a = x y\nb = 2\n");
  EXPECT_EQ(parse_key_values(format_key_values(kv)), kv);
  EXPECT_THROW(parse_key_values("a = 1\na = 2\n"), std::invalid_argument);
  EXPECT_THROW(parse_key_values("no equals sign\n"), std::invalid_argument);
}

TEST(KeyValues, RealsRoundTrip) {
  for (double v : {0.06, 0.01, 1e-4, 0.02, 5.0, 1.0 / 3.0}) EXPECT_EQ(std::stod(format_real(v)), v);
  EXPECT_EQ(format_real(5.0), "5");
  EXPECT_EQ(format_real(0.06), "0.06");
}

TEST(RunConfig, DefaultManifestCarriesPublishedParameters) {
  RunConfig cfg;
  KeyValues kv = cfg.to_key_values();
  EXPECT_EQ(kv.at("preprocess.erosion_kernel"), "21");
  EXPECT_EQ(kv.at("preprocess.bilateral_kernel"), "23");
  EXPECT_EQ(kv.at("preprocess.sigma_d"), "5");
  EXPECT_EQ(kv.at("preprocess.mode"), "infer");
  EXPECT_EQ(kv.at("preprocess.sigma_r"), "0.01");
  EXPECT_EQ(kv.at("attention.alpha_init"), "0.5");
  EXPECT_EQ(kv.at("diffusion.steps"), "50");
  EXPECT_EQ(kv.at("diffusion.train_steps"), "1000");
  cfg.apply({{"preprocess.mode", "train"}});
  EXPECT_EQ(cfg.to_key_values().at("preprocess.sigma_r"), "0.06");
}

TEST(RunConfig, ApplyRejectsBadInput) {
  RunConfig cfg;
  EXPECT_THROW(cfg.apply({{"preprocess.erosion", "21"}}), std::invalid_argument);
  EXPECT_THROW(cfg.apply({{"diffusion.steps", "fifty"}}), std::invalid_argument);
  EXPECT_THROW(cfg.apply({{"preprocess.mode", "eval"}}), std::invalid_argument);
  EXPECT_THROW(cfg.apply({{"attention.mode", "none"}}), std::invalid_argument);
  // declared sigma_r has to agree with the mode
  EXPECT_THROW(cfg.apply({{"preprocess.mode", "train"}, {"preprocess.sigma_r", "0.01"}}), std::invalid_argument);
  EXPECT_NO_THROW(cfg.apply({{"preprocess.mode", "train"}, {"preprocess.sigma_r", "0.06"}}));

  RunConfig bad;
  bad.preprocess.erosion_kernel = 20;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = RunConfig{};
  bad.diffusion.strength = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(RunConfig, RelativePathsResolveAgainstBase) {
  RunConfig cfg;
  cfg.apply({{"paths.garment", "g.ppm"}, {"paths.out", "/abs/out"}}, "/data/run");
  EXPECT_EQ(cfg.paths.garment, fs::path("/data/run/g.ppm"));
  EXPECT_EQ(cfg.paths.out, fs::path("/abs/out"));
}

TEST(RunConfig, ManifestReappliesToSameConfig) {
  RunConfig cfg;
  cfg.apply({{"preprocess.mode", "train"}, {"diffusion.seed", "77"}, {"attention.mode", "no_adjustment"},
             {"preprocess.torso_labels", "1,2,5"}, {"paths.garment", "/x/g.ppm"}});
  RunConfig again;
  again.apply(cfg.to_key_values());
  EXPECT_EQ(again.to_key_values(), cfg.to_key_values());
}

TEST(Commands, PreprocessIsDeterministicAndRecordsMode) {
  ScratchDir a, b, c;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_preprocess(fixture_config(a.path()), out, err), 0) << err.str();
  ASSERT_EQ(cmd_preprocess(fixture_config(b.path()), out, err), 0) << err.str();
  EXPECT_EQ(read_file(a / kWarpedFile), read_file(b / kWarpedFile));
  EXPECT_EQ(read_key_values(a / kPreprocessManifest).at("preprocess.sigma_r"), "0.01");

  RunConfig train = fixture_config(c.path());
  train.apply({{"preprocess.mode", "train"}});
  ASSERT_EQ(cmd_preprocess(train, out, err), 0) << err.str();
  EXPECT_EQ(read_key_values(c / kPreprocessManifest).at("preprocess.sigma_r"), "0.06");
  EXPECT_NE(read_file(a / kWarpedFile), read_file(c / kWarpedFile));
  EXPECT_EQ(read_file(a / kWarpedMaskFile), read_file(c / kWarpedMaskFile));
}

TEST(Commands, GoldensAgreeWithOraclePipeline) {
  const fs::path dir = fixture_dir();
  const RunConfig cfg = load_run_config(dir / "golden.cfg");
  const RasterImage garment = load_image(cfg.paths.garment);
  const BinaryMask mask = load_mask(cfg.paths.garment_mask);
  const SegmentationMap seg = load_segmentation(cfg.paths.segmentation);
  const auto& p = cfg.preprocess;

  const BinaryMask eroded = oracle::erode(oracle::torso_mask(mask, seg, p.torso_labels), p.erosion_kernel);
  const RasterImage cw = oracle::bilateral(oracle::mask_image(garment, eroded), eroded, p.bilateral_kernel,
                                           p.sigma_d, p.sigma_r());
  EXPECT_EQ(load_mask(cfg.paths.golden_dir / kWarpedMaskFile), eroded);
  EXPECT_GT(eroded.count(), 0);
  const RasterImage cw_golden = load_image(cfg.paths.golden_dir / kWarpedFile);
  EXPECT_LE(oracle::max_abs_diff(cw_golden, cw), 0.5 / 255 + 1e-9);

  const RasterImage agnostic_raw = load_image(cfg.paths.agnostic);
  const BinaryMask keep = load_mask(cfg.paths.keep_mask);
  RasterImage i_in;
  BinaryMask m_in;
  oracle::compose(oracle::mask_image(agnostic_raw, keep), keep, cw_golden, eroded, i_in, m_in);
  EXPECT_EQ(load_image(cfg.paths.golden_dir / kComposedFile), i_in);
  EXPECT_EQ(load_mask(cfg.paths.golden_dir / kComposedMaskFile), m_in);
}

TEST(Commands, ComposeWithEmptyWarpedMaskReturnsAgnostic) {
  ScratchDir dir;
  std::mt19937_64 rng(1);
  const BinaryMask keep = oracle::random_mask(16, 24, 0.6, rng);
  const RasterImage ia = oracle::mask_image(oracle::random_byte_image(16, 24, rng), keep);
  save_image(ia, dir / "ia.ppm");
  save_mask(keep, dir / "keep.pgm");
  save_image(RasterImage(16, 24), dir / "cw.ppm");
  save_mask(BinaryMask(16, 24), dir / "mw.pgm");

  RunConfig cfg;
  cfg.apply({{"paths.agnostic", "ia.ppm"}, {"paths.keep_mask", "keep.pgm"}, {"paths.warped", "cw.ppm"},
             {"paths.warped_mask", "mw.pgm"}, {"paths.out", "out"}},
            dir.path());
  fs::create_directories(cfg.paths.out);
  std::ostringstream out, err;
  ASSERT_EQ(cmd_compose(cfg, out, err), 0) << err.str();
  EXPECT_EQ(load_image(cfg.paths.out / kComposedFile), ia);
  EXPECT_EQ(load_mask(cfg.paths.out / kComposedMaskFile), keep);
  EXPECT_EQ(load_mask(cfg.paths.out / kWarpedMaskResizedFile), BinaryMask(2, 3));
}

TEST(Commands, ComposeMismatchLeavesNoPartialOutput) {
  ScratchDir dir;
  save_image(RasterImage(16, 16), dir / "ia.ppm");
  save_mask(BinaryMask::ones(16, 16), dir / "keep.pgm");
  save_image(RasterImage(16, 24), dir / "cw.ppm");
  save_mask(BinaryMask(16, 24), dir / "mw.pgm");
  RunConfig cfg;
  cfg.apply({{"paths.agnostic", "ia.ppm"}, {"paths.keep_mask", "keep.pgm"}, {"paths.warped", "cw.ppm"},
             {"paths.warped_mask", "mw.pgm"}, {"paths.out", "out"}},
            dir.path());
  fs::create_directories(cfg.paths.out);
  std::ostringstream out, err;
  EXPECT_NE(cmd_compose(cfg, out, err), 0);
  EXPECT_NE(err.str().find("16x24"), std::string::npos) << err.str();
  EXPECT_TRUE(listing(cfg.paths.out).empty());
}

TEST(Commands, ComposeRejectsLeakingWarpedGarment) {
  ScratchDir dir;
  save_image(RasterImage(8, 8), dir / "ia.ppm");
  save_mask(BinaryMask(8, 8), dir / "keep.pgm");
  save_image(RasterImage::constant(8, 8, 0.5), dir / "cw.ppm");
  Plane<std::uint8_t> m = Plane<std::uint8_t>::Ones(8, 8);
  m(3, 5) = 0;
  save_mask(BinaryMask(m), dir / "mw.pgm");
  RunConfig cfg;
  cfg.apply({{"paths.agnostic", "ia.ppm"}, {"paths.keep_mask", "keep.pgm"}, {"paths.warped", "cw.ppm"},
             {"paths.warped_mask", "mw.pgm"}, {"paths.out", "."}},
            dir.path());
  std::ostringstream out, err;
  EXPECT_NE(cmd_compose(cfg, out, err), 0);
  EXPECT_NE(err.str().find("row 3, col 5"), std::string::npos) << err.str();
  EXPECT_FALSE(fs::exists(dir / kComposedFile));
}

TEST(Commands, MissingInputIsReported) {
  ScratchDir dir;
  RunConfig cfg;
  cfg.paths.out = dir.path();
  std::ostringstream out, err;
  EXPECT_NE(cmd_preprocess(cfg, out, err), 0);
  EXPECT_NE(err.str().find("paths.garment"), std::string::npos) << err.str();
}

class DemoSample : public ::testing::Test {
 protected:
  void SetUp() override {
    std::ostringstream out, err;
    base_ = fixture_config(pipeline_.path());
    base_.diffusion.trajectories = 300;
    base_.diffusion.steps = 20;
    base_.diffusion.seed = 5;
    ASSERT_EQ(cmd_preprocess(base_, out, err), 0) << err.str();
    ASSERT_EQ(cmd_compose(base_, out, err), 0) << err.str();
  }

  RunConfig run_into(const ScratchDir& dir, AttentionMode mode) {
    RunConfig cfg = base_;
    cfg.paths.composed = pipeline_ / kComposedFile;
    cfg.paths.warped_mask = pipeline_ / kWarpedMaskFile;
    cfg.paths.out = dir.path();
    cfg.attention.mode = mode;
    std::ostringstream out, err;
    EXPECT_EQ(cmd_demo_sample(cfg, out, err), 0) << err.str();
    return cfg;
  }

  ScratchDir pipeline_;
  RunConfig base_;
};

TEST_F(DemoSample, ReproducibleForFixedSeed) {
  ScratchDir a, b;
  run_into(a, AttentionMode::full);
  run_into(b, AttentionMode::full);
  EXPECT_EQ(read_file(a / kDemoStatsFile), read_file(b / kDemoStatsFile));
  EXPECT_EQ(read_file(a / kDemoRenderFile), read_file(b / kDemoRenderFile));
  const KeyValues stats = read_key_values(a / kDemoStatsFile);
  EXPECT_EQ(stats.at("steps"), "20");
  EXPECT_EQ(stats.at("start_timestep"), "999");
  EXPECT_EQ(stats.at("latent_shape"), "3x8x6");
  EXPECT_EQ(read_key_values(a / kDemoManifest).at("attention.mode"), "full");
}

TEST_F(DemoSample, AttentionModesDifferOnlyInsideWarpedRegion) {
  ScratchDir full, fixed, off;
  run_into(full, AttentionMode::full);
  run_into(fixed, AttentionMode::alpha_fixed_one);
  run_into(off, AttentionMode::no_adjustment);
  const RasterImage r_full = load_image(full / kDemoRenderFile);
  const RasterImage r_fixed = load_image(fixed / kDemoRenderFile);
  const RasterImage r_off = load_image(off / kDemoRenderFile);

  const BinaryMask mw_latent = load_mask(pipeline_ / kWarpedMaskResizedFile);
  ASSERT_GT(mw_latent.count(), 0);
  const Index f = base_.compose.encode_factor;
  bool inside_differs = false;
  for (Index i = 0; i < r_full.height(); ++i) {
    for (Index j = 0; j < r_full.width(); ++j) {
      const bool inside = mw_latent(i / f, j / f) == 1;
      for (int c = 0; c < 3; ++c) {
        if (!inside) {
          EXPECT_EQ(r_full(i, j, c), r_fixed(i, j, c));
          EXPECT_EQ(r_full(i, j, c), r_off(i, j, c));
        } else {
          inside_differs = inside_differs || r_full(i, j, c) != r_fixed(i, j, c);
          // alpha = 1 zeroes the latent, which renders as mid-gray
          EXPECT_EQ(r_fixed(i, j, c), 128.0 / 255.0);
        }
      }
    }
  }
  EXPECT_TRUE(inside_differs);
}

TEST(Commands, GoldenPassesAndDetectsPerturbations) {
  ScratchDir dir;
  std::ostringstream out, err;
  const RunConfig cfg = fixture_config(dir.path());
  ASSERT_EQ(cmd_golden(cfg, false, out, err), 0) << err.str();

  RunConfig sigma = cfg;
  sigma.preprocess.sigma_r_infer += 1e-3;
  EXPECT_NE(cmd_golden(sigma, false, out, err), 0);
  EXPECT_NE(err.str().find("mismatch in cw.ppm"), std::string::npos) << err.str();

  RunConfig kernel = cfg;
  kernel.preprocess.erosion_kernel = 19;
  std::ostringstream err2;
  EXPECT_NE(cmd_golden(kernel, false, out, err2), 0);
  EXPECT_NE(err2.str().find("mismatch"), std::string::npos) << err2.str();
}

TEST(Commands, SsimOfFileWithItselfIsOne) {
  std::ostringstream out, err;
  const fs::path g = fixture_dir() / "garment.ppm";
  ASSERT_EQ(cmd_ssim(g, g, out, err), 0) << err.str();
  EXPECT_EQ(out.str(), "1\n");
  std::ostringstream out2;
  EXPECT_NE(cmd_ssim(g, fixture_dir() / "missing.ppm", out2, err), 0);
}
