#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybviton/commands.hpp"
#include "hybviton/config.hpp"

namespace {

struct RunOptions {
  std::string config;
  std::optional<std::string> mode;
  std::optional<int> steps;
  std::optional<double> strength;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_run_options(CLI::App* cmd, RunOptions& opts) {
  cmd->add_option("--config", opts.config, "key = value configuration file");
  cmd->add_option("--mode", opts.mode, "preprocessing mode")->check(CLI::IsMember({"train", "infer"}));
  cmd->add_option("--steps", opts.steps, "PLMS sampling steps");
  cmd->add_option("--strength", opts.strength, "SDEdit start strength in [0,1]");
  cmd->add_option("--seed", opts.seed, "noise seed");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--set", opts.overrides, "extra key=value override (repeatable)");
}

hybviton::RunConfig build_config(const RunOptions& opts) {
  hybviton::RunConfig cfg;
  if (!opts.config.empty()) cfg = hybviton::load_run_config(opts.config);
  hybviton::KeyValues kv;
  for (const auto& o : opts.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + o);
    kv[o.substr(0, eq)] = o.substr(eq + 1);
  }
  if (opts.mode) kv["preprocess.mode"] = *opts.mode;
  if (opts.steps) kv["diffusion.steps"] = std::to_string(*opts.steps);
  if (opts.strength) kv["diffusion.strength"] = hybviton::format_real(*opts.strength);
  if (opts.seed) kv["diffusion.seed"] = std::to_string(*opts.seed);
  if (opts.out) kv["paths.out"] = *opts.out;
  cfg.apply(kv, std::filesystem::current_path());
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Garment preprocessing, input composition and sampler toolkit"};
  app.require_subcommand(1);

  RunOptions opts;
  auto* preprocess = app.add_subcommand("preprocess", "torso extraction, erosion and bilateral smoothing");
  auto* compose = app.add_subcommand("compose", "build the hybrid input image and masks");
  auto* demo = app.add_subcommand("demo-sample", "PLMS sampling with the analytic Gaussian denoiser");
  auto* golden = app.add_subcommand("golden", "byte-compare preprocess + compose against stored goldens");
  for (auto* cmd : {preprocess, compose, demo, golden}) add_run_options(cmd, opts);
  bool update = false;
  golden->add_flag("--update", update, "rewrite the golden artifacts");

  auto* ssim = app.add_subcommand("ssim", "structural similarity of two RGB rasters");
  std::string image_a;
  std::string image_b;
  ssim->add_option("imageA", image_a)->required()->check(CLI::ExistingFile);
  ssim->add_option("imageB", image_b)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  if (ssim->parsed()) return hybviton::cmd_ssim(image_a, image_b, std::cout, std::cerr);

  hybviton::RunConfig cfg;
  try {
    cfg = build_config(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (preprocess->parsed()) return hybviton::cmd_preprocess(cfg, std::cout, std::cerr);
  if (compose->parsed()) return hybviton::cmd_compose(cfg, std::cout, std::cerr);
  if (demo->parsed()) return hybviton::cmd_demo_sample(cfg, std::cout, std::cerr);
  return hybviton::cmd_golden(cfg, update, std::cout, std::cerr);
}
