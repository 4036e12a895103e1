#include "hybviton/config.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "hybviton/diffusion.hpp"
#include "hybviton/raster_io.hpp"

namespace hybviton {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("config: cannot parse '" + value + "' for key " + key);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + std::to_string(v[k]);
  return out;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, trim(t.substr(eq + 1))).second) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key " + key);
    }
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) { return parse_key_values(read_file(path)); }

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf, ptr);
}

void RunConfig::validate() const {
  preprocess.validate();
  if (compose.encode_factor < 1) throw std::invalid_argument("compose.encode_factor must be >= 1");
  if (!(compose.mask_threshold > 0.0 && compose.mask_threshold < 1.0)) {
    throw std::invalid_argument("compose.mask_threshold must lie in (0,1)");
  }
  if (compose.label_count < 1 || compose.label_count > 256) {
    throw std::invalid_argument("segmentation.label_count must lie in [1,256]");
  }
  if (diffusion.steps < 1) throw std::invalid_argument("diffusion.steps must be >= 1");
  if (!(diffusion.strength >= 0.0 && diffusion.strength <= 1.0)) {
    throw std::invalid_argument("diffusion.strength must lie in [0,1]");
  }
  if (diffusion.trajectories < 1) throw std::invalid_argument("diffusion.trajectories must be >= 1");
  if (!std::isfinite(attention.alpha_init)) throw std::invalid_argument("attention.alpha_init must be finite");
  make_linear_schedule(diffusion.train_steps, diffusion.beta_start, diffusion.beta_end);
}

void RunConfig::apply(const KeyValues& kv, const std::filesystem::path& base_dir) {
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
    return (base_dir / p).lexically_normal();
  };
  std::optional<double> declared_sigma_r;
  for (const auto& [key, value] : kv) {
    if (key == "preprocess.torso_labels") preprocess.torso_labels = parse_int_list(key, value);
    else if (key == "preprocess.erosion_kernel") preprocess.erosion_kernel = parse_number<int>(key, value);
    else if (key == "preprocess.bilateral_kernel") preprocess.bilateral_kernel = parse_number<int>(key, value);
    else if (key == "preprocess.sigma_d") preprocess.sigma_d = parse_number<double>(key, value);
    else if (key == "preprocess.sigma_r_train") preprocess.sigma_r_train = parse_number<double>(key, value);
    else if (key == "preprocess.sigma_r_infer") preprocess.sigma_r_infer = parse_number<double>(key, value);
    else if (key == "preprocess.sigma_r") declared_sigma_r = parse_number<double>(key, value);
    else if (key == "preprocess.mode") preprocess.mode = parse_preprocess_mode(value);
    else if (key == "preprocess.source") {
      if (value == "warped") garment_source = GarmentSource::warped;
      else if (value == "ground_truth") garment_source = GarmentSource::ground_truth;
      else throw std::invalid_argument("config: preprocess.source must be warped|ground_truth");
    }
    else if (key == "compose.encode_factor") compose.encode_factor = parse_number<int>(key, value);
    else if (key == "compose.mask_threshold") compose.mask_threshold = parse_number<double>(key, value);
    else if (key == "segmentation.label_count") compose.label_count = parse_number<int>(key, value);
    else if (key == "diffusion.train_steps") diffusion.train_steps = parse_number<int>(key, value);
    else if (key == "diffusion.beta_start") diffusion.beta_start = parse_number<double>(key, value);
    else if (key == "diffusion.beta_end") diffusion.beta_end = parse_number<double>(key, value);
    else if (key == "diffusion.steps") diffusion.steps = parse_number<int>(key, value);
    else if (key == "diffusion.strength") diffusion.strength = parse_number<double>(key, value);
    else if (key == "diffusion.seed") diffusion.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "diffusion.trajectories") diffusion.trajectories = parse_number<int>(key, value);
    else if (key == "attention.mode") attention.mode = parse_attention_mode(value);
    else if (key == "attention.alpha_init") attention.alpha_init = parse_number<double>(key, value);
    else if (key == "paths.garment") paths.garment = path_of(value);
    else if (key == "paths.garment_mask") paths.garment_mask = path_of(value);
    else if (key == "paths.segmentation") paths.segmentation = path_of(value);
    else if (key == "paths.agnostic") paths.agnostic = path_of(value);
    else if (key == "paths.keep_mask") paths.keep_mask = path_of(value);
    else if (key == "paths.warped") paths.warped = path_of(value);
    else if (key == "paths.warped_mask") paths.warped_mask = path_of(value);
    else if (key == "paths.composed") paths.composed = path_of(value);
    else if (key == "paths.golden_dir") paths.golden_dir = path_of(value);
    else if (key == "paths.out") paths.out = path_of(value);
    else throw std::invalid_argument("config: unknown key " + key);
  }
  // Manifests echo the effective sigma_r; it must agree with the mode's value.
  if (declared_sigma_r && *declared_sigma_r != preprocess.sigma_r()) {
    throw std::invalid_argument("config: preprocess.sigma_r = " + format_real(*declared_sigma_r) +
                                " disagrees with the " + to_string(preprocess.mode) + "-mode value " +
                                format_real(preprocess.sigma_r()));
  }
}

KeyValues RunConfig::to_key_values() const {
  KeyValues kv;
  kv["preprocess.torso_labels"] = join(preprocess.torso_labels);
  kv["preprocess.erosion_kernel"] = std::to_string(preprocess.erosion_kernel);
  kv["preprocess.bilateral_kernel"] = std::to_string(preprocess.bilateral_kernel);
  kv["preprocess.sigma_d"] = format_real(preprocess.sigma_d);
  kv["preprocess.sigma_r_train"] = format_real(preprocess.sigma_r_train);
  kv["preprocess.sigma_r_infer"] = format_real(preprocess.sigma_r_infer);
  kv["preprocess.sigma_r"] = format_real(preprocess.sigma_r());
  kv["preprocess.mode"] = to_string(preprocess.mode);
  kv["preprocess.source"] = garment_source == GarmentSource::warped ? "warped" : "ground_truth";
  kv["compose.encode_factor"] = std::to_string(compose.encode_factor);
  kv["compose.mask_threshold"] = format_real(compose.mask_threshold);
  kv["segmentation.label_count"] = std::to_string(compose.label_count);
  kv["diffusion.train_steps"] = std::to_string(diffusion.train_steps);
  kv["diffusion.beta_start"] = format_real(diffusion.beta_start);
  kv["diffusion.beta_end"] = format_real(diffusion.beta_end);
  kv["diffusion.steps"] = std::to_string(diffusion.steps);
  kv["diffusion.strength"] = format_real(diffusion.strength);
  kv["diffusion.seed"] = std::to_string(diffusion.seed);
  kv["diffusion.trajectories"] = std::to_string(diffusion.trajectories);
  kv["attention.mode"] = to_string(attention.mode);
  kv["attention.alpha_init"] = format_real(attention.alpha_init);
  auto put_path = [&](const char* key, const std::filesystem::path& p) {
    if (!p.empty()) kv[key] = std::filesystem::absolute(p).lexically_normal().string();
  };
  put_path("paths.garment", paths.garment);
  put_path("paths.garment_mask", paths.garment_mask);
  put_path("paths.segmentation", paths.segmentation);
  put_path("paths.agnostic", paths.agnostic);
  put_path("paths.keep_mask", paths.keep_mask);
  put_path("paths.warped", paths.warped);
  put_path("paths.warped_mask", paths.warped_mask);
  put_path("paths.composed", paths.composed);
  put_path("paths.golden_dir", paths.golden_dir);
  put_path("paths.out", paths.out);
  return kv;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg;
  cfg.apply(read_key_values(path), path.parent_path());
  cfg.validate();
  return cfg;
}

}  // namespace hybviton
