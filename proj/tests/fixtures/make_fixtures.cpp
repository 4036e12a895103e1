// Regenerates the 64x48 pipeline fixtures in the given directory.
// Usage: make_fixtures <dir>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

#include "hybviton/raster_io.hpp"

using namespace hybviton;

namespace {

constexpr Index kHeight = 64;
constexpr Index kWidth = 48;

bool in_torso(Index i, Index j) { return i >= 10 && i < 58 && j >= 10 && j < 38; }
bool in_sleeve(Index i, Index j) { return i >= 12 && i < 44 && ((j >= 3 && j < 10) || (j >= 38 && j < 45)); }

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <dir>\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> noise(0.0, 0.03);

  // Striped garment with wrinkle-like noise on a light background.
  std::array<Plane<double>, 3> garment;
  for (auto& p : garment) p.resize(kHeight, kWidth);
  Plane<std::uint8_t> garment_gray = Plane<std::uint8_t>::Zero(kHeight, kWidth);
  for (Index i = 0; i < kHeight; ++i) {
    for (Index j = 0; j < kWidth; ++j) {
      const bool cloth = in_torso(i, j) || in_sleeve(i, j);
      const double stripe = (j / 4) % 2 ? 0.15 : 0.0;
      const double base[3] = {0.55 + stripe, 0.25 + 0.5 * stripe, 0.35};
      for (int c = 0; c < 3; ++c) {
        garment[c](i, j) = cloth ? std::clamp(base[c] + noise(rng) + 0.05 * std::sin(0.7 * i), 0.0, 1.0) : 0.9;
      }
      garment_gray(i, j) = cloth ? 255 : 0;
      // anti-aliased edge on the torso's left border
      if (j == 9 && i >= 10 && i < 58 && !in_sleeve(i, j)) garment_gray(i, j) = (i % 2) ? 140 : 110;
    }
  }

  Plane<int> labels = Plane<int>::Zero(kHeight, kWidth);
  for (Index i = 0; i < kHeight; ++i) {
    for (Index j = 0; j < kWidth; ++j) {
      if (i < 9 && j >= 16 && j < 32) labels(i, j) = 23;  // head
      else if (in_torso(i, j)) labels(i, j) = j < 24 ? 1 : 2;
      else if (in_sleeve(i, j)) labels(i, j) = j < 24 ? 15 : 16;
      else if (i >= 58 && j >= 12 && j < 36) labels(i, j) = 7;  // legs
    }
  }

  // Person with the upper body replaced by gray; keep mask marks the retained pixels.
  std::array<Plane<double>, 3> agnostic;
  for (auto& p : agnostic) p.resize(kHeight, kWidth);
  Plane<std::uint8_t> keep = Plane<std::uint8_t>::Zero(kHeight, kWidth);
  std::uniform_real_distribution<double> skin(0.6, 0.7);
  for (Index i = 0; i < kHeight; ++i) {
    for (Index j = 0; j < kWidth; ++j) {
      const bool removed = i >= 8 && i < 60 && j >= 2 && j < 46;
      keep(i, j) = removed ? 0 : 255;
      for (int c = 0; c < 3; ++c) agnostic[c](i, j) = removed ? 0.5 : (labels(i, j) ? skin(rng) : 0.95 - 0.1 * c);
    }
  }

  save_image(RasterImage(garment), dir / "garment.ppm");
  write_file_atomic(dir / "garment_mask.pgm", [&] {
    std::string s = "P5\n" + std::to_string(kWidth) + " " + std::to_string(kHeight) + "\n255\n";
    for (Index i = 0; i < kHeight; ++i)
      for (Index j = 0; j < kWidth; ++j) s.push_back(static_cast<char>(garment_gray(i, j)));
    return s;
  }());
  save_segmentation(SegmentationMap(labels), dir / "segmentation.pgm");
  save_image(RasterImage(agnostic), dir / "agnostic.ppm");
  save_mask(BinaryMask((keep / std::uint8_t(255)).eval()), dir / "keep_mask.pgm");
  std::cout << "fixtures written to " << dir << "\n";
  return 0;
}
