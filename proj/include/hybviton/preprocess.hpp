#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybviton/raster.hpp"

namespace hybviton {

enum class PreprocessMode { train, infer };

PreprocessMode parse_preprocess_mode(const std::string& s);
std::string to_string(PreprocessMode mode);

struct PreprocessConfig {
  /// DensePose torso part indices.
  std::vector<int> torso_labels{1, 2};
  int erosion_kernel = 21;
  int bilateral_kernel = 23;
  double sigma_d = 5.0;
  double sigma_r_train = 0.06;
  double sigma_r_infer = 0.01;
  PreprocessMode mode = PreprocessMode::infer;

  void validate() const;

  double sigma_r() const { return mode == PreprocessMode::train ? sigma_r_train : sigma_r_infer; }
};

/// A garment raster together with the mask of its valid pixels.
template <typename Scalar>
struct MaskedGarment {
  Image<Scalar> image;
  BinaryMask mask;
};

inline void require_odd_kernel(int kernel, const char* what) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw std::invalid_argument(std::string(what) + ": kernel must be odd and >= 1, got " +
                                std::to_string(kernel));
  }
}

/// Keeps only the part of the garment lying on torso-labelled pixels.
template <typename Scalar>
MaskedGarment<Scalar> extract_torso(const Image<Scalar>& garment, const BinaryMask& mask,
                                    const SegmentationMap& seg, const std::vector<int>& torso_labels) {
  require_same_size(garment.height(), garment.width(), mask.height(), mask.width(), "extract_torso");
  require_same_size(garment.height(), garment.width(), seg.height(), seg.width(), "extract_torso");
  if (torso_labels.empty()) throw std::invalid_argument("extract_torso: empty torso label set");

  Plane<std::uint8_t> keep(mask.height(), mask.width());
  for (Index i = 0; i < keep.rows(); ++i) {
    for (Index j = 0; j < keep.cols(); ++j) {
      const bool torso =
          std::find(torso_labels.begin(), torso_labels.end(), seg(i, j)) != torso_labels.end();
      keep(i, j) = (mask(i, j) != 0 && torso) ? 1 : 0;
    }
  }
  BinaryMask out_mask(std::move(keep));
  return {apply_mask(garment, out_mask), std::move(out_mask)};
}

/// Minimum filter over a kernel x kernel window; samples outside the raster count as 0.
/// The box minimum is separable, so it runs as a row pass followed by a column pass.
inline BinaryMask erode_mask(const BinaryMask& mask, int kernel) {
  require_odd_kernel(kernel, "erode_mask");
  const Index r = kernel / 2;
  const Index h = mask.height();
  const Index w = mask.width();
  const auto& in = mask.data();

  Plane<std::uint8_t> rows(h, w);
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      std::uint8_t v = 1;
      if (j - r < 0 || j + r >= w) {
        v = 0;
      } else {
        for (Index l = j - r; l <= j + r && v; ++l) v = std::min(v, in(i, l));
      }
      rows(i, j) = v;
    }
  }
  Plane<std::uint8_t> out(h, w);
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      std::uint8_t v = 1;
      if (i - r < 0 || i + r >= h) {
        v = 0;
      } else {
        for (Index k = i - r; k <= i + r && v; ++k) v = std::min(v, rows(k, j));
      }
      out(i, j) = v;
    }
  }
  return BinaryMask(std::move(out));
}

template <typename Scalar>
MaskedGarment<Scalar> erode_garment(const Image<Scalar>& garment, const BinaryMask& mask, int kernel) {
  require_same_size(garment.height(), garment.width(), mask.height(), mask.width(), "erode_garment");
  BinaryMask eroded = erode_mask(mask, kernel);
  return {apply_mask(garment, eroded), std::move(eroded)};
}

/// Masked bilateral filter with per-channel range kernels.
///
/// For every in-mask pixel (i,j) and channel c the output is the normalized sum
///   sum w * I_c(k,l),  w = exp(-((i-k)^2 + (j-l)^2) / (2 sd^2) - (I_c(i,j) - I_c(k,l))^2 / (2 sr^2))
/// over in-mask, in-bounds neighbours (k,l) of the kernel window. Pixels outside
/// the mask are neither filtered nor used as support, and come out as 0.
template <typename Scalar>
Image<Scalar> bilateral_filter(const Image<Scalar>& garment, const BinaryMask& mask, int kernel,
                               Scalar sigma_d, Scalar sigma_r) {
  require_same_size(garment.height(), garment.width(), mask.height(), mask.width(),
                    "bilateral_filter");
  require_odd_kernel(kernel, "bilateral_filter");
  if (!(sigma_d > Scalar(0)) || !(sigma_r > Scalar(0))) {
    throw std::invalid_argument("bilateral_filter: sigmas must be positive");
  }
  const Index r = kernel / 2;
  const Index h = garment.height();
  const Index w = garment.width();

  Plane<Scalar> spatial(kernel, kernel);
  for (Index dk = -r; dk <= r; ++dk)
    for (Index dl = -r; dl <= r; ++dl)
      spatial(dk + r, dl + r) = Scalar(dk * dk + dl * dl) / (Scalar(2) * sigma_d * sigma_d);
  const Scalar range_scale = Scalar(1) / (Scalar(2) * sigma_r * sigma_r);

  std::array<Plane<Scalar>, 3> out;
  for (int c = 0; c < 3; ++c) {
    const Plane<Scalar>& src = garment.channel(c);
    Plane<Scalar>& dst = out[c];
    dst = Plane<Scalar>::Zero(h, w);
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) {
        if (mask(i, j) == 0) continue;
        const Scalar center = src(i, j);
        Scalar num(0);
        Scalar den(0);
        for (Index k = std::max<Index>(0, i - r); k <= std::min(h - 1, i + r); ++k) {
          for (Index l = std::max<Index>(0, j - r); l <= std::min(w - 1, j + r); ++l) {
            if (mask(k, l) == 0) continue;
            const Scalar diff = center - src(k, l);
            const Scalar wgt = std::exp(-spatial(k - i + r, l - j + r) - diff * diff * range_scale);
            num += wgt * src(k, l);
            den += wgt;
          }
        }
        // Clamp only guards the last ulp; a convex combination of [0,1] samples stays in range.
        dst(i, j) = std::clamp(num / den, Scalar(0), Scalar(1));
      }
    }
  }
  return Image<Scalar>(std::move(out));
}

/// Torso extraction, erosion and bilateral smoothing chained with the
/// configured kernels; sigma_r follows the configured mode.
template <typename Scalar>
MaskedGarment<Scalar> preprocess_warped_garment(const Image<Scalar>& garment, const BinaryMask& mask,
                                                const SegmentationMap& seg, const PreprocessConfig& cfg) {
  cfg.validate();
  MaskedGarment<Scalar> torso = extract_torso(garment, mask, seg, cfg.torso_labels);
  MaskedGarment<Scalar> eroded = erode_garment(torso.image, torso.mask, cfg.erosion_kernel);
  Image<Scalar> smoothed = bilateral_filter(eroded.image, eroded.mask, cfg.bilateral_kernel,
                                            Scalar(cfg.sigma_d), Scalar(cfg.sigma_r()));
  return {std::move(smoothed), std::move(eroded.mask)};
}

/// Garment cut out of the ground-truth person image; used in place of an
/// externally warped garment at training time.
template <typename Scalar>
MaskedGarment<Scalar> ground_truth_garment(const Image<Scalar>& person, const BinaryMask& garment_region) {
  require_same_size(person.height(), person.width(), garment_region.height(), garment_region.width(),
                    "ground_truth_garment");
  return {apply_mask(person, garment_region), garment_region};
}

}  // namespace hybviton
