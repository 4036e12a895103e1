#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "hybviton/raster.hpp"
#include "hybviton/tensor.hpp"

namespace hybviton {

/// Person image with the garment region removed (zero-filled) plus the mask of
/// preserved pixels.
template <typename Scalar>
class AgnosticPerson {
 public:
  /// Rejects images that are nonzero outside `keep_mask`.
  AgnosticPerson(Image<Scalar> image, BinaryMask keep_mask)
      : image_(std::move(image)), keep_mask_(std::move(keep_mask)) {
    require_same_size(image_.height(), image_.width(), keep_mask_.height(), keep_mask_.width(),
                      "AgnosticPerson");
    Index row = 0, col = 0;
    if (find_leak_outside(image_, keep_mask_, row, col)) {
      throw PixelError("AgnosticPerson: removed region is not zero-filled", row, col);
    }
  }

  /// Accepts agnostic images with any fill (e.g. gray) in the removed region and zeroes it.
  static AgnosticPerson from_filled(const Image<Scalar>& image, const BinaryMask& keep_mask) {
    return AgnosticPerson(apply_mask(image, keep_mask), keep_mask);
  }

  const Image<Scalar>& image() const noexcept { return image_; }
  const BinaryMask& keep_mask() const noexcept { return keep_mask_; }

 private:
  Image<Scalar> image_;
  BinaryMask keep_mask_;
};

template <typename Scalar>
struct ComposedInput {
  Image<Scalar> image;     // I_in
  BinaryMask mask;         // M_in
  BinaryMask warped_mask;  // M^w
};

/// I_in = I_a + (1 - M_a) * C^w and M_in = M_a + (1 - M_a) * M^w, elementwise.
template <typename Scalar>
ComposedInput<Scalar> compose_input(const AgnosticPerson<Scalar>& agnostic, const Image<Scalar>& warped,
                                    const BinaryMask& warped_mask) {
  const auto& ia = agnostic.image();
  const auto& ma = agnostic.keep_mask();
  require_same_size(ia.height(), ia.width(), warped.height(), warped.width(), "compose_input");
  require_same_size(ia.height(), ia.width(), warped_mask.height(), warped_mask.width(), "compose_input");
  Index row = 0, col = 0;
  if (find_leak_outside(warped, warped_mask, row, col)) {
    throw PixelError("compose_input: warped garment is nonzero outside its mask", row, col);
  }

  const Plane<Scalar> removed = Scalar(1) - ma.template as<Scalar>();
  std::array<Plane<Scalar>, 3> planes;
  for (int c = 0; c < 3; ++c) planes[c] = ia.channel(c) + removed * warped.channel(c);

  const Plane<std::uint8_t> removed_bits = std::uint8_t(1) - ma.data();
  Plane<std::uint8_t> m_in = ma.data() + removed_bits * warped_mask.data();
  return {Image<Scalar>(std::move(planes)), BinaryMask(std::move(m_in)), warped_mask};
}

/// Area-average onto the target grid followed by a >= 0.5 threshold.
///
/// Overlaps are computed in integer units (source pixel = target extent), so
/// coverage ties are decided exactly.
inline BinaryMask resize_mask(const BinaryMask& mask, Index target_h, Index target_w) {
  if (target_h < 1 || target_w < 1) throw std::invalid_argument("resize_mask: zero target dimension");
  const Index h = mask.height();
  const Index w = mask.width();
  if (h < 1 || w < 1) throw std::invalid_argument("resize_mask: empty source mask");
  if (h == target_h && w == target_w) return mask;

  // In scaled units source row i spans [i*target_h, (i+1)*target_h) and
  // target row p spans [p*h, (p+1)*h).
  auto overlap = [](Index a0, Index a1, Index b0, Index b1) {
    return std::max<Index>(0, std::min(a1, b1) - std::max(a0, b0));
  };
  Plane<std::uint8_t> out(target_h, target_w);
  for (Index p = 0; p < target_h; ++p) {
    const Index r0 = p * h, r1 = (p + 1) * h;
    for (Index q = 0; q < target_w; ++q) {
      const Index c0 = q * w, c1 = (q + 1) * w;
      std::int64_t covered = 0;
      for (Index i = r0 / target_h; i < h && i * target_h < r1; ++i) {
        const Index orow = overlap(i * target_h, (i + 1) * target_h, r0, r1);
        for (Index j = c0 / target_w; j < w && j * target_w < c1; ++j) {
          if (mask(i, j) == 0) continue;
          covered += orow * overlap(j * target_w, (j + 1) * target_w, c0, c1);
        }
      }
      const std::int64_t area = static_cast<std::int64_t>(h) * w;
      out(p, q) = 2 * covered >= area ? 1 : 0;
    }
  }
  return BinaryMask(std::move(out));
}

/// Block-mean downsampling of each plane by `factor`. Stand-in for a learned
/// image encoder; linear in its input.
template <typename Scalar>
Tensor3<Scalar> encode_planes(const std::vector<Plane<Scalar>>& planes, Index factor) {
  if (factor < 1) throw std::invalid_argument("encode_stub: factor must be >= 1");
  if (planes.empty()) throw std::invalid_argument("encode_stub: no channels");
  const Index h = planes[0].rows();
  const Index w = planes[0].cols();
  if (h % factor != 0 || w % factor != 0) {
    throw std::invalid_argument("encode_stub: factor " + std::to_string(factor) + " does not divide " +
                                std::to_string(h) + "x" + std::to_string(w) + " (pad first)");
  }
  Tensor3<Scalar> out(static_cast<Index>(planes.size()), h / factor, w / factor);
  const Scalar inv_area = Scalar(1) / Scalar(factor * factor);
  for (Index c = 0; c < out.channels(); ++c) {
    require_same_size(h, w, planes[c].rows(), planes[c].cols(), "encode_stub");
    for (Index p = 0; p < out.height(); ++p)
      for (Index q = 0; q < out.width(); ++q)
        out(c, p, q) = planes[c].block(p * factor, q * factor, factor, factor).sum() * inv_area;
  }
  return out;
}

template <typename Scalar>
Tensor3<Scalar> encode_stub(const Image<Scalar>& img, Index factor) {
  return encode_planes<Scalar>({img.channel(0), img.channel(1), img.channel(2)}, factor);
}

/// Zero-pads on the bottom and right so both dimensions are multiples of `factor`.
template <typename Scalar>
Image<Scalar> pad_to_multiple(const Image<Scalar>& img, Index factor) {
  if (factor < 1) throw std::invalid_argument("pad_to_multiple: factor must be >= 1");
  const Index h = (img.height() + factor - 1) / factor * factor;
  const Index w = (img.width() + factor - 1) / factor * factor;
  std::array<Plane<Scalar>, 3> planes;
  for (int c = 0; c < 3; ++c) {
    planes[c] = Plane<Scalar>::Zero(h, w);
    planes[c].topLeftCorner(img.height(), img.width()) = img.channel(c);
  }
  return Image<Scalar>(std::move(planes));
}

/// One indicator plane per declared label.
template <typename Scalar>
std::vector<Plane<Scalar>> one_hot(const SegmentationMap& seg) {
  std::vector<Plane<Scalar>> planes;
  planes.reserve(static_cast<std::size_t>(seg.label_count()));
  for (int label = 0; label < seg.label_count(); ++label) {
    planes.push_back((seg.labels() == label).template cast<Scalar>());
  }
  return planes;
}

template <typename Scalar>
struct DenoiserInputStack {
  Tensor3<Scalar> noisy_latent;
  Tensor3<Scalar> encoded_input;
  BinaryMask resized_input_mask;
  BinaryMask resized_warped_mask;
  Tensor3<Scalar> encoded_seg;
  int timestep = 0;
};

template <typename Scalar>
DenoiserInputStack<Scalar> assemble_stack(const ComposedInput<Scalar>& composed, const SegmentationMap& seg,
                                          Tensor3<Scalar> z_t, int timestep, Index factor) {
  const auto& img = composed.image;
  require_same_size(img.height(), img.width(), seg.height(), seg.width(), "assemble_stack");
  Tensor3<Scalar> encoded = encode_stub(img, factor);
  if (z_t.height() != encoded.height() || z_t.width() != encoded.width()) {
    throw std::invalid_argument("assemble_stack: noisy latent is " + std::to_string(z_t.height()) + "x" +
                                std::to_string(z_t.width()) + ", expected " +
                                std::to_string(encoded.height()) + "x" + std::to_string(encoded.width()));
  }
  DenoiserInputStack<Scalar> stack;
  stack.resized_input_mask = resize_mask(composed.mask, encoded.height(), encoded.width());
  stack.resized_warped_mask = resize_mask(composed.warped_mask, encoded.height(), encoded.width());
  stack.encoded_seg = encode_planes(one_hot<Scalar>(seg), factor);
  stack.encoded_input = std::move(encoded);
  stack.noisy_latent = std::move(z_t);
  stack.timestep = timestep;
  return stack;
}

}  // namespace hybviton
