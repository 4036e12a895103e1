#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace hybviton {

using Index = Eigen::Index;

/// Row-major 2D array; the storage unit for every raster in the library.
template <typename T>
using Plane = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Thrown when a pixel-level precondition fails; carries the first offending coordinate.
class PixelError : public std::invalid_argument {
 public:
  PixelError(const std::string& what, Index row, Index col)
      : std::invalid_argument(what + " at (row " + std::to_string(row) + ", col " +
                              std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  Index row() const noexcept { return row_; }
  Index col() const noexcept { return col_; }

 private:
  Index row_;
  Index col_;
};

inline void require_same_size(Index h0, Index w0, Index h1, Index w1, const char* what) {
  if (h0 != h1 || w0 != w1) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(h0) + "x" + std::to_string(w0) + " vs " +
                                std::to_string(h1) + "x" + std::to_string(w1) + ")");
  }
}

/// Three-channel image with samples in [0,1], stored as one plane per channel.
/// Immutable once constructed; every constructor validates the value range.
template <typename Scalar>
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;

  /// All-zero image.
  Image(Index height, Index width) {
    if (height < 0 || width < 0) throw std::invalid_argument("Image: negative dimension");
    for (auto& p : planes_) p = Plane<Scalar>::Zero(height, width);
  }

  explicit Image(std::array<Plane<Scalar>, kChannels> planes) : planes_(std::move(planes)) {
    for (int c = 1; c < kChannels; ++c) {
      require_same_size(planes_[0].rows(), planes_[0].cols(), planes_[c].rows(),
                        planes_[c].cols(), "Image");
    }
    for (int c = 0; c < kChannels; ++c) {
      const auto& p = planes_[c];
      for (Index i = 0; i < p.rows(); ++i) {
        for (Index j = 0; j < p.cols(); ++j) {
          const Scalar v = p(i, j);
          if (!(v >= Scalar(0) && v <= Scalar(1))) {
            throw PixelError("Image: sample outside [0,1] in channel " + std::to_string(c), i, j);
          }
        }
      }
    }
  }

  static Image constant(Index height, Index width, Scalar value) {
    std::array<Plane<Scalar>, kChannels> planes;
    for (auto& p : planes) p = Plane<Scalar>::Constant(height, width, value);
    return Image(std::move(planes));
  }

  Index height() const noexcept { return planes_[0].rows(); }
  Index width() const noexcept { return planes_[0].cols(); }

  const Plane<Scalar>& channel(int c) const { return planes_.at(c); }
  const std::array<Plane<Scalar>, kChannels>& planes() const noexcept { return planes_; }

  Scalar operator()(Index row, Index col, int c) const { return planes_[c](row, col); }

  friend bool operator==(const Image& a, const Image& b) {
    if (a.height() != b.height() || a.width() != b.width()) return false;
    for (int c = 0; c < kChannels; ++c) {
      if ((a.planes_[c] != b.planes_[c]).any()) return false;
    }
    return true;
  }

 private:
  std::array<Plane<Scalar>, kChannels> planes_;
};

/// Single-channel mask over {0,1}.
class BinaryMask {
 public:
  BinaryMask() = default;

  BinaryMask(Index height, Index width) : data_(Plane<std::uint8_t>::Zero(height, width)) {}

  explicit BinaryMask(Plane<std::uint8_t> data) : data_(std::move(data)) {
    for (Index i = 0; i < data_.rows(); ++i) {
      for (Index j = 0; j < data_.cols(); ++j) {
        if (data_(i, j) > 1) throw PixelError("BinaryMask: sample not in {0,1}", i, j);
      }
    }
  }

  static BinaryMask ones(Index height, Index width) {
    return BinaryMask(Plane<std::uint8_t>::Ones(height, width));
  }

  Index height() const noexcept { return data_.rows(); }
  Index width() const noexcept { return data_.cols(); }
  const Plane<std::uint8_t>& data() const noexcept { return data_; }
  std::uint8_t operator()(Index row, Index col) const { return data_(row, col); }

  /// Mask as a real-valued plane, for pointwise products with images.
  template <typename Scalar>
  Plane<Scalar> as() const {
    return data_.template cast<Scalar>();
  }

  Index count() const { return data_.template cast<Index>().sum(); }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.height() == b.height() && a.width() == b.width() && (a.data_ == b.data_).all();
  }

 private:
  Plane<std::uint8_t> data_;
};

/// Integer label map, labels in [0, label_count). Label 0 is background.
class SegmentationMap {
 public:
  static constexpr int kDefaultLabelCount = 25;

  SegmentationMap() = default;

  explicit SegmentationMap(Plane<int> labels, int label_count = kDefaultLabelCount)
      : labels_(std::move(labels)), label_count_(label_count) {
    if (label_count_ < 1) throw std::invalid_argument("SegmentationMap: label_count must be >= 1");
    for (Index i = 0; i < labels_.rows(); ++i) {
      for (Index j = 0; j < labels_.cols(); ++j) {
        const int v = labels_(i, j);
        if (v < 0 || v >= label_count_) {
          throw PixelError("SegmentationMap: label " + std::to_string(v) +
                               " outside declared set [0," + std::to_string(label_count_) + ")",
                           i, j);
        }
      }
    }
  }

  Index height() const noexcept { return labels_.rows(); }
  Index width() const noexcept { return labels_.cols(); }
  int label_count() const noexcept { return label_count_; }
  const Plane<int>& labels() const noexcept { return labels_; }
  int operator()(Index row, Index col) const { return labels_(row, col); }

 private:
  Plane<int> labels_;
  int label_count_ = kDefaultLabelCount;
};

/// Pointwise product of an image with a mask; zero wherever the mask is zero.
template <typename Scalar>
Image<Scalar> apply_mask(const Image<Scalar>& img, const BinaryMask& mask) {
  require_same_size(img.height(), img.width(), mask.height(), mask.width(), "apply_mask");
  const Plane<Scalar> m = mask.as<Scalar>();
  std::array<Plane<Scalar>, 3> out;
  for (int c = 0; c < 3; ++c) out[c] = img.channel(c) * m;
  return Image<Scalar>(std::move(out));
}

/// Position of the first sample of `img` that is nonzero where `mask` is zero, if any.
template <typename Scalar>
bool find_leak_outside(const Image<Scalar>& img, const BinaryMask& mask, Index& row, Index& col) {
  for (Index i = 0; i < img.height(); ++i) {
    for (Index j = 0; j < img.width(); ++j) {
      if (mask(i, j) != 0) continue;
      for (int c = 0; c < 3; ++c) {
        if (img(i, j, c) != Scalar(0)) {
          row = i;
          col = j;
          return true;
        }
      }
    }
  }
  return false;
}

using RasterImage = Image<double>;

}  // namespace hybviton
