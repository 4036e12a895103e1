#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "hybviton/raster.hpp"

namespace hybviton {

/// Dense channels x height x width tensor with contiguous channel-major storage.
/// Used for latents and attention feature maps; the flat `values()` array is
/// the natural operand for Eigen array expressions.
template <typename Scalar>
class Tensor3 {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using PlaneMap = Eigen::Map<Plane<Scalar>>;
  using ConstPlaneMap = Eigen::Map<const Plane<Scalar>>;

  Tensor3() = default;

  Tensor3(Index channels, Index height, Index width)
      : channels_(channels), height_(height), width_(width), data_(Array::Zero(size_of(channels, height, width))) {}

  Tensor3(Index channels, Index height, Index width, Array data)
      : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != size_of(channels, height, width)) {
      throw std::invalid_argument("Tensor3: data length " + std::to_string(data_.size()) +
                                  " does not match shape");
    }
  }

  static Tensor3 constant(Index channels, Index height, Index width, Scalar value) {
    return Tensor3(channels, height, width, Array::Constant(size_of(channels, height, width), value));
  }

  Index channels() const noexcept { return channels_; }
  Index height() const noexcept { return height_; }
  Index width() const noexcept { return width_; }
  Index size() const noexcept { return data_.size(); }

  Array& values() noexcept { return data_; }
  const Array& values() const noexcept { return data_; }

  PlaneMap plane(Index c) { return PlaneMap(data_.data() + c * height_ * width_, height_, width_); }
  ConstPlaneMap plane(Index c) const {
    return ConstPlaneMap(data_.data() + c * height_ * width_, height_, width_);
  }

  Scalar& operator()(Index c, Index i, Index j) { return data_[(c * height_ + i) * width_ + j]; }
  Scalar operator()(Index c, Index i, Index j) const { return data_[(c * height_ + i) * width_ + j]; }

  bool same_shape(const Tensor3& o) const noexcept {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

  bool all_finite() const { return data_.isFinite().all(); }

  friend bool operator==(const Tensor3& a, const Tensor3& b) {
    return a.same_shape(b) && (a.data_ == b.data_).all();
  }

 private:
  static Index size_of(Index c, Index h, Index w) {
    if (c < 0 || h < 0 || w < 0) throw std::invalid_argument("Tensor3: negative dimension");
    return c * h * w;
  }

  Index channels_ = 0;
  Index height_ = 0;
  Index width_ = 0;
  Array data_;
};

using Latent = Tensor3<double>;
using FeatureMap = Tensor3<double>;

template <typename Scalar>
void require_same_shape(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace hybviton
