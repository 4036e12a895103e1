#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "hybviton/raster.hpp"
#include "hybviton/tensor.hpp"

namespace hybviton {

/// Ablation switch for the warped-region attention scaling.
enum class AttentionMode { full, no_adjustment, alpha_fixed_one };

AttentionMode parse_attention_mode(const std::string& s);
std::string to_string(AttentionMode mode);

/// Per-layer learnable scale plus the layer's feature-map shape.
class AttentionLayerState {
 public:
  static constexpr double kInitialAlpha = 0.5;

  AttentionLayerState(Index channels, Index height, Index width, AttentionMode mode = AttentionMode::full,
                      double alpha = kInitialAlpha)
      : channels_(channels), height_(height), width_(width), mode_(mode),
        alpha_(mode == AttentionMode::alpha_fixed_one ? 1.0 : alpha) {
    if (channels < 1 || height < 1 || width < 1) {
      throw std::invalid_argument("AttentionLayerState: dimensions must be positive");
    }
    if (!std::isfinite(alpha_)) throw std::invalid_argument("AttentionLayerState: alpha must be finite");
  }

  double alpha() const noexcept { return alpha_; }
  AttentionMode mode() const noexcept { return mode_; }
  Index channels() const noexcept { return channels_; }
  Index height() const noexcept { return height_; }
  Index width() const noexcept { return width_; }

  /// alpha is trainable only in full mode; no range is imposed.
  bool trainable() const noexcept { return mode_ == AttentionMode::full; }

  /// Plain gradient-descent step; a no-op for frozen modes.
  void step(double gradient, double learning_rate) {
    if (trainable()) alpha_ -= learning_rate * gradient;
  }

 private:
  Index channels_;
  Index height_;
  Index width_;
  AttentionMode mode_;
  double alpha_;
};

/// softmax(Q K^T / sqrt(dim)) V with one query token per spatial position.
///
/// `queries` is (dim, h, w); `keys` is (n, dim) and `values` is (n, c_out),
/// one token per row. The result is (c_out, h, w).
template <typename Scalar>
Tensor3<Scalar> cross_attention(const Tensor3<Scalar>& queries,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& keys,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& values) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index dim = queries.channels();
  const Index tokens = queries.height() * queries.width();
  if (keys.rows() != values.rows() || keys.rows() < 1) {
    throw std::invalid_argument("cross_attention: key/value token counts differ or are empty");
  }
  if (keys.cols() != dim) {
    throw std::invalid_argument("cross_attention: key width " + std::to_string(keys.cols()) +
                                " does not match query width " + std::to_string(dim));
  }
  // Channel-major storage viewed as (dim x tokens): column t is query token t.
  const Matrix q_tokens =
      Eigen::Map<const Plane<Scalar>>(queries.values().data(), dim, tokens).matrix().transpose();
  Matrix scores = (q_tokens * keys.transpose()) / std::sqrt(Scalar(dim));
  for (Index t = 0; t < tokens; ++t) {
    const Scalar top = scores.row(t).maxCoeff();
    scores.row(t) = (scores.row(t).array() - top).exp().matrix();
    scores.row(t) /= scores.row(t).sum();
  }
  const Matrix mixed = scores * values;  // tokens x c_out
  Tensor3<Scalar> out(values.cols(), queries.height(), queries.width());
  for (Index c = 0; c < values.cols(); ++c)
    for (Index t = 0; t < tokens; ++t) out.values()[c * tokens + t] = mixed(t, c);
  return out;
}

namespace detail {

template <typename Scalar>
void check_attention_operands(const Tensor3<Scalar>& attn, const BinaryMask& mask, const char* what) {
  if (attn.height() != mask.height() || attn.width() != mask.width()) {
    throw std::invalid_argument(std::string(what) + ": mask is " + std::to_string(mask.height()) + "x" +
                                std::to_string(mask.width()) + ", feature map is " +
                                std::to_string(attn.height()) + "x" + std::to_string(attn.width()));
  }
  if (!attn.all_finite()) throw std::invalid_argument(std::string(what) + ": non-finite feature map");
}

}  // namespace detail

/// Scales the feature map by (1 - alpha * m) per spatial position, broadcast over channels.
template <typename Scalar>
Tensor3<Scalar> scale_by_mask(const Tensor3<Scalar>& attn, const BinaryMask& mask, Scalar alpha) {
  detail::check_attention_operands(attn, mask, "adjust_attention");
  Tensor3<Scalar> out = attn;
  const Plane<Scalar> factor = Scalar(1) - alpha * mask.as<Scalar>();
  for (Index c = 0; c < out.channels(); ++c) out.plane(c) = attn.plane(c) * factor;
  return out;
}

template <typename Scalar>
Tensor3<Scalar> adjust_attention(const Tensor3<Scalar>& attn, const BinaryMask& warped_mask_resized,
                                 const AttentionLayerState& state) {
  if (attn.channels() != state.channels() || attn.height() != state.height() || attn.width() != state.width()) {
    throw std::invalid_argument("adjust_attention: feature map shape differs from layer state");
  }
  if (state.mode() == AttentionMode::no_adjustment) {
    detail::check_attention_operands(attn, warped_mask_resized, "adjust_attention");
    return attn;
  }
  return scale_by_mask(attn, warped_mask_resized, Scalar(state.alpha()));
}

/// d<upstream, adjust(attn)>/d alpha = -sum upstream * m * attn.
template <typename Scalar>
Scalar alpha_gradient(const Tensor3<Scalar>& attn, const BinaryMask& warped_mask_resized,
                      const Tensor3<Scalar>& upstream) {
  detail::check_attention_operands(attn, warped_mask_resized, "alpha_gradient");
  require_same_shape(attn, upstream, "alpha_gradient");
  const Plane<Scalar> m = warped_mask_resized.as<Scalar>();
  Scalar total(0);
  for (Index c = 0; c < attn.channels(); ++c) total += (upstream.plane(c) * m * attn.plane(c)).sum();
  return -total;
}

}  // namespace hybviton
