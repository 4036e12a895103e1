#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hybviton/raster.hpp"

namespace hybviton {

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;

  void validate() const {
    if (window < 3 || window % 2 == 0) throw std::invalid_argument("SsimParams: window must be odd and >= 3");
    if (!(sigma > 0.0 && k1 > 0.0 && k2 > 0.0 && dynamic_range > 0.0)) {
      throw std::invalid_argument("SsimParams: constants must be positive");
    }
  }
};

/// Normalized 1D Gaussian taps; the 2D window is their outer product.
inline std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(window));
  const int r = window / 2;
  double total = 0.0;
  for (int k = -r; k <= r; ++k) total += taps[k + r] = std::exp(-(k * k) / (2.0 * sigma * sigma));
  for (double& t : taps) t /= total;
  return taps;
}

namespace detail {

/// Separable "valid" correlation: output has (h - n + 1) x (w - n + 1) samples.
template <typename Derived>
Plane<double> filter_valid(const Eigen::ArrayBase<Derived>& src, const std::vector<double>& taps) {
  const Index n = static_cast<Index>(taps.size());
  const Index oh = src.rows() - n + 1;
  const Index ow = src.cols() - n + 1;
  Plane<double> horiz = Plane<double>::Zero(src.rows(), ow);
  for (Index k = 0; k < n; ++k) horiz += taps[static_cast<std::size_t>(k)] * src.middleCols(k, ow);
  Plane<double> out = Plane<double>::Zero(oh, ow);
  for (Index k = 0; k < n; ++k) out += taps[static_cast<std::size_t>(k)] * horiz.middleRows(k, oh);
  return out;
}

}  // namespace detail

/// Mean structural similarity over all fully-contained windows and all channels.
template <typename Scalar>
double ssim(const Image<Scalar>& a, const Image<Scalar>& b, const SsimParams& params = {}) {
  params.validate();
  require_same_size(a.height(), a.width(), b.height(), b.width(), "ssim");
  if (a.height() < params.window || a.width() < params.window) {
    throw std::invalid_argument("ssim: image smaller than the window");
  }
  const std::vector<double> taps = gaussian_taps(params.window, params.sigma);
  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);

  double total = 0.0;
  Index count = 0;
  for (int c = 0; c < 3; ++c) {
    const Plane<double> x = a.channel(c).template cast<double>();
    const Plane<double> y = b.channel(c).template cast<double>();
    const Plane<double> mu_x = detail::filter_valid(x, taps);
    const Plane<double> mu_y = detail::filter_valid(y, taps);
    const Plane<double> xx = detail::filter_valid((x * x).eval(), taps);
    const Plane<double> yy = detail::filter_valid((y * y).eval(), taps);
    const Plane<double> xy = detail::filter_valid((x * y).eval(), taps);
    // Written so that a == b and swapped arguments give bit-identical terms.
    const Plane<double> var_x = xx - mu_x * mu_x;
    const Plane<double> var_y = yy - mu_y * mu_y;
    const Plane<double> cov = xy - mu_x * mu_y;
    const Plane<double> map = ((2.0 * (mu_x * mu_y) + c1) * (2.0 * cov + c2)) /
                              (((mu_x * mu_x + mu_y * mu_y) + c1) * ((var_x + var_y) + c2));
    total += map.sum();
    count += map.size();
  }
  return total / static_cast<double>(count);
}

}  // namespace hybviton
