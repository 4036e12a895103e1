#include "hybviton/diffusion.hpp"

#include <algorithm>

namespace hybviton {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw std::invalid_argument("NoiseSchedule: no timesteps");
  alpha_bar_.reserve(betas_.size());
  long double running = 1.0L;
  for (std::size_t t = 0; t < betas_.size(); ++t) {
    const double b = betas_[t];
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("NoiseSchedule: beta[" + std::to_string(t) + "] outside (0,1)");
    }
    if (t > 0 && b < betas_[t - 1]) {
      throw std::invalid_argument("NoiseSchedule: betas must be non-decreasing (t=" + std::to_string(t) + ")");
    }
    running *= 1.0L - static_cast<long double>(b);
    alpha_bar_.push_back(static_cast<double>(running));
  }
}

void NoiseSchedule::require_timestep(int t, const char* what) const {
  if (t < 0 || t >= steps()) {
    throw std::out_of_range(std::string(what) + ": timestep " + std::to_string(t) + " outside [0," +
                            std::to_string(steps()) + ")");
  }
}

NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw std::invalid_argument("make_linear_schedule: steps must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw std::invalid_argument("make_linear_schedule: need 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    betas[t] = steps == 1 ? beta_start : beta_start + (beta_end - beta_start) * t / (steps - 1);
  }
  // Guard against rounding pushing interior values below the previous one.
  for (int t = 1; t < steps; ++t) betas[t] = std::max(betas[t], betas[t - 1]);
  return NoiseSchedule(std::move(betas));
}

Latent forward_diffuse(const Latent& z0, int t, const Latent& noise, const NoiseSchedule& sched) {
  sched.require_timestep(t, "forward_diffuse");
  require_same_shape(z0, noise, "forward_diffuse");
  const double ab = sched.alpha_bar(t);
  Latent out = z0;
  out.values() = std::sqrt(ab) * z0.values() + std::sqrt(1.0 - ab) * noise.values();
  return out;
}

Latent gaussian_like(Index channels, Index height, Index width, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Latent out(channels, height, width);
  for (Index k = 0; k < out.size(); ++k) out.values()[k] = normal(rng);
  return out;
}

SdeditStart sdedit_init(const Latent& encoded_input, double strength, const NoiseSchedule& sched,
                        std::uint64_t seed) {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw std::invalid_argument("sdedit_init: strength must lie in [0,1]");
  }
  if (strength == 0.0) {
    return {encoded_input, 0,
            Latent(encoded_input.channels(), encoded_input.height(), encoded_input.width())};
  }
  const int t0 = static_cast<int>(std::lround(strength * (sched.steps() - 1)));
  std::mt19937_64 rng(seed);
  Latent noise = gaussian_like(encoded_input.channels(), encoded_input.height(), encoded_input.width(), rng);
  Latent z = forward_diffuse(encoded_input, t0, noise, sched);
  return {std::move(z), t0, std::move(noise)};
}

std::vector<int> plms_timesteps(int t_start, int num_steps) {
  if (num_steps < 1) throw std::invalid_argument("plms_timesteps: num_steps must be >= 1");
  if (t_start < 0) throw std::invalid_argument("plms_timesteps: negative start timestep");
  if (num_steps > t_start + 1) {
    throw std::invalid_argument("plms_timesteps: " + std::to_string(num_steps) +
                                " steps cannot be spaced over timesteps [0," + std::to_string(t_start) + "]");
  }
  std::vector<int> ts(static_cast<std::size_t>(num_steps));
  if (num_steps == 1) {
    ts[0] = t_start;
    return ts;
  }
  const long span = num_steps - 1;
  for (long i = 0; i < num_steps; ++i) {
    // round(t_start * (span - i) / span), half up
    ts[static_cast<std::size_t>(i)] = static_cast<int>((2L * t_start * (span - i) + span) / (2L * span));
  }
  return ts;
}

std::vector<double> multistep_coefficients(int order) {
  switch (order) {
    case 1:
      return {1.0};
    case 2:
      return {3.0 / 2.0, -1.0 / 2.0};
    case 3:
      return {23.0 / 12.0, -16.0 / 12.0, 5.0 / 12.0};
    case 4:
      return {55.0 / 24.0, -59.0 / 24.0, 37.0 / 24.0, -9.0 / 24.0};
    default:
      throw std::invalid_argument("multistep_coefficients: order must be 1..4");
  }
}

Latent transfer(const Latent& z, const Latent& eps, double alpha_bar_t, double alpha_bar_prev) {
  require_same_shape(z, eps, "transfer");
  Latent out = z;
  out.values() = std::sqrt(alpha_bar_prev / alpha_bar_t) * (z.values() - std::sqrt(1.0 - alpha_bar_t) * eps.values()) +
                 std::sqrt(1.0 - alpha_bar_prev) * eps.values();
  return out;
}

PlmsSampler::PlmsSampler(Latent z_start, int t_start, const NoiseSchedule& sched, int num_steps, int max_order)
    : sched_(&sched), max_order_(max_order), z_(std::move(z_start)) {
  sched.require_timestep(t_start, "plms_sample");
  if (max_order < 1 || max_order > kMaxHistory) throw std::invalid_argument("plms_sample: max_order must be 1..4");
  timesteps_ = plms_timesteps(t_start, num_steps);
  if (!z_.all_finite()) throw std::invalid_argument("plms_sample: non-finite start latent");
}

void PlmsSampler::step(const Latent& eps) {
  if (done()) throw std::logic_error("PlmsSampler: already finished");
  require_same_shape(z_, eps, "PlmsSampler::step");
  history_.push_front(eps);
  if (history_.size() > kMaxHistory) history_.pop_back();

  const int order = std::min<int>(max_order_, static_cast<int>(history_.size()));
  const std::vector<double> coeff = multistep_coefficients(order);
  Latent combined = history_[0];
  combined.values() *= coeff[0];
  for (int k = 1; k < order; ++k) combined.values() += coeff[static_cast<std::size_t>(k)] * history_[k].values();

  const int t = timesteps_[index_];
  const int t_prev = index_ + 1 < timesteps_.size() ? timesteps_[index_ + 1] : -1;
  z_ = transfer(z_, combined, sched_->alpha_bar(t), sched_->alpha_bar_or_one(t_prev));
  if (!z_.all_finite()) {
    throw std::runtime_error("plms_sample: latent diverged at step " + std::to_string(index_) +
                             " (t=" + std::to_string(t) + ")");
  }
  ++index_;
}

}  // namespace hybviton
