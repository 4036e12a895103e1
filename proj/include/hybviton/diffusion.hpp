#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybviton/tensor.hpp"

namespace hybviton {

/// Per-timestep betas and their cumulative products alpha_bar_t = prod_{s<=t} (1 - beta_s).
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> betas);

  int steps() const noexcept { return static_cast<int>(betas_.size()); }
  double beta(int t) const { return betas_.at(static_cast<std::size_t>(t)); }
  double alpha_bar(int t) const { return alpha_bar_.at(static_cast<std::size_t>(t)); }
  /// alpha_bar with the convention alpha_bar(-1) = 1 (clean data).
  double alpha_bar_or_one(int t) const { return t < 0 ? 1.0 : alpha_bar(t); }

  const std::vector<double>& betas() const noexcept { return betas_; }
  const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }

  void require_timestep(int t, const char* what) const;

 private:
  std::vector<double> betas_;
  std::vector<double> alpha_bar_;
};

/// Linearly spaced betas; cumulative products accumulated in long double.
NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end);

/// sqrt(alpha_bar_t) * z0 + sqrt(1 - alpha_bar_t) * noise
Latent forward_diffuse(const Latent& z0, int t, const Latent& noise, const NoiseSchedule& sched);

/// Unit-normal tensor drawn from `rng`.
Latent gaussian_like(Index channels, Index height, Index width, std::mt19937_64& rng);

struct SdeditStart {
  Latent latent;
  int timestep = 0;
  /// The noise that was injected; zero when strength is 0.
  Latent noise;
};

/// Partially noised start point: t0 = round(strength * (T - 1)), noise drawn from `seed`.
SdeditStart sdedit_init(const Latent& encoded_input, double strength, const NoiseSchedule& sched,
                        std::uint64_t seed);

/// Evenly spaced descending timesteps from t_start to 0 (a single step visits only t_start).
std::vector<int> plms_timesteps(int t_start, int num_steps);

/// Weights applied to the newest-first noise history for a multistep rule of the given order.
std::vector<double> multistep_coefficients(int order);

/// Deterministic transfer from t to t_prev given a noise prediction:
/// sqrt(ab_prev / ab_t) * (z - sqrt(1 - ab_t) eps) + sqrt(1 - ab_prev) eps.
Latent transfer(const Latent& z, const Latent& eps, double alpha_bar_t, double alpha_bar_prev);

/// Pseudo linear multistep sampler. Keeps the four most recent noise
/// predictions and combines them with Adams-Bashforth weights, ramping the
/// order up from 1 while the history fills.
class PlmsSampler {
 public:
  static constexpr int kMaxHistory = 4;

  PlmsSampler(Latent z_start, int t_start, const NoiseSchedule& sched, int num_steps, int max_order = 4);

  bool done() const noexcept { return index_ >= timesteps_.size(); }
  int current_timestep() const { return timesteps_.at(index_); }
  std::size_t step_index() const noexcept { return index_; }
  const Latent& latent() const noexcept { return z_; }
  const std::deque<Latent>& eps_history() const noexcept { return history_; }
  const std::vector<int>& timesteps() const noexcept { return timesteps_; }

  /// Feeds the denoiser's prediction at current_timestep() and advances one transfer.
  void step(const Latent& eps);

 private:
  const NoiseSchedule* sched_;
  std::vector<int> timesteps_;
  int max_order_;
  std::size_t index_ = 0;
  Latent z_;
  std::deque<Latent> history_;  // newest first
};

/// Runs a PlmsSampler to completion. `denoiser(latent, timestep)` must return a
/// noise prediction shaped like the latent.
template <typename Denoiser>
Latent plms_sample(Denoiser&& denoiser, Latent z_start, int t_start, const NoiseSchedule& sched, int num_steps,
                   int max_order = 4) {
  PlmsSampler sampler(std::move(z_start), t_start, sched, num_steps, max_order);
  while (!sampler.done()) {
    const Latent eps = denoiser(sampler.latent(), sampler.current_timestep());
    if (!eps.same_shape(sampler.latent())) {
      throw std::invalid_argument("plms_sample: denoiser output shape differs from latent");
    }
    if (!eps.all_finite()) {
      throw std::runtime_error("plms_sample: non-finite denoiser output at step " +
                               std::to_string(sampler.step_index()) + " (t=" +
                               std::to_string(sampler.current_timestep()) + ")");
    }
    sampler.step(eps);
  }
  return sampler.latent();
}

/// Exact noise predictor E[eps | z_t] when the clean data is N(mean, variance * I):
///   sqrt(1 - ab) * (z - sqrt(ab) * mean) / (ab * variance + 1 - ab).
class GaussianDataDenoiser {
 public:
  GaussianDataDenoiser(const NoiseSchedule& sched, double mean = 0.0, double variance = 1.0)
      : sched_(&sched), mean_(mean), variance_(variance) {
    if (!(variance > 0.0)) throw std::invalid_argument("GaussianDataDenoiser: variance must be positive");
  }

  Latent operator()(const Latent& z, int t) const {
    const double ab = sched_->alpha_bar(t);
    const double scale = std::sqrt(1.0 - ab) / (ab * variance_ + 1.0 - ab);
    Latent eps = z;
    eps.values() = scale * (z.values() - std::sqrt(ab) * mean_);
    return eps;
  }

 private:
  const NoiseSchedule* sched_;
  double mean_;
  double variance_;
};

}  // namespace hybviton
