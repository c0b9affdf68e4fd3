#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "odebc/schedule.hpp"
#include "odebc/tensor.hpp"

namespace odebc {

/// Either an observed low-resolution image or the blank (dropped) condition.
class Condition {
 public:
  static Condition blank() { return Condition(); }
  static Condition observed(Tensor y);

  bool is_blank() const { return y_ == nullptr; }
  /// Throws ValidationError on the blank condition.
  const Tensor& lr() const;

 private:
  Condition() = default;
  std::shared_ptr<const Tensor> y_;
};

/// Noise prediction with the condition already bound. eps must be a pure
/// function of (x, t); implementations are safe to call concurrently.
class NoiseField {
 public:
  virtual ~NoiseField() = default;
  virtual void eps(std::span<const double> x, double t, std::span<double> out) const = 0;
};

/// The pluggable noise-prediction model eps(x_t, c, t).
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  /// Binds a condition. Binding does any per-condition precomputation so
  /// solvers can evaluate the field many times cheaply.
  virtual std::unique_ptr<NoiseField> bind(const Condition& c) const = 0;

  Tensor eps(const Tensor& x, const Condition& c, double t) const;
};

/// eps == 0 everywhere.
std::unique_ptr<Denoiser> zero_denoiser();
/// eps = A x with A a dim x dim row-major matrix; ignores t and the condition.
std::unique_ptr<Denoiser> linear_denoiser(std::vector<double> matrix, std::size_t dim);

struct GmmComponent {
  double weight;
  double stddev;
  Tensor mean;
};

/// Analytic data distribution plus linear degradation.
///
/// Prior: x0 ~ sum_j w_j N(mu_j, s_j^2 I) over HR images of shape (H, W, C).
/// Observation: y = D x0 + eta, eta ~ N(0, tau^2 I), where D averages
/// non-overlapping block x block pixel tiles per channel.
///
/// Immutable; copies share storage.
class GmmWorld {
 public:
  GmmWorld(Shape hr_shape, std::uint32_t block, double tau, std::vector<GmmComponent> components);

  const Shape& hr_shape() const;
  Shape lr_shape() const;
  std::size_t dim() const;
  std::size_t lr_dim() const;
  std::uint32_t block() const;
  double tau() const;
  std::span<const GmmComponent> components() const;

  /// D x, without observation noise.
  Tensor degrade(const Tensor& x) const;
  /// Dense D, lr_dim x dim row-major.
  std::vector<double> degradation_matrix() const;

  /// Prior mean and covariance of x0 (dense, row-major).
  std::vector<double> prior_mean() const;
  std::vector<double> prior_covariance() const;

  struct Impl;
  const Impl& impl() const { return *impl_; }
  std::shared_ptr<const Impl> shared_impl() const { return impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

struct PosteriorComponent {
  double weight;
  double log_weight;
  Tensor mean;
  std::vector<double> covariance;  // dim x dim, row-major
};

/// q(x0 | y) as a Gaussian mixture.
struct PosteriorGmm {
  std::vector<PosteriorComponent> components;
};

/// Closed-form posterior. Per component:
///   m_j = mu_j + s_j^2 D^T (s_j^2 D D^T + tau^2 I)^-1 (y - D mu_j)
///   C_j = s_j^2 I - s_j^4 D^T (s_j^2 D D^T + tau^2 I)^-1 D
///   w^_j ~ w_j N(y; D mu_j, s_j^2 D D^T + tau^2 I)
PosteriorGmm conditional_posterior(const GmmWorld& world, const Tensor& y);

/// -sigma(t) grad log q_t(x_t | y).
Tensor eps_conditional(const GmmWorld& world, const Tensor& x_t, const Tensor& y, double t,
                       const DiscreteSchedule& s);
/// -sigma(t) grad log q_t(x_t) under the prior mixture.
Tensor eps_unconditional(const GmmWorld& world, const Tensor& x_t, double t,
                         const DiscreteSchedule& s);

double log_density_x0_given_y(const GmmWorld& world, const Tensor& x0, const Tensor& y);
/// Gradient of log q(x0 | y) with respect to x0.
Tensor grad_log_density_x0_given_y(const GmmWorld& world, const Tensor& x0, const Tensor& y);

struct ModeResult {
  Tensor mode;
  double log_density;
  double grad_norm;
  bool converged;  // false if grad_norm > 1e-6 after the iteration cap
};

/// Approximate argmax of q(x0 | y): fixed-point ascent started from every
/// posterior component mean and from n_starts random perturbations of them.
ModeResult mode_oracle(const GmmWorld& world, const Tensor& y, int n_starts,
                       std::uint64_t seed = 0);

/// The exact eps for a GmmWorld under a schedule. A blank condition selects
/// the prior mixture; an observed one selects q_t(x_t | y).
class GmmDenoiser final : public Denoiser {
 public:
  GmmDenoiser(GmmWorld world, DiscreteSchedule schedule);
  std::unique_ptr<NoiseField> bind(const Condition& c) const override;

  const GmmWorld& world() const { return world_; }
  const DiscreteSchedule& schedule() const { return schedule_; }

 private:
  GmmWorld world_;
  DiscreteSchedule schedule_;
};

}  // namespace odebc
