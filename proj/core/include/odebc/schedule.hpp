#pragma once

#include <memory>
#include <span>
#include <vector>

namespace odebc {

/// Continuous-time coefficients of the forward process at time t in [0, 1].
struct ContinuousCoeffs {
  double alpha;  // signal scale
  double sigma;  // noise scale, alpha^2 + sigma^2 = 1
  double f;      // d log(alpha) / dt
  double g2;     // d sigma^2 / dt - 2 f sigma^2
};

/// Variance-preserving schedule over T discrete training steps.
///
/// Step k in [0, T) has cumulative signal level alpha_bar[k]. The continuous
/// view maps t = k / (T - 1), so t = 1 is the boundary step T - 1 and t = 0 is
/// step 0. Between grid points log(alpha_bar) is interpolated linearly; the
/// continuous coefficients and their derivatives are exact for that
/// interpolant and agree with the discrete values on the grid.
///
/// Immutable; copies share storage.
class DiscreteSchedule {
 public:
  int total_steps() const { return static_cast<int>(data_->betas.size()); }
  std::span<const double> betas() const { return data_->betas; }
  std::span<const double> alpha_bars() const { return data_->alpha_bars; }

  double alpha_bar(int k) const { return data_->alpha_bars[k]; }
  /// sqrt(alpha_bar[k]).
  double alpha(int k) const { return data_->alphas[k]; }
  /// sqrt(1 - alpha_bar[k]).
  double sigma(int k) const { return data_->sigmas[k]; }
  double time_of(int k) const;

  /// Throws ValidationError for t outside [0, 1].
  ContinuousCoeffs at(double t) const;
  double lambda(double t) const;
  double lambda_of_step(int k) const;
  /// Inverse of lambda(t) by bisection; lambda_value is clamped to the range
  /// spanned by the schedule.
  double time_for_lambda(double lambda_value) const;

 private:
  friend DiscreteSchedule make_linear_vp_schedule(int, double, double);
  struct Data {
    std::vector<double> betas;
    std::vector<double> alpha_bars;
    std::vector<double> log_alpha_bars;
    std::vector<double> alphas;
    std::vector<double> sigmas;
  };
  explicit DiscreteSchedule(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

/// betas[k] = beta_1 + k (beta_T - beta_1) / (T - 1). Requires T >= 2 and
/// 0 < beta_1 <= beta_T < 1.
DiscreteSchedule make_linear_vp_schedule(int total_steps, double beta_1, double beta_T);

/// The training schedule used throughout: T = 1000, beta from 1e-4 to 0.02.
DiscreteSchedule default_schedule();

ContinuousCoeffs continuous_coeffs(const DiscreteSchedule& s, double t);

/// Strictly decreasing step indices from T - 1 down to 0. A plan with n
/// entries defines n - 1 solver transitions.
struct TimestepPlan {
  std::vector<int> steps;
  std::vector<int> segments;  // empty for uniform plans

  std::size_t transitions() const { return steps.empty() ? 0 : steps.size() - 1; }
};

/// Segment-wise resampling: [0, T) is cut into segments.size() nearly equal
/// ranges and segments[j] evenly spaced indices are placed in range j.
TimestepPlan resample_timesteps(const DiscreteSchedule& s, std::span<const int> segments);

/// Uniform resampling to n evenly spaced indices including T - 1 and 0.
/// n == T gives the identity plan.
TimestepPlan resample_timesteps(const DiscreteSchedule& s, int n);

/// Uniform plan with the given number of solver transitions (n_steps + 1 indices).
TimestepPlan uniform_steps(const DiscreteSchedule& s, int n_steps);

/// Throws ValidationError unless the plan is strictly decreasing from T - 1 to 0.
void validate_plan(const DiscreteSchedule& s, const TimestepPlan& plan);

}  // namespace odebc
