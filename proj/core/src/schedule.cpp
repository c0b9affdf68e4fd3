#include "odebc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "odebc/errors.hpp"

namespace odebc {

DiscreteSchedule make_linear_vp_schedule(int total_steps, double beta_1, double beta_T) {
  require(total_steps >= 2, "schedule: T must be >= 2, got " + std::to_string(total_steps));
  require(beta_1 > 0.0 && beta_1 <= beta_T && beta_T < 1.0,
          "schedule: need 0 < beta_1 <= beta_T < 1, got beta_1=" + std::to_string(beta_1) +
              " beta_T=" + std::to_string(beta_T));
  DiscreteSchedule::Data d;
  const auto n = static_cast<std::size_t>(total_steps);
  d.betas.resize(n);
  d.alpha_bars.resize(n);
  d.log_alpha_bars.resize(n);
  d.alphas.resize(n);
  d.sigmas.resize(n);
  const double step = (beta_T - beta_1) / static_cast<double>(total_steps - 1);
  long double prod = 1.0L;
  for (std::size_t k = 0; k < n; ++k) {
    d.betas[k] = beta_1 + static_cast<double>(k) * step;
    prod *= 1.0L - static_cast<long double>(d.betas[k]);
    d.alpha_bars[k] = static_cast<double>(prod);
    d.log_alpha_bars[k] = static_cast<double>(std::log(prod));
    d.alphas[k] = std::sqrt(d.alpha_bars[k]);
    d.sigmas[k] = static_cast<double>(std::sqrt(1.0L - prod));
  }
  return DiscreteSchedule(std::make_shared<const DiscreteSchedule::Data>(std::move(d)));
}

DiscreteSchedule default_schedule() {
  static const DiscreteSchedule s = make_linear_vp_schedule(1000, 1e-4, 0.02);
  return s;
}

double DiscreteSchedule::time_of(int k) const {
  return static_cast<double>(k) / static_cast<double>(total_steps() - 1);
}

ContinuousCoeffs DiscreteSchedule::at(double t) const {
  if (!(t >= 0.0 && t <= 1.0))
    throw ValidationError("continuous time must lie in [0, 1], got " + std::to_string(t));
  const int last = total_steps() - 1;
  const double u = t * static_cast<double>(last);
  const double nearest = std::round(u);
  const auto& logs = data_->log_alpha_bars;

  // Segment [k, k+1] owns the interior; the final grid point uses the last segment.
  int k = static_cast<int>(std::floor(u));
  double frac = u - k;
  bool on_grid = false;
  if (std::abs(u - nearest) < 1e-9) {
    k = static_cast<int>(nearest);
    frac = 0.0;
    on_grid = true;
  }
  if (k >= last) {
    k = last - 1;
    frac = 1.0;
  }
  const double slope = (logs[k + 1] - logs[k]) * static_cast<double>(last);  // d log(alpha_bar)/dt

  ContinuousCoeffs c{};
  if (on_grid) {
    const int g = static_cast<int>(nearest);
    c.alpha = data_->alphas[g];
    c.sigma = data_->sigmas[g];
  } else {
    const double log_ab = (1.0 - frac) * logs[k] + frac * logs[k + 1];
    c.alpha = std::exp(0.5 * log_ab);
    c.sigma = std::sqrt(-std::expm1(log_ab));
  }
  c.f = 0.5 * slope;
  const double dsigma2_dt = -c.alpha * c.alpha * slope;
  c.g2 = dsigma2_dt - 2.0 * c.f * c.sigma * c.sigma;
  return c;
}

ContinuousCoeffs continuous_coeffs(const DiscreteSchedule& s, double t) { return s.at(t); }

double DiscreteSchedule::lambda(double t) const {
  const auto c = at(t);
  return std::log(c.alpha) - std::log(c.sigma);
}

double DiscreteSchedule::lambda_of_step(int k) const {
  return std::log(data_->alphas[k]) - std::log(data_->sigmas[k]);
}

double DiscreteSchedule::time_for_lambda(double lambda_value) const {
  double lo = 0.0;  // lambda(lo) is the largest value
  double hi = 1.0;
  if (lambda_value >= lambda(lo)) return lo;
  if (lambda_value <= lambda(hi)) return hi;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (lambda(mid) > lambda_value)
      lo = mid;
    else
      hi = mid;
  }
  return std::abs(lambda(lo) - lambda_value) <= std::abs(lambda(hi) - lambda_value) ? lo : hi;
}

namespace {

/// round_half_up(i * num / den) in exact integer arithmetic.
int spaced_index(long i, long num, long den) {
  return static_cast<int>((2 * i * num + den) / (2 * den));
}

TimestepPlan finish(std::vector<int> ascending, int total_steps, std::vector<int> segments) {
  for (std::size_t i = 1; i < ascending.size(); ++i)
    require(ascending[i] > ascending[i - 1],
            "resampled plan has a duplicate index " + std::to_string(ascending[i]));
  require(!ascending.empty() && ascending.front() == 0 && ascending.back() == total_steps - 1,
          "resampled plan must contain step 0 and step T-1");
  TimestepPlan plan;
  plan.steps.assign(ascending.rbegin(), ascending.rend());
  plan.segments = std::move(segments);
  return plan;
}

}  // namespace

TimestepPlan resample_timesteps(const DiscreteSchedule& s, std::span<const int> segments) {
  const int T = s.total_steps();
  require(!segments.empty(), "segment list is empty");
  const int n_seg = static_cast<int>(segments.size());
  require(n_seg <= T, "more segments than schedule steps");
  const int base = T / n_seg;
  const int extra = T % n_seg;
  std::vector<int> idx;
  int start = 0;
  long total = 0;
  for (int j = 0; j < n_seg; ++j) {
    const int size = base + (j < extra ? 1 : 0);
    const int count = segments[j];
    total += count;
    require(count >= 1, "segment " + std::to_string(j) + " has a non-positive count");
    require(count <= size, "segment " + std::to_string(j) + " asks for " + std::to_string(count) +
                               " steps but its range holds only " + std::to_string(size));
    if (count == 1) {
      idx.push_back(start);
    } else {
      for (int i = 0; i < count; ++i) idx.push_back(start + spaced_index(i, size - 1, count - 1));
    }
    start += size;
  }
  require(total <= T, "segment counts sum to more than T");
  return finish(std::move(idx), T, std::vector<int>(segments.begin(), segments.end()));
}

TimestepPlan resample_timesteps(const DiscreteSchedule& s, int n) {
  const int T = s.total_steps();
  require(n >= 2 && n <= T, "uniform plan needs 2 <= N <= T, got N=" + std::to_string(n));
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = spaced_index(i, T - 1, n - 1);
  return finish(std::move(idx), T, {});
}

TimestepPlan uniform_steps(const DiscreteSchedule& s, int n_steps) {
  require(n_steps >= 1 && n_steps <= s.total_steps() - 1,
          "step count must be in [1, T-1], got " + std::to_string(n_steps));
  return resample_timesteps(s, n_steps + 1);
}

void validate_plan(const DiscreteSchedule& s, const TimestepPlan& plan) {
  const int T = s.total_steps();
  require(plan.steps.size() >= 2, "timestep plan needs at least two entries");
  require(plan.steps.front() == T - 1, "timestep plan must start at step T-1");
  require(plan.steps.back() == 0, "timestep plan must end at step 0");
  for (std::size_t i = 1; i < plan.steps.size(); ++i)
    require(plan.steps[i] < plan.steps[i - 1], "timestep plan must be strictly decreasing");
}

}  // namespace odebc
