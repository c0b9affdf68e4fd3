#include "odebc/sampler.hpp"

#include <cmath>
#include <numeric>

#include "odebc/errors.hpp"
#include "odebc/rng.hpp"

namespace odebc {

namespace {

TimestepPlan nominal_plan(const DiscreteSchedule& s, int n_steps) {
  if (n_steps == s.total_steps()) return resample_timesteps(s, n_steps);
  return uniform_steps(s, n_steps);
}

void check_state(const Tensor& x_T) {
  require(x_T.size() > 0, "initial state is empty");
  require(x_T.all_finite(), "initial state is not finite");
}

void check_output(const Tensor& x, const SolverConfig& cfg) {
  if (!x.all_finite())
    throw ConvergenceError(cfg.label() + " produced a non-finite state");
}

Tensor run_ddpm(const NoiseField& field, const DiscreteSchedule& s, const SolverConfig& cfg,
                const Tensor& x_T) {
  const auto& steps = cfg.plan.steps;
  const double denom = s.total_steps() - 1;
  Tensor x = x_T;
  Tensor e(x.shape());
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    const int k = steps[i];
    const int kp = steps[i + 1];
    const double ab = s.alpha_bar(k);
    const double abp = s.alpha_bar(kp);
    const double beta = 1.0 - ab / abp;
    field.eps(x.values(), k / denom, e.values());
    const double sq_ab = std::sqrt(ab);
    const double sq_1m_ab = std::sqrt(1.0 - ab);
    const double c0 = std::sqrt(abp) * beta / (1.0 - ab);
    const double cx = std::sqrt(ab / abp) * (1.0 - abp) / (1.0 - ab);
    const bool last = kp == 0;
    if (!last) {
      rng::Generator gen(cfg.noise_seed, rng::Stream::kDdpmNoise, i);
      gen.fill_normal(z);
    }
    const double sd = last ? 0.0 : std::sqrt((1.0 - abp) / (1.0 - ab) * beta);
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double x0 = (x[n] - sq_1m_ab * e[n]) / sq_ab;
      x[n] = c0 * x0 + cx * x[n] + (last ? 0.0 : sd * z[n]);
    }
  }
  check_output(x, cfg);
  return x;
}

// DDIM and DPM-Solver-2 iterate the scaled state y = x / alpha, in which the
// zero-eps flow is the identity and every transition is exact for it.
Tensor run_ddim(const NoiseField& field, const DiscreteSchedule& s, const SolverConfig& cfg,
                const Tensor& x_T) {
  const auto& steps = cfg.plan.steps;
  const double denom = s.total_steps() - 1;
  Tensor x = x_T;
  Tensor y = x_T;
  Tensor e(x.shape());
  const double a_T = s.alpha(steps.front());
  for (std::size_t n = 0; n < y.size(); ++n) y[n] = x_T[n] / a_T;
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    const int k = steps[i];
    const int kp = steps[i + 1];
    field.eps(x.values(), k / denom, e.values());
    const double c = s.sigma(kp) / s.alpha(kp) - s.sigma(k) / s.alpha(k);
    const double a = s.alpha(kp);
    for (std::size_t n = 0; n < y.size(); ++n) {
      y[n] += c * e[n];
      x[n] = a * y[n];
    }
  }
  check_output(x, cfg);
  return x;
}

Tensor run_dpm2(const NoiseField& field, const DiscreteSchedule& s, const SolverConfig& cfg,
                const Tensor& x_T) {
  const auto& steps = cfg.plan.steps;
  const double denom = s.total_steps() - 1;
  Tensor x = x_T;
  Tensor y = x_T;
  Tensor u(x.shape());
  Tensor xm(x.shape());
  Tensor e(x.shape());
  const double a_T = s.alpha(steps.front());
  for (std::size_t n = 0; n < y.size(); ++n) y[n] = x_T[n] / a_T;
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    const int k = steps[i];
    const int kp = steps[i + 1];
    const double lam_s = s.lambda_of_step(k);
    const double lam_t = s.lambda_of_step(kp);
    const double h = lam_t - lam_s;
    const double t_m = s.time_for_lambda(lam_s + 0.5 * h);
    const auto cm = s.at(t_m);

    field.eps(x.values(), k / denom, e.values());
    const double c1 = (cm.sigma / cm.alpha) * std::expm1(0.5 * h);
    for (std::size_t n = 0; n < y.size(); ++n) {
      u[n] = y[n] - c1 * e[n];
      xm[n] = cm.alpha * u[n];
    }
    field.eps(xm.values(), t_m, e.values());
    const double c2 = (s.sigma(kp) / s.alpha(kp)) * std::expm1(h);
    const double a = s.alpha(kp);
    for (std::size_t n = 0; n < y.size(); ++n) {
      y[n] -= c2 * e[n];
      x[n] = a * y[n];
    }
  }
  check_output(x, cfg);
  return x;
}

Tensor run_euler(const NoiseField& field, const DiscreteSchedule& s, const SolverConfig& cfg,
                 const Tensor& x_T) {
  const int N = cfg.fine_steps;
  const double dt = -1.0 / N;
  Tensor x = x_T;
  Tensor e(x.shape());
  for (int i = 0; i < N; ++i) {
    const double t = 1.0 - static_cast<double>(i) / N;
    const auto c = s.at(t);
    field.eps(x.values(), t, e.values());
    const double ce = 0.5 * c.g2 / c.sigma;
    for (std::size_t n = 0; n < x.size(); ++n) x[n] += dt * (c.f * x[n] + ce * e[n]);
  }
  check_output(x, cfg);
  return x;
}

}  // namespace

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kDdpmAncestral: return "ddpm";
    case SolverKind::kDdim: return "ddim";
    case SolverKind::kDpmSolver2: return "dpm2";
    case SolverKind::kEulerRef: return "euler";
  }
  return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "ddpm") return SolverKind::kDdpmAncestral;
  if (name == "ddim") return SolverKind::kDdim;
  if (name == "dpm2" || name == "dpms") return SolverKind::kDpmSolver2;
  if (name == "euler") return SolverKind::kEulerRef;
  throw ValidationError("unknown solver '" + name + "' (expected ddpm, ddim, dpm2, euler)");
}

SolverConfig SolverConfig::ddim(const DiscreteSchedule& s, int n_steps) {
  return {SolverKind::kDdim, nominal_plan(s, n_steps), 0, 0};
}

SolverConfig SolverConfig::dpm_solver2(const DiscreteSchedule& s, int n_steps) {
  return {SolverKind::kDpmSolver2, nominal_plan(s, n_steps), 0, 0};
}

SolverConfig SolverConfig::ddpm(const DiscreteSchedule& s, int n_steps, std::uint64_t seed) {
  return {SolverKind::kDdpmAncestral, nominal_plan(s, n_steps), 0, seed};
}

SolverConfig SolverConfig::euler(int fine_steps) {
  return {SolverKind::kEulerRef, {}, fine_steps, 0};
}

std::string SolverConfig::label() const {
  static constexpr const char* kNames[] = {"DDPM", "DDIM", "DPMS", "EULER"};
  const std::string name = kNames[static_cast<int>(kind)];
  if (kind == SolverKind::kEulerRef) return name + "-" + std::to_string(fine_steps);
  long n = static_cast<long>(plan.transitions());
  if (!plan.segments.empty())
    n = std::accumulate(plan.segments.begin(), plan.segments.end(), 0L);
  else if (!plan.steps.empty() && plan.steps.front() + 1 == static_cast<int>(plan.steps.size()))
    n = static_cast<long>(plan.steps.size());
  return name + "-" + std::to_string(n);
}

void validate(const SolverConfig& cfg, const DiscreteSchedule& s) {
  if (cfg.kind == SolverKind::kEulerRef) {
    require(cfg.fine_steps >= 1000,
            "euler reference needs fine_steps >= 1000, got " + std::to_string(cfg.fine_steps));
    return;
  }
  validate_plan(s, cfg.plan);
  require(cfg.plan.steps.front() == s.total_steps() - 1,
          "timestep plan does not match the schedule length");
}

Tensor sample(const NoiseField& field, const DiscreteSchedule& s, const SolverConfig& cfg,
              const Tensor& x_T) {
  validate(cfg, s);
  check_state(x_T);
  switch (cfg.kind) {
    case SolverKind::kDdpmAncestral: return run_ddpm(field, s, cfg, x_T);
    case SolverKind::kDdim: return run_ddim(field, s, cfg, x_T);
    case SolverKind::kDpmSolver2: return run_dpm2(field, s, cfg, x_T);
    case SolverKind::kEulerRef: return run_euler(field, s, cfg, x_T);
  }
  throw ValidationError("unknown solver kind");
}

Tensor sample(const Denoiser& model, const DiscreteSchedule& s, const SolverConfig& cfg,
              const Tensor& x_T, const Condition& cond) {
  return sample(*model.bind(cond), s, cfg, x_T);
}

Tensor project(const NoiseField& field, const DiscreteSchedule& s, const SolverConfig& cfg,
               const Tensor& x_T) {
  require(cfg.deterministic(), "projection requires a deterministic solver, got " + cfg.label());
  return sample(field, s, cfg, x_T);
}

Tensor project(const Denoiser& model, const DiscreteSchedule& s, const SolverConfig& cfg,
               const Tensor& x_T, const Condition& cond) {
  return project(*model.bind(cond), s, cfg, x_T);
}

Tensor ddpm_sample(const Denoiser& model, const DiscreteSchedule& s, const SolverConfig& cfg,
                   const Tensor& x_T, const Condition& cond) {
  require(cfg.kind == SolverKind::kDdpmAncestral, "ddpm_sample: config is " + cfg.label());
  return sample(model, s, cfg, x_T, cond);
}

Tensor ddim_solve(const Denoiser& model, const DiscreteSchedule& s, const SolverConfig& cfg,
                  const Tensor& x_T, const Condition& cond) {
  require(cfg.kind == SolverKind::kDdim, "ddim_solve: config is " + cfg.label());
  return sample(model, s, cfg, x_T, cond);
}

Tensor dpm_solver2_solve(const Denoiser& model, const DiscreteSchedule& s,
                         const SolverConfig& cfg, const Tensor& x_T, const Condition& cond) {
  require(cfg.kind == SolverKind::kDpmSolver2, "dpm_solver2_solve: config is " + cfg.label());
  return sample(model, s, cfg, x_T, cond);
}

Tensor euler_reference_solve(const Denoiser& model, const DiscreteSchedule& s,
                             const SolverConfig& cfg, const Tensor& x_T, const Condition& cond) {
  require(cfg.kind == SolverKind::kEulerRef, "euler_reference_solve: config is " + cfg.label());
  return sample(model, s, cfg, x_T, cond);
}

}  // namespace odebc
