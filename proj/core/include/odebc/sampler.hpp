#pragma once

#include <cstdint>
#include <string>

#include "odebc/model.hpp"
#include "odebc/schedule.hpp"
#include "odebc/tensor.hpp"

namespace odebc {

enum class SolverKind { kDdpmAncestral, kDdim, kDpmSolver2, kEulerRef };

const char* to_string(SolverKind kind);
/// Accepts "ddpm", "ddim", "dpm2" / "dpms", "euler".
SolverKind parse_solver_kind(const std::string& name);

struct SolverConfig {
  SolverKind kind = SolverKind::kDdim;
  TimestepPlan plan;           // discrete solvers
  int fine_steps = 0;          // kEulerRef: uniform steps in t, >= 1000
  std::uint64_t noise_seed = 0;  // kDdpmAncestral only

  /// n_steps solver transitions on a uniform plan; n_steps == T selects the
  /// identity plan over all T indices.
  static SolverConfig ddim(const DiscreteSchedule& s, int n_steps);
  static SolverConfig dpm_solver2(const DiscreteSchedule& s, int n_steps);
  static SolverConfig ddpm(const DiscreteSchedule& s, int n_steps, std::uint64_t seed);
  static SolverConfig euler(int fine_steps);

  bool deterministic() const { return kind != SolverKind::kDdpmAncestral; }
  /// e.g. "DDIM-50", "DPMS-20", "DDPM-250", "EULER-10000".
  std::string label() const;
};

/// Throws ValidationError if the config does not fit the schedule.
void validate(const SolverConfig& cfg, const DiscreteSchedule& s);

/// Ancestral sampling along cfg.plan. For a transition k -> k' with
/// a = alpha_bar[k] / alpha_bar[k'] the step variance is
/// (1 - alpha_bar[k']) / (1 - alpha_bar[k]) (1 - a); the final transition
/// into step 0 adds no noise. Noise for transition i is drawn from
/// (cfg.noise_seed, i) only.
Tensor ddpm_sample(const Denoiser& model, const DiscreteSchedule& s, const SolverConfig& cfg,
                   const Tensor& x_T, const Condition& cond);

/// Deterministic DDIM: x' = alpha' (x - sigma eps) / alpha + sigma' eps.
Tensor ddim_solve(const Denoiser& model, const DiscreteSchedule& s, const SolverConfig& cfg,
                  const Tensor& x_T, const Condition& cond);

/// Second-order DPM-Solver: exponential integrator in lambda = log(alpha / sigma)
/// with one extra evaluation at the lambda midpoint of every transition.
Tensor dpm_solver2_solve(const Denoiser& model, const DiscreteSchedule& s,
                         const SolverConfig& cfg, const Tensor& x_T, const Condition& cond);

/// Explicit Euler on dx/dt = f(t) x + g^2(t) / (2 sigma(t)) eps from t = 1 to 0
/// with cfg.fine_steps uniform steps.
Tensor euler_reference_solve(const Denoiser& model, const DiscreteSchedule& s,
                             const SolverConfig& cfg, const Tensor& x_T, const Condition& cond);

/// The projection x_T -> x_0 for a deterministic solver. Throws
/// ValidationError for the ancestral sampler.
Tensor project(const Denoiser& model, const DiscreteSchedule& s, const SolverConfig& cfg,
               const Tensor& x_T, const Condition& cond);

/// Same, against a field that already has its condition bound.
Tensor project(const NoiseField& field, const DiscreteSchedule& s, const SolverConfig& cfg,
               const Tensor& x_T);

/// Any solver kind, including the ancestral sampler.
Tensor sample(const Denoiser& model, const DiscreteSchedule& s, const SolverConfig& cfg,
              const Tensor& x_T, const Condition& cond);
Tensor sample(const NoiseField& field, const DiscreteSchedule& s, const SolverConfig& cfg,
              const Tensor& x_T);

}  // namespace odebc
