#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odebc/bcsearch.hpp"
#include "odebc/data.hpp"
#include "odebc/metrics.hpp"
#include "odebc/model.hpp"
#include "odebc/sampler.hpp"

namespace odebc {

struct BenchmarkRow {
  std::string solver;
  bool uses_bc = false;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

/// Samples every test pair with every solver: from a fresh random x_T per pair
/// (seeded by (seed, pair)) or from the fixed bc when given, and records each
/// metric against the pair's HR image.
std::vector<BenchmarkRow> benchmark_samplers(const Denoiser& model, const DiscreteSchedule& s,
                                             const ReferenceSet& test_pairs,
                                             const std::vector<SolverConfig>& solvers,
                                             const std::optional<Tensor>& bc,
                                             const std::vector<DistanceMetric>& metrics,
                                             std::uint64_t seed, int workers = 1);

/// Columns: solver,uses_bc,metric,mean,std,n.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

struct AblationPoint {
  std::size_t size = 0;
  std::vector<double> heldout;  // one held-out mean distance per repeat
  std::vector<std::size_t> chosen;  // selected candidate index per repeat
  double mean = 0.0;
  double stddev = 0.0;
};

struct AblationCurve {
  std::string variable;  // "R" or "K"
  std::vector<AblationPoint> points;

  /// sqrt of the mean per-size variance.
  double pooled_std() const;
  /// mean[i + 1] <= mean[i] + tolerance for every consecutive pair.
  bool non_increasing_within(double tolerance) const;
};

/// Varies the reference-set size. One table over the candidate set
/// (k_fixed candidates from `seed`) and the whole pool is solved once; each
/// (size, repeat) draws a fresh subset of the pool, picks its argmin from the
/// table and is scored on the holdout.
AblationCurve ablate_reference_size(const Denoiser& model, const DiscreteSchedule& s,
                                    const ReferenceSet& pool, const ReferenceSet& holdout,
                                    const std::vector<std::size_t>& sizes, int repeats,
                                    std::size_t k_fixed, const SolverConfig& solver,
                                    const DistanceMetric& metric, std::uint64_t seed,
                                    int workers = 1);

/// Varies the candidate-set size with a fresh candidate seed per (size, repeat)
/// against a fixed reference set; scored on the holdout.
AblationCurve ablate_candidate_size(const Denoiser& model, const DiscreteSchedule& s,
                                    const ReferenceSet& refs, const ReferenceSet& holdout,
                                    const std::vector<std::size_t>& sizes, int repeats,
                                    const SolverConfig& solver, const DistanceMetric& metric,
                                    std::uint64_t seed, int workers = 1);

/// Per-repeat rows: variable,size,repeat,chosen,heldout.
std::string ablation_csv(const AblationCurve& curve);
/// Summary rows: variable,size,mean,std,n.
std::string ablation_summary_csv(const AblationCurve& curve);

struct IndependenceResult {
  std::size_t conditions = 0;
  std::size_t candidates = 0;
  std::vector<double> sequences;  // conditions x candidates
  std::vector<double> matrix;     // conditions x conditions

  double at(std::size_t j, std::size_t l) const { return matrix[j * conditions + l]; }
  double median_off_diagonal() const;
};

/// For each condition j, the sequence over candidates k of
/// M(h(x_T^k, y_j), z_j); entry (j, l) is the Pearson coefficient of
/// sequences j and l.
IndependenceResult independence_matrix(const Denoiser& model, const DiscreteSchedule& s,
                                       const ReferenceSet& conditions, const CandidateSet& cands,
                                       const SolverConfig& solver, const DistanceMetric& metric,
                                       int workers = 1);

/// The matrix as CSV with a header row of condition indices.
std::string independence_csv(const IndependenceResult& r);
/// The raw sequences: candidate,condition_0,...
std::string sequences_csv(const IndependenceResult& r);

/// Shortest round-trippable decimal form, used by every CSV writer.
std::string format_double(double v);

}  // namespace odebc
