#pragma once

#include <cstdint>
#include <vector>

#include "odebc/data.hpp"
#include "odebc/metrics.hpp"
#include "odebc/model.hpp"
#include "odebc/sampler.hpp"

namespace odebc {

/// K standard-normal boundary conditions, materialized on demand.
/// candidate(i) depends only on (seed, i), so a set with K2 >= K1 candidates
/// extends the one with K1.
class CandidateSet {
 public:
  CandidateSet(std::uint64_t seed, std::size_t count, Shape shape);

  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return count_; }
  const Shape& shape() const { return shape_; }
  Tensor candidate(std::size_t index) const;

 private:
  std::uint64_t seed_;
  std::size_t count_;
  Shape shape_;
};

struct ObjectiveValue {
  double sum;
  std::vector<double> per_ref;
};

struct SearchResult {
  std::size_t best_index = 0;
  Tensor best_bc;
  std::size_t candidates = 0;  // rows of objective_table
  std::size_t references = 0;  // columns of objective_table
  std::vector<double> objective_table;  // candidates x references, row-major
  std::vector<double> per_candidate_sums;

  double best_sum() const { return per_candidate_sums.at(best_index); }
  double at(std::size_t candidate, std::size_t reference) const {
    return objective_table[candidate * references + reference];
  }
};

/// sum_i M(h(bc, y_i), z_i), accumulated in ascending i.
ObjectiveValue objective(const Tensor& bc, const ReferenceSet& refs, const DiscreteSchedule& s,
                         const SolverConfig& solver, const Denoiser& model,
                         const DistanceMetric& metric);

/// Monte Carlo argmin of the objective over the candidate set, lowest index on
/// ties. Candidates are evaluated in parallel; every row of the table is
/// reduced sequentially, so the result does not depend on `workers`.
SearchResult search_optimal_bc(const CandidateSet& cands, const ReferenceSet& refs,
                               const DiscreteSchedule& s, const SolverConfig& solver,
                               const Denoiser& model, const DistanceMetric& metric,
                               int workers = 1);

/// Argmin over the first `candidate_count` rows and the given reference
/// columns of an existing table, without re-solving anything.
std::size_t reselect(const SearchResult& result, std::size_t candidate_count,
                     const std::vector<std::size_t>& reference_columns, double* best_sum = nullptr);

/// h(bc, y) with the configured deterministic solver.
Tensor sample_with_bc(const Tensor& bc, const Tensor& y, const DiscreteSchedule& s,
                      const SolverConfig& solver, const Denoiser& model);

struct HeldOutReport {
  double bc_mean = 0.0;
  double random_mean = 0.0;
  double random_std = 0.0;
  double gap_std_units = 0.0;  // (random_mean - bc_mean) / random_std
  std::vector<double> random_means;
};

/// Mean per-pair distance of bc on the holdout versus n_random random
/// boundary conditions drawn from `seed`.
HeldOutReport held_out_gain(const Tensor& bc, const ReferenceSet& holdout,
                            const DiscreteSchedule& s, const SolverConfig& solver,
                            const Denoiser& model, const DistanceMetric& metric, int n_random,
                            std::uint64_t seed, int workers = 1);

/// Mean over the holdout of M(h(bc, y_i), z_i).
double mean_distance(const Tensor& bc, const ReferenceSet& refs, const DiscreteSchedule& s,
                     const SolverConfig& solver, const Denoiser& model,
                     const DistanceMetric& metric);

}  // namespace odebc
