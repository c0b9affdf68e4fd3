#include "odebc/bcsearch.hpp"

#include <cmath>
#include <memory>

#include "odebc/errors.hpp"
#include "odebc/parallel.hpp"
#include "odebc/rng.hpp"

namespace odebc {

namespace {

using BoundFields = std::vector<std::unique_ptr<NoiseField>>;

BoundFields bind_all(const ReferenceSet& refs, const Denoiser& model) {
  BoundFields fields;
  fields.reserve(refs.size());
  for (const auto& p : refs.pairs) fields.push_back(model.bind(Condition::observed(p.y)));
  return fields;
}

void check_bc(const Tensor& bc, const ReferenceSet& refs) {
  require(bc.size() == refs.pairs.front().z.size(),
          "boundary condition has " + std::to_string(bc.size()) + " values, HR images have " +
              std::to_string(refs.pairs.front().z.size()));
}

/// NaN never wins; among equal values the earlier index is kept by the caller.
bool better(double a, double b) { return !std::isnan(a) && (std::isnan(b) || a < b); }

ObjectiveValue objective_bound(const Tensor& bc, const ReferenceSet& refs,
                               const BoundFields& fields, const DiscreteSchedule& s,
                               const SolverConfig& solver, const DistanceMetric& metric) {
  ObjectiveValue v{0.0, std::vector<double>(refs.size())};
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const Tensor x0 = project(*fields[i], s, solver, bc);
    v.per_ref[i] = metric(x0, refs.pairs[i].z);
    v.sum += v.per_ref[i];
  }
  return v;
}

}  // namespace

CandidateSet::CandidateSet(std::uint64_t seed, std::size_t count, Shape shape)
    : seed_(seed), count_(count), shape_(std::move(shape)) {
  require(count >= 1, "candidate set needs K >= 1");
  require(shape_.numel() > 0, "candidate shape is empty");
}

Tensor CandidateSet::candidate(std::size_t index) const {
  require(index < count_, "candidate index out of range");
  Tensor t(shape_);
  rng::Generator gen(seed_, rng::Stream::kCandidate, index);
  gen.fill_normal(t.values());
  return t;
}

ObjectiveValue objective(const Tensor& bc, const ReferenceSet& refs, const DiscreteSchedule& s,
                         const SolverConfig& solver, const Denoiser& model,
                         const DistanceMetric& metric) {
  refs.validate();
  check_bc(bc, refs);
  return objective_bound(bc, refs, bind_all(refs, model), s, solver, metric);
}

SearchResult search_optimal_bc(const CandidateSet& cands, const ReferenceSet& refs,
                               const DiscreteSchedule& s, const SolverConfig& solver,
                               const Denoiser& model, const DistanceMetric& metric,
                               int workers) {
  refs.validate();
  require(cands.shape().numel() == refs.pairs.front().z.size(),
          "candidate shape " + cands.shape().str() + " does not match HR shape " +
              refs.pairs.front().z.shape().str());
  validate(solver, s);
  require(solver.deterministic(), "search requires a deterministic solver, got " + solver.label());
  const auto fields = bind_all(refs, model);
  const std::size_t K = cands.size(), R = refs.size();

  SearchResult res;
  res.candidates = K;
  res.references = R;
  res.objective_table.resize(K * R);
  res.per_candidate_sums.resize(K);
  parallel_for(K, workers, [&](std::size_t k) {
    const auto v = objective_bound(cands.candidate(k), refs, fields, s, solver, metric);
    std::copy(v.per_ref.begin(), v.per_ref.end(), res.objective_table.begin() + k * R);
    res.per_candidate_sums[k] = v.sum;
  });
  for (std::size_t k = 1; k < K; ++k)
    if (better(res.per_candidate_sums[k], res.per_candidate_sums[res.best_index]))
      res.best_index = k;
  res.best_bc = cands.candidate(res.best_index);
  return res;
}

std::size_t reselect(const SearchResult& result, std::size_t candidate_count,
                     const std::vector<std::size_t>& reference_columns, double* best_sum) {
  require(candidate_count >= 1 && candidate_count <= result.candidates,
          "reselect: candidate count out of range");
  require(!reference_columns.empty(), "reselect: no reference columns");
  for (auto c : reference_columns) require(c < result.references, "reselect: column out of range");
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t k = 0; k < candidate_count; ++k) {
    double sum = 0.0;
    for (auto c : reference_columns) sum += result.at(k, c);
    if (k == 0 || better(sum, best_value)) {
      best = k;
      best_value = sum;
    }
  }
  if (best_sum) *best_sum = best_value;
  return best;
}

Tensor sample_with_bc(const Tensor& bc, const Tensor& y, const DiscreteSchedule& s,
                      const SolverConfig& solver, const Denoiser& model) {
  return project(model, s, solver, bc, Condition::observed(y));
}

double mean_distance(const Tensor& bc, const ReferenceSet& refs, const DiscreteSchedule& s,
                     const SolverConfig& solver, const Denoiser& model,
                     const DistanceMetric& metric) {
  const auto v = objective(bc, refs, s, solver, model, metric);
  return v.sum / static_cast<double>(refs.size());
}

HeldOutReport held_out_gain(const Tensor& bc, const ReferenceSet& holdout,
                            const DiscreteSchedule& s, const SolverConfig& solver,
                            const Denoiser& model, const DistanceMetric& metric, int n_random,
                            std::uint64_t seed, int workers) {
  require(n_random >= 2, "held-out gain needs n_random >= 2");
  holdout.validate();
  check_bc(bc, holdout);
  validate(solver, s);
  const auto fields = bind_all(holdout, model);
  const double R = static_cast<double>(holdout.size());

  HeldOutReport rep;
  rep.bc_mean = objective_bound(bc, holdout, fields, s, solver, metric).sum / R;
  rep.random_means.resize(static_cast<std::size_t>(n_random));
  parallel_for(rep.random_means.size(), workers, [&](std::size_t r) {
    Tensor rnd(bc.shape());
    rng::Generator gen(seed, rng::Stream::kRandomBc, r);
    gen.fill_normal(rnd.values());
    rep.random_means[r] = objective_bound(rnd, holdout, fields, s, solver, metric).sum / R;
  });
  const auto ms = mean_std(rep.random_means);
  rep.random_mean = ms.mean;
  rep.random_std = ms.stddev;
  rep.gap_std_units = (ms.mean - rep.bc_mean) / ms.stddev;
  return rep;
}

}  // namespace odebc
