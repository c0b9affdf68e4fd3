#include "odebc/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "odebc/errors.hpp"
#include "odebc/parallel.hpp"
#include "odebc/rng.hpp"

namespace odebc {

namespace {

void finish_point(AblationPoint& p) {
  const auto ms = mean_std(p.heldout);
  p.mean = ms.mean;
  p.stddev = ms.stddev;
}

void check_sizes(const std::vector<std::size_t>& sizes, int repeats) {
  require(!sizes.empty(), "ablation: no sizes given");
  require(repeats >= 1, "ablation: repeats must be >= 1");
  for (auto s : sizes) require(s >= 1, "ablation: sizes must be >= 1");
}

/// `count` distinct indices in [0, n), sorted ascending.
std::vector<std::size_t> draw_subset(std::size_t n, std::size_t count, std::uint64_t seed,
                                     std::uint64_t index) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  rng::Generator gen(seed, rng::Stream::kSubset, index);
  for (std::size_t i = 0; i < count; ++i) std::swap(all[i], all[i + gen.below(n - i)]);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------

std::vector<BenchmarkRow> benchmark_samplers(const Denoiser& model, const DiscreteSchedule& s,
                                             const ReferenceSet& test_pairs,
                                             const std::vector<SolverConfig>& solvers,
                                             const std::optional<Tensor>& bc,
                                             const std::vector<DistanceMetric>& metrics,
                                             std::uint64_t seed, int workers) {
  test_pairs.validate();
  require(!solvers.empty(), "benchmark: no solvers given");
  require(!metrics.empty(), "benchmark: no metrics given");
  const auto& hr = test_pairs.pairs.front().z.shape();
  if (bc) require(bc->size() == hr.numel(), "benchmark: bc does not match the HR shape");
  for (const auto& cfg : solvers) validate(cfg, s);

  const std::size_t n = test_pairs.size();
  std::vector<BenchmarkRow> rows;
  for (const auto& cfg : solvers) {
    std::vector<double> values(n * metrics.size());
    parallel_for(n, workers, [&](std::size_t i) {
      const auto& pair = test_pairs.pairs[i];
      Tensor x_T(hr);
      if (bc) {
        x_T = Tensor(hr, bc->vec());
      } else {
        rng::Generator gen(seed, rng::Stream::kBenchmark, i);
        gen.fill_normal(x_T.values());
      }
      SolverConfig run = cfg;
      if (!cfg.deterministic())
        run.noise_seed = rng::derive_key(cfg.noise_seed, rng::Stream::kBenchmark, i);
      const Tensor x0 = sample(model, s, run, x_T, Condition::observed(pair.y));
      for (std::size_t m = 0; m < metrics.size(); ++m)
        values[m * n + i] = metrics[m](x0, pair.z);
    });
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      const auto ms = mean_std(std::span<const double>(values).subspan(m * n, n));
      rows.push_back({cfg.label(), bc.has_value(), metrics[m].name, ms.mean, ms.stddev, n});
    }
  }
  return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream os;
  os << "solver,uses_bc,metric,mean,std,n\n";
  for (const auto& r : rows)
    os << r.solver << ',' << (r.uses_bc ? 1 : 0) << ',' << r.metric << ','
       << format_double(r.mean) << ',' << format_double(r.stddev) << ',' << r.n << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

double AblationCurve::pooled_std() const {
  require(!points.empty(), "ablation curve is empty");
  double acc = 0.0;
  for (const auto& p : points) acc += p.stddev * p.stddev;
  return std::sqrt(acc / static_cast<double>(points.size()));
}

bool AblationCurve::non_increasing_within(double tolerance) const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].mean > points[i - 1].mean + tolerance) return false;
  return true;
}

AblationCurve ablate_reference_size(const Denoiser& model, const DiscreteSchedule& s,
                                    const ReferenceSet& pool, const ReferenceSet& holdout,
                                    const std::vector<std::size_t>& sizes, int repeats,
                                    std::size_t k_fixed, const SolverConfig& solver,
                                    const DistanceMetric& metric, std::uint64_t seed,
                                    int workers) {
  check_sizes(sizes, repeats);
  pool.validate();
  holdout.validate();
  for (auto sz : sizes)
    require(sz <= pool.size(), "ablate-r: size " + std::to_string(sz) + " exceeds the pool of " +
                                   std::to_string(pool.size()));
  const CandidateSet cands(seed, k_fixed, pool.pairs.front().z.shape());
  const auto table = search_optimal_bc(cands, pool, s, solver, model, metric, workers);

  AblationCurve curve{"R", {}};
  std::vector<std::size_t> all_chosen;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    AblationPoint p;
    p.size = sizes[si];
    for (int r = 0; r < repeats; ++r) {
      const auto cols = draw_subset(pool.size(), sizes[si], seed,
                                    si * static_cast<std::size_t>(repeats) + r);
      p.chosen.push_back(reselect(table, k_fixed, cols));
      all_chosen.push_back(p.chosen.back());
    }
    curve.points.push_back(std::move(p));
  }

  // Score each distinct chosen candidate on the holdout once.
  std::vector<std::size_t> distinct = all_chosen;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> scores(distinct.size());
  parallel_for(distinct.size(), workers, [&](std::size_t i) {
    scores[i] = mean_distance(cands.candidate(distinct[i]), holdout, s, solver, model, metric);
  });
  for (auto& p : curve.points) {
    for (auto k : p.chosen) {
      const auto it = std::lower_bound(distinct.begin(), distinct.end(), k);
      p.heldout.push_back(scores[static_cast<std::size_t>(it - distinct.begin())]);
    }
    finish_point(p);
  }
  return curve;
}

AblationCurve ablate_candidate_size(const Denoiser& model, const DiscreteSchedule& s,
                                    const ReferenceSet& refs, const ReferenceSet& holdout,
                                    const std::vector<std::size_t>& sizes, int repeats,
                                    const SolverConfig& solver, const DistanceMetric& metric,
                                    std::uint64_t seed, int workers) {
  check_sizes(sizes, repeats);
  refs.validate();
  holdout.validate();
  const auto& hr = refs.pairs.front().z.shape();
  AblationCurve curve{"K", {}};
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    AblationPoint p;
    p.size = sizes[si];
    for (int r = 0; r < repeats; ++r) {
      const auto cand_seed = rng::derive_key(seed, rng::Stream::kAblation,
                                             si * static_cast<std::size_t>(repeats) + r);
      const CandidateSet cands(cand_seed, sizes[si], hr);
      const auto res = search_optimal_bc(cands, refs, s, solver, model, metric, workers);
      p.chosen.push_back(res.best_index);
      p.heldout.push_back(mean_distance(res.best_bc, holdout, s, solver, model, metric));
    }
    finish_point(p);
    curve.points.push_back(std::move(p));
  }
  return curve;
}

std::string ablation_csv(const AblationCurve& curve) {
  std::ostringstream os;
  os << "variable,size,repeat,chosen,heldout\n";
  for (const auto& p : curve.points)
    for (std::size_t r = 0; r < p.heldout.size(); ++r)
      os << curve.variable << ',' << p.size << ',' << r << ',' << p.chosen[r] << ','
         << format_double(p.heldout[r]) << '\n';
  return os.str();
}

std::string ablation_summary_csv(const AblationCurve& curve) {
  std::ostringstream os;
  os << "variable,size,mean,std,n\n";
  for (const auto& p : curve.points)
    os << curve.variable << ',' << p.size << ',' << format_double(p.mean) << ','
       << format_double(p.stddev) << ',' << p.heldout.size() << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

double IndependenceResult::median_off_diagonal() const {
  std::vector<double> v;
  for (std::size_t j = 0; j < conditions; ++j)
    for (std::size_t l = j + 1; l < conditions; ++l) v.push_back(at(j, l));
  require(!v.empty(), "median off-diagonal needs at least two conditions");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

IndependenceResult independence_matrix(const Denoiser& model, const DiscreteSchedule& s,
                                       const ReferenceSet& conditions, const CandidateSet& cands,
                                       const SolverConfig& solver, const DistanceMetric& metric,
                                       int workers) {
  conditions.validate();
  require(cands.size() >= 2, "independence matrix needs at least two candidates");
  require(cands.shape().numel() == conditions.pairs.front().z.size(),
          "candidate shape does not match the HR shape");
  validate(solver, s);
  const std::size_t J = conditions.size(), K = cands.size();
  std::vector<std::unique_ptr<NoiseField>> fields;
  for (const auto& p : conditions.pairs) fields.push_back(model.bind(Condition::observed(p.y)));

  IndependenceResult res;
  res.conditions = J;
  res.candidates = K;
  res.sequences.resize(J * K);
  parallel_for(K, workers, [&](std::size_t k) {
    const Tensor bc = cands.candidate(k);
    for (std::size_t j = 0; j < J; ++j)
      res.sequences[j * K + k] = metric(project(*fields[j], s, solver, bc), conditions.pairs[j].z);
  });
  res.matrix.assign(J * J, 1.0);
  const std::span<const double> seq(res.sequences);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t l = j + 1; l < J; ++l) {
      const double c = pearson_corr(seq.subspan(j * K, K), seq.subspan(l * K, K));
      res.matrix[j * J + l] = c;
      res.matrix[l * J + j] = c;
    }
  return res;
}

std::string independence_csv(const IndependenceResult& r) {
  std::ostringstream os;
  os << "condition";
  for (std::size_t l = 0; l < r.conditions; ++l) os << ',' << l;
  os << '\n';
  for (std::size_t j = 0; j < r.conditions; ++j) {
    os << j;
    for (std::size_t l = 0; l < r.conditions; ++l) os << ',' << format_double(r.at(j, l));
    os << '\n';
  }
  return os.str();
}

std::string sequences_csv(const IndependenceResult& r) {
  std::ostringstream os;
  os << "candidate";
  for (std::size_t j = 0; j < r.conditions; ++j) os << ",condition_" << j;
  os << '\n';
  for (std::size_t k = 0; k < r.candidates; ++k) {
    os << k;
    for (std::size_t j = 0; j < r.conditions; ++j)
      os << ',' << format_double(r.sequences[j * r.candidates + k]);
    os << '\n';
  }
  return os.str();
}

}  // namespace odebc
