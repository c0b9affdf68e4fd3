#include <gtest/gtest.h>

#include <cmath>

#include "odebc/bcsearch.hpp"
#include "odebc/errors.hpp"
#include "odebc/presets.hpp"
#include "odebc/worldgen.hpp"
#include "test_util.hpp"

namespace odebc {
namespace {

const DiscreteSchedule& sched() {
  static const DiscreteSchedule s = default_schedule();
  return s;
}

ReferenceSet refs_of(const GmmWorld& w, std::size_t n, std::uint64_t seed) {
  ReferenceSet r;
  r.pairs = sample_pairs(w, n, seed);
  return r;
}

TEST(Candidates, PureFunctionOfSeedAndIndex) {
  const CandidateSet a(5, 4, Shape::image(2, 4)), b(5, 64, Shape::image(2, 4));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a.candidate(i), b.candidate(i));
  EXPECT_NE(a.candidate(0), a.candidate(1));
  EXPECT_NE(a.candidate(0), CandidateSet(6, 4, Shape::image(2, 4)).candidate(0));
  EXPECT_THROW(a.candidate(4), ValidationError);
  EXPECT_THROW(CandidateSet(5, 0, Shape::image(2, 4)), ValidationError);
}

TEST(Objective, ExactReconstructionScoresZero) {
  const auto& s = sched();
  const auto zero = zero_denoiser();
  const auto world = make_preset_world("toy8");
  const auto refs = refs_of(world, 1, 3);
  const SolverConfig cfg = SolverConfig::ddim(s, 1);
  // With eps == 0 the solver maps bc to (alpha_0 / alpha_T) bc.
  Tensor bc = refs.pairs[0].z;
  for (double& v : bc.values()) v *= s.alpha(999) / s.alpha(0);
  const auto obj = objective(bc, refs, s, cfg, *zero, l2_metric());
  EXPECT_NEAR(obj.sum, 0.0, 1e-28);
  const Tensor out = sample_with_bc(bc, refs.pairs[0].y, s, cfg, *zero);
  EXPECT_LT(testing::max_abs_diff(out, refs.pairs[0].z), 1e-14);
}

TEST(Objective, DuplicatedPairDoublesTheSum) {
  const auto& s = sched();
  const auto world = make_preset_world("toy8");
  const GmmDenoiser model(world, s);
  const auto one = refs_of(world, 1, 4);
  ReferenceSet two = one;
  two.pairs.push_back(one.pairs[0]);
  const Tensor bc = CandidateSet(1, 1, world.hr_shape()).candidate(0);
  const auto cfg = SolverConfig::ddim(s, 20);
  const double single = objective(bc, one, s, cfg, model, l2_metric()).sum;
  EXPECT_EQ(objective(bc, two, s, cfg, model, l2_metric()).sum, 2.0 * single);
}

TEST(Objective, MatchesNaiveLoopOverPairs) {
  const auto& s = sched();
  const auto world = make_preset_world("toy8");
  const GmmDenoiser model(world, s);
  const auto refs = refs_of(world, 4, 5);
  const Tensor bc = CandidateSet(2, 1, world.hr_shape()).candidate(0);
  const auto cfg = SolverConfig::ddim(s, 50);
  double naive = 0.0;
  std::vector<double> per;
  for (const auto& p : refs.pairs) {
    const Tensor x0 = project(model, s, cfg, bc, Condition::observed(p.y));
    double mse = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) mse += (x0[i] - p.z[i]) * (x0[i] - p.z[i]);
    per.push_back(mse / static_cast<double>(x0.size()));
    naive += per.back();
  }
  const auto obj = objective(bc, refs, s, cfg, model, l2_metric());
  EXPECT_NEAR(obj.sum, naive, 1e-15 * naive);
  ASSERT_EQ(obj.per_ref.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(obj.per_ref[i], per[i], 1e-15 * per[i]);
}

TEST(Search, SingleCandidateIsChosen) {
  const auto& s = sched();
  const auto world = make_preset_world("toy8");
  const GmmDenoiser model(world, s);
  const auto r = search_optimal_bc(CandidateSet(9, 1, world.hr_shape()), refs_of(world, 3, 1), s,
                                   SolverConfig::ddim(s, 10), model, l2_metric());
  EXPECT_EQ(r.best_index, 0u);
  EXPECT_EQ(r.best_bc, CandidateSet(9, 1, world.hr_shape()).candidate(0));
}

TEST(Search, TiesGoToLowestIndexAndNanLoses) {
  const auto& s = sched();
  const auto world = make_preset_world("toy8");
  const GmmDenoiser model(world, s);
  const auto refs = refs_of(world, 2, 1);
  const CandidateSet cands(3, 4, world.hr_shape());
  const DistanceMetric flat{"flat", [](const Tensor&, const Tensor&) { return 1.0; }};
  EXPECT_EQ(search_optimal_bc(cands, refs, s, SolverConfig::ddim(s, 5), model, flat).best_index, 0u);
  const Tensor c0 = cands.candidate(0);
  const DistanceMetric nan_first{"nan_first", [&](const Tensor& a, const Tensor&) {
                                   // Candidate 0 projects to a distinct image; make it NaN.
                                   return a == project(model, s, SolverConfig::ddim(s, 5), c0,
                                                       Condition::observed(refs.pairs[0].y))
                                              ? NAN
                                              : 1.0;
                                 }};
  EXPECT_EQ(search_optimal_bc(cands, refs, s, SolverConfig::ddim(s, 5), model, nan_first).best_index, 1u);
}

TEST(Search, RejectsStochasticSolver) {
  const auto& s = sched();
  const auto world = make_preset_world("toy8");
  const GmmDenoiser model(world, s);
  EXPECT_THROW(search_optimal_bc(CandidateSet(1, 2, world.hr_shape()), refs_of(world, 2, 1), s,
                                 SolverConfig::ddpm(s, 10, 1), model, l2_metric()),
               ValidationError);
  EXPECT_THROW(search_optimal_bc(CandidateSet(1, 2, Shape::image(3, 3)), refs_of(world, 2, 1), s,
                                 SolverConfig::ddim(s, 10), model, l2_metric()),
               ValidationError);
}

class SearchFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    world_ = new GmmWorld(make_preset_world("toy8"));
    model_ = new GmmDenoiser(*world_, sched());
    refs_ = new ReferenceSet(refs_of(*world_, 16, 21));
    result_ = new SearchResult(search_optimal_bc(CandidateSet(17, 64, world_->hr_shape()), *refs_, sched(),
                                                 SolverConfig::ddim(sched(), 20), *model_, l2_metric(), 1));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete refs_;
    delete model_;
    delete world_;
  }
  static GmmWorld* world_;
  static GmmDenoiser* model_;
  static ReferenceSet* refs_;
  static SearchResult* result_;
};
GmmWorld* SearchFixture::world_ = nullptr;
GmmDenoiser* SearchFixture::model_ = nullptr;
ReferenceSet* SearchFixture::refs_ = nullptr;
SearchResult* SearchFixture::result_ = nullptr;

TEST_F(SearchFixture, BestEqualsMinimumOfRecomputedSums) {
  const CandidateSet cands(17, 64, world_->hr_shape());
  double best = INFINITY;
  for (std::size_t k = 0; k < 64; ++k) {
    const double sum = objective(cands.candidate(k), *refs_, sched(), SolverConfig::ddim(sched(), 20), *model_,
                                 l2_metric())
                           .sum;
    EXPECT_EQ(result_->per_candidate_sums[k], sum);
    best = std::min(best, sum);
  }
  EXPECT_EQ(result_->best_sum(), best);
  EXPECT_EQ(result_->best_bc, cands.candidate(result_->best_index));
}

TEST_F(SearchFixture, PrefixSetsAreMonotoneAndReselectAgrees) {
  double prev = INFINITY;
  for (std::size_t k : {1u, 2u, 4u, 8u, 16u, 32u, 64u}) {
    const auto r = search_optimal_bc(CandidateSet(17, k, world_->hr_shape()), *refs_, sched(),
                                     SolverConfig::ddim(sched(), 20), *model_, l2_metric(), 1);
    EXPECT_LE(r.best_sum(), prev);
    prev = r.best_sum();
    std::vector<std::size_t> all(16);
    for (std::size_t i = 0; i < 16; ++i) all[i] = i;
    double sum = 0.0;
    EXPECT_EQ(reselect(*result_, k, all, &sum), r.best_index);
    EXPECT_EQ(sum, r.best_sum());
  }
  EXPECT_THROW(reselect(*result_, 65, {0}), ValidationError);
  EXPECT_THROW(reselect(*result_, 4, {16}), ValidationError);
}

TEST_F(SearchFixture, WorkerCountDoesNotChangeTheTable) {
  const auto r4 = search_optimal_bc(CandidateSet(17, 64, world_->hr_shape()), *refs_, sched(),
                                    SolverConfig::ddim(sched(), 20), *model_, l2_metric(), 4);
  EXPECT_EQ(r4.objective_table, result_->objective_table);
  EXPECT_EQ(r4.best_index, result_->best_index);
}

TEST(HeldOut, SearchedBcBeatsRandomAndInSampleGapIsLarger) {
  const auto& s = sched();
  const auto world = make_preset_world("sr8");
  const GmmDenoiser model(world, s);
  const auto cfg = SolverConfig::ddim(s, 20);
  const auto refs = refs_of(world, 16, 31);
  ReferenceSet holdout;
  holdout.pairs = sample_pairs(world, 16, 32);
  const auto r = search_optimal_bc(CandidateSet(33, 64, world.hr_shape()), refs, s, cfg, model, l2_metric(), 2);
  const auto out = held_out_gain(r.best_bc, holdout, s, cfg, model, l2_metric(), 32, 34, 2);
  const auto in = held_out_gain(r.best_bc, refs, s, cfg, model, l2_metric(), 32, 34, 2);
  EXPECT_GT(out.gap_std_units, 0.0);
  EXPECT_GE(in.gap_std_units, out.gap_std_units);
  EXPECT_EQ(out.random_means.size(), 32u);
  EXPECT_NEAR(out.bc_mean, mean_distance(r.best_bc, holdout, s, cfg, model, l2_metric()), 1e-15);
}

TEST(HeldOut, RandomBcShowsNoSystematicGap) {
  const auto& s = sched();
  const auto world = make_preset_world("toy8");
  const GmmDenoiser model(world, s);
  const auto cfg = SolverConfig::ddim(s, 10);
  ReferenceSet holdout;
  holdout.pairs = sample_pairs(world, 8, 41);
  double total = 0.0;
  const int trials = 12;
  for (int t = 0; t < trials; ++t) {
    const Tensor bc = CandidateSet(100 + t, 1, world.hr_shape()).candidate(0);
    total += held_out_gain(bc, holdout, s, cfg, model, l2_metric(), 16, 200 + t, 1).gap_std_units;
  }
  // Each gap is roughly standard normal under the null.
  EXPECT_LT(std::abs(total / trials), 3.0 / std::sqrt(trials) + 0.5);
}

}  // namespace
}  // namespace odebc
