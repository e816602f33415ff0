#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "jkcv/meta.hpp"
#include "test_util.hpp"

namespace jkcv {
namespace {

using testing::knn_spec;
using testing::logistic_spec;

const LearnerSpec kForest{LearnerKind::forest_lite, {{"trees", 5}}};

MetaTuningOptions options(std::size_t j, std::size_t k, std::size_t r, Seed seed) {
  MetaTuningOptions opt;
  opt.j = j;
  opt.k = k;
  opt.replicates = r;
  opt.master_seed = seed;
  return opt;
}

TEST(Stats, SampleStatistics) {
  const std::vector<double> two = {0.1, 0.3};
  EXPECT_NEAR(stats::sample_sd(two), 0.1414213562373095, 1e-15);
  EXPECT_TRUE(std::isnan(stats::sample_sd(std::vector<double>{1.0})));
  const std::vector<double> xs = {4, 1, 3, 2};
  EXPECT_EQ(stats::quantile(xs, 0.0), 1.0);
  EXPECT_EQ(stats::quantile(xs, 1.0), 4.0);
  EXPECT_EQ(stats::quantile(xs, 0.5), 2.5);
  EXPECT_EQ(stats::quantile(xs, 0.25), 1.75);
}

TEST(Summarize, TwoReplicateExample) {
  MetaReport rep;
  rep.records = {{0, {{"C", 0.1}}, 0.7, std::nullopt, false}, {1, {{"C", 0.3}}, 0.8, std::nullopt, true}};
  summarize(rep);
  ASSERT_EQ(rep.axes.size(), 1u);
  EXPECT_NEAR(rep.axes[0].sd, 0.1414213562373095, 1e-15);
  EXPECT_EQ(rep.axes[0].min, 0.1);
  EXPECT_EQ(rep.axes[0].max, 0.3);
  EXPECT_EQ(rep.axes[0].histogram, (std::vector<std::pair<double, std::size_t>>{{0.1, 1}, {0.3, 1}}));
  EXPECT_EQ(rep.degenerate_count, 1u);
  EXPECT_FALSE(rep.global.has_value());
}

TEST(MetaTuning, SinglePointGridHasZeroSpread) {
  const auto data = testing::reference_task();
  const auto rep = run_meta_tuning(data, nullptr, logistic_spec(), ParamGrid({{"C", {1.0}}}), options(1, 5, 12, 3));
  EXPECT_EQ(rep.axes[0].sd, 0.0);
  EXPECT_EQ(rep.axes[0].max - rep.axes[0].min, 0.0);
  EXPECT_EQ(rep.axes[0].histogram.size(), 1u);
  EXPECT_EQ(rep.axes[0].histogram[0].second, 12u);
  EXPECT_GT(rep.estimate.sd, 0.0);
}

// Every summary field equals a direct pass over the per-replicate records.
TEST(MetaTuning, SummariesRecomputeFromRecords) {
  const auto data = testing::reference_task();
  const auto held = testing::reference_task(77);
  const ParamGrid grid({{"max_features", {0.2, 0.6, 1.0}}, {"max_depth", {1, 3}}});
  const auto rep = run_meta_tuning(data, &held, kForest, grid, options(1, 4, 25, 8));
  ASSERT_EQ(rep.records.size(), 25u);

  for (const auto& axis : rep.axes) {
    std::vector<double> v;
    std::map<double, std::size_t> hist;
    for (const auto& r : rep.records) {
      v.push_back(r.chosen.at(axis.name));
      ++hist[r.chosen.at(axis.name)];
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    EXPECT_DOUBLE_EQ(axis.sd, std::sqrt(ss / static_cast<double>(v.size() - 1)));
    EXPECT_EQ(axis.min, *std::min_element(v.begin(), v.end()));
    EXPECT_EQ(axis.max, *std::max_element(v.begin(), v.end()));
    std::size_t total = 0;
    for (const auto& [value, count] : axis.histogram) {
      EXPECT_EQ(hist.at(value), count);
      total += count;
    }
    EXPECT_EQ(total, 25u);
  }
  std::size_t joint_total = 0;
  for (const auto& [point, count] : rep.joint_histogram) joint_total += count;
  EXPECT_EQ(joint_total, 25u);

  ASSERT_TRUE(rep.global.has_value());
  for (const auto& r : rep.records) {
    ASSERT_TRUE(r.global_score.has_value());
    const SeedPath path{8, {kGlobalScoreTag, point_key(r.chosen)}};
    EXPECT_EQ(*r.global_score, global_score(data, held, kForest, r.chosen, Metric::accuracy, path));
  }
}

TEST(MetaTuning, ReplicateIsIndependentOfReplicateCount) {
  const auto data = testing::reference_task();
  const ParamGrid grid({{"C", {0.01, 1, 100}}});
  const auto small = run_meta_tuning(data, nullptr, logistic_spec(), grid, options(2, 5, 3, 4));
  const auto large = run_meta_tuning(data, nullptr, logistic_spec(), grid, options(2, 5, 9, 4));
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(small.records[r].chosen, large.records[r].chosen);
    EXPECT_EQ(small.records[r].chosen_estimate, large.records[r].chosen_estimate);
  }
  // Replicate r is grid_tune under seed path [r].
  const auto direct = grid_tune(data, logistic_spec(), grid, 2, 5, false, Metric::accuracy, {4, {7}});
  EXPECT_EQ(large.records[7].chosen_estimate, direct.chosen_estimate);
}

TEST(MetaTuning, IdenticalAcrossWorkerCounts) {
  const auto data = testing::reference_task();
  const auto held = testing::reference_task(5);
  const ParamGrid grid({{"max_features", {0.2, 0.6, 1.0}}});
  const auto a = run_meta_tuning(data, &held, kForest, grid, options(2, 4, 10, 1), Executor(1));
  const auto b = run_meta_tuning(data, &held, kForest, grid, options(2, 4, 10, 1), Executor(7));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t r = 0; r < a.records.size(); ++r) {
    EXPECT_EQ(a.records[r].chosen, b.records[r].chosen);
    EXPECT_EQ(a.records[r].chosen_estimate, b.records[r].chosen_estimate);
    EXPECT_EQ(a.records[r].global_score, b.records[r].global_score);
  }
  EXPECT_EQ(a.estimate.sd, b.estimate.sd);
}

TEST(MetaTuning, HeldOutWidthMismatch) {
  const auto data = testing::reference_task();
  const auto narrow = testing::twelve_points();
  EXPECT_THROW(run_meta_tuning(data, &narrow, knn_spec(1), ParamGrid({{"k", {1}}}), options(1, 5, 2, 0)), Error);
}

// With n = K every partition is leave-one-out; 1-NN scores do not depend on
// which fold holds which record, so every replicate sees the same estimate.
TEST(MetaEstimation, ForcedSinglePartitionHasZeroSpread) {
  const auto data = testing::twelve_points();
  const auto s = run_meta_estimation(data, knn_spec(1), {}, options(1, 12, 15, 2));
  EXPECT_EQ(s.sd, 0.0);
  EXPECT_EQ(s.min, s.max);
}

TEST(MetaEstimation, QuantilesAndRecords) {
  const auto data = testing::reference_task();
  const auto s = run_meta_estimation(data, knn_spec(3), {}, options(1, 5, 40, 6));
  ASSERT_EQ(s.estimates.size(), 40u);
  EXPECT_LE(s.min, s.q25);
  EXPECT_LE(s.q25, s.median);
  EXPECT_LE(s.median, s.q75);
  EXPECT_LE(s.q75, s.max);
  EXPECT_GT(s.sd, 0.0);
  const auto direct = jkfold_estimate(data, knn_spec(3), {}, 1, 5, false, Metric::accuracy, {6, {11}});
  EXPECT_EQ(s.estimates[11], direct.mean);
}

TEST(MetaEstimation, MeanStableAcrossMasterSeeds) {
  const auto data = testing::reference_task();
  const auto a = run_meta_estimation(data, knn_spec(5), {}, options(1, 5, 150, 100));
  const auto b = run_meta_estimation(data, knn_spec(5), {}, options(1, 5, 150, 200));
  const double se = std::sqrt(a.sd * a.sd / 150 + b.sd * b.sd / 150);
  EXPECT_LT(std::abs(a.mean - b.mean), 3 * se);
}

TEST(CompareBudgets, GroupsByEqualBudget) {
  const auto data = testing::reference_task();
  const ParamGrid grid({{"k", {1, 3}}});
  const auto two = compare_budgets(data, nullptr, knn_spec(), grid, {{2, 5}, {1, 10}}, options(1, 5, 4, 0));
  ASSERT_EQ(two.groups.size(), 1u);
  EXPECT_EQ(two.groups[0].budget, 10u);
  ASSERT_EQ(two.groups[0].rows.size(), 2u);
  EXPECT_EQ(two.groups[0].rows[0].j, 1u);
  EXPECT_EQ(two.groups[0].rows[1].j, 2u);

  const auto three = compare_budgets(data, nullptr, knn_spec(), grid, {{1, 20}, {2, 10}, {4, 5}, {1, 5}},
                                     options(1, 5, 3, 0));
  ASSERT_EQ(three.groups.size(), 2u);
  EXPECT_EQ(three.groups[0].budget, 5u);
  EXPECT_EQ(three.groups[1].budget, 20u);
  EXPECT_EQ(three.groups[1].rows.size(), 3u);
  for (const auto& row : three.groups[1].rows) EXPECT_EQ(row.j * row.k, 20u);
  EXPECT_THROW(compare_budgets(data, nullptr, knn_spec(), grid, {}, options(1, 5, 3, 0)), Error);
}

TEST(CompareBudgets, RowsMatchDirectMetaRuns) {
  const auto data = testing::reference_task();
  const ParamGrid grid({{"k", {1, 3, 5}}});
  const auto cmp = compare_budgets(data, nullptr, knn_spec(), grid, {{1, 10}, {2, 5}}, options(1, 5, 6, 3));
  const auto direct = run_meta_tuning(data, nullptr, knn_spec(), grid, options(2, 5, 6, 3));
  EXPECT_EQ(cmp.groups[0].rows[1].report.estimate.sd, direct.estimate.sd);
}

TEST(VarianceCurve, SingleJEqualsMetaTuning) {
  const auto data = testing::reference_task();
  const ParamGrid grid({{"C", {0.1, 1}}});
  const auto curve = variance_curve(data, logistic_spec(), grid, 5, {1}, options(9, 9, 10, 2));
  const auto direct = run_meta_tuning(data, nullptr, logistic_spec(), grid, options(1, 5, 10, 2));
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].estimate_sd, direct.estimate.sd);
  EXPECT_EQ(curve[0].axis_sd, std::vector<double>{direct.axes[0].sd});
  EXPECT_GT(curve[0].estimate_sd, 0.0);
}

TEST(VarianceCurve, RejectsUnorderedJ) {
  const auto data = testing::reference_task();
  const ParamGrid grid({{"C", {1}}});
  EXPECT_THROW(variance_curve(data, logistic_spec(), grid, 5, {}, options(1, 5, 2, 0)), Error);
  EXPECT_THROW(variance_curve(data, logistic_spec(), grid, 5, {2, 1}, options(1, 5, 2, 0)), Error);
  EXPECT_THROW(variance_curve(data, logistic_spec(), grid, 5, {2, 2}, options(1, 5, 2, 0)), Error);
}

}  // namespace
}  // namespace jkcv
