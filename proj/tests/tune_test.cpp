#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "jkcv/tune.hpp"
#include "test_util.hpp"

namespace jkcv {
namespace {

using testing::knn_spec;
using testing::logistic_spec;

const LearnerSpec kForest{LearnerKind::forest_lite, {{"trees", 7}}};

TEST(ParamGrid, EnumeratesCartesianProduct) {
  const ParamGrid grid({{"b", {2, 1}}, {"a", {0.5, 0.1, 0.3}}});
  EXPECT_EQ(grid.size(), 6u);
  const auto points = grid.points();
  ASSERT_EQ(points.size(), 6u);
  // Axes sorted by name, values ascending, first axis slowest.
  EXPECT_EQ(points.front(), (ParamPoint{{"a", 0.1}, {"b", 1}}));
  EXPECT_EQ(points[1], (ParamPoint{{"a", 0.1}, {"b", 2}}));
  EXPECT_EQ(points.back(), (ParamPoint{{"a", 0.5}, {"b", 2}}));
}

TEST(ParamGrid, Validation) {
  EXPECT_THROW(ParamGrid(std::vector<GridAxis>{}), Error);
  EXPECT_THROW(ParamGrid({GridAxis{"C", {}}}), Error);
  EXPECT_THROW(ParamGrid({{"C", {1, 1}}}), Error);
  EXPECT_THROW(ParamGrid({{"C", {1}}, {"C", {2}}}), Error);
}

TEST(TieBreak, Examples) {
  EXPECT_EQ(tie_break({{{"C", 5}}}), (ParamPoint{{"C", 5}}));
  EXPECT_EQ(tie_break({{{"C", 5}}, {{"C", 1}}}), (ParamPoint{{"C", 1}}));
  EXPECT_EQ(tie_break({{{"C", 1}, {"g", 0.2}}, {{"C", 1}, {"g", 0.1}}}), (ParamPoint{{"C", 1}, {"g", 0.1}}));
  EXPECT_THROW(tie_break({}), Error);
}

TEST(GridTune, SinglePointGrid) {
  const auto data = testing::reference_task();
  const ParamPoint p{{"C", 0.5}};
  const SeedPath path{3, {1}};
  const auto res = grid_tune(data, logistic_spec(), ParamGrid::single(p), 2, 5, false, Metric::accuracy, path);
  EXPECT_EQ(res.chosen, p);
  const Seed suffix[] = {point_key(p)};
  const auto direct = jkfold_estimate(data, logistic_spec(), p, 2, 5, false, Metric::accuracy, path, suffix);
  EXPECT_EQ(res.chosen_estimate, direct.mean);
  EXPECT_EQ(res.estimate_for(p), direct);
}

// Point k=1 scores 1.0 on duplicated pairs split across folds. Point k=13
// votes over the whole 6-record training fold, which is balanced 3/3, so the
// vote ties and always predicts label 0: 0.5 on every balanced test fold.
TEST(GridTune, ContrastInstance) {
  const auto data = testing::duplicated_pairs();
  Seed master = 0;
  for (;; ++master) {
    const auto a = repetition_partition(data, 2, true, {master, {}}, 0);
    bool split = true;
    for (std::size_t i = 0; i < 12; i += 2) split = split && a.fold_of[i] != a.fold_of[i + 1];
    if (split) break;
  }
  ::testing::internal::CaptureStderr();
  const auto res = grid_tune(data, {LearnerKind::knn, {}}, ParamGrid({{"k", {1, 13}}}), 1, 2, true,
                             Metric::accuracy, {master, {}});
  ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(res.estimate_for({{"k", 1}}).mean, 1.0);
  EXPECT_EQ(res.estimate_for({{"k", 13}}).repetitions[0].fold_scores, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(res.chosen, (ParamPoint{{"k", 1}}));
}

TEST(GridTune, MatchesBruteForceRecomputation) {
  const auto data = generate_synthetic(90, 3, 3, 1.4, 12);
  const ParamGrid grid({{"max_features", {0.3, 0.7, 1.0}}, {"max_depth", {1, 3, 5}}});
  for (Seed s = 0; s < 3; ++s) {
    const SeedPath path{s, {2}};
    const auto res = grid_tune(data, kForest, grid, 2, 3, false, Metric::accuracy, path);
    double best = -1.0;
    ParamPoint best_point;
    for (const auto& p : grid.points()) {
      const Seed suffix[] = {point_key(p)};
      const auto est = jkfold_estimate(data, kForest, p, 2, 3, false, Metric::accuracy, path, suffix);
      EXPECT_EQ(res.estimate_for(p), est);
      if (est.mean > best) {
        best = est.mean;
        best_point = p;
      }
    }
    EXPECT_EQ(res.chosen, best_point);
  }
}

TEST(GridTune, AllPointsShareThePartitions) {
  const auto data = testing::reference_task();
  const auto res = grid_tune(data, knn_spec(1), ParamGrid({{"k", {1, 3, 5, 7}}}), 3, 4, true, Metric::accuracy,
                             {9, {0}});
  for (std::size_t j = 0; j < 3; ++j) {
    const Seed expected = SeedPath{9, {0}}.child(j).derive();
    for (const auto& [point, est] : res.estimates) EXPECT_EQ(est.repetitions[j].partition_seed, expected);
  }
}

TEST(GridTune, ChosenIsInvariantToEnumerationOrder) {
  const auto data = generate_synthetic(80, 4, 2, 1.2, 5);
  const std::vector<double> mf = {0.25, 0.5, 0.75, 1.0}, depth = {1, 2, 3};
  const auto reference = grid_tune(data, kForest, ParamGrid({{"max_features", mf}, {"max_depth", depth}}), 2, 4,
                                   false, Metric::accuracy, {4, {0}});
  Rng rng(1);
  for (int trial = 0; trial < 6; ++trial) {
    auto a = mf, b = depth;
    rng.shuffle(a);
    rng.shuffle(b);
    std::vector<GridAxis> axes = {{"max_features", a}, {"max_depth", b}};
    if (trial % 2) std::swap(axes[0], axes[1]);
    const auto res = grid_tune(data, kForest, ParamGrid(axes, true), 2, 4, false, Metric::accuracy, {4, {0}});
    EXPECT_EQ(res.chosen, reference.chosen);
    EXPECT_EQ(res.chosen_estimate, reference.chosen_estimate);
  }
}

TEST(GridTune, ChosenMeanIsTheMaximum) {
  const auto data = testing::reference_task();
  const auto res = grid_tune(data, logistic_spec(), ParamGrid({{"C", {0.001, 0.01, 0.1, 1, 10}}}), 2, 5, false,
                             Metric::accuracy, {2, {0}});
  for (const auto& [point, est] : res.estimates) {
    EXPECT_GE(res.chosen_estimate, est.mean);
    if (est.mean == res.chosen_estimate) {
      EXPECT_FALSE(param_less(point, res.chosen));
    }
  }
}

TEST(GridTune, SingleRepetitionIsPlainKFoldTuning) {
  const auto data = testing::reference_task();
  const SeedPath path{6, {1}};
  const ParamGrid grid({{"C", {0.01, 1, 100}}});
  const auto res = grid_tune(data, logistic_spec(), grid, 1, 5, false, Metric::accuracy, path);
  const auto partition = make_kfold(data.n(), 5, path.child(0).derive());
  for (const auto& p : grid.points()) {
    const Seed suffix[] = {point_key(p)};
    const auto kf = kfold_estimate(data, logistic_spec(), p, partition, Metric::accuracy, path.child(0), suffix);
    EXPECT_EQ(res.estimate_for(p).mean, kf.mean);
  }
}

TEST(GridTune, WorkerCountDoesNotMatter) {
  const auto data = testing::reference_task();
  const ParamGrid grid({{"max_features", {0.2, 0.6, 1.0}}});
  const auto a = grid_tune(data, kForest, grid, 2, 4, false, Metric::accuracy, {1, {0}}, Executor(1));
  const auto b = grid_tune(data, kForest, grid, 2, 4, false, Metric::accuracy, {1, {0}}, Executor(5));
  EXPECT_EQ(a.chosen, b.chosen);
  EXPECT_EQ(a.estimates, b.estimates);
}

TEST(GridTune, FlagsAllDegenerateResults) {
  // Class 2 has one record, so some training fold always lacks it.
  const auto data = Dataset(std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 8}, 1, {0, 0, 0, 0, 1, 1, 1, 1, 2}, 3);
  const auto res = grid_tune(data, {LearnerKind::knn, {}}, ParamGrid({{"k", {1, 3}}}), 2, 3, false, Metric::accuracy,
                             {0, {0}});
  EXPECT_TRUE(res.degenerate);
  EXPECT_FALSE(grid_tune(testing::twelve_points(), {LearnerKind::knn, {}}, ParamGrid({{"k", {1, 3}}}), 1, 3, false,
                         Metric::accuracy, {0, {0}})
                   .degenerate);
}

TEST(GridTune, RejectsInvalidPoints) {
  const auto data = testing::twelve_points();
  EXPECT_THROW(grid_tune(data, {LearnerKind::knn, {}}, ParamGrid({{"k", {1, 2}}}), 1, 3, false, Metric::accuracy,
                         {0, {0}}),
               Error);
  EXPECT_THROW(grid_tune(data, {LearnerKind::knn, {}}, ParamGrid({{"C", {1}}}), 1, 3, false, Metric::accuracy,
                         {0, {0}}),
               Error);
}

}  // namespace
}  // namespace jkcv
