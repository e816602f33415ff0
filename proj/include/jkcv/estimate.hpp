#pragma once

// K-fold and J-K-fold cross-validation estimates for one learner
// configuration, plus hold-out and global (train-all, score-held-out) scores.
//
// Seed layout below a caller-supplied path P:
//   partition of repetition j      derive(P + [j])
//   learner for fold f of rep j    derive(P + [j, f] + learner_suffix)
// kfold_estimate on its own uses derive(P + [f] + learner_suffix), so a
// J-K-fold run with J = 1 is exactly kfold_estimate under P + [0].

#include <span>
#include <vector>

#include "jkcv/core.hpp"
#include "jkcv/learners.hpp"
#include "jkcv/parallel.hpp"
#include "jkcv/partition.hpp"

namespace jkcv {

struct CVEstimate {
  std::vector<double> fold_scores;
  double mean = 0.0;
  std::size_t k = 0;
  Seed partition_seed = 0;
  bool degenerate = false;  // some fold's training set lacked a class

  friend bool operator==(const CVEstimate&, const CVEstimate&) = default;
};

struct JKEstimate {
  std::vector<CVEstimate> repetitions;
  double mean = 0.0;
  std::size_t j = 0;
  std::size_t k = 0;
  bool degenerate = false;

  friend bool operator==(const JKEstimate&, const JKEstimate&) = default;
};

/// Sum in index order divided by the count.
inline double mean_of(std::span<const double> values) {
  if (values.empty()) throw Error("mean of an empty sequence");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

struct FoldOutcome {
  double score = 0.0;
  bool degenerate = false;
};

/// Fits on every record outside `fold` and scores the fold.
inline FoldOutcome evaluate_fold(const Dataset& data, const LearnerSpec& spec, const ParamPoint& params,
                                 const FoldAssignment& assignment, std::size_t fold, Metric metric,
                                 Seed learner_seed) {
  DatasetView train(data, assignment.train_rows(fold));
  DatasetView test(data, assignment.test_rows(fold));
  const auto model = fit(spec, params, train, learner_seed);
  const auto predicted = predict(model, test);
  std::vector<Label> truth(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) truth[i] = test.label(i);
  return {score(metric, predicted, truth), train.classes_present() < data.class_count()};
}

namespace detail {

inline Seed fold_learner_seed(const SeedPath& path, std::size_t fold, std::span<const Seed> suffix) {
  return path.child(fold).extended(suffix).derive();
}

inline CVEstimate assemble(const FoldAssignment& assignment, std::span<const FoldOutcome> outcomes) {
  CVEstimate est;
  est.k = assignment.k;
  est.partition_seed = assignment.seed;
  est.fold_scores.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    est.fold_scores.push_back(o.score);
    est.degenerate = est.degenerate || o.degenerate;
  }
  est.mean = mean_of(est.fold_scores);
  return est;
}

inline JKEstimate assemble(std::vector<CVEstimate> reps) {
  JKEstimate est;
  est.j = reps.size();
  est.k = reps.empty() ? 0 : reps.front().k;
  std::vector<double> means;
  for (const auto& r : reps) {
    means.push_back(r.mean);
    est.degenerate = est.degenerate || r.degenerate;
  }
  est.mean = mean_of(means);
  est.repetitions = std::move(reps);
  return est;
}

inline void check_assignment(const Dataset& data, const FoldAssignment& assignment) {
  if (assignment.n != data.n() || assignment.fold_of.size() != data.n())
    throw Error("fold assignment covers " + std::to_string(assignment.n) + " records, dataset has " +
                std::to_string(data.n()));
}

}  // namespace detail

inline CVEstimate kfold_estimate(const Dataset& data, const LearnerSpec& spec, const ParamPoint& params,
                                 const FoldAssignment& assignment, Metric metric, const SeedPath& seed_path,
                                 std::span<const Seed> learner_suffix = {},
                                 const Executor& executor = Executor::sequential()) {
  detail::check_assignment(data, assignment);
  std::vector<FoldOutcome> outcomes(assignment.k);
  executor.for_each_index(assignment.k, [&](std::size_t f) {
    outcomes[f] = evaluate_fold(data, spec, params, assignment, f, metric,
                                detail::fold_learner_seed(seed_path, f, learner_suffix));
  });
  return detail::assemble(assignment, outcomes);
}

/// The partition used by repetition j below seed_path.
inline FoldAssignment repetition_partition(const Dataset& data, std::size_t k, bool stratified,
                                           const SeedPath& seed_path, std::size_t j) {
  const Seed seed = seed_path.child(j).derive();
  return stratified ? make_stratified_kfold(data.labels(), k, seed) : make_kfold(data.n(), k, seed);
}

inline std::vector<FoldAssignment> repetition_partitions(const Dataset& data, std::size_t j_count, std::size_t k,
                                                         bool stratified, const SeedPath& seed_path) {
  if (j_count < 1) throw Error("J must be at least 1");
  std::vector<FoldAssignment> parts;
  parts.reserve(j_count);
  for (std::size_t j = 0; j < j_count; ++j) parts.push_back(repetition_partition(data, k, stratified, seed_path, j));
  return parts;
}

/// J-K-fold estimate on precomputed partitions (one per repetition).
inline JKEstimate jkfold_estimate_on(const Dataset& data, const LearnerSpec& spec, const ParamPoint& params,
                                     std::span<const FoldAssignment> partitions, Metric metric,
                                     const SeedPath& seed_path, std::span<const Seed> learner_suffix = {},
                                     const Executor& executor = Executor::sequential()) {
  if (partitions.empty()) throw Error("J must be at least 1");
  const std::size_t k = partitions.front().k;
  for (const auto& p : partitions) detail::check_assignment(data, p);
  std::vector<FoldOutcome> outcomes(partitions.size() * k);
  executor.for_each_index(outcomes.size(), [&](std::size_t unit) {
    const std::size_t j = unit / k, f = unit % k;
    outcomes[unit] = evaluate_fold(data, spec, params, partitions[j], f, metric,
                                   detail::fold_learner_seed(seed_path.child(j), f, learner_suffix));
  });
  std::vector<CVEstimate> reps;
  reps.reserve(partitions.size());
  for (std::size_t j = 0; j < partitions.size(); ++j)
    reps.push_back(detail::assemble(partitions[j], std::span(outcomes).subspan(j * k, k)));
  return detail::assemble(std::move(reps));
}

inline JKEstimate jkfold_estimate(const Dataset& data, const LearnerSpec& spec, const ParamPoint& params,
                                  std::size_t j_count, std::size_t k, bool stratified, Metric metric,
                                  const SeedPath& seed_path, std::span<const Seed> learner_suffix = {},
                                  const Executor& executor = Executor::sequential()) {
  const auto parts = repetition_partitions(data, j_count, k, stratified, seed_path);
  return jkfold_estimate_on(data, spec, params, parts, metric, seed_path, learner_suffix, executor);
}

inline double holdout_estimate(const Dataset& data, const LearnerSpec& spec, const ParamPoint& params,
                               const HoldoutSplit& split, Metric metric, const SeedPath& seed_path) {
  std::vector<char> seen(data.n(), 0);
  for (const auto* side : {&split.train_idx, &split.test_idx})
    for (std::size_t i : *side) {
      if (i >= data.n() || seen[i]) throw Error("holdout split does not partition the dataset");
      seen[i] = 1;
    }
  if (std::count(seen.begin(), seen.end(), 1) != static_cast<std::ptrdiff_t>(data.n()))
    throw Error("holdout split does not cover the dataset");

  DatasetView train(data, split.train_idx);
  DatasetView test(data, split.test_idx);
  const auto model = fit(spec, params, train, seed_path.derive());
  std::vector<Label> truth(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) truth[i] = test.label(i);
  return score(metric, predict(model, test), truth);
}

/// Fit on the whole training pool, score on the held-out pool.
inline double global_score(const Dataset& train_pool, const Dataset& heldout_pool, const LearnerSpec& spec,
                           const ParamPoint& params, Metric metric, const SeedPath& seed_path) {
  if (train_pool.d() != heldout_pool.d())
    throw Error("global score: training width " + std::to_string(train_pool.d()) + " vs held-out width " +
                std::to_string(heldout_pool.d()));
  const auto model = fit(spec, params, DatasetView::all(train_pool), seed_path.derive());
  const auto predicted = predict(model, DatasetView::all(heldout_pool));
  return score(metric, predicted, heldout_pool.labels());
}

}  // namespace jkcv
