#pragma once

// Meta-experiments: rerun estimation or tuning under R independent
// partition replicates of the same data and summarise how much the outcome
// moves. Replicate r uses seed path [r] below the master seed, so a
// replicate's result never depends on how many others run alongside it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jkcv/estimate.hpp"
#include "jkcv/tune.hpp"

namespace jkcv {

/// Fixed path element for held-out scoring of a tuned point.
inline constexpr Seed kGlobalScoreTag = 0x676c6f62616cULL;

namespace stats {

inline double mean(std::span<const double> xs) { return mean_of(xs); }

/// Sample standard deviation (n - 1 denominator); NaN for fewer than two values.
/// Deviations are taken from the first value first, so identical inputs give
/// exactly zero.
inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double shift = xs.front();
  const auto n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x - shift;
  const double m = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - shift - m) * (x - shift - m);
  return std::sqrt(ss / (n - 1.0));
}

inline double sample_variance(std::span<const double> xs) {
  const double sd = sample_sd(xs);
  return sd * sd;
}

/// Linear interpolation between order statistics (Hyndman-Fan type 7).
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw Error("quantile of an empty sequence");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace stats

struct ReplicateRecord {
  std::size_t replicate = 0;
  ParamPoint chosen;
  double chosen_estimate = 0.0;
  std::optional<double> global_score;
  bool degenerate = false;
};

struct AxisSummary {
  std::string name;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::optional<double> sd_log10;  // present when every chosen value is positive
  std::vector<std::pair<double, std::size_t>> histogram;  // ascending value
};

struct ValueSummary {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct MetaConfigEcho {
  std::size_t j = 0;
  std::size_t k = 0;
  std::size_t replicates = 0;
  bool stratified = false;
  Seed master_seed = 0;
  Metric metric = Metric::accuracy;
  LearnerSpec learner;
  std::vector<GridAxis> grid;
};

struct MetaReport {
  MetaConfigEcho config;
  std::vector<ReplicateRecord> records;
  std::vector<AxisSummary> axes;
  std::vector<std::pair<ParamPoint, std::size_t>> joint_histogram;  // canonical point order
  ValueSummary estimate;
  std::optional<ValueSummary> global;
  std::size_t degenerate_count = 0;
};

inline ValueSummary summarize_values(std::span<const double> xs) {
  ValueSummary s;
  s.mean = stats::mean(xs);
  s.sd = stats::sample_sd(xs);
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  return s;
}

/// Fills every summary field of `report` from its per-replicate records.
inline void summarize(MetaReport& report) {
  const auto& records = report.records;
  if (records.empty()) throw Error("meta report has no replicates");
  report.axes.clear();
  report.joint_histogram.clear();

  std::vector<std::string> names;
  for (const auto& [name, value] : records.front().chosen.entries) names.push_back(name);
  for (const auto& name : names) {
    AxisSummary axis;
    axis.name = name;
    std::vector<double> values;
    std::map<double, std::size_t> counts;
    for (const auto& r : records) {
      const double v = r.chosen.at(name);
      values.push_back(v);
      ++counts[v];
    }
    const auto vs = summarize_values(values);
    axis.sd = vs.sd;
    axis.min = vs.min;
    axis.max = vs.max;
    axis.mean = vs.mean;
    if (vs.min > 0.0) {
      std::vector<double> logs;
      for (double v : values) logs.push_back(std::log10(v));
      axis.sd_log10 = stats::sample_sd(logs);
    }
    axis.histogram.assign(counts.begin(), counts.end());
    report.axes.push_back(std::move(axis));
  }

  std::vector<std::pair<ParamPoint, std::size_t>> joint;
  for (const auto& r : records) {
    auto it = std::find_if(joint.begin(), joint.end(), [&](const auto& e) { return e.first == r.chosen; });
    if (it == joint.end())
      joint.emplace_back(r.chosen, 1);
    else
      ++it->second;
  }
  std::sort(joint.begin(), joint.end(), [](const auto& a, const auto& b) { return param_less(a.first, b.first); });
  report.joint_histogram = std::move(joint);

  std::vector<double> estimates, globals;
  report.degenerate_count = 0;
  for (const auto& r : records) {
    estimates.push_back(r.chosen_estimate);
    if (r.global_score) globals.push_back(*r.global_score);
    if (r.degenerate) ++report.degenerate_count;
  }
  report.estimate = summarize_values(estimates);
  report.global.reset();
  if (!globals.empty()) report.global = summarize_values(globals);
}

struct MetaTuningOptions {
  std::size_t j = 1;
  std::size_t k = 5;
  bool stratified = false;
  std::size_t replicates = 300;
  Seed master_seed = 0;
  Metric metric = Metric::accuracy;
};

inline MetaReport run_meta_tuning(const Dataset& data, const Dataset* heldout, const LearnerSpec& spec,
                                  const ParamGrid& grid, const MetaTuningOptions& opt,
                                  const Executor& executor = Executor::sequential()) {
  if (opt.replicates < 1) throw Error("replicate count R must be at least 1");
  if (heldout && heldout->d() != data.d())
    throw Error("held-out pool width " + std::to_string(heldout->d()) + " differs from training width " +
                std::to_string(data.d()));

  MetaReport report;
  report.config = {opt.j, opt.k, opt.replicates, opt.stratified, opt.master_seed, opt.metric, spec, grid.axes()};
  report.records.resize(opt.replicates);
  executor.for_each_index(opt.replicates, [&](std::size_t r) {
    const SeedPath path{opt.master_seed, {static_cast<Seed>(r)}};
    const auto result = grid_tune(data, spec, grid, opt.j, opt.k, opt.stratified, opt.metric, path);
    report.records[r] = {r, result.chosen, result.chosen_estimate, std::nullopt, result.degenerate};
  });

  if (heldout) {
    // The held-out score depends only on the point, so each distinct chosen
    // point is fitted once.
    std::vector<ParamPoint> distinct;
    for (const auto& rec : report.records)
      if (std::find(distinct.begin(), distinct.end(), rec.chosen) == distinct.end()) distinct.push_back(rec.chosen);
    std::sort(distinct.begin(), distinct.end(), param_less);
    std::vector<double> scores(distinct.size());
    executor.for_each_index(distinct.size(), [&](std::size_t i) {
      const SeedPath path{opt.master_seed, {kGlobalScoreTag, point_key(distinct[i])}};
      scores[i] = global_score(data, *heldout, spec, distinct[i], opt.metric, path);
    });
    for (auto& rec : report.records) {
      const auto at = std::find(distinct.begin(), distinct.end(), rec.chosen) - distinct.begin();
      rec.global_score = scores[static_cast<std::size_t>(at)];
    }
  }
  summarize(report);
  return report;
}

struct EstimationSummary {
  std::size_t j = 0;
  std::size_t k = 0;
  std::size_t replicates = 0;
  std::vector<double> estimates;  // JKEstimate.mean per replicate
  std::vector<bool> degenerate;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

inline EstimationSummary summarize_estimates(std::size_t j, std::size_t k, std::vector<double> estimates,
                                             std::vector<bool> degenerate) {
  EstimationSummary s;
  s.j = j;
  s.k = k;
  s.replicates = estimates.size();
  s.mean = stats::mean(estimates);
  s.sd = stats::sample_sd(estimates);
  s.min = stats::quantile(estimates, 0.0);
  s.q25 = stats::quantile(estimates, 0.25);
  s.median = stats::quantile(estimates, 0.5);
  s.q75 = stats::quantile(estimates, 0.75);
  s.max = stats::quantile(estimates, 1.0);
  s.estimates = std::move(estimates);
  s.degenerate = std::move(degenerate);
  return s;
}

inline EstimationSummary run_meta_estimation(const Dataset& data, const LearnerSpec& spec, const ParamPoint& params,
                                             const MetaTuningOptions& opt,
                                             const Executor& executor = Executor::sequential()) {
  if (opt.replicates < 1) throw Error("replicate count R must be at least 1");
  resolve_params(spec, params);
  std::vector<double> estimates(opt.replicates);
  std::vector<char> flags(opt.replicates, 0);
  executor.for_each_index(opt.replicates, [&](std::size_t r) {
    const SeedPath path{opt.master_seed, {static_cast<Seed>(r)}};
    const auto est = jkfold_estimate(data, spec, params, opt.j, opt.k, opt.stratified, opt.metric, path);
    estimates[r] = est.mean;
    flags[r] = est.degenerate ? 1 : 0;
  });
  return summarize_estimates(opt.j, opt.k, std::move(estimates), std::vector<bool>(flags.begin(), flags.end()));
}

struct JKConfig {
  std::size_t j = 1;
  std::size_t k = 5;
};

struct BudgetRow {
  std::size_t j = 0;
  std::size_t k = 0;
  MetaReport report;
};

struct BudgetGroup {
  std::size_t budget = 0;  // J * K
  std::vector<BudgetRow> rows;  // ascending J
};

struct BudgetComparison {
  std::vector<BudgetGroup> groups;  // ascending budget
};

/// One meta-tuning run per (J, K), all from the same master seed.
inline BudgetComparison compare_budgets(const Dataset& data, const Dataset* heldout, const LearnerSpec& spec,
                                        const ParamGrid& grid, const std::vector<JKConfig>& configs,
                                        const MetaTuningOptions& base, const Executor& executor = Executor::sequential()) {
  if (configs.empty()) throw Error("compare_budgets: no (J, K) configurations");
  std::vector<BudgetRow> rows;
  for (const auto& c : configs) {
    MetaTuningOptions opt = base;
    opt.j = c.j;
    opt.k = c.k;
    rows.push_back({c.j, c.k, run_meta_tuning(data, heldout, spec, grid, opt, executor)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const BudgetRow& a, const BudgetRow& b) {
    if (a.j * a.k != b.j * b.k) return a.j * a.k < b.j * b.k;
    return a.j < b.j;
  });
  BudgetComparison out;
  for (auto& row : rows) {
    const std::size_t budget = row.j * row.k;
    if (out.groups.empty() || out.groups.back().budget != budget) out.groups.push_back({budget, {}});
    out.groups.back().rows.push_back(std::move(row));
  }
  return out;
}

struct CurveRow {
  std::size_t j = 0;
  std::vector<double> axis_sd;  // SD of the chosen value per grid axis
  double estimate_sd = 0.0;
  double estimate_mean = 0.0;
  MetaReport report;
};

/// Meta-tuning at fixed K for each J in ascending order. A fixed parameter
/// point is passed as a single-point grid.
inline std::vector<CurveRow> variance_curve(const Dataset& data, const LearnerSpec& spec, const ParamGrid& grid,
                                            std::size_t k, const std::vector<std::size_t>& j_values,
                                            const MetaTuningOptions& base,
                                            const Executor& executor = Executor::sequential()) {
  if (j_values.empty()) throw Error("variance_curve: no J values");
  if (!std::is_sorted(j_values.begin(), j_values.end()) ||
      std::adjacent_find(j_values.begin(), j_values.end()) != j_values.end())
    throw Error("variance_curve: J values must be strictly ascending");
  std::vector<CurveRow> out;
  for (std::size_t j : j_values) {
    MetaTuningOptions opt = base;
    opt.j = j;
    opt.k = k;
    CurveRow row;
    row.j = j;
    row.report = run_meta_tuning(data, nullptr, spec, grid, opt, executor);
    for (const auto& axis : row.report.axes) row.axis_sd.push_back(axis.sd);
    row.estimate_sd = row.report.estimate.sd;
    row.estimate_mean = row.report.estimate.mean;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace jkcv
