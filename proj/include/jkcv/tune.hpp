#pragma once

// Grid-search tuning driven by J-K-fold CV.
//
// All grid points are scored on the same J partitions, so differences
// between points are paired comparisons. The winner is the point with the
// highest mean estimate; exact ties go to the canonically smallest point.

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "jkcv/estimate.hpp"
#include "jkcv/params.hpp"

namespace jkcv {

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

class ParamGrid {
 public:
  ParamGrid() = default;

  /// Axes are sorted by name and values ascending unless keep_order is set
  /// (a hook for enumeration-order tests). Points always list their entries
  /// by name, so a point's identity does not depend on the axis order.
  explicit ParamGrid(std::vector<GridAxis> axes, bool keep_order = false) : axes_(std::move(axes)) {
    if (axes_.empty()) throw Error("parameter grid has no axes");
    std::set<std::string> names;
    for (auto& axis : axes_) {
      if (axis.name.empty()) throw Error("parameter grid: empty axis name");
      if (!names.insert(axis.name).second) throw Error("parameter grid: duplicate axis '" + axis.name + "'");
      if (axis.values.empty()) throw Error("parameter grid: axis '" + axis.name + "' has no values");
      std::vector<double> sorted = axis.values;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error("parameter grid: axis '" + axis.name + "' has duplicate values");
      if (!keep_order) axis.values = std::move(sorted);
    }
    if (!keep_order)
      std::sort(axes_.begin(), axes_.end(), [](const GridAxis& a, const GridAxis& b) { return a.name < b.name; });
  }

  /// A one-point grid holding exactly `point`.
  static ParamGrid single(const ParamPoint& point) {
    std::vector<GridAxis> axes;
    for (const auto& [name, value] : point.entries) axes.push_back({name, {value}});
    return ParamGrid(std::move(axes));
  }

  const std::vector<GridAxis>& axes() const { return axes_; }

  std::size_t size() const {
    std::size_t total = axes_.empty() ? 0 : 1;
    for (const auto& axis : axes_) total *= axis.values.size();
    return total;
  }

  /// Cartesian product, first axis varying slowest; entries sorted by name.
  std::vector<ParamPoint> points() const {
    std::vector<ParamPoint> out;
    const std::size_t total = size();
    out.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
      ParamPoint p;
      std::size_t rest = flat;
      std::vector<std::size_t> idx(axes_.size());
      for (std::size_t a = axes_.size(); a-- > 0;) {
        idx[a] = rest % axes_[a].values.size();
        rest /= axes_[a].values.size();
      }
      for (std::size_t a = 0; a < axes_.size(); ++a) p.entries.emplace_back(axes_[a].name, axes_[a].values[idx[a]]);
      std::sort(p.entries.begin(), p.entries.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  std::vector<GridAxis> axes_;
};

struct TuningResult {
  ParamPoint chosen;
  double chosen_estimate = 0.0;
  std::vector<std::pair<ParamPoint, JKEstimate>> estimates;  // grid enumeration order
  std::size_t j = 0;
  std::size_t k = 0;
  SeedPath seed_path;
  bool degenerate = false;  // every point's estimate was degenerate

  const JKEstimate& estimate_for(const ParamPoint& p) const {
    for (const auto& [point, est] : estimates)
      if (point == p) return est;
    throw Error("tuning result has no estimate for " + p.to_string());
  }
};

inline ParamPoint tie_break(const std::vector<ParamPoint>& points) {
  if (points.empty()) throw Error("tie_break: no candidates");
  return *std::min_element(points.begin(), points.end(), param_less);
}

/// Exact argmax of the stored means, ties resolved by tie_break.
inline ParamPoint select_best(const std::vector<std::pair<ParamPoint, JKEstimate>>& estimates) {
  if (estimates.empty()) throw Error("select_best: no estimates");
  double best = estimates.front().second.mean;
  for (const auto& e : estimates) best = std::max(best, e.second.mean);
  std::vector<ParamPoint> tied;
  for (const auto& [point, est] : estimates)
    if (est.mean == best) tied.push_back(point);
  return tie_break(tied);
}

inline TuningResult grid_tune(const Dataset& data, const LearnerSpec& spec, const ParamGrid& grid, std::size_t j_count,
                              std::size_t k, bool stratified, Metric metric, const SeedPath& seed_path,
                              const Executor& executor = Executor::sequential()) {
  const auto points = grid.points();
  if (points.empty()) throw Error("grid_tune: empty grid");
  for (const auto& p : points) resolve_params(spec, p);

  const auto partitions = repetition_partitions(data, j_count, k, stratified, seed_path);
  std::vector<Seed> keys;
  for (const auto& p : points) keys.push_back(point_key(p));

  const std::size_t per_point = j_count * k;
  std::vector<FoldOutcome> outcomes(points.size() * per_point);
  executor.for_each_index(outcomes.size(), [&](std::size_t unit) {
    const std::size_t g = unit / per_point, rem = unit % per_point, j = rem / k, f = rem % k;
    const Seed suffix[] = {keys[g]};
    outcomes[unit] = evaluate_fold(data, spec, points[g], partitions[j], f, metric,
                                   detail::fold_learner_seed(seed_path.child(j), f, suffix));
  });

  TuningResult result;
  result.j = j_count;
  result.k = k;
  result.seed_path = seed_path;
  result.degenerate = true;
  for (std::size_t g = 0; g < points.size(); ++g) {
    std::vector<CVEstimate> reps;
    for (std::size_t j = 0; j < j_count; ++j)
      reps.push_back(detail::assemble(partitions[j], std::span(outcomes).subspan(g * per_point + j * k, k)));
    auto est = detail::assemble(std::move(reps));
    result.degenerate = result.degenerate && est.degenerate;
    result.estimates.emplace_back(points[g], std::move(est));
  }
  result.chosen = select_best(result.estimates);
  result.chosen_estimate = result.estimate_for(result.chosen).mean;
  return result;
}

}  // namespace jkcv
