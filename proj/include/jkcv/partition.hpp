#pragma once

// Random K-fold partitions (plain and stratified) and hold-out splits.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jkcv/core.hpp"

namespace jkcv {

/// fold_of[i] is the fold id in [0, k) of record i.
struct FoldAssignment {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;
  Seed seed = 0;  // generator seed that produced this assignment

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t f : fold_of) ++sizes[f];
    return sizes;
  }

  std::vector<std::size_t> test_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (fold_of[i] == fold) rows.push_back(i);
    return rows;
  }

  std::vector<std::size_t> train_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (fold_of[i] != fold) rows.push_back(i);
    return rows;
  }

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

struct HoldoutSplit {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  double test_fraction = 0.0;
};

namespace detail {

inline void check_fold_count(std::size_t n, std::size_t k) {
  if (k < 2) throw Error("K must be at least 2 (got " + std::to_string(k) + ")");
  if (k > n)
    throw Error("K=" + std::to_string(k) + " exceeds record count n=" + std::to_string(n));
  static std::atomic<bool> warned{false};
  if (k == 2 && !warned.exchange(true))
    warn("K=2 gives non-overlapping training sets; K >= 3 is recommended");
}

}  // namespace detail

/// Fisher-Yates shuffle of [0, n), then deal round-robin into k folds.
inline FoldAssignment make_kfold(std::size_t n, std::size_t k, Seed seed) {
  detail::check_fold_count(n, k);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  FoldAssignment out{n, k, std::vector<std::size_t>(n), seed};
  for (std::size_t pos = 0; pos < n; ++pos) out.fold_of[order[pos]] = pos % k;
  return out;
}

/// Per class: shuffle that class's records and deal them round-robin. The
/// dealing offset carries over from one class to the next so that overall
/// fold sizes stay as even as the per-class constraint allows.
inline FoldAssignment make_stratified_kfold(std::span<const Label> labels, std::size_t k, Seed seed) {
  const std::size_t n = labels.size();
  if (k < 2) throw Error("K must be at least 2 (got " + std::to_string(k) + ")");
  Label max_label = -1;
  for (Label y : labels) {
    if (y < 0) throw Error("stratified K-fold: negative label");
    max_label = std::max(max_label, y);
  }
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) continue;
    if (members[c].size() < k)
      throw Error("stratified K-fold: class " + std::to_string(c) + " has " +
                  std::to_string(members[c].size()) + " records, fewer than K=" + std::to_string(k));
  }
  detail::check_fold_count(n, k);

  Rng rng(seed);
  FoldAssignment out{n, k, std::vector<std::size_t>(n), seed};
  std::size_t offset = 0;
  for (auto& group : members) {
    rng.shuffle(group);
    for (std::size_t pos = 0; pos < group.size(); ++pos) out.fold_of[group[pos]] = (offset + pos) % k;
    offset = (offset + group.size()) % k;
  }
  return out;
}

inline HoldoutSplit make_holdout(std::size_t n, double test_fraction, Seed seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error("holdout: test_fraction must lie in (0, 1)");
  const auto test_count = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (test_count < 1 || test_count + 1 > n)
    throw Error("holdout: test_fraction " + std::to_string(test_fraction) + " with n=" +
                std::to_string(n) + " leaves an empty side");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  HoldoutSplit split;
  split.test_fraction = test_fraction;
  split.test_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_count));
  split.train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(test_count), order.end());
  std::sort(split.test_idx.begin(), split.test_idx.end());
  std::sort(split.train_idx.begin(), split.train_idx.end());
  return split;
}

}  // namespace jkcv
