#pragma once

// Bagged Gini decision trees with per-split random feature subsets.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "jkcv/core.hpp"

namespace jkcv::forest {

struct Settings {
  double max_features = 1.0;  // fraction of d examined at each split
  int trees = 100;
  int max_depth = 4;
  bool bootstrap = true;
};

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  Label label = 0;  // majority label of the node's training samples
};

struct Tree {
  std::vector<Node> nodes;  // nodes[0] is the root

  Label predict_one(std::span<const double> x) const {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
      const Node& node = nodes[static_cast<std::size_t>(at)];
      at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].label;
  }

  int depth() const { return depth_from(0); }

 private:
  int depth_from(int at) const {
    const Node& node = nodes[static_cast<std::size_t>(at)];
    if (node.feature < 0) return 0;
    return 1 + std::max(depth_from(node.left), depth_from(node.right));
  }
};

struct Model {
  std::size_t d = 0;
  int class_count = 2;
  std::vector<Tree> trees;

  /// Majority vote over trees; ties go to the lowest label.
  Label predict_one(std::span<const double> x) const {
    std::vector<int> votes(static_cast<std::size_t>(class_count), 0);
    for (const Tree& tree : trees) ++votes[static_cast<std::size_t>(tree.predict_one(x))];
    return static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
};

/// Number of features examined per split: ceil(fraction * d), at least 1.
inline std::size_t features_per_split(double fraction, std::size_t d) {
  // The small slack keeps e.g. 0.3 * 10 from rounding up to 4.
  const double raw = std::ceil(fraction * static_cast<double>(d) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, d);
}

/// Weighted Gini impurity times node size: m - sum_c count_c^2 / m.
/// Both the builder and any reference implementation should compare splits
/// with this exact expression so that ties resolve identically.
inline double gini_mass(std::span<const int> counts, int m) {
  if (m == 0) return 0.0;
  double sq = 0.0;
  for (int c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
  return static_cast<double>(m) - sq / static_cast<double>(m);
}

inline Label majority(std::span<const int> counts) {
  return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const DatasetView& train, const Settings& settings, Rng& rng)
      : train_(train), settings_(settings), rng_(rng), classes_(static_cast<std::size_t>(train.class_count())) {}

  /// samples are positions into the training view, duplicates allowed.
  Tree build(std::vector<std::size_t> samples) {
    Tree tree;
    grow(tree, samples, 0);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;
  };

  int grow(Tree& tree, std::vector<std::size_t>& samples, int depth) {
    std::vector<int> counts(classes_, 0);
    for (std::size_t s : samples) ++counts[static_cast<std::size_t>(train_.label(s))];
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(Node{-1, 0.0, -1, -1, majority(counts)});

    const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
    if (pure || depth >= settings_.max_depth) return index;

    const Split split = best_split(samples);
    if (split.feature < 0) return index;

    std::vector<std::size_t> left, right;
    for (std::size_t s : samples)
      (train_.row(s)[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(s);
    samples.clear();
    samples.shrink_to_fit();

    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    Node& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  std::vector<std::size_t> draw_features() {
    const std::size_t d = train_.d();
    const std::size_t m = features_per_split(settings_.max_features, d);
    std::vector<std::size_t> pool(d);
    std::iota(pool.begin(), pool.end(), 0);
    if (m < d) {
      for (std::size_t i = 0; i < m; ++i) std::swap(pool[i], pool[i + rng_.uniform_index(d - i)]);
      pool.resize(m);
    }
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  // Minimum gini mass over the drawn features; ties keep the lowest feature,
  // then the lowest threshold.
  Split best_split(const std::vector<std::size_t>& samples) {
    Split best;
    const int total = static_cast<int>(samples.size());
    std::vector<int> all(classes_, 0);
    for (std::size_t s : samples) ++all[static_cast<std::size_t>(train_.label(s))];

    std::vector<std::pair<double, Label>> column(samples.size());
    std::vector<int> left(classes_), right(classes_);
    for (std::size_t f : draw_features()) {
      for (std::size_t i = 0; i < samples.size(); ++i)
        column[i] = {train_.row(samples[i])[f], train_.label(samples[i])};
      std::sort(column.begin(), column.end());
      std::fill(left.begin(), left.end(), 0);
      right = all;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const auto y = static_cast<std::size_t>(column[i].second);
        ++left[y];
        --right[y];
        const double a = column[i].first, b = column[i + 1].first;
        if (!(a < b)) continue;
        const int nl = static_cast<int>(i + 1);
        const double score = gini_mass(left, nl) + gini_mass(right, total - nl);
        if (best.feature < 0 || score < best.score) {
          double threshold = a + (b - a) / 2.0;
          if (!(threshold < b)) threshold = a;
          best = Split{static_cast<int>(f), threshold, score};
        }
      }
    }
    return best;
  }

  const DatasetView& train_;
  const Settings& settings_;
  Rng& rng_;
  std::size_t classes_;
};

}  // namespace detail

/// Tree t draws from its own generator seeded with derive_seed(seed, {t}):
/// first the bootstrap sample (if enabled), then feature subsets in
/// depth-first node order.
inline Tree fit_tree(const DatasetView& train, const Settings& settings, Seed tree_seed) {
  Rng rng(tree_seed);
  std::vector<std::size_t> samples(train.size());
  if (settings.bootstrap) {
    for (auto& s : samples) s = rng.uniform_index(train.size());
  } else {
    std::iota(samples.begin(), samples.end(), 0);
  }
  detail::TreeBuilder builder(train, settings, rng);
  return builder.build(std::move(samples));
}

inline Model fit(const DatasetView& train, const Settings& settings, Seed seed) {
  Model model;
  model.d = train.d();
  model.class_count = train.class_count();
  model.trees.reserve(static_cast<std::size_t>(settings.trees));
  for (int t = 0; t < settings.trees; ++t)
    model.trees.push_back(fit_tree(train, settings, derive_seed(seed, {static_cast<Seed>(t)})));
  return model;
}

}  // namespace jkcv::forest
