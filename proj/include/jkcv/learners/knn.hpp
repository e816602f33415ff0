#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "jkcv/core.hpp"

namespace jkcv::knn {

/// Stores the training set. Prediction is a majority vote over the k nearest
/// rows by Euclidean distance; distance ties go to the lower record index and
/// vote ties to the lower label.
struct Model {
  std::size_t k = 1;
  int class_count = 2;
  FeatureMatrix x;
  std::vector<Label> labels;
  std::vector<std::size_t> record_index;  // original dataset row of each stored row

  Label predict_one(std::span<const double> query) const {
    const std::size_t n = labels.size();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = x.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < x.cols; ++j) {
        const double diff = row[j] - query[j];
        s += diff * diff;
      }
      dist[i] = {s, record_index[i]};
    }
    std::vector<std::size_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = i;
    const std::size_t kk = std::min(k, n);
    auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; };
    std::partial_sort(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(kk), pos.end(), closer);

    std::vector<int> votes(static_cast<std::size_t>(class_count), 0);
    for (std::size_t i = 0; i < kk; ++i) ++votes[static_cast<std::size_t>(labels[pos[i]])];
    return static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
};

inline Model fit(const DatasetView& train, std::size_t k) {
  Model model;
  model.k = k;
  model.class_count = train.class_count();
  model.x = FeatureMatrix::from_view(train);
  model.labels.reserve(train.size());
  model.record_index.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    model.labels.push_back(train.label(i));
    model.record_index.push_back(train.index(i));
  }
  return model;
}

}  // namespace jkcv::knn
