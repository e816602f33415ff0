#pragma once

#include <algorithm>
#include <string>

#include "jkcv/core.hpp"
#include "jkcv/learners.hpp"
#include "jkcv/tune.hpp"

namespace jkcv {

/// Everything a resampling run needs besides the data.
struct RunConfig {
  std::size_t j = 1;
  std::size_t k = 5;
  bool stratified = false;
  Seed master_seed = 0;
  Metric metric = Metric::accuracy;
  LearnerSpec learner;
  ParamGrid grid;
  std::size_t replicates = 1;

  /// Checks J, K and R against each other and against `data`.
  void validate(const Dataset& data) const {
    if (j < 1) throw Error("J must be at least 1");
    if (replicates < 1) throw Error("R must be at least 1");
    if (k < 2) throw Error("K must be at least 2");
    if (k > data.n()) throw Error("K=" + std::to_string(k) + " exceeds record count n=" + std::to_string(data.n()));
    if (stratified) {
      const auto sizes = data.class_sizes();
      for (std::size_t c = 0; c < sizes.size(); ++c)
        if (sizes[c] > 0 && sizes[c] < k)
          throw Error("K=" + std::to_string(k) + " exceeds the size of class " + std::to_string(c) + " (" +
                      std::to_string(sizes[c]) + " records) under stratification");
    }
    validate_spec(learner);
    for (const auto& axis : grid.axes())
      if (!accepts_param(learner.kind, axis.name))
        throw Error("grid axis '" + axis.name + "' is not a parameter of " + to_string(learner.kind));
  }
};

}  // namespace jkcv
