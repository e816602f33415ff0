#pragma once

#include <cmath>
#include <vector>

#include "jkcv/core.hpp"

namespace jkcv {

/// Isotropic unit-variance Gaussian blobs, one per class, with balanced class
/// sizes (record i belongs to class i mod class_count).
///
/// Centers sit at separation/sqrt(2) times the standard basis vectors of the
/// first class_count dimensions, so every pair of centers is exactly
/// `separation` apart. When d < class_count the centers are instead spread
/// along the first axis at multiples of `separation`. With two classes the
/// Bayes accuracy is Phi(separation / 2).
inline Dataset generate_synthetic(std::size_t n, std::size_t d, int class_count, double separation, Seed seed) {
  if (class_count < 2) throw Error("synthetic: class_count must be at least 2");
  if (n < static_cast<std::size_t>(class_count)) throw Error("synthetic: n must be at least class_count");
  if (d < 1) throw Error("synthetic: d must be at least 1");
  if (!(separation >= 0.0) || !std::isfinite(separation)) throw Error("synthetic: separation must be >= 0");

  const auto classes = static_cast<std::size_t>(class_count);
  std::vector<double> centers(classes * d, 0.0);
  if (d >= classes) {
    for (std::size_t c = 0; c < classes; ++c) centers[c * d + c] = separation / std::sqrt(2.0);
  } else {
    for (std::size_t c = 0; c < classes; ++c) centers[c * d] = separation * static_cast<double>(c);
  }

  Rng rng(seed);
  std::vector<double> values(n * d);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    labels[i] = static_cast<Label>(c);
    for (std::size_t j = 0; j < d; ++j) values[i * d + j] = centers[c * d + j] + rng.normal();
  }
  return Dataset(std::move(values), d, std::move(labels), class_count);
}

}  // namespace jkcv
