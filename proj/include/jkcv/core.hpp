#pragma once

// Shared domain types: datasets, seed derivation, the seeded generator and
// the accuracy metric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jkcv {

using Label = int;
using Seed = std::uint64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Warnings go to stderr; there is no other logging in the library.
inline void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

/// Dense feature matrix (row-major) plus dense integer class labels.
/// Immutable after construction.
class Dataset {
 public:
  Dataset(std::vector<double> features, std::size_t d, std::vector<Label> labels,
          int class_count)
      : features_(std::move(features)),
        labels_(std::move(labels)),
        n_(labels_.size()),
        d_(d),
        class_count_(class_count) {
    if (n_ < 1) throw Error("dataset: need at least one record");
    if (d_ < 1) throw Error("dataset: need at least one feature");
    if (class_count_ < 2) throw Error("dataset: class_count must be >= 2");
    if (features_.size() != n_ * d_)
      throw Error("dataset: feature matrix is not n x d (" + std::to_string(features_.size()) +
                  " values for n=" + std::to_string(n_) + ", d=" + std::to_string(d_) + ")");
    for (Label y : labels_)
      if (y < 0 || y >= class_count_)
        throw Error("dataset: label " + std::to_string(y) + " outside [0, " +
                    std::to_string(class_count_) + ")");
  }

  /// Infers class_count as max label + 1 (at least 2).
  static Dataset from_rows(const std::vector<std::vector<double>>& rows, std::vector<Label> labels) {
    if (rows.empty()) throw Error("dataset: need at least one record");
    const std::size_t d = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * d);
    for (const auto& row : rows) {
      if (row.size() != d) throw Error("dataset: ragged rows");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    int classes = 2;
    for (Label y : labels) classes = std::max(classes, y + 1);
    return Dataset(std::move(flat), d, std::move(labels), classes);
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  int class_count() const { return class_count_; }

  std::span<const double> row(std::size_t i) const { return {features_.data() + i * d_, d_}; }
  Label label(std::size_t i) const { return labels_[i]; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<double>& features() const { return features_; }

  std::vector<std::size_t> class_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(class_count_), 0);
    for (Label y : labels_) ++sizes[static_cast<std::size_t>(y)];
    return sizes;
  }

 private:
  std::vector<double> features_;
  std::vector<Label> labels_;
  std::size_t n_;
  std::size_t d_;
  int class_count_;
};

/// A subset of a dataset's records, identified by row index. The dataset must
/// outlive the view.
class DatasetView {
 public:
  DatasetView(const Dataset& data, std::vector<std::size_t> rows)
      : data_(&data), rows_(std::move(rows)) {
    for (std::size_t r : rows_)
      if (r >= data.n()) throw Error("dataset view: row index out of range");
  }

  static DatasetView all(const Dataset& data) {
    std::vector<std::size_t> rows(data.n());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return DatasetView(data, std::move(rows));
  }

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t d() const { return data_->d(); }
  int class_count() const { return data_->class_count(); }
  std::size_t index(std::size_t i) const { return rows_[i]; }
  std::span<const double> row(std::size_t i) const { return data_->row(rows_[i]); }
  Label label(std::size_t i) const { return data_->label(rows_[i]); }
  const std::vector<std::size_t>& rows() const { return rows_; }
  const Dataset& dataset() const { return *data_; }

  /// Number of distinct classes present in the view.
  int classes_present() const {
    std::vector<char> seen(static_cast<std::size_t>(class_count()), 0);
    for (std::size_t i = 0; i < size(); ++i) seen[static_cast<std::size_t>(label(i))] = 1;
    return static_cast<int>(std::count(seen.begin(), seen.end(), 1));
  }

 private:
  const Dataset* data_;
  std::vector<std::size_t> rows_;
};

/// Row-major query matrix for prediction.
struct FeatureMatrix {
  std::vector<double> values;
  std::size_t cols = 0;

  std::size_t rows() const { return cols == 0 ? 0 : values.size() / cols; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

  static FeatureMatrix from_view(const DatasetView& view) {
    FeatureMatrix m;
    m.cols = view.d();
    m.values.reserve(view.size() * m.cols);
    for (std::size_t i = 0; i < view.size(); ++i) {
      auto r = view.row(i);
      m.values.insert(m.values.end(), r.begin(), r.end());
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// Seed derivation

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr Seed splitmix64(Seed z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// h = splitmix64(master); then h = splitmix64(h ^ p) for each path element p.
constexpr Seed derive_seed(Seed master, std::span<const Seed> path) {
  if (path.empty()) throw Error("derive_seed: path must not be empty");
  Seed h = splitmix64(master);
  for (Seed p : path) h = splitmix64(h ^ p);
  return h;
}

constexpr Seed derive_seed(Seed master, std::initializer_list<Seed> path) {
  return derive_seed(master, std::span<const Seed>(path.begin(), path.size()));
}

/// Master seed plus the work-unit path below it.
struct SeedPath {
  Seed master = 0;
  std::vector<Seed> path;

  SeedPath child(Seed element) const {
    SeedPath out = *this;
    out.path.push_back(element);
    return out;
  }
  SeedPath extended(std::span<const Seed> tail) const {
    SeedPath out = *this;
    out.path.insert(out.path.end(), tail.begin(), tail.end());
    return out;
  }
  Seed derive() const { return derive_seed(master, path); }

  friend bool operator==(const SeedPath&, const SeedPath&) = default;
};

/// Seeded generator with platform-independent output. std::mt19937_64's
/// sequence is fixed by the standard; the distributions on top of it are
/// written out here because the standard library ones are not.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
  std::size_t uniform_index(std::size_t bound) {
    if (bound == 0) throw Error("Rng::uniform_index: empty range");
    const std::uint64_t b = bound;
    const std::uint64_t threshold = (0 - b) % b;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x < threshold);
    return static_cast<std::size_t>(x % b);
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (cosine branch only).
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Metrics

enum class Metric { accuracy };

inline double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size())
    throw Error("accuracy: length mismatch (" + std::to_string(predicted.size()) + " vs " +
                std::to_string(truth.size()) + ")");
  if (truth.empty()) throw Error("accuracy: empty input");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) matches += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(matches) / static_cast<double>(truth.size());
}

inline double score(Metric metric, std::span<const Label> predicted, std::span<const Label> truth) {
  switch (metric) {
    case Metric::accuracy:
      return accuracy(predicted, truth);
  }
  throw Error("score: unknown metric");
}

inline std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::accuracy:
      return "accuracy";
  }
  return "unknown";
}

inline Metric parse_metric(const std::string& name) {
  if (name == "accuracy") return Metric::accuracy;
  throw Error("unknown metric '" + name + "'");
}

}  // namespace jkcv
