#pragma once

// Learner abstraction over the three built-in classifiers.

#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "jkcv/core.hpp"
#include "jkcv/learners/forest.hpp"
#include "jkcv/learners/knn.hpp"
#include "jkcv/learners/logistic.hpp"
#include "jkcv/params.hpp"

namespace jkcv {

enum class LearnerKind { logistic_l2, forest_lite, knn };

inline std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::logistic_l2:
      return "logistic_l2";
    case LearnerKind::forest_lite:
      return "forest_lite";
    case LearnerKind::knn:
      return "knn";
  }
  return "unknown";
}

inline LearnerKind parse_learner_kind(const std::string& name) {
  if (name == "logistic_l2") return LearnerKind::logistic_l2;
  if (name == "forest_lite") return LearnerKind::forest_lite;
  if (name == "knn") return LearnerKind::knn;
  throw Error("unknown learner kind '" + name + "' (expected logistic_l2, forest_lite or knn)");
}

struct LearnerSpec {
  LearnerKind kind = LearnerKind::logistic_l2;
  std::map<std::string, double> fixed_params;
};

/// Parameter names accepted by a learner, with defaults. The tunable slot of
/// each kind (C, max_features, k) has no default and must come from the fixed
/// parameters or the grid point.
struct ParamCatalog {
  std::vector<std::string> names;
  std::map<std::string, double> defaults;
  std::string tunable_slot;
};

inline ParamCatalog param_catalog(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::logistic_l2:
      return {{"C", "max_iter", "tol"}, {{"max_iter", 5000.0}, {"tol", 1e-6}}, "C"};
    case LearnerKind::forest_lite:
      return {{"max_features", "trees", "max_depth", "bootstrap"},
              {{"trees", 100.0}, {"max_depth", 4.0}, {"bootstrap", 1.0}},
              "max_features"};
    case LearnerKind::knn:
      return {{"k"}, {}, "k"};
  }
  throw Error("unknown learner kind");
}

namespace detail {

inline bool is_whole(double v) { return std::isfinite(v) && v == std::floor(v); }

inline void check_param_range(LearnerKind kind, const std::string& name, double v) {
  auto fail = [&](const std::string& rule) {
    throw Error(to_string(kind) + ": parameter " + name + "=" + std::to_string(v) + " violates " + rule);
  };
  if (!std::isfinite(v)) fail("finiteness");
  if (name == "C" && !(v > 0.0)) fail("C > 0");
  if (name == "max_iter" && !(is_whole(v) && v >= 0)) fail("max_iter >= 0 integer");
  if (name == "tol" && !(v > 0.0)) fail("tol > 0");
  if (name == "max_features" && !(v > 0.0 && v <= 1.0)) fail("0 < max_features <= 1");
  if (name == "trees" && !(is_whole(v) && v >= 1)) fail("trees >= 1 integer");
  if (name == "max_depth" && !(is_whole(v) && v >= 1)) fail("max_depth >= 1 integer");
  if (name == "bootstrap" && !(v == 0.0 || v == 1.0)) fail("bootstrap in {0, 1}");
  if (name == "k" && !(is_whole(v) && v >= 1 && std::fmod(v, 2.0) == 1.0)) fail("k >= 1 odd integer");
}

}  // namespace detail

inline bool accepts_param(LearnerKind kind, const std::string& name) {
  const auto catalog = param_catalog(kind);
  return std::find(catalog.names.begin(), catalog.names.end(), name) != catalog.names.end();
}

inline void validate_spec(const LearnerSpec& spec) {
  for (const auto& [name, value] : spec.fixed_params) {
    if (!accepts_param(spec.kind, name))
      throw Error(to_string(spec.kind) + ": unknown parameter '" + name + "'");
    detail::check_param_range(spec.kind, name, value);
  }
}

/// Defaults, overridden by fixed parameters, overridden by the point.
inline std::map<std::string, double> resolve_params(const LearnerSpec& spec, const ParamPoint& point) {
  validate_spec(spec);
  auto catalog = param_catalog(spec.kind);
  std::map<std::string, double> out = catalog.defaults;
  for (const auto& [name, value] : spec.fixed_params) out[name] = value;
  for (const auto& [name, value] : point.entries) {
    if (!accepts_param(spec.kind, name))
      throw Error(to_string(spec.kind) + ": unknown parameter '" + name + "'");
    detail::check_param_range(spec.kind, name, value);
    out[name] = value;
  }
  if (!out.contains(catalog.tunable_slot))
    throw Error(to_string(spec.kind) + ": no value supplied for tunable parameter '" +
                catalog.tunable_slot + "'");
  return out;
}

struct FitInfo {
  int iterations = 0;
  bool converged = true;
};

struct FittedModel {
  std::variant<logistic::Model, forest::Model, knn::Model> model;
  std::size_t d = 0;
  FitInfo info;
};

/// Seeds are only consumed by forest_lite.
inline FittedModel fit(const LearnerSpec& spec, const ParamPoint& params, const DatasetView& train, Seed seed) {
  if (train.empty()) throw Error("fit: empty training set");
  const auto p = resolve_params(spec, params);
  for (std::size_t i = 0; i < train.size(); ++i)
    for (double v : train.row(i))
      if (!std::isfinite(v))
        throw Error("fit: non-finite feature value in record " + std::to_string(train.index(i)));

  FittedModel out;
  out.d = train.d();
  switch (spec.kind) {
    case LearnerKind::logistic_l2: {
      logistic::Settings s{p.at("C"), static_cast<int>(p.at("max_iter")), p.at("tol")};
      auto m = logistic::fit(train, s);
      out.info = {m.iterations(), m.converged()};
      out.model = std::move(m);
      break;
    }
    case LearnerKind::forest_lite: {
      forest::Settings s{p.at("max_features"), static_cast<int>(p.at("trees")),
                         static_cast<int>(p.at("max_depth")), p.at("bootstrap") != 0.0};
      out.model = forest::fit(train, s, seed);
      break;
    }
    case LearnerKind::knn:
      out.model = knn::fit(train, static_cast<std::size_t>(p.at("k")));
      break;
  }
  return out;
}

inline std::vector<Label> predict(const FittedModel& model, const FeatureMatrix& features) {
  if (features.cols != model.d)
    throw Error("predict: feature width " + std::to_string(features.cols) + " does not match training width " +
                std::to_string(model.d));
  std::vector<Label> out(features.rows());
  std::visit(
      [&](const auto& m) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.predict_one(features.row(i));
      },
      model.model);
  return out;
}

inline std::vector<Label> predict(const FittedModel& model, const DatasetView& view) {
  return predict(model, FeatureMatrix::from_view(view));
}

}  // namespace jkcv
