#pragma once

// L2-regularised logistic regression fitted by batch gradient descent.
//
// Objective for one binary problem with targets t in {0, 1}:
//   f(w, b) = mean_i [ log(1 + exp(z_i)) - t_i z_i ] + ||w||^2 / (2C),
//   z_i = w . x_i + b.
// The intercept is not penalised. More than two classes are handled one
// class against the rest.

#include <cmath>
#include <span>
#include <vector>

#include "jkcv/core.hpp"

namespace jkcv::logistic {

struct Settings {
  double c = 1.0;  // inverse penalty weight
  int max_iter = 5000;
  double tol = 1e-6;  // on the Euclidean norm of the full gradient (w and b)
};

/// Weights followed by the intercept, length d + 1.
using Params = std::vector<double>;

struct BinaryModel {
  Params params;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

struct Model {
  std::size_t d = 0;
  int class_count = 2;
  std::vector<BinaryModel> members;  // one member when binary, else one per class

  /// Decision value of member m for row x.
  double decision(std::size_t m, std::span<const double> x) const {
    const Params& p = members[m].params;
    double z = p[d];
    for (std::size_t j = 0; j < d; ++j) z += p[j] * x[j];
    return z;
  }

  Label predict_one(std::span<const double> x) const {
    if (members.size() == 1) return decision(0, x) >= 0.0 ? 1 : 0;
    Label best = 0;
    double best_z = decision(0, x);
    for (std::size_t m = 1; m < members.size(); ++m) {
      const double z = decision(m, x);
      if (z > best_z) {
        best_z = z;
        best = static_cast<Label>(m);
      }
    }
    return best;
  }

  bool converged() const {
    for (const auto& m : members)
      if (!m.converged) return false;
    return true;
  }
  int iterations() const {
    int most = 0;
    for (const auto& m : members) most = std::max(most, m.iterations);
    return most;
  }
};

/// Contiguous copy of a training view with binary targets for one member.
struct Problem {
  FeatureMatrix x;
  std::vector<double> targets;
  double c = 1.0;

  std::size_t n() const { return targets.size(); }
  std::size_t d() const { return x.cols; }
};

inline double log1p_exp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double objective(const Problem& prob, std::span<const double> params) {
  const std::size_t n = prob.n(), d = prob.d();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = prob.x.row(i);
    double z = params[d];
    for (std::size_t j = 0; j < d; ++j) z += params[j] * row[j];
    loss += log1p_exp(z) - prob.targets[i] * z;
  }
  double sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) sq += params[j] * params[j];
  return loss / static_cast<double>(n) + sq / (2.0 * prob.c);
}

/// Writes the gradient of objective() into grad (length d + 1).
inline void gradient(const Problem& prob, std::span<const double> params, std::span<double> grad) {
  const std::size_t n = prob.n(), d = prob.d();
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = prob.x.row(i);
    double z = params[d];
    for (std::size_t j = 0; j < d; ++j) z += params[j] * row[j];
    const double r = sigmoid(z) - prob.targets[i];
    for (std::size_t j = 0; j < d; ++j) grad[j] += r * row[j];
    grad[d] += r;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) grad[j] = grad[j] * inv_n + params[j] / prob.c;
  grad[d] *= inv_n;
}

/// Step sizes for a block-diagonal majoriser of the Hessian. With A = [X 1],
/// A^T A <= 2 diag(X^T X, n), so the Hessian is bounded by
/// diag(0.5 lambda_max(X^T X / n) + 1/C, 0.5). lambda_max comes from a fixed
/// number of power iterations started at the all-ones vector, inflated by 5%
/// to cover the power method's underestimate.
struct Steps {
  double weights = 0.0;
  double intercept = 0.0;
};

inline double gram_lambda_max(const FeatureMatrix& x) {
  const std::size_t n = x.rows(), d = x.cols;
  std::vector<double> v(d, 1.0), next(d);
  double lambda = 0.0;
  for (int it = 0; it < 60; ++it) {
    double norm = 0.0;
    for (double e : v) norm += e * e;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (double& e : v) e /= norm;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = x.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += row[j] * v[j];
      for (std::size_t j = 0; j < d; ++j) next[j] += row[j] * s;
    }
    lambda = 0.0;
    for (std::size_t j = 0; j < d; ++j) lambda += next[j] * v[j];
    lambda /= static_cast<double>(n);
    v.swap(next);
  }
  return lambda * 1.05;
}

inline Steps step_sizes(const Problem& prob) {
  return {1.0 / (0.5 * gram_lambda_max(prob.x) + 1.0 / prob.c), 2.0};
}

/// Gradient descent from zero with the fixed per-block steps of step_sizes().
inline BinaryModel fit_binary(const Problem& prob, const Settings& settings) {
  const std::size_t d = prob.d();
  BinaryModel out;
  out.params.assign(d + 1, 0.0);
  std::vector<double> grad(d + 1);
  const Steps steps = step_sizes(prob);
  for (int it = 0;; ++it) {
    gradient(prob, out.params, grad);
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    out.gradient_norm = std::sqrt(gnorm);
    out.iterations = it;
    if (out.gradient_norm < settings.tol) {
      out.converged = true;
      break;
    }
    if (it >= settings.max_iter) break;
    for (std::size_t j = 0; j < d; ++j) out.params[j] -= steps.weights * grad[j];
    out.params[d] -= steps.intercept * grad[d];
  }
  return out;
}

inline Problem make_problem(const DatasetView& train, Label positive, double c) {
  Problem prob;
  prob.x = FeatureMatrix::from_view(train);
  prob.c = c;
  prob.targets.resize(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) prob.targets[i] = train.label(i) == positive ? 1.0 : 0.0;
  return prob;
}

inline Model fit(const DatasetView& train, const Settings& settings) {
  Model model;
  model.d = train.d();
  model.class_count = train.class_count();
  if (model.class_count == 2) {
    model.members.push_back(fit_binary(make_problem(train, 1, settings.c), settings));
  } else {
    for (int c = 0; c < model.class_count; ++c)
      model.members.push_back(fit_binary(make_problem(train, c, settings.c), settings));
  }
  return model;
}

}  // namespace jkcv::logistic
