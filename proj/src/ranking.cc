/*
 * Copyright 2026 The rankforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rankforge/ranking.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rankforge/errors.h"
#include "rankforge/rng.h"

namespace rankforge {
namespace {

void check_finite(std::span<const double> scores, const char* who) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw NumericError(std::string(who) + ": score " + std::to_string(i) +
                         " is not finite");
    }
  }
}

}  // namespace

std::string_view to_string(GradientStrategy s) {
  switch (s) {
    case GradientStrategy::kType1:
      return "type1";
    case GradientStrategy::kType2:
      return "type2";
    case GradientStrategy::kType3:
      return "type3";
  }
  return "?";
}

GradientStrategy parse_strategy(std::string_view name) {
  if (name == "type1") return GradientStrategy::kType1;
  if (name == "type2") return GradientStrategy::kType2;
  if (name == "type3") return GradientStrategy::kType3;
  throw ConfigError("unknown gradient strategy '" + std::string(name) + "'");
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<std::size_t> tie_permutation(std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> p(m);
  std::iota(p.begin(), p.end(), 1);
  Rng rng(seed);
  shuffle(p.begin(), p.end(), rng);
  return p;
}

RankVector rank_plus(std::span<const double> scores,
                     const TwinSigmoidSpec& spec) {
  const std::size_t m = scores.size();
  if (m == 0) throw InputError("rank_plus: empty score vector");
  check_finite(scores, "rank_plus");
  const auto p = tie_permutation(m, spec.tie_seed);

  RankVector rv;
  rv.ranks.resize(m);
  rv.asc_perm.assign(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    // 1 - step(y_ij) is 1 exactly when j outranks i.
    std::size_t above = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      if (scores[j] > scores[i]) {
        ++above;
      } else if (scores[j] == scores[i]) {
        rv.had_ties = true;
        // sigma_plus(y_ij) = 0.5 rectified to P_ij = I{p_i > p_j}.
        if (p[i] < p[j]) ++above;
      }
    }
    rv.ranks[i] = static_cast<double>(above + 1);
    if (rv.asc_perm[above] != m) {
      throw NumericError("rank_plus: rank collision (inconsistent ordering)");
    }
    rv.asc_perm[above] = i;
  }
  return rv;
}

std::vector<double> rank_plus_without_tie_breaking(
    std::span<const double> scores) {
  const std::size_t m = scores.size();
  if (m == 0) throw InputError("rank_plus: empty score vector");
  check_finite(scores, "rank_plus");
  std::vector<double> ranks(m);
  for (std::size_t i = 0; i < m; ++i) {
    double r = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      if (scores[j] > scores[i]) {
        r += 1.0;
      } else if (scores[j] == scores[i]) {
        r += 0.5;
      }
    }
    ranks[i] = r;
  }
  return ranks;
}

std::vector<double> rank_minus(std::span<const double> scores, double alpha) {
  if (!(alpha > 0.0)) throw InputError("rank_minus: alpha must be > 0");
  const std::size_t m = scores.size();
  std::vector<double> ranks(m, 1.0);
  // One exp per unordered pair: with t = exp(-alpha |y_ij|) the lower-scored
  // document gains 1 / (1 + t) and the higher-scored one t / (1 + t).
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double y_ij = scores[i] - scores[j];
      const double t = std::exp(-alpha * std::abs(y_ij));
      const double small = t / (1.0 + t);
      const double large = 1.0 / (1.0 + t);
      ranks[i] += y_ij > 0.0 ? small : large;
      ranks[j] += y_ij > 0.0 ? large : small;
    }
  }
  return ranks;
}

std::vector<double> sorted_ranks(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  std::vector<double> ranks(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    ranks[order[pos]] = static_cast<double>(pos + 1);
  }
  return ranks;
}

int label_sign(int a, int b) { return (a > b) - (a < b); }

double sigma_backward(double y_ij, int u_ij, const TwinSigmoidSpec& spec) {
  if (u_ij < -1 || u_ij > 1) {
    throw UsageError("sigma_backward: u_ij must be -1, 0 or 1");
  }
  const double a = spec.alpha_b;
  const double s = logistic(a * y_ij);
  switch (spec.strategy) {
    case GradientStrategy::kType1:
      return a * s * (1.0 - s);
    case GradientStrategy::kType2:
      return u_ij * a * s * (1.0 - s);
    case GradientStrategy::kType3:
      if (u_ij == 1) return 2.0 * a * (1.0 - s);
      if (u_ij == -1) return -2.0 * a * s;
      return 0.0;
  }
  return 0.0;
}

RankJacobian::RankJacobian(std::span<const double> scores,
                           std::span<const int> labels,
                           const TwinSigmoidSpec& spec)
    : scores_(scores.begin(), scores.end()),
      labels_(labels.begin(), labels.end()),
      spec_(spec) {
  if (!(spec.alpha_b > 0.0)) {
    throw InputError("twin sigmoid: alpha_b must be > 0");
  }
  if (spec.strategy != GradientStrategy::kType1 &&
      labels_.size() != scores_.size()) {
    throw UsageError(std::string("rank gradients: ") +
                     std::string(to_string(spec.strategy)) +
                     " needs one label per score");
  }
  if (!labels_.empty() && labels_.size() != scores_.size()) {
    throw InputError("rank gradients: labels and scores differ in length");
  }
}

double RankJacobian::pair_gradient(std::size_t i, std::size_t j) const {
  const int u = labels_.empty() ? 0 : label_sign(labels_[i], labels_[j]);
  return sigma_backward(scores_[i] - scores_[j], u, spec_);
}

double RankJacobian::d_rank_d_score(std::size_t k, std::size_t i) const {
  if (k != i) return pair_gradient(k, i);
  double sum = 0.0;
  for (std::size_t j = 0; j < scores_.size(); ++j) {
    if (j != k) sum -= pair_gradient(k, j);
  }
  return sum;
}

std::vector<double> RankJacobian::chain(
    std::span<const double> grad_ranks) const {
  const std::size_t m = scores_.size();
  if (grad_ranks.size() != m) {
    throw UsageError("RankJacobian::chain: gradient length mismatch");
  }
  std::vector<double> out(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double gk = grad_ranks[k];
    if (gk == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == k) continue;
      const double g = gk * pair_gradient(k, j);
      out[k] -= g;
      out[j] += g;
    }
  }
  return out;
}

RankJacobian rank_score_gradients(std::span<const double> scores,
                                  std::span<const int> labels,
                                  const TwinSigmoidSpec& spec) {
  return RankJacobian(scores, labels, spec);
}

double l1_rank_loss(std::span<const double> pred,
                    std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw InputError("l1_rank_loss: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += std::abs(pred[i] - truth[i]);
  }
  return sum;
}

bool BoundCheck::holds() const { return lhs <= rhs * (1.0 + 1e-12); }

BoundCheck approx_bound_check(std::span<const double> scores, double alpha) {
  if (!(alpha > 0.0)) throw InputError("approx_bound_check: alpha must be > 0");
  const std::size_t m = scores.size();
  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      delta = std::min(delta, std::abs(scores[i] - scores[j]));
    }
  }
  if (delta == 0.0) {
    throw InputError("approx_bound_check: scores must be pairwise distinct");
  }
  BoundCheck check;
  if (m < 2) return check;
  // pi_minus_i - pi_star_i = sum_j [sigmoid(-alpha y_ij) - I{y_ij < 0}];
  // each term is +-sigmoid(-alpha |y_ij|), computed without cancellation.
  for (std::size_t i = 0; i < m; ++i) {
    double dev = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double y_ij = scores[i] - scores[j];
      const double t = logistic(-alpha * std::abs(y_ij));
      dev += y_ij > 0.0 ? t : -t;
    }
    check.lhs = std::max(check.lhs, std::abs(dev));
  }
  check.rhs = static_cast<double>(m - 1) / (std::exp(delta * alpha) + 1.0);
  return check;
}

}  // namespace rankforge
