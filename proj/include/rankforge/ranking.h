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

// Rank positions from score vectors.
//
// Exact ranks come from a twin sigmoid: a pairwise comparison whose forward
// value is the hard step I{y_i > y_j} and whose backward value is the
// derivative of a soft sigmoid with steepness alpha_b. With
// y_ij = y_i - y_j the rank of document i is
//
//   r_i = 1 + sum_{j != i} (1 - step(y_ij))
//
// Equal scores would contribute 1/2 each; instead a seeded random
// permutation p resolves every tied pair to I{p_i > p_j}, which keeps r an
// exact permutation of 1..m.
//
// The smooth approximation replaces the step by a logistic everywhere:
//
//   pi_minus_i = 1 + sum_{j != i} 1 / (1 + exp(alpha * y_ij))
//
// Gradients never materialize the m x m pair matrix; pair terms are computed
// on the fly, so memory stays O(m) for any list length.

#ifndef RANKFORGE_RANKING_H_
#define RANKFORGE_RANKING_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rankforge {

// Backward rule of the twin sigmoid.
//   type1: alpha_b * s * (1 - s)              with s = sigmoid(alpha_b * y_ij)
//   type2: u_ij * alpha_b * s * (1 - s)
//   type3: 2 alpha_b (1 - s) if u_ij = 1, 0 if u_ij = 0, -2 alpha_b s if -1
// where u_ij = sign(label_i - label_j).
enum class GradientStrategy { kType1, kType2, kType3 };

std::string_view to_string(GradientStrategy s);
GradientStrategy parse_strategy(std::string_view name);

inline constexpr double kDefaultAlphaB = 1.0;

struct TwinSigmoidSpec {
  double alpha_b = kDefaultAlphaB;
  GradientStrategy strategy = GradientStrategy::kType1;
  std::uint64_t tie_seed = 0;
};

struct RankVector {
  std::vector<double> ranks;          // r_i in 1..m, original document order
  std::vector<std::size_t> asc_perm;  // asc_perm[pos] = document at rank pos+1
  bool had_ties = false;

  std::size_t size() const { return ranks.size(); }
};

// Numerically stable 1 / (1 + exp(-x)).
double logistic(double x);

// Exact twin-sigmoid ranks with seeded tie breaking. Throws InputError for an
// empty vector, NumericError for non-finite scores.
RankVector rank_plus(std::span<const double> scores,
                     const TwinSigmoidSpec& spec);
// Twin-sigmoid ranks with the raw 1/2 contribution for tied pairs.
std::vector<double> rank_plus_without_tie_breaking(
    std::span<const double> scores);

// Smooth rank approximation. Throws InputError unless alpha > 0.
std::vector<double> rank_minus(std::span<const double> scores, double alpha);

// Ranks of a stable descending sort (ties keep index order).
std::vector<double> sorted_ranks(std::span<const double> scores);

// The tie-breaking permutation p (values 1..m) drawn for `seed`.
std::vector<std::size_t> tie_permutation(std::size_t m, std::uint64_t seed);

int label_sign(int a, int b);

// d sigma_plus(y_ij) / d y_ij under spec.strategy. Throws UsageError if
// u_ij is outside {-1, 0, 1}.
double sigma_backward(double y_ij, int u_ij, const TwinSigmoidSpec& spec);

// Jacobian of the twin-sigmoid ranks w.r.t. the scores:
//   d r_i / d y_j = g_ij  (j != i),   d r_i / d y_i = -sum_{j != i} g_ij
// with g_ij = sigma_backward(y_ij, u_ij).
class RankJacobian {
 public:
  // `labels` may be empty for type1; type2/type3 need one label per score.
  RankJacobian(std::span<const double> scores, std::span<const int> labels,
               const TwinSigmoidSpec& spec);

  std::size_t size() const { return scores_.size(); }
  double pair_gradient(std::size_t i, std::size_t j) const;
  // d r_k / d y_i
  double d_rank_d_score(std::size_t k, std::size_t i) const;
  // dL/dy from dL/dr, both in original document order.
  std::vector<double> chain(std::span<const double> grad_ranks) const;

 private:
  std::vector<double> scores_;
  std::vector<int> labels_;
  TwinSigmoidSpec spec_;
};

RankJacobian rank_score_gradients(std::span<const double> scores,
                                  std::span<const int> labels,
                                  const TwinSigmoidSpec& spec);

// sum_i |pred_i - truth_i|.
double l1_rank_loss(std::span<const double> pred,
                    std::span<const double> truth);

// Elementwise accuracy bound of the smooth ranks:
//   lhs = max_i |pi_minus_i - pi_star_i|
//   rhs = (m - 1) / (exp(delta * alpha) + 1),  delta = min_{i != j} |y_ij|
struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  // lhs <= rhs up to a few ulps of accumulated rounding.
  bool holds() const;
};
// Throws InputError when two scores coincide (delta = 0) or alpha <= 0.
BoundCheck approx_bound_check(std::span<const double> scores, double alpha);

}  // namespace rankforge

#endif  // RANKFORGE_RANKING_H_
