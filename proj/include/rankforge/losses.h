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

// Listwise losses over one query's scores.
//
// The metric families (precision, AP, nDCG, nERR) rank the documents with
// the twin sigmoid, so their forward value is the exact metric of the
// tie-broken ranking, negated. Their gradients are taken w.r.t. the rank
// positions in closed form and chained through RankJacobian, whose pair
// terms follow the chosen strategy (type1/type2/type3).
//
// Baselines: ApproxNDCG (smooth ranks inside nDCG, exact gradient), ListNet
// with top-1 probabilities, and ListMLE (Plackett-Luce likelihood of the
// label order).
//
// Every loss returns value 0 and a zero gradient for a query without
// relevant documents, and sets `flagged`.

#ifndef RANKFORGE_LOSSES_H_
#define RANKFORGE_LOSSES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankforge/ranking.h"

namespace rankforge {

enum class LossFamily {
  kPrecision,
  kAp,
  kNdcg,
  kNerr,
  kApproxNdcg,
  kListNet,
  kListMle,
};

inline constexpr double kDefaultApproxAlpha = 10.0;
inline constexpr std::size_t kDefaultLossCutoff = 10;

bool is_twin_sigmoid_family(LossFamily f);

struct LossSpec {
  LossFamily family = LossFamily::kNdcg;
  std::size_t k = kDefaultLossCutoff;  // precision and nERR only
  GradientStrategy strategy = GradientStrategy::kType1;
  double alpha = kDefaultApproxAlpha;  // ApproxNDCG only
  // nDCG only: drop the 1/ln 2 factor of d log2(u)/du, as in the published
  // closed form. Off by default.
  bool paper_exact_grad = false;
};

// Accepts "pre@k.typeN", "ap.typeN", "ndcg.typeN", "nerr@k.typeN",
// "approxndcg", "listnet", "listmle". "pre.typeN"/"nerr.typeN" use k = 10.
// Throws ConfigError otherwise.
LossSpec parse_loss_spec(std::string_view text);
std::string to_string(const LossSpec& spec);

struct LossOutput {
  double value = 0.0;
  std::vector<double> grad;        // dL/dy, original document order
  std::vector<double> grad_ranks;  // dL/dr, original document order
  bool flagged = false;            // no relevant document
};

// -(1/k) sum_{i<=k} b_i * i / rbar_i. Requires 1 <= k <= m.
LossOutput diff_precision_loss(std::span<const double> scores,
                               std::span<const int> labels, std::size_t k,
                               const TwinSigmoidSpec& twin);

// -(1/|Y+|) sum_i b_i * (i / rbar_i) * sum_{j>=i} b_j / j.
LossOutput diff_ap_loss(std::span<const double> scores,
                        std::span<const int> labels,
                        const TwinSigmoidSpec& twin);

// -(1/DCG*) sum_k (2^{y_k} - 1) / log2(r_k + 1), on original indices, with
// DCG* the ideal DCG over all m positions.
LossOutput diff_ndcg_loss(std::span<const double> scores,
                          std::span<const int> labels,
                          const TwinSigmoidSpec& twin,
                          bool paper_exact_grad = false);

// -(1/ERR*@k) sum_{j<=k} Disp(1, j-1) Pr(j) / rbar_j.
LossOutput diff_nerr_loss(std::span<const double> scores,
                          std::span<const int> labels, std::size_t k,
                          const TwinSigmoidSpec& twin);

LossOutput approx_ndcg_loss(std::span<const double> scores,
                            std::span<const int> labels,
                            double alpha = kDefaultApproxAlpha);

LossOutput listnet_top1_loss(std::span<const double> scores,
                             std::span<const int> labels);

// Ties among equal labels are shuffled with tie_seed.
LossOutput listmle_loss(std::span<const double> scores,
                        std::span<const int> labels, std::uint64_t tie_seed);

// Dispatch on spec.family. Precision uses min(k, m) so short lists stay
// valid; `seed` feeds the tie permutation (metric families) or the ListMLE
// shuffle.
LossOutput compute_loss(const LossSpec& spec, std::span<const double> scores,
                        std::span<const int> labels, double alpha_b,
                        std::uint64_t seed);

}  // namespace rankforge

#endif  // RANKFORGE_LOSSES_H_
