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

#include "rankforge/losses.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rankforge/errors.h"
#include "rankforge/metrics.h"
#include "rankforge/rng.h"

namespace rankforge {
namespace {

double gain(int label) { return std::ldexp(1.0, label) - 1.0; }

void check_lengths(std::span<const double> scores,
                   std::span<const int> labels, const char* who) {
  if (scores.empty()) throw InputError(std::string(who) + ": empty query");
  if (scores.size() != labels.size()) {
    throw InputError(std::string(who) + ": " +
                     std::to_string(scores.size()) + " scores vs " +
                     std::to_string(labels.size()) + " labels");
  }
}

bool any_relevant(std::span<const int> labels) {
  return std::any_of(labels.begin(), labels.end(),
                     [](int y) { return y > 0; });
}

LossOutput flagged_output(std::size_t m) {
  LossOutput out;
  out.grad.assign(m, 0.0);
  out.grad_ranks.assign(m, 0.0);
  out.flagged = true;
  return out;
}

// Twin-sigmoid ranking of one query with labels reordered to y**.
struct RankedQuery {
  RankVector ranks;
  std::vector<int> sorted_labels;  // y**
  std::vector<int> sorted_binary;  // b**

  double rbar(std::size_t pos) const {
    return ranks.ranks[ranks.asc_perm[pos]];
  }
};

RankedQuery rank_query(std::span<const double> scores,
                       std::span<const int> labels,
                       const TwinSigmoidSpec& twin) {
  RankedQuery q;
  q.ranks = rank_plus(scores, twin);
  for (std::size_t doc : q.ranks.asc_perm) {
    q.sorted_labels.push_back(labels[doc]);
    q.sorted_binary.push_back(labels[doc] > 0 ? 1 : 0);
  }
  return q;
}

// Routes dL/drbar (by sorted position) back to documents and through the
// rank Jacobian.
LossOutput chain_sorted(const RankedQuery& q, std::span<const double> scores,
                        std::span<const int> labels,
                        const TwinSigmoidSpec& twin, double value,
                        std::span<const double> grad_rbar) {
  LossOutput out;
  out.value = value;
  out.grad_ranks.assign(scores.size(), 0.0);
  for (std::size_t pos = 0; pos < grad_rbar.size(); ++pos) {
    out.grad_ranks[q.ranks.asc_perm[pos]] = grad_rbar[pos];
  }
  out.grad = RankJacobian(scores, labels, twin).chain(out.grad_ranks);
  return out;
}

}  // namespace

bool is_twin_sigmoid_family(LossFamily f) {
  return f == LossFamily::kPrecision || f == LossFamily::kAp ||
         f == LossFamily::kNdcg || f == LossFamily::kNerr;
}

LossSpec parse_loss_spec(std::string_view text) {
  LossSpec spec;
  if (text == "approxndcg") {
    spec.family = LossFamily::kApproxNdcg;
    return spec;
  }
  if (text == "listnet") {
    spec.family = LossFamily::kListNet;
    return spec;
  }
  if (text == "listmle") {
    spec.family = LossFamily::kListMle;
    return spec;
  }
  const auto dot = text.rfind('.');
  if (dot == std::string_view::npos) {
    throw ConfigError("loss '" + std::string(text) +
                      "' needs a strategy suffix, e.g. ndcg.type3");
  }
  spec.strategy = parse_strategy(text.substr(dot + 1));
  std::string_view head = text.substr(0, dot);
  std::string_view name = head;
  bool has_k = false;
  if (const auto at = head.find('@'); at != std::string_view::npos) {
    name = head.substr(0, at);
    const auto num = head.substr(at + 1);
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), k);
    if (ec != std::errc() || ptr != num.data() + num.size() || k == 0) {
      throw ConfigError("bad cutoff in loss '" + std::string(text) + "'");
    }
    spec.k = k;
    has_k = true;
  }
  if (name == "pre") {
    spec.family = LossFamily::kPrecision;
  } else if (name == "nerr") {
    spec.family = LossFamily::kNerr;
  } else if (name == "ap" && !has_k) {
    spec.family = LossFamily::kAp;
  } else if (name == "ndcg" && !has_k) {
    spec.family = LossFamily::kNdcg;
  } else {
    throw ConfigError("unknown loss '" + std::string(text) + "'");
  }
  return spec;
}

std::string to_string(const LossSpec& spec) {
  const std::string strategy(to_string(spec.strategy));
  switch (spec.family) {
    case LossFamily::kPrecision:
      return "pre@" + std::to_string(spec.k) + "." + strategy;
    case LossFamily::kAp:
      return "ap." + strategy;
    case LossFamily::kNdcg:
      return "ndcg." + strategy;
    case LossFamily::kNerr:
      return "nerr@" + std::to_string(spec.k) + "." + strategy;
    case LossFamily::kApproxNdcg:
      return "approxndcg";
    case LossFamily::kListNet:
      return "listnet";
    case LossFamily::kListMle:
      return "listmle";
  }
  return "?";
}

LossOutput diff_precision_loss(std::span<const double> scores,
                               std::span<const int> labels, std::size_t k,
                               const TwinSigmoidSpec& twin) {
  check_lengths(scores, labels, "precision loss");
  const std::size_t m = scores.size();
  if (k < 1 || k > m) {
    throw InputError("precision loss: k = " + std::to_string(k) +
                     " outside [1, " + std::to_string(m) + "]");
  }
  if (!any_relevant(labels)) return flagged_output(m);

  const RankedQuery q = rank_query(scores, labels, twin);
  const double kd = static_cast<double>(k);
  double metric = 0.0;
  std::vector<double> grad_rbar(m, 0.0);
  for (std::size_t pos = 0; pos < k; ++pos) {
    if (!q.sorted_binary[pos]) continue;
    const double i = static_cast<double>(pos + 1);
    const double r = q.rbar(pos);
    metric += i / r;
    grad_rbar[pos] = i / (kd * r * r);
  }
  return chain_sorted(q, scores, labels, twin, -metric / kd, grad_rbar);
}

LossOutput diff_ap_loss(std::span<const double> scores,
                        std::span<const int> labels,
                        const TwinSigmoidSpec& twin) {
  check_lengths(scores, labels, "AP loss");
  const std::size_t m = scores.size();
  if (!any_relevant(labels)) return flagged_output(m);

  const RankedQuery q = rank_query(scores, labels, twin);
  // suffix[i] = sum_{j >= i} b_j / j over 1-based positions.
  std::vector<double> suffix(m + 1, 0.0);
  for (std::size_t pos = m; pos-- > 0;) {
    suffix[pos] = suffix[pos + 1] +
                  q.sorted_binary[pos] / static_cast<double>(pos + 1);
  }
  const double relevant = static_cast<double>(
      std::accumulate(q.sorted_binary.begin(), q.sorted_binary.end(), 0));

  double metric = 0.0;
  std::vector<double> grad_rbar(m, 0.0);
  for (std::size_t pos = 0; pos < m; ++pos) {
    if (!q.sorted_binary[pos]) continue;
    const double i = static_cast<double>(pos + 1);
    const double r = q.rbar(pos);
    metric += i / r * suffix[pos];
    grad_rbar[pos] = i * suffix[pos] / (relevant * r * r);
  }
  return chain_sorted(q, scores, labels, twin, -metric / relevant, grad_rbar);
}

LossOutput diff_ndcg_loss(std::span<const double> scores,
                          std::span<const int> labels,
                          const TwinSigmoidSpec& twin, bool paper_exact_grad) {
  check_lengths(scores, labels, "nDCG loss");
  const std::size_t m = scores.size();
  if (!any_relevant(labels)) return flagged_output(m);

  const RankVector rv = rank_plus(scores, twin);
  const double ideal = ideal_dcg_at_k(labels, m);
  const double chain_factor = paper_exact_grad ? 1.0 : 1.0 / std::numbers::ln2;

  LossOutput out;
  out.grad_ranks.assign(m, 0.0);
  double metric = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double g = gain(labels[k]);
    if (g == 0.0) continue;
    const double r = rv.ranks[k];
    const double lg = std::log2(r + 1.0);
    metric += g / lg;
    out.grad_ranks[k] = g / ideal / (lg * lg) / (r + 1.0) * chain_factor;
  }
  out.value = -metric / ideal;
  out.grad = RankJacobian(scores, labels, twin).chain(out.grad_ranks);
  return out;
}

LossOutput diff_nerr_loss(std::span<const double> scores,
                          std::span<const int> labels, std::size_t k,
                          const TwinSigmoidSpec& twin) {
  check_lengths(scores, labels, "nERR loss");
  const std::size_t m = scores.size();
  if (k < 1) throw InputError("nERR loss: k must be >= 1");
  if (!any_relevant(labels)) return flagged_output(m);

  const RankedQuery q = rank_query(scores, labels, twin);
  std::vector<int> ideal_labels(labels.begin(), labels.end());
  std::sort(ideal_labels.begin(), ideal_labels.end(), std::greater<>());
  const double ideal = err_at_k(ideal_labels, k);
  const double norm = std::ldexp(1.0, ideal_labels.front());

  double metric = 0.0;
  double dissatisfied = 1.0;
  std::vector<double> grad_rbar(m, 0.0);
  for (std::size_t pos = 0; pos < std::min(k, m); ++pos) {
    const double pr = gain(q.sorted_labels[pos]) / norm;
    const double r = q.rbar(pos);
    const double term = dissatisfied * pr;
    metric += term / r;
    grad_rbar[pos] = term / (ideal * r * r);
    dissatisfied *= 1.0 - pr;
  }
  return chain_sorted(q, scores, labels, twin, -metric / ideal, grad_rbar);
}

LossOutput approx_ndcg_loss(std::span<const double> scores,
                            std::span<const int> labels, double alpha) {
  check_lengths(scores, labels, "ApproxNDCG loss");
  if (!(alpha > 0.0)) throw InputError("ApproxNDCG: alpha must be > 0");
  const std::size_t m = scores.size();
  if (!any_relevant(labels)) return flagged_output(m);

  const auto ranks = rank_minus(scores, alpha);
  const double ideal = ideal_dcg_at_k(labels, m);
  LossOutput out;
  out.grad_ranks.assign(m, 0.0);
  double metric = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double g = gain(labels[k]);
    if (g == 0.0) continue;
    const double r = ranks[k];
    const double lg = std::log2(r + 1.0);
    metric += g / lg;
    out.grad_ranks[k] = g / ideal / (lg * lg) / ((r + 1.0) * std::numbers::ln2);
  }
  out.value = -metric / ideal;
  // The smooth ranks share the type1 Jacobian with steepness alpha.
  TwinSigmoidSpec smooth;
  smooth.alpha_b = alpha;
  smooth.strategy = GradientStrategy::kType1;
  out.grad = RankJacobian(scores, {}, smooth).chain(out.grad_ranks);
  return out;
}

LossOutput listnet_top1_loss(std::span<const double> scores,
                             std::span<const int> labels) {
  check_lengths(scores, labels, "ListNet loss");
  const std::size_t m = scores.size();
  if (!any_relevant(labels)) return flagged_output(m);

  const double max_y = *std::max_element(scores.begin(), scores.end());
  const int max_t = *std::max_element(labels.begin(), labels.end());
  double z_y = 0.0, z_t = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    z_y += std::exp(scores[i] - max_y);
    z_t += std::exp(static_cast<double>(labels[i] - max_t));
  }
  const double lse_y = max_y + std::log(z_y);

  LossOutput out;
  out.grad.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double p_t = std::exp(static_cast<double>(labels[i] - max_t)) / z_t;
    const double p_y = std::exp(scores[i] - lse_y);
    out.value -= p_t * (scores[i] - lse_y);
    out.grad[i] = p_y - p_t;
  }
  return out;
}

LossOutput listmle_loss(std::span<const double> scores,
                        std::span<const int> labels, std::uint64_t tie_seed) {
  check_lengths(scores, labels, "ListMLE loss");
  const std::size_t m = scores.size();
  if (!any_relevant(labels)) return flagged_output(m);

  // Ground-truth permutation: shuffle, then stable sort by label, so equal
  // labels end up in random order.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(tie_seed);
  shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return labels[a] > labels[b];
                   });

  std::vector<double> s(m);
  for (std::size_t t = 0; t < m; ++t) s[t] = scores[order[t]];
  // lse[t] = log sum_{j >= t} exp(s_j), accumulated from the tail.
  std::vector<double> lse(m);
  lse[m - 1] = s[m - 1];
  for (std::size_t t = m - 1; t-- > 0;) {
    const double hi = std::max(s[t], lse[t + 1]);
    lse[t] = hi + std::log(std::exp(s[t] - hi) + std::exp(lse[t + 1] - hi));
  }

  LossOutput out;
  out.grad.assign(m, 0.0);
  // d/ds_t sum_i lse_i = sum_{i <= t} exp(s_t - lse_i).
  for (std::size_t t = 0; t < m; ++t) {
    out.value += lse[t] - s[t];
    double g = -1.0;
    for (std::size_t i = 0; i <= t; ++i) g += std::exp(s[t] - lse[i]);
    out.grad[order[t]] = g;
  }
  return out;
}

LossOutput compute_loss(const LossSpec& spec, std::span<const double> scores,
                        std::span<const int> labels, double alpha_b,
                        std::uint64_t seed) {
  TwinSigmoidSpec twin;
  twin.alpha_b = alpha_b;
  twin.strategy = spec.strategy;
  twin.tie_seed = seed;
  switch (spec.family) {
    case LossFamily::kPrecision:
      return diff_precision_loss(scores, labels,
                                 std::min(spec.k, scores.size()), twin);
    case LossFamily::kAp:
      return diff_ap_loss(scores, labels, twin);
    case LossFamily::kNdcg:
      return diff_ndcg_loss(scores, labels, twin, spec.paper_exact_grad);
    case LossFamily::kNerr:
      return diff_nerr_loss(scores, labels, spec.k, twin);
    case LossFamily::kApproxNdcg:
      return approx_ndcg_loss(scores, labels, spec.alpha);
    case LossFamily::kListNet:
      return listnet_top1_loss(scores, labels);
    case LossFamily::kListMle:
      return listmle_loss(scores, labels, seed);
  }
  throw UsageError("compute_loss: unknown family");
}

}  // namespace rankforge
