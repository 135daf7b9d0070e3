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

// Exact IR metrics over a ranked list of graded labels.
//
// Conventions:
//  - gain 2^y - 1 with a log2(j + 1) discount for DCG; the ideal DCG sorts
//    labels descending. nDCG is 0 when the ideal DCG is 0.
//  - ERR uses Pr(j) = (2^y_j - 1) / 2^max(y) with a 1/j discount; nERR is 0
//    when every label is 0.
//  - Precision@k divides by k even when k exceeds the list length.
//  - MAP@k = sum_{j<=k} b_j Pre@j / min(|Y+|, k); untruncated AP divides by
//    |Y+|. Lists without relevant documents score 0 and are flagged.

#ifndef RANKFORGE_METRICS_H_
#define RANKFORGE_METRICS_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rankforge {

// Labels reordered by descending predicted score (y**), their binarization
// (b**) and the prefix sums of b** (B**).
struct SortedLabels {
  std::vector<int> labels;
  std::vector<int> binary;
  std::vector<int> cumulative;
  std::vector<std::size_t> source;  // original index at each position

  std::size_t size() const { return labels.size(); }
  int relevant_count() const {
    return cumulative.empty() ? 0 : cumulative.back();
  }
};

// Stable descending sort: equal scores keep their original order.
SortedLabels sort_by_scores(std::span<const double> scores,
                            std::span<const int> labels);
// Labels taken in the given order (order[pos] = document at position pos).
SortedLabels sort_by_order(std::span<const std::size_t> order,
                           std::span<const int> labels);

double precision_at_k(const SortedLabels& sl, std::size_t k);
double average_precision(const SortedLabels& sl,
                         std::optional<std::size_t> k = std::nullopt);
double dcg_at_k(std::span<const int> ranked_labels, std::size_t k);
double ideal_dcg_at_k(std::span<const int> labels, std::size_t k);
double ndcg_at_k(const SortedLabels& sl, std::size_t k);
double err_at_k(std::span<const int> ranked_labels, std::size_t k);
double nerr_at_k(const SortedLabels& sl, std::size_t k);

enum class MetricFamily { kPrecision, kMap, kNdcg, kNerr };
inline constexpr MetricFamily kAllMetricFamilies[] = {
    MetricFamily::kPrecision, MetricFamily::kMap, MetricFamily::kNdcg,
    MetricFamily::kNerr};
std::string_view to_string(MetricFamily f);

double metric_at_k(MetricFamily f, const SortedLabels& sl, std::size_t k);

inline const std::vector<std::size_t> kDefaultCutoffs = {1, 3, 5, 10, 20};

struct QueryMetrics {
  std::string qid;
  bool no_relevant = false;
  std::map<std::pair<MetricFamily, std::size_t>, double> values;
};

// Per-query values plus their means over queries.
struct EvalReport {
  std::vector<std::size_t> cutoffs;
  std::vector<QueryMetrics> queries;
  std::map<std::pair<MetricFamily, std::size_t>, double> mean;

  std::size_t query_count() const { return queries.size(); }
  std::size_t flagged_count() const;
  double get(MetricFamily f, std::size_t k) const;
};

// Throws InputError for an empty cutoff list, a zero cutoff or length
// mismatch.
QueryMetrics evaluate_query(std::span<const double> scores,
                            std::span<const int> labels,
                            std::span<const std::size_t> cutoffs,
                            std::string qid = {});

// Accumulates per-query rows and computes the means.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(std::vector<std::size_t> cutoffs);
  void add(QueryMetrics q);
  EvalReport finish() const;

 private:
  std::vector<std::size_t> cutoffs_;
  std::vector<QueryMetrics> queries_;
};

EvalReport evaluate_all(std::span<const double> scores,
                        std::span<const int> labels,
                        std::span<const std::size_t> cutoffs = kDefaultCutoffs);

// Averages several reports entry by entry (fold averaging). Query rows are
// concatenated.
EvalReport average_reports(const std::vector<EvalReport>& reports);

// CSV header "metric,k,mean,n_queries"; one row per (metric, cutoff).
void write_report_csv(std::ostream& out, const EvalReport& report);
// CSV header "qid,no_relevant,metric,k,value".
void write_per_query_csv(std::ostream& out, const EvalReport& report);
// Rows only, each preceded by `prefix` (e.g. "3,best,") for callers that
// stitch several reports under their own header.
void write_per_query_rows(std::ostream& out, const EvalReport& report,
                          std::string_view prefix);

}  // namespace rankforge

#endif  // RANKFORGE_METRICS_H_
