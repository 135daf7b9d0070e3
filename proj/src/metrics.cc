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

#include "rankforge/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "rankforge/checkpoint.h"
#include "rankforge/errors.h"

namespace rankforge {
namespace {

double gain(int label) { return std::ldexp(1.0, label) - 1.0; }

}  // namespace

SortedLabels sort_by_order(std::span<const std::size_t> order,
                           std::span<const int> labels) {
  if (order.size() != labels.size()) {
    throw InputError("sort_by_order: order and labels differ in length");
  }
  SortedLabels sl;
  sl.source.assign(order.begin(), order.end());
  int running = 0;
  for (std::size_t idx : order) {
    if (idx >= labels.size()) throw InputError("sort_by_order: bad index");
    const int y = labels[idx];
    const int b = y > 0 ? 1 : 0;
    running += b;
    sl.labels.push_back(y);
    sl.binary.push_back(b);
    sl.cumulative.push_back(running);
  }
  return sl;
}

SortedLabels sort_by_scores(std::span<const double> scores,
                            std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InputError("sort_by_scores: " + std::to_string(scores.size()) +
                     " scores vs " + std::to_string(labels.size()) +
                     " labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return sort_by_order(order, labels);
}

double precision_at_k(const SortedLabels& sl, std::size_t k) {
  if (k == 0) throw InputError("precision_at_k: k must be >= 1");
  if (sl.size() == 0) return 0.0;
  const std::size_t n = std::min(k, sl.size());
  return static_cast<double>(sl.cumulative[n - 1]) / static_cast<double>(k);
}

double average_precision(const SortedLabels& sl,
                         std::optional<std::size_t> k) {
  if (k && *k == 0) throw InputError("average_precision: k must be >= 1");
  const int relevant = sl.relevant_count();
  if (relevant == 0) return 0.0;
  const std::size_t n = k ? std::min(*k, sl.size()) : sl.size();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (sl.binary[j]) {
      sum += static_cast<double>(sl.cumulative[j]) /
             static_cast<double>(j + 1);
    }
  }
  const double denom =
      k ? static_cast<double>(std::min<std::size_t>(relevant, *k))
        : static_cast<double>(relevant);
  return sum / denom;
}

double dcg_at_k(std::span<const int> ranked_labels, std::size_t k) {
  const std::size_t n = std::min(k, ranked_labels.size());
  double dcg = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    dcg += gain(ranked_labels[j]) / std::log2(static_cast<double>(j) + 2.0);
  }
  return dcg;
}

double ideal_dcg_at_k(std::span<const int> labels, std::size_t k) {
  std::vector<int> ideal(labels.begin(), labels.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  return dcg_at_k(ideal, k);
}

double ndcg_at_k(const SortedLabels& sl, std::size_t k) {
  if (k == 0) throw InputError("ndcg_at_k: k must be >= 1");
  const double ideal = ideal_dcg_at_k(sl.labels, k);
  if (ideal <= 0.0) return 0.0;
  return dcg_at_k(sl.labels, k) / ideal;
}

double err_at_k(std::span<const int> ranked_labels, std::size_t k) {
  if (ranked_labels.empty()) return 0.0;
  const int max_label =
      *std::max_element(ranked_labels.begin(), ranked_labels.end());
  const double norm = std::ldexp(1.0, max_label);
  const std::size_t n = std::min(k, ranked_labels.size());
  double err = 0.0;
  double dissatisfied = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double pr = gain(ranked_labels[j]) / norm;
    err += dissatisfied * pr / static_cast<double>(j + 1);
    dissatisfied *= 1.0 - pr;
  }
  return err;
}

double nerr_at_k(const SortedLabels& sl, std::size_t k) {
  if (k == 0) throw InputError("nerr_at_k: k must be >= 1");
  std::vector<int> ideal = sl.labels;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double best = err_at_k(ideal, k);
  if (best <= 0.0) return 0.0;
  return err_at_k(sl.labels, k) / best;
}

std::string_view to_string(MetricFamily f) {
  switch (f) {
    case MetricFamily::kPrecision:
      return "precision";
    case MetricFamily::kMap:
      return "map";
    case MetricFamily::kNdcg:
      return "ndcg";
    case MetricFamily::kNerr:
      return "nerr";
  }
  return "?";
}

double metric_at_k(MetricFamily f, const SortedLabels& sl, std::size_t k) {
  switch (f) {
    case MetricFamily::kPrecision:
      return precision_at_k(sl, k);
    case MetricFamily::kMap:
      return average_precision(sl, k);
    case MetricFamily::kNdcg:
      return ndcg_at_k(sl, k);
    case MetricFamily::kNerr:
      return nerr_at_k(sl, k);
  }
  return 0.0;
}

std::size_t EvalReport::flagged_count() const {
  return static_cast<std::size_t>(
      std::count_if(queries.begin(), queries.end(),
                    [](const QueryMetrics& q) { return q.no_relevant; }));
}

double EvalReport::get(MetricFamily f, std::size_t k) const {
  const auto it = mean.find({f, k});
  if (it == mean.end()) {
    throw InputError("EvalReport: no " + std::string(to_string(f)) + "@" +
                     std::to_string(k));
  }
  return it->second;
}

namespace {

void check_cutoffs(std::span<const std::size_t> cutoffs) {
  if (cutoffs.empty()) throw InputError("evaluation needs at least one cutoff");
  for (std::size_t k : cutoffs) {
    if (k == 0) throw InputError("cutoffs must be >= 1");
  }
}

}  // namespace

QueryMetrics evaluate_query(std::span<const double> scores,
                            std::span<const int> labels,
                            std::span<const std::size_t> cutoffs,
                            std::string qid) {
  check_cutoffs(cutoffs);
  const SortedLabels sl = sort_by_scores(scores, labels);
  QueryMetrics q;
  q.qid = std::move(qid);
  q.no_relevant = sl.relevant_count() == 0;
  for (MetricFamily f : kAllMetricFamilies) {
    for (std::size_t k : cutoffs) q.values[{f, k}] = metric_at_k(f, sl, k);
  }
  return q;
}

EvalAccumulator::EvalAccumulator(std::vector<std::size_t> cutoffs)
    : cutoffs_(std::move(cutoffs)) {
  check_cutoffs(cutoffs_);
}

void EvalAccumulator::add(QueryMetrics q) { queries_.push_back(std::move(q)); }

EvalReport EvalAccumulator::finish() const {
  EvalReport report;
  report.cutoffs = cutoffs_;
  report.queries = queries_;
  for (MetricFamily f : kAllMetricFamilies) {
    for (std::size_t k : cutoffs_) {
      double sum = 0.0;
      for (const auto& q : queries_) sum += q.values.at({f, k});
      report.mean[{f, k}] =
          queries_.empty() ? 0.0 : sum / static_cast<double>(queries_.size());
    }
  }
  return report;
}

EvalReport evaluate_all(std::span<const double> scores,
                        std::span<const int> labels,
                        std::span<const std::size_t> cutoffs) {
  EvalAccumulator acc({cutoffs.begin(), cutoffs.end()});
  acc.add(evaluate_query(scores, labels, cutoffs));
  return acc.finish();
}

EvalReport average_reports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw InputError("average_reports: nothing to average");
  EvalReport out;
  out.cutoffs = reports.front().cutoffs;
  for (const auto& r : reports) {
    if (r.cutoffs != out.cutoffs) {
      throw InputError("average_reports: cutoff lists differ");
    }
    out.queries.insert(out.queries.end(), r.queries.begin(), r.queries.end());
  }
  for (MetricFamily f : kAllMetricFamilies) {
    for (std::size_t k : out.cutoffs) {
      double sum = 0.0;
      for (const auto& r : reports) sum += r.get(f, k);
      out.mean[{f, k}] = sum / static_cast<double>(reports.size());
    }
  }
  return out;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "metric,k,mean,n_queries\n";
  for (MetricFamily f : kAllMetricFamilies) {
    for (std::size_t k : report.cutoffs) {
      out << to_string(f) << ',' << k << ','
          << format_double(report.get(f, k)) << ',' << report.query_count()
          << '\n';
    }
  }
}

void write_per_query_rows(std::ostream& out, const EvalReport& report,
                          std::string_view prefix) {
  for (const auto& q : report.queries) {
    for (MetricFamily f : kAllMetricFamilies) {
      for (std::size_t k : report.cutoffs) {
        out << prefix << q.qid << ',' << (q.no_relevant ? 1 : 0) << ','
            << to_string(f) << ',' << k << ','
            << format_double(q.values.at({f, k})) << '\n';
      }
    }
  }
}

void write_per_query_csv(std::ostream& out, const EvalReport& report) {
  out << "qid,no_relevant,metric,k,value\n";
  write_per_query_rows(out, report, {});
}

}  // namespace rankforge
