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

#include "rankforge/data.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "rankforge/checkpoint.h"
#include "rankforge/errors.h"
#include "rankforge/rng.h"

namespace rankforge {
namespace {

struct SparseDoc {
  int label = 0;
  std::vector<std::pair<std::size_t, double>> features;  // 0-based column
};

struct PendingGroup {
  std::string qid;
  std::vector<SparseDoc> docs;
};

int parse_label(const std::string& tok, int grade_max, std::size_t line) {
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || *end != '\0' || errno != 0) {
    throw ParseError("label '" + tok + "' is not an integer", line);
  }
  if (v < 0 || v > grade_max) {
    throw ParseError("label " + tok + " outside [0, " +
                         std::to_string(grade_max) + "]",
                     line);
  }
  return static_cast<int>(v);
}

}  // namespace

Dataset parse_letor(std::istream& in, int grade_max) {
  Dataset ds;
  ds.grade_max = grade_max;
  std::vector<PendingGroup> pending;
  std::unordered_set<std::string> closed;
  std::size_t max_fid = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ss(line);
    std::string label_tok;
    if (!(ss >> label_tok)) continue;

    SparseDoc doc;
    doc.label = parse_label(label_tok, grade_max, line_no);

    std::string qid_tok;
    if (!(ss >> qid_tok) || qid_tok.rfind("qid:", 0) != 0 ||
        qid_tok.size() == 4) {
      throw ParseError("expected 'qid:<id>' after the label", line_no);
    }
    std::string qid = qid_tok.substr(4);

    std::unordered_set<std::size_t> seen;
    std::string tok;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == tok.size()) {
        throw ParseError("malformed feature '" + tok + "'", line_no);
      }
      const std::string fid_str = tok.substr(0, colon);
      const std::string val_str = tok.substr(colon + 1);
      char* end = nullptr;
      errno = 0;
      const unsigned long long fid = std::strtoull(fid_str.c_str(), &end, 10);
      if (*end != '\0' || errno != 0 || fid == 0 || fid_str[0] == '-') {
        throw ParseError("feature id '" + fid_str + "' must be a positive "
                         "integer",
                         line_no);
      }
      errno = 0;
      const double val = std::strtod(val_str.c_str(), &end);
      if (*end != '\0' || !std::isfinite(val)) {
        throw ParseError("feature value '" + val_str + "' is not finite",
                         line_no);
      }
      if (!seen.insert(fid).second) {
        throw ParseError("feature id " + fid_str + " repeated", line_no);
      }
      doc.features.emplace_back(static_cast<std::size_t>(fid - 1), val);
      max_fid = std::max<std::size_t>(max_fid, fid);
    }

    if (pending.empty() || pending.back().qid != qid) {
      if (closed.contains(qid)) {
        throw ParseError("qid " + qid +
                             " reappears after other queries (documents of "
                             "a query must be contiguous)",
                         line_no);
      }
      if (!pending.empty()) closed.insert(pending.back().qid);
      pending.push_back(PendingGroup{qid, {}});
    }
    pending.back().docs.push_back(std::move(doc));
  }
  if (in.bad()) throw ParseError("read error", line_no);

  ds.dim = max_fid;
  ds.groups.reserve(pending.size());
  for (auto& pg : pending) {
    QueryGroup g;
    g.qid = std::move(pg.qid);
    g.features = DenseMatrix(pg.docs.size(), ds.dim);
    for (std::size_t r = 0; r < pg.docs.size(); ++r) {
      g.labels.push_back(pg.docs[r].label);
      for (const auto& [col, val] : pg.docs[r].features) {
        g.features(r, col) = val;
      }
    }
    ds.groups.push_back(std::move(g));
  }
  return ds;
}

Dataset parse_letor(const std::filesystem::path& path, int grade_max) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path.string());
  return parse_letor(in, grade_max);
}

void write_letor(std::ostream& out, const Dataset& ds) {
  for (const auto& g : ds.groups) {
    for (std::size_t r = 0; r < g.size(); ++r) {
      out << g.labels[r] << " qid:" << g.qid;
      for (std::size_t c = 0; c < g.features.cols(); ++c) {
        out << ' ' << (c + 1) << ':' << format_double(g.features(r, c));
      }
      out << '\n';
    }
  }
}

QueryGroup zscore_normalize(const QueryGroup& group) {
  QueryGroup out = group;
  const std::size_t m = group.features.rows();
  const std::size_t d = group.features.cols();
  if (m == 0) return out;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m; ++r) mean += group.features(r, c);
    mean *= inv_m;
    double var = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double dv = group.features(r, c) - mean;
      var += dv * dv;
    }
    var *= inv_m;
    const double sd = std::sqrt(var);
    // Relative threshold: a column equal up to rounding counts as constant.
    const double scale = std::max(1.0, std::abs(mean));
    for (std::size_t r = 0; r < m; ++r) {
      out.features(r, c) =
          sd > 1e-12 * scale ? (group.features(r, c) - mean) / sd : 0.0;
    }
  }
  return out;
}

Dataset zscore_normalize(const Dataset& ds) {
  Dataset out;
  out.dim = ds.dim;
  out.grade_max = ds.grade_max;
  out.groups.reserve(ds.groups.size());
  for (const auto& g : ds.groups) out.groups.push_back(zscore_normalize(g));
  return out;
}

std::vector<FoldSplit> make_folds(const Dataset& ds, int k,
                                  std::uint64_t seed) {
  if (k < 3) throw InputError("make_folds: need k >= 3 (train/val/test)");
  const std::size_t n = ds.groups.size();
  if (n < static_cast<std::size_t>(k)) {
    throw InputError("make_folds: " + std::to_string(n) +
                     " query groups cannot fill " + std::to_string(k) +
                     " folds");
  }
  if (k != 5) {
    std::clog << "warning: using " << k
              << " folds; the standard protocol is 5-fold\n";
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order.begin(), order.end(), rng);

  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::vector<std::size_t>> parts(kk);
  for (std::size_t s = 0, pos = 0; s < kk; ++s) {
    const std::size_t len = n / kk + (s < n % kk ? 1 : 0);
    parts[s].assign(order.begin() + pos, order.begin() + pos + len);
    pos += len;
  }

  std::vector<FoldSplit> folds;
  for (std::size_t f = 0; f < kk; ++f) {
    FoldSplit split;
    split.fold_index = static_cast<int>(f + 1);
    for (std::size_t t = 0; t + 2 < kk; ++t) {
      const auto& p = parts[(f + t) % kk];
      split.train.insert(split.train.end(), p.begin(), p.end());
    }
    split.validation = parts[(f + kk - 2) % kk];
    split.test = parts[(f + kk - 1) % kk];
    folds.push_back(std::move(split));
  }
  return folds;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.dim = ds.dim;
  out.grade_max = ds.grade_max;
  out.groups.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= ds.groups.size()) throw InputError("subset: index out of range");
    out.groups.push_back(ds.groups[i]);
  }
  return out;
}

std::vector<std::vector<double>> generate_uniform_vectors(
    const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  std::vector<std::vector<double>> out(spec.v1, std::vector<double>(spec.v2));
  for (auto& v : out) {
    for (double& x : v) x = uniform01(rng);
  }
  return out;
}

std::vector<double> synthetic_scorer_weights(std::size_t d,
                                             std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xC0FFEE));
  std::vector<double> w(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : w) {
      x = standard_normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : w) x /= norm;
  return w;
}

Dataset generate_synthetic_ranking_data(std::size_t n_queries, std::size_t m,
                                        std::size_t d, double noise,
                                        std::uint64_t seed) {
  if (n_queries == 0 || m == 0 || d == 0) {
    throw InputError("synthetic data: n_queries, m and d must be >= 1");
  }
  if (!(noise >= 0.0)) throw InputError("synthetic data: noise must be >= 0");
  static constexpr double kThresholds[] = {0.0, 0.75, 1.35, 1.9};

  const auto w = synthetic_scorer_weights(d, seed);
  Rng rng(seed);
  Dataset ds;
  ds.dim = d;
  ds.grade_max = kDefaultGradeMax;
  for (std::size_t q = 0; q < n_queries; ++q) {
    QueryGroup g;
    g.qid = std::to_string(q + 1);
    g.features = DenseMatrix(m, d);
    for (std::size_t r = 0; r < m; ++r) {
      auto row = g.features.row(r);
      for (double& x : row) x = standard_normal(rng);
      double s = dot(row, w);
      if (noise > 0.0) s += noise * standard_normal(rng);
      int label = 0;
      for (double t : kThresholds) label += s > t ? 1 : 0;
      g.labels.push_back(label);
    }
    ds.groups.push_back(std::move(g));
  }
  return ds;
}

}  // namespace rankforge
