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

#ifndef RANKFORGE_DATA_H_
#define RANKFORGE_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rankforge/matrix.h"

namespace rankforge {

inline constexpr int kDefaultGradeMax = 4;

// One query: an m x d feature matrix and m graded labels.
struct QueryGroup {
  std::string qid;
  DenseMatrix features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  friend bool operator==(const QueryGroup&, const QueryGroup&) = default;
};

struct Dataset {
  std::vector<QueryGroup> groups;
  std::size_t dim = 0;
  int grade_max = kDefaultGradeMax;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Reads LETOR/SVMlight ranking text:
//
//   <label> qid:<id> <fid>:<value> ... [# comment]
//
// Feature ids are 1-based; the dataset width is the largest id seen anywhere,
// and absent features are 0. Documents of one qid must be contiguous. Labels
// must be integers in [0, grade_max]. Throws ParseError with the line number.
Dataset parse_letor(std::istream& in, int grade_max = kDefaultGradeMax);
Dataset parse_letor(const std::filesystem::path& path,
                    int grade_max = kDefaultGradeMax);

// Writes every feature explicitly with 17 significant digits.
void write_letor(std::ostream& out, const Dataset& ds);

// Per-query z-score: every column gets mean 0 and population std 1; constant
// columns (including every column of a single-document query) become 0.
QueryGroup zscore_normalize(const QueryGroup& group);
Dataset zscore_normalize(const Dataset& ds);

struct FoldSplit {
  int fold_index = 1;  // 1-based
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Shuffles the groups with `seed` and cuts them into k near-equal subsets
// S_0..S_{k-1}. Fold f (0-based) trains on the k-2 subsets starting at S_f,
// validates on S_{f+k-2} and tests on S_{f+k-1} (indices mod k), so every
// group is tested exactly once. Requires 3 <= k <= |groups|; k != 5 logs a
// warning since the standard protocol is five folds.
std::vector<FoldSplit> make_folds(const Dataset& ds, int k = 5,
                                  std::uint64_t seed = 0);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices);

struct SyntheticSpec {
  std::size_t v1 = 100;  // number of vectors (queries)
  std::size_t v2 = 123;  // length of each vector (documents)
  std::uint64_t seed = 0;
};

// v1 vectors of v2 values drawn uniformly from [0, 1).
std::vector<std::vector<double>> generate_uniform_vectors(
    const SyntheticSpec& spec);

// Desk-scale training fixture. Features are standard normal; a hidden linear
// scorer w (unit norm, drawn from the seed) gives each document the score
// s = w.x + noise * N(0, 1), and labels bin s into grades 0..4 at the
// thresholds {0, 0.75, 1.35, 1.9}. With noise = 0 the labels are monotone
// in w.x, so the hidden scorer ranks every query perfectly.
Dataset generate_synthetic_ranking_data(std::size_t n_queries, std::size_t m,
                                        std::size_t d, double noise,
                                        std::uint64_t seed);

// The hidden scorer used by generate_synthetic_ranking_data for (d, seed).
std::vector<double> synthetic_scorer_weights(std::size_t d,
                                             std::uint64_t seed);

}  // namespace rankforge

#endif  // RANKFORGE_DATA_H_
