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

// Training, evaluation and cross-validation drivers, plus the synthetic
// rank-accuracy experiment. Everything here is deterministic given the
// RunConfig seeds, except wall-clock timings, which are kept in their own
// output file.

#ifndef RANKFORGE_HARNESS_H_
#define RANKFORGE_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankforge/data.h"
#include "rankforge/losses.h"
#include "rankforge/metrics.h"
#include "rankforge/network.h"

namespace rankforge {

struct RunConfig {
  Architecture arch = Architecture::kCE4L;
  LossSpec loss = parse_loss_spec("ndcg.type3");
  std::size_t epochs = 100;
  double lr = 1e-3;
  double l2 = 1e-3;
  double alpha_b = kDefaultAlphaB;
  std::uint64_t seed = 1;
  std::size_t hidden = kDefaultHiddenWidth;
  bool zscore = true;
  // Queries per optimizer step; gradients are summed.
  std::size_t accumulate = 1;
  std::vector<std::size_t> cutoffs = kDefaultCutoffs;
  int folds = 5;
  std::uint64_t folds_seed = 0;
  unsigned jobs = 1;  // folds trained concurrently by cross_validate

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

inline constexpr std::size_t kSelectionCutoff = 5;

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_ndcg = 0.0;  // nDCG@5, eval mode
  double validation_ndcg = 0.0;
  double test_ndcg = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  Network best;  // highest validation nDCG@5, earliest epoch on ties
  Network final;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> records;
};

// Train/validation/test query sets, already normalized.
struct SplitData {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// Applies the per-query z-score when the config asks for it.
Dataset prepare(const Dataset& ds, const RunConfig& cfg);

// One optimizer step per query (or per `accumulate` queries) in an order
// reshuffled every epoch. Throws InputError for an empty train or validation
// set and NumericError naming the query whose loss or gradient is not
// finite.
TrainResult train(const RunConfig& cfg, const SplitData& split);
TrainResult train(const RunConfig& cfg, const Dataset& prepared,
                  const FoldSplit& fold);

EvalReport evaluate_network(const Network& net, const Dataset& prepared,
                            std::span<const std::size_t> cutoffs);
double mean_ndcg(const Network& net, const Dataset& prepared, std::size_t k);

struct FoldOutcome {
  int fold_index = 0;
  TrainResult training;
  EvalReport test_best;   // fold-best checkpoint on the fold's test set
  EvalReport test_final;  // last-epoch network on the same test set
};

struct CvResult {
  std::vector<FoldOutcome> folds;
  EvalReport best;   // fold average
  EvalReport final;  // fold average
};

CvResult cross_validate(const RunConfig& cfg, const Dataset& ds);

// Writes into `dir` (created if missing):
//   cv_best.csv, cv_final.csv       fold-averaged reports
//   per_query.csv                   fold,selection,qid,no_relevant,metric,k,value
//   folds.csv                       fold,best_epoch,n_test_queries
//   plotdata_fold<N>.csv            per-epoch loss and nDCG@5 series
//   timing.csv                      fold,epoch,seconds (not deterministic)
void write_cv_outputs(const std::filesystem::path& dir, const CvResult& cv);

// Per-epoch series: epoch,train_loss,train_ndcg@5,validation_ndcg@5,
// test_ndcg@5.
void write_plotdata_csv(std::ostream& out,
                        const std::vector<EpochRecord>& records);

// Widens every group to `dim` columns with zeros; sparse LETOR files may
// omit trailing feature ids. Throws InputError if ds.dim > dim.
Dataset pad_to_dim(const Dataset& ds, std::size_t dim);

std::map<std::string, std::string> checkpoint_meta(const RunConfig& cfg);

// Loads a checkpoint and a LETOR file, applies the checkpoint's z-score
// setting and scores in eval mode. Throws InputError on a feature dimension
// mismatch or empty cutoff list.
EvalReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                               const std::filesystem::path& data,
                               std::span<const std::size_t> cutoffs);

struct RankExpRow {
  std::string method;           // rank_minus, rank_plus, rank_plus_tiebreak
  std::optional<double> alpha;  // rank_minus only
  std::size_t v1 = 0;
  std::size_t v2 = 0;
  double mean_l1 = 0.0;
};

// For every v2 in `lengths`: v1 uniform vectors, then the mean over vectors
// of the L1 distance between predicted and sorted ranks, for the smooth
// ranks at each alpha and for twin-sigmoid ranks with and without tie
// breaking.
std::vector<RankExpRow> rank_accuracy_experiment(
    std::size_t v1, std::span<const std::size_t> lengths,
    std::span<const double> alphas, std::uint64_t seed);

// Header "method,alpha,v1,v2,mean_l1"; alpha is empty for twin-sigmoid rows.
void write_rankexp_csv(std::ostream& out, const std::vector<RankExpRow>& rows);

}  // namespace rankforge

#endif  // RANKFORGE_HARNESS_H_
