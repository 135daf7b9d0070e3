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

#include "rankforge/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <ostream>
#include <thread>

#include "rankforge/adam.h"
#include "rankforge/checkpoint.h"
#include "rankforge/errors.h"
#include "rankforge/ranking.h"
#include "rankforge/rng.h"

namespace rankforge {
namespace {

// Seed streams derived from RunConfig::seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kOrderStream = 2;
constexpr std::uint64_t kLossStream = 3;

void add_into(ParamSet& acc, const ParamSet& g) {
  auto dst = tensors(acc);
  const auto src = tensors(g);
  for (std::size_t t = 0; t < dst.size(); ++t) {
    for (std::size_t i = 0; i < dst[t].size(); ++i) dst[t][i] += src[t][i];
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be > 0");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("l2 must be >= 0");
  if (!(alpha_b > 0.0) || !std::isfinite(alpha_b)) {
    throw ConfigError("alpha_b must be > 0");
  }
  if (!(loss.alpha > 0.0) || !std::isfinite(loss.alpha)) {
    throw ConfigError("alpha must be > 0");
  }
  if (hidden < 1) throw ConfigError("hidden width must be >= 1");
  if (accumulate < 1) throw ConfigError("accumulate must be >= 1");
  if (cutoffs.empty()) throw ConfigError("cutoff list is empty");
  for (std::size_t k : cutoffs) {
    if (k == 0) throw ConfigError("cutoffs must be >= 1");
  }
  if (folds < 3) throw ConfigError("need at least 3 folds");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

Dataset prepare(const Dataset& ds, const RunConfig& cfg) {
  return cfg.zscore ? zscore_normalize(ds) : ds;
}

EvalReport evaluate_network(const Network& net, const Dataset& prepared,
                            std::span<const std::size_t> cutoffs) {
  if (cutoffs.empty()) throw InputError("evaluate: empty cutoff list");
  EvalAccumulator acc({cutoffs.begin(), cutoffs.end()});
  for (const auto& g : prepared.groups) {
    const auto scores = score(net, g.features);
    acc.add(evaluate_query(scores, g.labels, cutoffs, g.qid));
  }
  return acc.finish();
}

double mean_ndcg(const Network& net, const Dataset& prepared, std::size_t k) {
  const std::size_t cut[] = {k};
  return evaluate_network(net, prepared, cut).get(MetricFamily::kNdcg, k);
}

TrainResult train(const RunConfig& cfg, const SplitData& split) {
  cfg.validate();
  if (split.train.groups.empty()) throw InputError("train: no training queries");
  if (split.validation.groups.empty()) {
    throw InputError("train: no validation queries");
  }
  const std::size_t dim = split.train.dim;

  Network net = Network::from_architecture(
      cfg.arch, dim, mix_seed(cfg.seed, kInitStream), cfg.hidden);
  AdamState adam = AdamState::for_network(net);

  TrainResult result{net, net, 0, {}};
  double best_val = -1.0;

  std::vector<std::size_t> order(split.train.groups.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    Rng order_rng(mix_seed(mix_seed(cfg.seed, kOrderStream), epoch));
    shuffle(order.begin(), order.end(), order_rng);

    const std::uint64_t epoch_seed =
        mix_seed(mix_seed(cfg.seed, kLossStream), epoch);
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    ParamSet pending;
    std::size_t pending_count = 0;

    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const QueryGroup& g = split.train.groups[order[pos]];
      // Flagged queries carry no signal; they neither step nor count.
      if (std::none_of(g.labels.begin(), g.labels.end(),
                       [](int l) { return l > 0; })) {
        continue;
      }
      const std::string where =
          "epoch " + std::to_string(epoch) + ", query qid:" + g.qid;
      ForwardResult fr;
      LossOutput lo;
      try {
        fr = train_forward(net, g.features);
        lo = compute_loss(cfg.loss, fr.scores, g.labels, cfg.alpha_b,
                          mix_seed(epoch_seed, order[pos]));
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (" + where + ")");
      }
      if (!std::isfinite(lo.value) || !all_finite(lo.grad)) {
        throw NumericError("non-finite loss or gradient at " + where);
      }
      loss_sum += lo.value;
      ++loss_count;
      ParamSet grads = backward(net, fr.cache, lo.grad);
      if (pending_count == 0) {
        pending = std::move(grads);
      } else {
        add_into(pending, grads);
      }
      if (++pending_count == cfg.accumulate) {
        adam_step(net, pending, adam, cfg.lr, cfg.l2);
        pending_count = 0;
      }
    }
    if (pending_count > 0) adam_step(net, pending, adam, cfg.lr, cfg.l2);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss =
        loss_count == 0 ? 0.0 : loss_sum / static_cast<double>(loss_count);
    rec.train_ndcg = mean_ndcg(net, split.train, kSelectionCutoff);
    rec.validation_ndcg = mean_ndcg(net, split.validation, kSelectionCutoff);
    rec.test_ndcg = split.test.groups.empty()
                        ? 0.0
                        : mean_ndcg(net, split.test, kSelectionCutoff);
    rec.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (rec.validation_ndcg > best_val) {
      best_val = rec.validation_ndcg;
      result.best = net;
      result.best_epoch = epoch;
    }
    result.records.push_back(rec);
  }
  result.final = net;
  return result;
}

TrainResult train(const RunConfig& cfg, const Dataset& prepared,
                  const FoldSplit& fold) {
  SplitData split{subset(prepared, fold.train),
                  subset(prepared, fold.validation),
                  subset(prepared, fold.test)};
  return train(cfg, split);
}

CvResult cross_validate(const RunConfig& cfg, const Dataset& ds) {
  cfg.validate();
  const Dataset prepared = prepare(ds, cfg);
  const auto splits = make_folds(prepared, cfg.folds, cfg.folds_seed);

  std::vector<std::optional<FoldOutcome>> outcomes(splits.size());
  std::vector<std::exception_ptr> errors(splits.size());

  auto run_fold = [&](std::size_t f) {
    try {
      const FoldSplit& split = splits[f];
      TrainResult tr = train(cfg, prepared, split);
      const Dataset test = subset(prepared, split.test);
      EvalReport best = evaluate_network(tr.best, test, cfg.cutoffs);
      EvalReport final = evaluate_network(tr.final, test, cfg.cutoffs);
      outcomes[f] = FoldOutcome{split.fold_index, std::move(tr),
                                std::move(best), std::move(final)};
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(cfg.jobs, splits.size());
  if (workers <= 1) {
    for (std::size_t f = 0; f < splits.size(); ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t f = next++; f < splits.size(); f = next++) {
          run_fold(f);
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CvResult cv;
  for (auto& o : outcomes) cv.folds.push_back(std::move(*o));

  std::vector<EvalReport> best;
  std::vector<EvalReport> final;
  for (const auto& fo : cv.folds) {
    best.push_back(fo.test_best);
    final.push_back(fo.test_final);
  }
  cv.best = average_reports(best);
  cv.final = average_reports(final);
  return cv;
}

void write_plotdata_csv(std::ostream& out,
                        const std::vector<EpochRecord>& records) {
  out << "epoch,train_loss,train_ndcg@5,validation_ndcg@5,test_ndcg@5\n";
  for (const auto& r : records) {
    out << r.epoch << ',' << format_double(r.train_loss) << ','
        << format_double(r.train_ndcg) << ','
        << format_double(r.validation_ndcg) << ','
        << format_double(r.test_ndcg) << '\n';
  }
}

void write_cv_outputs(const std::filesystem::path& dir, const CvResult& cv) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "cv_best.csv");
    write_report_csv(out, cv.best);
  }
  {
    auto out = open_out(dir / "cv_final.csv");
    write_report_csv(out, cv.final);
  }
  {
    auto out = open_out(dir / "per_query.csv");
    out << "fold,selection,qid,no_relevant,metric,k,value\n";
    for (const auto& fo : cv.folds) {
      const std::string f = std::to_string(fo.fold_index);
      write_per_query_rows(out, fo.test_best, f + ",best,");
      write_per_query_rows(out, fo.test_final, f + ",final,");
    }
  }
  {
    auto out = open_out(dir / "folds.csv");
    out << "fold,best_epoch,n_test_queries\n";
    for (const auto& fo : cv.folds) {
      out << fo.fold_index << ',' << fo.training.best_epoch << ','
          << fo.test_best.query_count() << '\n';
    }
  }
  auto timing = open_out(dir / "timing.csv");
  timing << "fold,epoch,seconds\n";
  for (const auto& fo : cv.folds) {
    auto out = open_out(dir / ("plotdata_fold" +
                               std::to_string(fo.fold_index) + ".csv"));
    write_plotdata_csv(out, fo.training.records);
    for (const auto& r : fo.training.records) {
      timing << fo.fold_index << ',' << r.epoch << ','
             << format_double(r.seconds) << '\n';
    }
  }
}

std::map<std::string, std::string> checkpoint_meta(const RunConfig& cfg) {
  return {
      {"loss", to_string(cfg.loss)},
      {"alpha_b", format_double(cfg.alpha_b)},
      {"epochs", std::to_string(cfg.epochs)},
      {"lr", format_double(cfg.lr)},
      {"l2", format_double(cfg.l2)},
      {"seed", std::to_string(cfg.seed)},
      {"zscore", cfg.zscore ? "1" : "0"},
  };
}

Dataset pad_to_dim(const Dataset& ds, std::size_t dim) {
  if (ds.dim > dim) {
    throw InputError("feature dimension " + std::to_string(ds.dim) +
                     " exceeds the model's " + std::to_string(dim));
  }
  if (ds.dim == dim) return ds;
  Dataset out = ds;
  out.dim = dim;
  for (auto& g : out.groups) {
    DenseMatrix wide(g.features.rows(), dim);
    for (std::size_t r = 0; r < g.features.rows(); ++r) {
      for (std::size_t c = 0; c < g.features.cols(); ++c) {
        wide(r, c) = g.features(r, c);
      }
    }
    g.features = std::move(wide);
  }
  return out;
}

EvalReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                               const std::filesystem::path& data,
                               std::span<const std::size_t> cutoffs) {
  if (cutoffs.empty()) throw InputError("evaluate: empty cutoff list");
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  Dataset ds = pad_to_dim(parse_letor(data), ckpt.network.input_dim());
  const auto it = ckpt.meta.find("zscore");
  if (it == ckpt.meta.end() || it->second == "1") ds = zscore_normalize(ds);
  return evaluate_network(ckpt.network, ds, cutoffs);
}

std::vector<RankExpRow> rank_accuracy_experiment(
    std::size_t v1, std::span<const std::size_t> lengths,
    std::span<const double> alphas, std::uint64_t seed) {
  std::vector<RankExpRow> rows;
  for (std::size_t v2 : lengths) {
    const auto vectors = generate_uniform_vectors({v1, v2, mix_seed(seed, v2)});
    std::vector<std::vector<double>> truth;
    truth.reserve(vectors.size());
    for (const auto& v : vectors) truth.push_back(sorted_ranks(v));
    const double n = static_cast<double>(vectors.size());

    for (double alpha : alphas) {
      double sum = 0.0;
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        sum += l1_rank_loss(rank_minus(vectors[i], alpha), truth[i]);
      }
      rows.push_back({"rank_minus", alpha, v1, v2, sum / n});
    }
    double plain = 0.0;
    double broken = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      plain += l1_rank_loss(rank_plus_without_tie_breaking(vectors[i]),
                            truth[i]);
      TwinSigmoidSpec spec;
      spec.tie_seed = mix_seed(seed ^ v2, i);
      broken += l1_rank_loss(rank_plus(vectors[i], spec).ranks, truth[i]);
    }
    rows.push_back({"rank_plus", std::nullopt, v1, v2, plain / n});
    rows.push_back({"rank_plus_tiebreak", std::nullopt, v1, v2, broken / n});
  }
  return rows;
}

void write_rankexp_csv(std::ostream& out, const std::vector<RankExpRow>& rows) {
  out << "method,alpha,v1,v2,mean_l1\n";
  for (const auto& r : rows) {
    out << r.method << ',' << (r.alpha ? format_double(*r.alpha) : "") << ','
        << r.v1 << ',' << r.v2 << ',' << format_double(r.mean_l1) << '\n';
  }
}

}  // namespace rankforge
