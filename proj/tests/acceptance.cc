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

// Acceptance gate. Runs every criterion and prints one PASS/FAIL line each;
// exits non-zero if any criterion fails.
//
//   acceptance --cli <path to rankforge binary> --work <scratch dir>
//              [--only N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rankforge/data.h"
#include "rankforge/harness.h"
#include "rankforge/losses.h"
#include "rankforge/metrics.h"
#include "rankforge/network.h"
#include "rankforge/ranking.h"
#include "rankforge/rng.h"
#include "test_util.h"

namespace fs = std::filesystem;
using namespace rankforge;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

const std::vector<double> kAlphas = {1, 10, 100, 1000, 10000, 100000};
constexpr double kAlphaOneReference = 2866.94;

// Shared by criteria 1 and 2.
const std::vector<RankExpRow>& rankexp_rows(double* seconds) {
  static double elapsed = 0;
  static const std::vector<RankExpRow> rows = [] {
    const auto t0 = Clock::now();
    const std::size_t lengths[] = {123, 1000};
    auto r = rank_accuracy_experiment(100, lengths, kAlphas, 1);
    elapsed = seconds_since(t0);
    return r;
  }();
  *seconds = elapsed;
  return rows;
}

Outcome rank_exactness() {
  double secs = 0;
  const auto& rows = rankexp_rows(&secs);
  Outcome o{true, ""};
  for (const auto& r : rows) {
    if (r.method != "rank_plus_tiebreak") continue;
    o.pass = o.pass && r.mean_l1 == 0.0;
    o.detail += "v2=" + std::to_string(r.v2) + " L1=" + fmt(r.mean_l1) + "; ";
  }
  o.pass = o.pass && secs < 10.0;
  o.detail += "experiment " + fmt(secs, 3) + " s";
  return o;
}

Outcome smooth_rank_trend() {
  double secs = 0;
  const auto& rows = rankexp_rows(&secs);
  Outcome o{true, ""};
  for (std::size_t v2 : {123u, 1000u}) {
    std::vector<double> series;
    for (const auto& r : rows) {
      if (r.method == "rank_minus" && r.v2 == v2) series.push_back(r.mean_l1);
    }
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (!(series[i] < series[i - 1])) o.pass = false;
    }
    o.detail += "v2=" + std::to_string(v2) + ":";
    for (double s : series) o.detail += " " + fmt(s, 5);
    o.detail += "; ";
    if (v2 == 123) {
      const double ratio = series.front() / kAlphaOneReference;
      o.pass = o.pass && ratio >= 0.7 && ratio <= 1.3;
      o.detail += "alpha=1 ratio to reference " + fmt(ratio, 4) + "; ";
    }
  }
  o.pass = o.pass && secs < 30.0;
  o.detail += "experiment " + fmt(secs, 3) + " s";
  return o;
}

Outcome metric_oracle() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::size_t cases = 0;
  for (std::size_t m = 1; m <= 5; ++m) {
    std::vector<int> labels(m, 0);
    const std::size_t assignments =
        static_cast<std::size_t>(std::pow(3.0, static_cast<double>(m)));
    for (std::size_t code = 0; code < assignments; ++code) {
      std::size_t c = code;
      for (std::size_t i = 0; i < m; ++i, c /= 3) labels[i] = static_cast<int>(c % 3);
      std::vector<std::size_t> perm(m);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        const SortedLabels sl = sort_by_order(perm, labels);
        std::vector<int> ranked(m);
        for (std::size_t p = 0; p < m; ++p) ranked[p] = labels[perm[p]];
        auto check = [&](double got, double want) {
          worst = std::max(worst, std::abs(got - want));
          ++cases;
        };
        for (std::size_t k = 1; k <= m + 1; ++k) {
          check(precision_at_k(sl, k), oracle::precision(ranked, k));
          check(average_precision(sl, k), oracle::average_precision(ranked, k));
          check(ndcg_at_k(sl, k), oracle::ndcg(ranked, k));
          check(nerr_at_k(sl, k), oracle::nerr(ranked, k));
        }
        check(average_precision(sl), oracle::average_precision(ranked, m));
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 60.0,
          std::to_string(cases) + " comparisons, max abs diff " + fmt(worst) +
              ", " + fmt(secs, 3) + " s"};
}

// Losses of the four metric families for one query.
struct FamilyCase {
  LossFamily family;
  const char* name;
};
constexpr FamilyCase kMetricFamilies[] = {
    {LossFamily::kPrecision, "pre@10"},
    {LossFamily::kAp, "ap"},
    {LossFamily::kNdcg, "ndcg"},
    {LossFamily::kNerr, "nerr@10"},
};
constexpr GradientStrategy kStrategies[] = {
    GradientStrategy::kType1, GradientStrategy::kType2,
    GradientStrategy::kType3};

LossOutput family_loss(LossFamily family, std::size_t k,
                       const oracle::Query& q, const TwinSigmoidSpec& twin) {
  switch (family) {
    case LossFamily::kPrecision:
      return diff_precision_loss(q.scores, q.labels, k, twin);
    case LossFamily::kAp:
      return diff_ap_loss(q.scores, q.labels, twin);
    case LossFamily::kNdcg:
      return diff_ndcg_loss(q.scores, q.labels, twin);
    default:
      return diff_nerr_loss(q.scores, q.labels, k, twin);
  }
}

double exact_metric(LossFamily family, std::size_t k, const SortedLabels& sl) {
  switch (family) {
    case LossFamily::kPrecision:
      return precision_at_k(sl, k);
    case LossFamily::kAp:
      return average_precision(sl);
    case LossFamily::kNdcg:
      return ndcg_at_k(sl, sl.size());
    default:
      return nerr_at_k(sl, k);
  }
}

Outcome forward_exactness() {
  Rng rng(404);
  double worst = 0;
  std::size_t tied_queries = 0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t m = 1 + uniform_index(rng, 50);
    // Every other query is scored on a coarse grid to force ties.
    const auto q = oracle::random_query(rng, m, 4, n % 2 ? 0.5 : 0.0);
    for (const auto& fc : kMetricFamilies) {
      const std::size_t k = std::min<std::size_t>(10, m);
      for (GradientStrategy s : kStrategies) {
        TwinSigmoidSpec twin{1.0, s, mix_seed(9, n)};
        const LossOutput out = family_loss(fc.family, k, q, twin);
        const RankVector rv = rank_plus(q.scores, twin);
        if (rv.had_ties && fc.family == LossFamily::kNdcg &&
            s == GradientStrategy::kType1) {
          ++tied_queries;
        }
        const SortedLabels sl = sort_by_order(rv.asc_perm, q.labels);
        worst = std::max(worst,
                         std::abs(-out.value - exact_metric(fc.family, k, sl)));
      }
    }
  }
  return {worst <= 1e-12, "max |(-loss) - metric| " + fmt(worst) + " over " +
                              std::to_string(tied_queries) +
                              " tied and the rest untied queries"};
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  Rng rng(505);
  double worst_a = 0, worst_b = 0, worst_c = 0;

  for (int n = 0; n < 200; ++n) {
    const std::size_t m = 2 + uniform_index(rng, 7);
    const auto q = oracle::random_query(rng, m, 4);
    const double alpha_b = n % 3 == 0 ? 1.0 : 0.5 + 2.0 * uniform01(rng);
    for (const auto& fc : kMetricFamilies) {
      const std::size_t k = 1 + uniform_index(rng, m);
      TwinSigmoidSpec twin{alpha_b, GradientStrategy::kType1, mix_seed(5, n)};
      const LossOutput out = family_loss(fc.family, k, q, twin);
      const auto s = oracle::soft_surrogate(fc.family, k, q.scores, q.labels,
                                            alpha_b, twin.tie_seed);
      const auto fd = oracle::central_difference(s, q.scores, 1e-3);
      worst_a = std::max(worst_a, oracle::max_relative_error(out.grad, fd, 1e-3));
    }

    const std::uint64_t seed = mix_seed(6, n);
    std::function<LossOutput(const std::vector<double>&)> baselines[] = {
        [&](const std::vector<double>& y) {
          return approx_ndcg_loss(y, q.labels, 10.0);
        },
        [&](const std::vector<double>& y) {
          return listnet_top1_loss(y, q.labels);
        },
        [&](const std::vector<double>& y) {
          return listmle_loss(y, q.labels, seed);
        },
    };
    for (const auto& loss : baselines) {
      const auto fd = oracle::central_difference(
          [&](const std::vector<double>& y) { return loss(y).value; },
          q.scores, 1e-3);
      worst_b = std::max(worst_b, oracle::max_relative_error(
                                      loss(q.scores).grad, fd, 1e-3));
    }
  }

  // Network: d(sum_i c_i score_i) / d theta in train mode.
  for (Architecture arch : {Architecture::kCE5, Architecture::kCE4L}) {
    for (int trial = 0; trial < 3; ++trial) {
      Network net(architecture_layers(arch, 4, 6), mix_seed(7, trial));
      Rng data_rng(mix_seed(8, trial));
      DenseMatrix x(5, 4);
      for (double& v : x.values()) v = standard_normal(data_rng);
      std::vector<double> c(5);
      for (double& v : c) v = standard_normal(data_rng);

      const ForwardResult fr = forward(net, x, Mode::kTrain);
      const ParamSet grads = backward(net, fr.cache, c);
      auto objective = [&](const Network& n) {
        const auto y = forward(n, x, Mode::kTrain).scores;
        return std::inner_product(y.begin(), y.end(), c.begin(), 0.0);
      };
      auto params = tensors(net.params());
      const auto analytic = tensors(grads);
      for (std::size_t t = 0; t < params.size(); ++t) {
        std::vector<double> a(analytic[t].begin(), analytic[t].end());
        std::vector<double> fd(params[t].size());
        for (std::size_t i = 0; i < params[t].size(); ++i) {
          const double keep = params[t][i];
          const double h = 1e-6;
          params[t][i] = keep + h;
          const double up = objective(net);
          params[t][i] = keep - h;
          const double down = objective(net);
          params[t][i] = keep;
          fd[i] = (up - down) / (2 * h);
        }
        worst_c = std::max(worst_c, oracle::max_relative_error(a, fd, 1e-4));
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool pass =
      worst_a <= 1e-5 && worst_b <= 1e-6 && worst_c <= 1e-4 && secs < 60.0;
  return {pass, "(a) " + fmt(worst_a) + " (b) " + fmt(worst_b) + " (c) " +
                    fmt(worst_c) + ", " + fmt(secs, 3) + " s"};
}

Outcome bound_property() {
  Rng rng(606);
  std::size_t violations = 0;
  double tightest = 0;  // max lhs / rhs
  for (int n = 0; n < 10000; ++n) {
    const std::size_t m = 2 + uniform_index(rng, 19);
    std::vector<double> y;
    while (y.size() < m) {
      const double v = uniform01(rng);
      if (std::find(y.begin(), y.end(), v) == y.end()) y.push_back(v);
    }
    for (double alpha : {1.0, 10.0, 100.0}) {
      const BoundCheck b = approx_bound_check(y, alpha);
      if (!b.holds()) ++violations;
      if (b.rhs > 0) tightest = std::max(tightest, b.lhs / b.rhs);
    }
  }
  return {violations == 0, std::to_string(violations) +
                               " violations in 30000 checks, max lhs/rhs " +
                               fmt(tightest)};
}

struct SanityRun {
  std::string loss;
  double noise;
  double best_validation = 0;
};

RunConfig sanity_config(const std::string& loss) {
  RunConfig cfg;
  cfg.loss = parse_loss_spec(loss);
  cfg.seed = 11;
  return cfg;
}

SplitData sanity_split(double noise) {
  const Dataset raw = generate_synthetic_ranking_data(200, 20, 10, noise, 77);
  RunConfig cfg;
  const Dataset ds = prepare(raw, cfg);
  const FoldSplit fold = make_folds(ds, 5, 3).front();
  return {subset(ds, fold.train), subset(ds, fold.validation),
          subset(ds, fold.test)};
}

Outcome training_sanity() {
  const auto t0 = Clock::now();
  constexpr double kNoise = 0.5;
  const SplitData clean = sanity_split(0.0);
  const SplitData noisy = sanity_split(kNoise);

  std::vector<SanityRun> runs;
  for (const char* f : {"ndcg", "ap", "pre@10", "nerr@10"}) {
    runs.push_back({std::string(f) + ".type3", 0.0});
  }
  for (const char* f : {"ndcg", "ap", "pre@10", "nerr@10"}) {
    runs.push_back({std::string(f) + ".type1", kNoise});
    runs.push_back({std::string(f) + ".type3", kNoise});
  }
  std::vector<std::future<double>> pending;
  for (const auto& r : runs) {
    const SplitData* split = r.noise == 0.0 ? &clean : &noisy;
    const RunConfig cfg = sanity_config(r.loss);
    pending.push_back(std::async(std::launch::async, [cfg, split] {
      const TrainResult tr = train(cfg, *split);
      double best = 0;
      for (const auto& rec : tr.records) best = std::max(best, rec.validation_ndcg);
      return best;
    }));
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    runs[i].best_validation = pending[i].get();
  }

  bool pass = true;
  std::string detail = "clean:";
  for (std::size_t i = 0; i < 4; ++i) {
    pass = pass && runs[i].best_validation >= 0.95;
    detail += " " + runs[i].loss + "=" + fmt(runs[i].best_validation, 4);
  }
  detail += "; noisy type1 vs type3:";
  for (std::size_t i = 4; i < runs.size(); i += 2) {
    pass = pass && runs[i + 1].best_validation >= runs[i].best_validation;
    detail += " " + runs[i].loss.substr(0, runs[i].loss.find('.')) + " " +
              fmt(runs[i].best_validation, 4) + "/" +
              fmt(runs[i + 1].best_validation, 4);
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 600.0;
  return {pass, detail + "; " + fmt(secs, 4) + " s"};
}

Outcome strategy_invariance() {
  Rng rng(808);
  double worst = 0;
  double worst_type2 = 0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t m = 1 + uniform_index(rng, 40);
    const auto q = oracle::random_query(rng, m, 4, n % 2 ? 0.5 : 0.0);
    const std::size_t k = std::min<std::size_t>(10, m);
    for (const auto& fc : kMetricFamilies) {
      std::vector<double> values;
      for (GradientStrategy s : kStrategies) {
        TwinSigmoidSpec twin{1.0, s, mix_seed(12, n)};
        values.push_back(family_loss(fc.family, k, q, twin).value);
      }
      for (double v : values) worst = std::max(worst, std::abs(v - values[0]));

      oracle::Query flat = q;
      std::fill(flat.labels.begin(), flat.labels.end(),
                1 + static_cast<int>(n % 4));
      TwinSigmoidSpec twin{1.0, GradientStrategy::kType2, mix_seed(13, n)};
      for (double g : family_loss(fc.family, k, flat, twin).grad) {
        worst_type2 = std::max(worst_type2, std::abs(g));
      }
    }
  }
  return {worst <= 1e-15 && worst_type2 == 0.0,
          "max value spread " + fmt(worst) + ", max |type2 grad| with equal "
          "labels " + fmt(worst_type2)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cv_determinism(const std::string& cli, const fs::path& work) {
  const fs::path data = oracle::test_data_dir() / "mini_letor.txt";
  std::vector<fs::path> outs;
  for (const char* run : {"run_a", "run_b"}) {
    const fs::path out = work / run;
    fs::remove_all(out);
    const std::string cmd = "\"" + cli + "\" cv --data \"" + data.string() +
                            "\" --loss ap.type3 --epochs 4 --seed 5 "
                            "--folds-seed 9 --out \"" + out.string() +
                            "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      return {false, "cv command failed: " + cmd};
    }
    outs.push_back(out);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(outs[0])) {
    const auto name = entry.path().filename();
    if (name == "timing.csv") continue;
    if (slurp(entry.path()) != slurp(outs[1] / name)) {
      return {false, name.string() + " differs"};
    }
    ++compared;
  }
  return {compared >= 5,
          std::to_string(compared) + " CSV files byte-identical (timing.csv "
          "holds wall-clock only and is excluded)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rankforge acceptance gate"};
  std::string cli = "rankforge";
  std::string work = "acceptance_work";
  int only = 0;
  app.add_option("--cli", cli, "path to the rankforge binary");
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "run a single criterion");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"rank exactness with tie breaking", rank_exactness},
      {"smooth rank L1 decreases with alpha", smooth_rank_trend},
      {"metric oracle equivalence", metric_oracle},
      {"forward exactness of metric losses", forward_exactness},
      {"gradient correctness", gradient_correctness},
      {"smooth rank accuracy bound", bound_property},
      {"training sanity", training_sanity},
      {"strategy value invariance", strategy_invariance},
      {"cv determinism", [&] { return cv_determinism(cli, work); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". "
              << criteria[i].first << " | " << o.detail << std::endl;
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
