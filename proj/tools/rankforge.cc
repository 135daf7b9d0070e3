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

// rankforge command line: train, eval, cv, rankexp.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rankforge/checkpoint.h"
#include "rankforge/data.h"
#include "rankforge/errors.h"
#include "rankforge/harness.h"

namespace fs = std::filesystem;
using namespace rankforge;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CliOptions {
  std::string data;
  std::string arch = "CE4.L";
  std::string loss = "ndcg.type3";
  std::string out = "rankforge_out";
  std::string checkpoint;
  std::vector<std::size_t> cutoffs = kDefaultCutoffs;
  int fold = 1;
  bool no_zscore = false;
  // rankexp
  std::size_t v1 = 100;
  std::vector<std::size_t> v2 = {123, 1000};
  std::vector<double> alphas = {1, 10, 100, 1000, 10000, 100000};
};

void add_run_flags(CLI::App* cmd, RunConfig& cfg, CliOptions& opt) {
  cmd->add_option("--data", opt.data,
                  "LETOR file, or a directory with train.txt, vali.txt and "
                  "test.txt")
      ->required();
  cmd->add_option("--arch", opt.arch, "R5, CE5, R4.L or CE4.L")
      ->capture_default_str();
  cmd->add_option("--loss", opt.loss,
                  "pre@k.typeN, ap.typeN, ndcg.typeN, nerr@k.typeN, "
                  "approxndcg, listnet, listmle")
      ->capture_default_str();
  cmd->add_option("--epochs", cfg.epochs)->capture_default_str();
  cmd->add_option("--lr", cfg.lr)->capture_default_str();
  cmd->add_option("--l2", cfg.l2)->capture_default_str();
  cmd->add_option("--alpha-b", cfg.alpha_b, "twin-sigmoid backward steepness")
      ->capture_default_str();
  cmd->add_option("--alpha", cfg.loss.alpha, "ApproxNDCG steepness")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed)->capture_default_str();
  cmd->add_option("--hidden", cfg.hidden, "hidden layer width")
      ->capture_default_str();
  cmd->add_option("--accumulate", cfg.accumulate, "queries per Adam step")
      ->capture_default_str();
  cmd->add_option("--folds-seed", cfg.folds_seed,
                  "query-to-subset assignment seed")
      ->capture_default_str();
  cmd->add_option("--cutoffs", opt.cutoffs)->delimiter(',');
  cmd->add_option("--out", opt.out, "output directory")->capture_default_str();
  cmd->add_flag("--paper-exact-grad", cfg.loss.paper_exact_grad,
                "nDCG losses: drop the 1/ln 2 factor of the log2 derivative");
  cmd->add_flag("--no-zscore", opt.no_zscore, "skip per-query z-scoring");
}

// Builds cfg.loss from the loss string while keeping flags set separately.
void finish_config(RunConfig& cfg, const CliOptions& opt) {
  const double alpha = cfg.loss.alpha;
  const bool exact = cfg.loss.paper_exact_grad;
  cfg.loss = parse_loss_spec(opt.loss);
  cfg.loss.alpha = alpha;
  cfg.loss.paper_exact_grad = exact;
  cfg.arch = parse_architecture(opt.arch);
  cfg.cutoffs = opt.cutoffs;
  cfg.zscore = !opt.no_zscore;
  cfg.validate();
}

Dataset concat(std::vector<Dataset> parts) {
  Dataset out;
  for (const auto& p : parts) out.dim = std::max(out.dim, p.dim);
  for (auto& p : parts) {
    Dataset padded = pad_to_dim(p, out.dim);
    for (auto& g : padded.groups) out.groups.push_back(std::move(g));
  }
  return out;
}

std::vector<Dataset> load_directory(const fs::path& dir) {
  std::vector<Dataset> parts;
  for (const char* name : {"train.txt", "vali.txt", "test.txt"}) {
    parts.push_back(parse_letor(dir / name));
  }
  return parts;
}

void write_file(const fs::path& path, auto&& writer) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  writer(out);
}

int run_train(RunConfig& cfg, const CliOptions& opt) {
  finish_config(cfg, opt);
  SplitData split;
  if (fs::is_directory(opt.data)) {
    auto parts = load_directory(opt.data);
    std::size_t dim = 0;
    for (const auto& p : parts) dim = std::max(dim, p.dim);
    split = {prepare(pad_to_dim(parts[0], dim), cfg),
             prepare(pad_to_dim(parts[1], dim), cfg),
             prepare(pad_to_dim(parts[2], dim), cfg)};
  } else {
    const Dataset ds = prepare(parse_letor(fs::path(opt.data)), cfg);
    const auto folds = make_folds(ds, cfg.folds, cfg.folds_seed);
    if (opt.fold < 1 || opt.fold > static_cast<int>(folds.size())) {
      throw ConfigError("--fold must be in 1.." +
                        std::to_string(folds.size()));
    }
    const FoldSplit& f = folds[static_cast<std::size_t>(opt.fold - 1)];
    split = {subset(ds, f.train), subset(ds, f.validation),
             subset(ds, f.test)};
  }

  const TrainResult tr = train(cfg, split);
  const fs::path out = opt.out;
  fs::create_directories(out);
  auto meta = checkpoint_meta(cfg);
  meta["best_epoch"] = std::to_string(tr.best_epoch);
  save_checkpoint(out / "model.ckpt", tr.best, meta);
  save_checkpoint(out / "model_final.ckpt", tr.final, checkpoint_meta(cfg));
  write_file(out / "plotdata.csv",
             [&](std::ostream& o) { write_plotdata_csv(o, tr.records); });
  write_file(out / "timing.csv", [&](std::ostream& o) {
    o << "epoch,seconds\n";
    for (const auto& r : tr.records) {
      o << r.epoch << ',' << format_double(r.seconds) << '\n';
    }
  });
  if (!split.test.groups.empty()) {
    const EvalReport best = evaluate_network(tr.best, split.test, cfg.cutoffs);
    const EvalReport final =
        evaluate_network(tr.final, split.test, cfg.cutoffs);
    write_file(out / "test_best.csv",
               [&](std::ostream& o) { write_report_csv(o, best); });
    write_file(out / "test_final.csv",
               [&](std::ostream& o) { write_report_csv(o, final); });
  }
  const EpochRecord& last = tr.records.back();
  std::cout << "best epoch " << tr.best_epoch << ", final validation nDCG@5 "
            << format_double(last.validation_ndcg) << ", output in "
            << out.string() << '\n';
  return 0;
}

int run_eval(const CliOptions& opt) {
  if (opt.cutoffs.empty()) throw ConfigError("cutoff list is empty");
  const EvalReport report =
      evaluate_checkpoint(opt.checkpoint, opt.data, opt.cutoffs);
  write_report_csv(std::cout, report);
  if (!opt.out.empty()) {
    const fs::path out = opt.out;
    fs::create_directories(out);
    write_file(out / "report.csv",
               [&](std::ostream& o) { write_report_csv(o, report); });
    write_file(out / "per_query.csv",
               [&](std::ostream& o) { write_per_query_csv(o, report); });
  }
  return 0;
}

int run_cv(RunConfig& cfg, const CliOptions& opt) {
  finish_config(cfg, opt);
  const Dataset ds = fs::is_directory(opt.data)
                         ? concat(load_directory(opt.data))
                         : parse_letor(fs::path(opt.data));
  const CvResult cv = cross_validate(cfg, ds);
  write_cv_outputs(opt.out, cv);
  write_report_csv(std::cout, cv.best);
  return 0;
}

int run_rankexp(const CliOptions& opt, std::uint64_t seed) {
  if (opt.v1 == 0 || opt.v2.empty() || opt.alphas.empty()) {
    throw ConfigError("rankexp needs v1 >= 1 and non-empty --v2 and --alphas");
  }
  for (double a : opt.alphas) {
    if (!(a > 0.0)) throw ConfigError("alphas must be > 0");
  }
  for (std::size_t v : opt.v2) {
    if (v == 0) throw ConfigError("--v2 lengths must be >= 1");
  }
  const auto rows = rank_accuracy_experiment(opt.v1, opt.v2, opt.alphas, seed);
  write_rankexp_csv(std::cout, rows);
  if (!opt.out.empty()) {
    const fs::path out = opt.out;
    fs::create_directories(out);
    write_file(out / "rankexp.csv",
               [&](std::ostream& o) { write_rankexp_csv(o, rows); });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rankforge: listwise learning to rank with exact rank positions"};
  app.require_subcommand(1);

  RunConfig cfg;
  CliOptions opt;

  auto* train_cmd = app.add_subcommand("train", "train one split");
  add_run_flags(train_cmd, cfg, opt);
  train_cmd->add_option("--fold", opt.fold,
                        "fold to train when --data is a single file")
      ->capture_default_str();

  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation");
  add_run_flags(cv_cmd, cfg, opt);
  cv_cmd->add_option("--folds", cfg.folds)->capture_default_str();
  cv_cmd->add_option("--jobs", cfg.jobs, "folds trained in parallel")
      ->capture_default_str();

  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint");
  eval_cmd->add_option("--checkpoint", opt.checkpoint)->required();
  eval_cmd->add_option("--data", opt.data)->required();
  eval_cmd->add_option("--cutoffs", opt.cutoffs)->delimiter(',');
  eval_cmd->add_option("--out", opt.out, "also write CSVs here");

  auto* exp_cmd =
      app.add_subcommand("rankexp", "rank accuracy on uniform vectors");
  exp_cmd->add_option("--v1", opt.v1, "vectors per length")
      ->capture_default_str();
  exp_cmd->add_option("--v2", opt.v2, "vector lengths")->delimiter(',');
  exp_cmd->add_option("--alphas", opt.alphas, "smooth-rank steepness values")
      ->delimiter(',');
  exp_cmd->add_option("--seed", cfg.seed)->capture_default_str();
  exp_cmd->add_option("--out", opt.out, "also write rankexp.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (eval_cmd->parsed() && eval_cmd->count("--out") == 0) opt.out.clear();
  if (exp_cmd->parsed() && exp_cmd->count("--out") == 0) opt.out.clear();

  try {
    if (train_cmd->parsed()) return run_train(cfg, opt);
    if (cv_cmd->parsed()) return run_cv(cfg, opt);
    if (eval_cmd->parsed()) return run_eval(opt);
    return run_rankexp(opt, cfg.seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InputError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
}
