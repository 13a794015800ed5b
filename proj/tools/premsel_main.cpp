// premsel: premise-selection experiments with a boosted-tree pairwise
// relevance model and an ATP feedback loop.
//
// Commands: validate, run, report, gen-synthetic. Exit codes: 0 success,
// 1 usage, 2 invalid input, 3 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "premsel/config.hpp"
#include "premsel/loop.hpp"
#include "premsel/synthetic.hpp"
#include "premsel/util.hpp"

namespace fs = std::filesystem;
using namespace premsel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitRuntime = 3;

struct CliOverrides {
  std::vector<std::pair<std::string, std::string>> values;
};

void add_config_flags(CLI::App* cmd, std::string& config_path, CliOverrides& overrides) {
  cmd->add_option("--config", config_path, "configuration file (key = value lines)");
  static const char* keys[] = {
      "statements", "order", "theorems", "features", "proofs", "oracle_theory", "output_dir",
      "algorithm", "method", "ratio", "numberOfTrees", "maxDepth", "eta", "lambda",
      "min_child_weight", "k", "prover", "prover_template", "cpu_limit", "memory_limit",
      "keep_problems", "max_rounds", "seed", "workers", "test_fraction", "timing",
      "dump_training_sets", "sweep_ratio"};
  for (const char* key : keys) {
    cmd->add_option_function<std::string>(
        std::string("--") + key,
        [key, &overrides](const std::string& value) { overrides.values.emplace_back(key, value); },
        std::string("config key ") + key);
  }
}

Config resolve_config(const std::string& config_path, const CliOverrides& overrides) {
  Config config;
  if (!config_path.empty()) config = parse_config_file(config_path);
  for (const auto& [key, value] : overrides.values) config_set(config, key, value);
  return config;
}

struct LoadedInputs {
  Corpus corpus;
  ProofDb proofs;
  OracleTheory theory;
};

LoadedInputs load_inputs(const Config& config, bool need_proofs) {
  validate_config(config);
  if (config.statements.empty() || config.order.empty() || config.theorems.empty())
    throw Error("statements, order, and theorems paths are required");
  LoadedInputs in{
      Corpus::load(config.statements, config.order, config.theorems,
                   config.features.empty()
                       ? std::nullopt
                       : std::make_optional<fs::path>(config.features)),
      {},
      {}};
  if (!config.proofs.empty()) in.proofs = ProofDb::load(config.proofs, &in.corpus);
  else if (need_proofs)
    throw Error("algorithm '" + config.algorithm + "' needs an initial proofs file");
  if (config.prover == "oracle") {
    if (config.oracle_theory.empty())
      throw Error("oracle prover needs an oracle_theory file");
    in.theory = OracleTheory::load(config.oracle_theory);
  }
  return in;
}

LoopParams loop_params(const Config& config, const LoadedInputs& in) {
  LoopParams params;
  params.method = config.method;
  params.ratio = config.ratio;
  params.model.number_of_trees = config.numberOfTrees;
  params.model.max_depth = config.maxDepth;
  params.model.eta = config.eta;
  params.model.lambda = config.lambda;
  params.model.min_child_weight = config.min_child_weight;
  params.model.seed = config.seed;
  params.knn_k = config.k;
  params.seed = config.seed;
  params.workers = config.workers;
  params.max_rounds = config.max_rounds;
  params.test_fraction = config.test_fraction;
  params.prover.kind = config.prover == "oracle" ? ProverKind::Oracle : ProverKind::External;
  params.prover.theory = &in.theory;
  params.prover.command_template = config.prover_template;
  params.prover.cpu_limit = config.cpu_limit;
  params.prover.memory_limit = config.memory_limit;
  params.prover.workers = config.workers;
  params.prover.keep_problems = config.keep_problems;
  if (!config.output_dir.empty())
    params.prover.problem_dir = fs::path(config.output_dir) / "problems";
  return params;
}

std::string input_hashes(const Config& config) {
  std::string out;
  auto add = [&](std::string_view key, const std::string& path) {
    if (path.empty()) return;
    out += "hash.";
    out += key;
    out += " = ";
    out += hex64(fnv1a(read_file(path)));
    out += '\n';
  };
  add("statements", config.statements);
  add("order", config.order);
  add("theorems", config.theorems);
  add("features", config.features);
  add("proofs", config.proofs);
  add("oracle_theory", config.oracle_theory);
  return out;
}

void write_run_outputs(const Config& config, const RunResult& result) {
  fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  bool zero_wall = config.timing == "zero";
  write_file_atomic(out_dir / "report.csv", report_csv(result.rounds, zero_wall));
  write_file_atomic(out_dir / "rankings.txt", rankings_to_text(result.final_rankings));
  ProofDb merged = result.train_proofs;
  if (&result.test_proofs != &result.train_proofs) {
    std::vector<Proof> extra;
    for (const auto& t : result.test_proofs.theorems())
      for (const auto& set : result.test_proofs.proofs_for(t)) extra.push_back({t, set});
    merged.update(extra);
  }
  merged.save(out_dir / "proofs.txt");
  if (result.final_model) result.final_model->save(out_dir / "model.txt");
  fs::path names_dir = out_dir / "proved_names";
  fs::create_directories(names_dir);
  for (const auto& round : result.rounds) {
    char name[32];
    std::snprintf(name, sizeof(name), "round_%03d.txt", round.round);
    std::string text;
    for (const auto& t : round.newly_proved) {
      text += t;
      text += '\n';
    }
    write_file_atomic(names_dir / name, text);
  }
  std::string manifest = "# premsel run manifest\n";
  manifest += print_config(config);
  manifest += input_hashes(config);
  write_file_atomic(out_dir / "manifest.txt", manifest);
}

int cmd_validate(const Config& config) {
  std::vector<std::string> violations;
  std::optional<Corpus> corpus;
  try {
    validate_config(config);
    if (config.statements.empty() || config.order.empty() || config.theorems.empty())
      throw Error("statements, order, and theorems paths are required");
    corpus = Corpus::load(config.statements, config.order, config.theorems,
                          config.features.empty()
                              ? std::nullopt
                              : std::make_optional<fs::path>(config.features));
    std::cout << "premises: " << corpus->size() << '\n';
    std::cout << "theorems: " << corpus->theorem_names().size() << '\n';
    std::cout << "features: " << corpus->num_features() << '\n';
  } catch (const Error& e) {
    violations.push_back(e.what());
  }

  if (corpus && !config.proofs.empty()) {
    try {
      std::vector<Proof> proofs = parse_proof_lines(read_file(config.proofs));
      std::cout << "proof lines: " << proofs.size() << '\n';
      for (const auto& p : proofs) {
        if (!corpus->contains(p.theorem)) {
          violations.push_back("proofs: unknown theorem " + p.theorem);
          continue;
        }
        if (!corpus->is_theorem(p.theorem))
          violations.push_back("proofs: " + p.theorem + " is not in the theorems file");
        std::size_t t_pos = corpus->position(p.theorem);
        for (const auto& premise : p.premises) {
          if (!corpus->contains(premise))
            violations.push_back("proofs: unknown premise " + premise + " for " + p.theorem);
          else if (corpus->position(premise) >= t_pos)
            violations.push_back("proofs: premise " + premise + " does not precede " + p.theorem);
        }
      }
    } catch (const Error& e) {
      violations.push_back(e.what());
    }
  }

  if (corpus && !config.oracle_theory.empty()) {
    try {
      OracleTheory theory = OracleTheory::load(config.oracle_theory);
      std::cout << "oracle theorems: " << theory.theorem_count() << '\n';
      for (const auto& [theorem, family] : theory.all()) {
        if (!corpus->contains(theorem)) {
          violations.push_back("oracle: unknown theorem " + theorem);
          continue;
        }
        std::size_t t_pos = corpus->position(theorem);
        for (const auto& set : family)
          for (const auto& premise : set) {
            if (!corpus->contains(premise))
              violations.push_back("oracle: unknown premise " + premise + " for " + theorem);
            else if (corpus->position(premise) >= t_pos)
              violations.push_back("oracle: premise " + premise + " does not precede " + theorem);
          }
      }
    } catch (const Error& e) {
      violations.push_back(e.what());
    }
  }

  for (const auto& v : violations) std::cout << "violation: " << v << '\n';
  std::cout << (violations.empty() ? "ok" : "invalid") << '\n';
  return violations.empty() ? kExitOk : kExitBadInput;
}

int cmd_run(const Config& config, const LoadedInputs& in) {
  LoopParams params = loop_params(config, in);

  fs::create_directories(config.output_dir);
  LoopHooks hooks;
  if (config.dump_training_sets) {
    hooks.on_training_set = [&config](int round, const TrainingSet& ts) {
      char name[48];
      std::snprintf(name, sizeof(name), "training_set_round_%03d.txt", round);
      std::ostringstream text;
      dump_training_set(ts, text);
      write_file_atomic(fs::path(config.output_dir) / name, text.str());
    };
  }
  // Experiment state survives interruption: the proof store is rewritten
  // atomically after every round.
  hooks.on_update = [&config](int, const ProofDb& train_db, const ProofDb& test_db) {
    ProofDb merged = train_db;
    if (&test_db != &train_db) {
      std::vector<Proof> extra;
      for (const auto& t : test_db.theorems())
        for (const auto& set : test_db.proofs_for(t)) extra.push_back({t, set});
      merged.update(extra);
    }
    merged.save(fs::path(config.output_dir) / "proofs.txt");
  };
  const LoopHooks* hooks_ptr = &hooks;

  RunResult result;
  if (config.algorithm == "split") {
    if (!config.sweep_ratio.empty()) {
      int row = 0;
      for (std::uint32_t ratio : config.sweep_ratio) {
        LoopParams sweep = params;
        sweep.ratio = ratio;
        RunResult one = run_split(in.corpus, in.proofs, sweep, hooks_ptr);
        RoundReport report = one.rounds.front();
        report.round = row++;
        report.method = config.method + ":ratio=" + std::to_string(ratio);
        result.rounds.push_back(std::move(report));
        result.final_rankings = std::move(one.final_rankings);
        result.final_model = std::move(one.final_model);
        result.train_proofs = std::move(one.train_proofs);
        result.test_proofs = std::move(one.test_proofs);
      }
    } else {
      result = run_split(in.corpus, in.proofs, params, hooks_ptr);
    }
  } else if (config.algorithm == "incremental") {
    result = run_incremental(in.corpus, in.proofs, params, hooks_ptr);
  } else {
    result = run_scratch(in.corpus, params, hooks_ptr);
  }

  write_run_outputs(config, result);
  for (const auto& round : result.rounds)
    std::cout << "round " << round.round << " method " << round.method << " proved "
              << round.proved << "/" << round.total_theorems << " proofs " << round.total_proofs
              << " (" << round.wall_s << "s)\n";
  return kExitOk;
}

int cmd_report(const std::string& dir) {
  if (dir.empty()) throw Error("report needs a run directory");
  fs::path root(dir);
  if (!fs::exists(root)) throw Error("no such directory: " + dir);
  std::vector<fs::path> reports;
  if (fs::exists(root / "report.csv")) reports.push_back(root / "report.csv");
  if (fs::is_directory(root))
    for (const auto& entry : fs::directory_iterator(root))
      if (entry.is_directory() && fs::exists(entry.path() / "report.csv"))
        reports.push_back(entry.path() / "report.csv");
  std::sort(reports.begin(), reports.end());
  if (reports.empty()) throw Error("no report.csv found under " + dir);

  struct Row {
    std::string method;
    long round;
    std::string proved;
    std::string total_proofs;
  };
  std::vector<Row> rows;
  for (const auto& path : reports) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw Error("empty report: " + path.string());
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      std::vector<std::string> cells;
      std::istringstream cs(line);
      std::string cell;
      while (std::getline(cs, cell, ',')) cells.push_back(cell);
      if (cells.size() < 7) throw Error("malformed report row in " + path.string());
      rows.push_back({cells[1], std::stol(cells[0]), cells[2], cells[4]});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.method != b.method) return a.method < b.method;
    return a.round < b.round;
  });
  std::string out = "method,round,proved,total_proofs\n";
  for (const auto& r : rows)
    out += r.method + "," + std::to_string(r.round) + "," + r.proved + "," + r.total_proofs + "\n";
  write_file_atomic(root / "series.csv", out);
  std::cout << "wrote " << (root / "series.csv").string() << " (" << rows.size() << " rows)\n";
  return kExitOk;
}

int cmd_gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
  if (out_dir.empty()) throw Error("gen-synthetic needs --out");
  SyntheticCorpus corpus = gen_synthetic(spec);
  write_synthetic(corpus, out_dir);
  // Starter configuration for a desk-scale feedback loop on this corpus.
  Config cfg;
  cfg.statements = (fs::path(out_dir) / "statements.p").string();
  cfg.order = (fs::path(out_dir) / "order.txt").string();
  cfg.theorems = (fs::path(out_dir) / "theorems.txt").string();
  cfg.oracle_theory = (fs::path(out_dir) / "oracle.txt").string();
  cfg.output_dir = (fs::path(out_dir) / "run").string();
  cfg.algorithm = "scratch";
  cfg.method = "short";
  cfg.ratio = 8;
  cfg.numberOfTrees = 80;
  cfg.maxDepth = 6;
  cfg.max_rounds = 5;
  cfg.seed = spec.seed;
  cfg.workers = 2;
  write_file_atomic(fs::path(out_dir) / "run.conf", print_config(cfg));
  std::cout << "wrote corpus (" << corpus.order.size() << " statements, "
            << corpus.theorems.size() << " theorems) under " << out_dir << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"premise selection with boosted trees and ATP feedback"};
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides overrides;

  CLI::App* validate = app.add_subcommand("validate", "check corpus, proofs, and oracle files");
  add_config_flags(validate, config_path, overrides);

  CLI::App* run = app.add_subcommand("run", "run a premise-selection experiment");
  add_config_flags(run, config_path, overrides);

  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "emit tidy plot data from run directories");
  report->add_option("dir", report_dir, "run directory (or parent of several)")->required();

  SyntheticSpec spec;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("gen-synthetic", "generate a synthetic corpus + oracle");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--theorems", spec.theorems, "number of theorems");
  synth->add_option("--premises", spec.premises, "number of non-theorem premises");
  synth->add_option("--topics", spec.topics, "number of symbol topics");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--easy-fraction", spec.easy_fraction, "fraction of easy theorems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (app.got_subcommand(validate)) {
    try {
      return cmd_validate(resolve_config(config_path, overrides));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitBadInput;
    }
  }

  if (app.got_subcommand(run)) {
    // Loading and validating inputs is the "bad input" phase; everything
    // after starts producing results and failures leave a marker behind.
    Config config;
    std::optional<LoadedInputs> in;
    try {
      config = resolve_config(config_path, overrides);
      if (config.output_dir.empty()) throw Error("run needs an output_dir");
      in = load_inputs(config, config.algorithm != "scratch");
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitBadInput;
    }
    try {
      return cmd_run(config, *in);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      std::error_code ec;
      fs::create_directories(config.output_dir, ec);
      if (!ec) {
        std::ofstream marker(fs::path(config.output_dir) / "PARTIAL_RESULTS");
        marker << e.what() << '\n';
      }
      return kExitRuntime;
    }
  }

  if (app.got_subcommand(report)) {
    try {
      return cmd_report(report_dir);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitBadInput;
    }
  }

  if (app.got_subcommand(synth)) {
    try {
      return cmd_gen_synthetic(spec, synth_out);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  return kExitUsage;
}
