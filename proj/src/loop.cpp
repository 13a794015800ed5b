#include "premsel/loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "premsel/rng.hpp"
#include "premsel/util.hpp"

namespace premsel {

namespace {

bool is_mining_method(const std::string& method) {
  return method == "negmin_all" || method == "negmin_rand" || method == "negmin_1";
}

PositiveMethod positive_method_for(const std::string& method) {
  if (method == "simple") return PositiveMethod::Simple;
  // `short` and all mining variants build positives from short proofs.
  return PositiveMethod::Short;
}

std::vector<std::string> sort_by_position(std::vector<std::string> names, const Corpus& corpus) {
  std::sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
    return corpus.position(a) < corpus.position(b);
  });
  return names;
}

RankingMap rank_with_scores(const std::vector<std::string>& conjectures, const Corpus& corpus,
                            const std::function<double(const std::string&, const std::string&)>& score,
                            unsigned workers) {
  std::vector<std::vector<std::string>> ranked(conjectures.size());
  parallel_for(conjectures.size(), workers, [&](std::size_t i) {
    const std::string& c = conjectures[i];
    auto allowed = corpus.available_premises(c);
    struct Scored {
      double s;
      std::size_t position;
    };
    std::vector<Scored> scored(allowed.size());
    for (std::size_t j = 0; j < allowed.size(); ++j) scored[j] = {score(c, allowed[j]), j};
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.s != b.s) return a.s > b.s;
      return a.position < b.position;
    });
    ranked[i].reserve(scored.size());
    for (const auto& s : scored) ranked[i].push_back(allowed[s.position]);
  });
  RankingMap out;
  for (std::size_t i = 0; i < conjectures.size(); ++i)
    out.emplace(conjectures[i], std::move(ranked[i]));
  return out;
}

struct ProvedTracker {
  std::set<std::string> proved;

  std::vector<std::string> absorb(const ProofDb& db, const Corpus& corpus) {
    std::vector<std::string> fresh;
    for (const auto& t : db.theorems())
      if (proved.insert(t).second) fresh.push_back(t);
    return sort_by_position(std::move(fresh), corpus);
  }
};

std::vector<Proof> proofs_from_results(const std::vector<ProverResult>& results) {
  std::vector<Proof> proofs;
  for (const auto& r : results)
    if (r.status == ProverStatus::Proved) proofs.push_back({r.theorem, r.used});
  return proofs;
}

}  // namespace

RankingMap create_rankings(const std::vector<std::string>& conjectures, const Model& model,
                           const Corpus& corpus, unsigned workers) {
  for (const auto& c : conjectures) corpus.position(c);  // reject unknown names
  return rank_with_scores(
      conjectures, corpus,
      [&](const std::string& c, const std::string& p) {
        return model.predict_pair(corpus.feature_vector(c), corpus.feature_vector(p));
      },
      workers);
}

RankingMap create_rankings_knn(const std::vector<std::string>& conjectures, const Corpus& corpus,
                               const ProofDb& db, std::uint32_t k) {
  RankingMap out;
  for (const auto& c : conjectures) {
    std::map<std::string, double> votes = knn_rank(c, corpus, db, k);
    auto allowed = corpus.available_premises(c);
    struct Scored {
      double s;
      std::size_t position;
    };
    std::vector<Scored> scored(allowed.size());
    for (std::size_t j = 0; j < allowed.size(); ++j) {
      auto it = votes.find(allowed[j]);
      scored[j] = {it == votes.end() ? 0.0 : it->second, j};
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.s != b.s) return a.s > b.s;
      return a.position < b.position;
    });
    std::vector<std::string> ranking;
    ranking.reserve(scored.size());
    for (const auto& s : scored) ranking.push_back(allowed[s.position]);
    out.emplace(c, std::move(ranking));
  }
  return out;
}

RankingMap create_random_rankings(const std::vector<std::string>& conjectures,
                                  const Corpus& corpus, std::uint64_t seed) {
  RankingMap out;
  for (const auto& c : conjectures) {
    auto allowed = corpus.available_premises(c);
    std::vector<std::string> ranking(allowed.begin(), allowed.end());
    Rng rng = derive_rng(seed, "shuffle/" + c);
    rng.shuffle(ranking);
    out.emplace(c, std::move(ranking));
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_theorems(
    const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  std::vector<std::string> theorems = corpus.theorem_names();
  if (theorems.size() < 2) throw Error("need at least two theorems for a train/test split");
  Rng rng = derive_rng(seed, "split");
  rng.shuffle(theorems);
  std::size_t n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(theorems.size()) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, theorems.size() - 1);
  std::vector<std::string> test(theorems.begin(), theorems.begin() + n_test);
  std::vector<std::string> train(theorems.begin() + n_test, theorems.end());
  return {sort_by_position(std::move(train), corpus), sort_by_position(std::move(test), corpus)};
}

namespace {

// Shared per-round machinery for the three algorithms.
class Driver {
 public:
  Driver(const Corpus& corpus, const LoopParams& params, const LoopHooks* hooks)
      : corpus_(corpus),
        params_(params),
        hooks_(hooks),
        evaluator_(corpus, params.prover) {}

  TrainingSet build_training_set(const ProofDb& db, int round, const RankingMap* last_rankings) {
    std::uint64_t round_seed = derive_seed(params_.seed, "round/" + std::to_string(round));
    if (is_mining_method(params_.method) && last_rankings != nullptr) {
      MiningParams mp;
      mp.variant = mining_variant_from(params_.method);
      mp.positive_method = PositiveMethod::Short;
      mp.ratio = params_.ratio;
      mp.seed = round_seed;
      return negative_mining(db, *last_rankings, corpus_, mp);
    }
    return create_training_set(db, corpus_, positive_method_for(params_.method), params_.ratio,
                               round_seed);
  }

  RankingMap rank(const std::vector<std::string>& conjectures, const Model* model,
                  const ProofDb& db) {
    if (params_.method == "knn") return create_rankings_knn(conjectures, corpus_, db, params_.knn_k);
    return create_rankings(conjectures, *model, corpus_, params_.workers);
  }

  std::vector<Proof> evaluate(const RankingMap& rankings) {
    return proofs_from_results(evaluator_.evaluate(rankings));
  }

  ModelParams model_params() const {
    ModelParams mp = params_.model;
    mp.workers = params_.workers;
    return mp;
  }

  const Corpus& corpus_;
  const LoopParams& params_;
  const LoopHooks* hooks_;
  Evaluator evaluator_;
};

RoundReport make_report(int round, const std::string& method, const ProofDb& db,
                        std::size_t total_theorems, std::size_t proofs_before,
                        std::vector<std::string> newly_proved, double wall_s) {
  RoundReport report;
  report.round = round;
  report.method = method;
  report.proved = db.theorem_count();
  report.total_theorems = total_theorems;
  report.total_proofs = db.proof_count();
  report.new_proofs = report.total_proofs > proofs_before ? report.total_proofs - proofs_before : 0;
  report.wall_s = wall_s;
  report.newly_proved = std::move(newly_proved);
  return report;
}

}  // namespace

RunResult run_split(const Corpus& corpus, const ProofDb& initial_proofs, const LoopParams& params,
                    const LoopHooks* hooks) {
  if (corpus.theorem_names().empty()) throw Error("corpus has no theorems");
  if (is_mining_method(params.method))
    throw Error("negative mining needs the feedback loop; use the incremental or scratch algorithm");
  Driver driver(corpus, params, hooks);
  auto [train, test] = split_theorems(corpus, params.test_fraction, params.seed);
  std::set<std::string> train_set(train.begin(), train.end());
  ProofDb train_db =
      initial_proofs.filtered([&](const std::string& t) { return train_set.count(t) != 0; });
  if (train_db.theorem_count() == 0) throw Error("no proofs available for the training side");

  Stopwatch watch;
  RunResult result;
  result.train_theorems = train;
  result.test_theorems = test;
  result.train_proofs = train_db;

  std::optional<Model> model;
  if (params.method != "knn") {
    TrainingSet ts = driver.build_training_set(train_db, 0, nullptr);
    if (hooks && hooks->on_training_set) hooks->on_training_set(0, ts);
    model = train_gbdt(ts, driver.model_params());
  }
  RankingMap rankings = driver.rank(test, model ? &*model : nullptr, train_db);
  if (hooks && hooks->on_rankings) hooks->on_rankings(0, RankingMap{}, rankings);
  std::vector<Proof> proofs = driver.evaluate(rankings);
  ProofDb test_db;
  test_db.update(proofs, corpus);
  if (hooks && hooks->on_update) hooks->on_update(0, train_db, test_db);

  ProvedTracker tracker;
  result.rounds.push_back(make_report(0, params.method, test_db, test.size(), 0,
                                      tracker.absorb(test_db, corpus), watch.seconds()));
  result.test_proofs = std::move(test_db);
  result.final_rankings = std::move(rankings);
  result.final_model = std::move(model);
  return result;
}

RunResult run_incremental(const Corpus& corpus, const ProofDb& initial_proofs,
                          const LoopParams& params, const LoopHooks* hooks) {
  if (corpus.theorem_names().empty()) throw Error("corpus has no theorems");
  Driver driver(corpus, params, hooks);
  auto [train, test] = split_theorems(corpus, params.test_fraction, params.seed);
  std::set<std::string> train_set(train.begin(), train.end());
  ProofDb train_db =
      initial_proofs.filtered([&](const std::string& t) { return train_set.count(t) != 0; });
  ProofDb test_db =
      initial_proofs.filtered([&](const std::string& t) { return train_set.count(t) == 0; });
  if (train_db.theorem_count() == 0) throw Error("no proofs available for the training side");

  RunResult result;
  result.train_theorems = train;
  result.test_theorems = test;

  ProvedTracker tracker;
  tracker.absorb(test_db, corpus);  // input proofs are not "newly proved"

  bool use_knn = params.method == "knn";
  TrainingSet ts;
  if (!use_knn) {
    ts = driver.build_training_set(train_db, 0, nullptr);
    if (hooks && hooks->on_training_set) hooks->on_training_set(0, ts);
  }
  for (int round = 1; round <= params.max_rounds; ++round) {
    Stopwatch watch;
    std::optional<Model> model;
    if (!use_knn) model = train_gbdt(ts, driver.model_params());
    RankingMap train_rankings = driver.rank(train, model ? &*model : nullptr, train_db);
    RankingMap test_rankings = driver.rank(test, model ? &*model : nullptr, train_db);
    if (hooks && hooks->on_rankings) hooks->on_rankings(round, train_rankings, test_rankings);

    std::size_t train_before = train_db.proof_count();
    std::size_t test_before = test_db.proof_count();
    train_db.update(driver.evaluate(train_rankings), corpus);
    test_db.update(driver.evaluate(test_rankings), corpus);
    if (hooks && hooks->on_update) hooks->on_update(round, train_db, test_db);

    if (!use_knn) {
      ts = driver.build_training_set(train_db, round, &train_rankings);
      if (hooks && hooks->on_training_set) hooks->on_training_set(round, ts);
    }

    result.rounds.push_back(make_report(round, params.method, test_db, test.size(), test_before,
                                        tracker.absorb(test_db, corpus), watch.seconds()));
    result.final_rankings = std::move(test_rankings);
    result.final_model = std::move(model);
    bool grew = train_db.proof_count() > train_before || test_db.proof_count() > test_before;
    if (!grew) break;
  }
  result.train_proofs = std::move(train_db);
  result.test_proofs = std::move(test_db);
  return result;
}

RunResult run_scratch(const Corpus& corpus, const LoopParams& params, const LoopHooks* hooks) {
  Driver driver(corpus, params, hooks);
  const std::vector<std::string>& theorems = corpus.theorem_names();

  RunResult result;
  result.train_theorems = theorems;
  result.test_theorems = theorems;
  ProofDb db;
  ProvedTracker tracker;

  {
    Stopwatch watch;
    RankingMap random_rankings =
        create_random_rankings(theorems, corpus, derive_seed(params.seed, "random-rankings"));
    if (hooks && hooks->on_rankings) hooks->on_rankings(0, random_rankings, random_rankings);
    db.update(driver.evaluate(random_rankings), corpus);
    if (hooks && hooks->on_update) hooks->on_update(0, db, db);
    result.rounds.push_back(make_report(0, params.method, db, theorems.size(), 0,
                                        tracker.absorb(db, corpus), watch.seconds()));
    result.final_rankings = std::move(random_rankings);
  }
  if (db.theorem_count() == 0) {
    result.test_proofs = db;
    result.train_proofs = std::move(db);
    return result;
  }

  bool use_knn = params.method == "knn";
  TrainingSet ts;
  RankingMap last_rankings;
  if (!use_knn) {
    ts = driver.build_training_set(db, 0, nullptr);
    if (hooks && hooks->on_training_set) hooks->on_training_set(0, ts);
  }
  for (int round = 1; round <= params.max_rounds; ++round) {
    Stopwatch watch;
    std::optional<Model> model;
    if (!use_knn) model = train_gbdt(ts, driver.model_params());
    RankingMap rankings = driver.rank(theorems, model ? &*model : nullptr, db);
    if (hooks && hooks->on_rankings) hooks->on_rankings(round, rankings, rankings);

    std::size_t before = db.proof_count();
    db.update(driver.evaluate(rankings), corpus);
    if (hooks && hooks->on_update) hooks->on_update(round, db, db);

    if (!use_knn) {
      ts = driver.build_training_set(db, round, &rankings);
      if (hooks && hooks->on_training_set) hooks->on_training_set(round, ts);
    }

    result.rounds.push_back(make_report(round, params.method, db, theorems.size(), before,
                                        tracker.absorb(db, corpus), watch.seconds()));
    result.final_rankings = std::move(rankings);
    result.final_model = std::move(model);
    if (db.proof_count() <= before) break;
  }
  result.test_proofs = db;
  result.train_proofs = std::move(db);
  return result;
}

std::string report_csv(const std::vector<RoundReport>& rounds, bool zero_wall) {
  std::string out = "round,method,proved,total_theorems,total_proofs,new_proofs,wall_s\n";
  for (const auto& r : rounds) {
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.3f", zero_wall ? 0.0 : r.wall_s);
    out += std::to_string(r.round);
    out += ',';
    out += r.method;
    out += ',';
    out += std::to_string(r.proved);
    out += ',';
    out += std::to_string(r.total_theorems);
    out += ',';
    out += std::to_string(r.total_proofs);
    out += ',';
    out += std::to_string(r.new_proofs);
    out += ',';
    out += wall;
    out += '\n';
  }
  return out;
}

std::string rankings_to_text(const RankingMap& rankings) {
  std::string out;
  for (const auto& [c, premises] : rankings) {
    out += c;
    out += ':';
    for (const auto& p : premises) {
      out += ' ';
      out += p;
    }
    out += '\n';
  }
  return out;
}

}  // namespace premsel
