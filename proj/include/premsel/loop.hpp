#ifndef PREMSEL_LOOP_HPP
#define PREMSEL_LOOP_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "premsel/atp.hpp"
#include "premsel/learner.hpp"

namespace premsel {

struct RoundReport {
  int round = 0;
  std::string method;
  std::size_t proved = 0;          // theorems with at least one proof
  std::size_t total_theorems = 0;  // size of the evaluated set
  std::size_t total_proofs = 0;    // distinct premise sets in the store
  std::size_t new_proofs = 0;      // growth of total_proofs this round
  double wall_s = 0;
  std::vector<std::string> newly_proved;  // by corpus position
};

struct LoopParams {
  std::string method = "short";  // simple | short | negmin_all | negmin_rand | negmin_1 | knn
  std::uint32_t ratio = 16;
  ModelParams model;
  std::uint32_t knn_k = 40;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  int max_rounds = 30;
  double test_fraction = 342.0 / 1342.0;
  ProverConfig prover;
};

// Test hooks; every callback is optional.
struct LoopHooks {
  std::function<void(int round, const TrainingSet&)> on_training_set;
  std::function<void(int round, const RankingMap& train, const RankingMap& test)> on_rankings;
  std::function<void(int round, const ProofDb& train, const ProofDb& test)> on_update;
};

struct RunResult {
  std::vector<RoundReport> rounds;
  ProofDb train_proofs;
  ProofDb test_proofs;  // equals train_proofs for the single-store algorithm
  RankingMap final_rankings;
  std::optional<Model> final_model;
  std::vector<std::string> train_theorems;
  std::vector<std::string> test_theorems;
};

// Scores every allowed premise with the model and sorts by descending
// relevance; ties resolve to the chronologically earlier premise.
RankingMap create_rankings(const std::vector<std::string>& conjectures, const Model& model,
                           const Corpus& corpus, unsigned workers = 1);

// k-NN counterpart: premises without votes keep score 0 and fall back to
// chronological order.
RankingMap create_rankings_knn(const std::vector<std::string>& conjectures, const Corpus& corpus,
                               const ProofDb& db, std::uint32_t k);

// Seeded uniform shuffle of the allowed premises; each conjecture draws from
// its own derived stream, so adding conjectures never perturbs the others.
RankingMap create_random_rankings(const std::vector<std::string>& conjectures,
                                  const Corpus& corpus, std::uint64_t seed);

// Seeded train/test split of the corpus theorems, test_fraction going to
// test; both sides in chronological order.
std::pair<std::vector<std::string>, std::vector<std::string>> split_theorems(
    const Corpus& corpus, double test_fraction, std::uint64_t seed);

// Train on the train-side proofs, rank and evaluate the test side once.
RunResult run_split(const Corpus& corpus, const ProofDb& initial_proofs, const LoopParams& params,
                    const LoopHooks* hooks = nullptr);

// Feedback loop with a train/test split: each round trains on train-side
// proofs, ranks and evaluates both sides, and updates the two stores
// separately. Test proofs never reach a training set.
RunResult run_incremental(const Corpus& corpus, const ProofDb& initial_proofs,
                          const LoopParams& params, const LoopHooks* hooks = nullptr);

// Feedback loop from nothing: round 0 evaluates random rankings, then loops
// over all theorems with one shared proof store.
RunResult run_scratch(const Corpus& corpus, const LoopParams& params,
                      const LoopHooks* hooks = nullptr);

// CSV: round,method,proved,total_theorems,total_proofs,new_proofs,wall_s.
// zero_wall replaces measured times with 0.000 for byte-reproducible output.
std::string report_csv(const std::vector<RoundReport>& rounds, bool zero_wall);

std::string rankings_to_text(const RankingMap& rankings);

}  // namespace premsel

#endif  // PREMSEL_LOOP_HPP
