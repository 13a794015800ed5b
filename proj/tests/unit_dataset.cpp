#include <doctest.h>

#include <set>
#include <sstream>

#include "premsel/dataset.hpp"
#include "premsel/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace premsel;
using namespace premsel::testing;

namespace {

ProofDb db_with(const std::string& theorem, std::vector<std::vector<std::string>> sets) {
  ProofDb db;
  std::vector<Proof> proofs;
  for (auto& s : sets) proofs.push_back({theorem, make_premise_set(std::move(s))});
  db.update(proofs);
  return db;
}

bool same_training_set(const TrainingSet& a, const TrainingSet& b) {
  return a.labels == b.labels && a.provenance == b.provenance && a.examples == b.examples;
}

}  // namespace

TEST_CASE("training set counts follow ratio and pool size") {
  // a0..a10, theorem a10 with A_t of size 10
  Corpus corpus = chain_corpus(11, 1);
  ProofDb db = db_with("a10", {{"a0", "a1"}});
  TrainingSet ts = create_training_set(db, corpus, PositiveMethod::Simple, 2, 1);
  CHECK(ts.size() == 6);  // 2 positives + min(2*2, 8) negatives
  CHECK(ts.positives() == 2);
  std::set<std::string> negatives;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts.labels[i] == 0) {
      CHECK(ts.provenance[i].first == "a10");
      negatives.insert(ts.provenance[i].second);
    }
  CHECK(negatives.size() == 4);
  CHECK(!negatives.count("a0"));
  CHECK(!negatives.count("a1"));
}

TEST_CASE("short positives come from short proofs only") {
  Corpus corpus = chain_corpus(12, 1);
  ProofDb db = db_with("a11", {{"a0", "a1"},
                               {"a2", "a3", "a4"},
                               {"a5", "a6", "a7", "a8", "a9"}});
  TrainingSet ts = create_training_set(db, corpus, PositiveMethod::Short, 1, 1);
  std::set<std::string> pos;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts.labels[i] == 1) pos.insert(ts.provenance[i].second);
  CHECK(pos == std::set<std::string>{"a0", "a1", "a2", "a3", "a4"});
  // the size-5 proof's exclusive premises are neither positive nor negative
  PremiseSet useful = db.useful_premises("a11");
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts.labels[i] == 0)
      CHECK(!std::binary_search(useful.begin(), useful.end(), ts.provenance[i].second));
}

TEST_CASE("saturated pool yields no negatives") {
  Corpus corpus = chain_corpus(3, 1);  // a2 with A = {a0, a1}
  ProofDb db = db_with("a2", {{"a0", "a1"}});
  TrainingSet ts = create_training_set(db, corpus, PositiveMethod::Simple, 4, 1);
  CHECK(ts.positives() == ts.size());
}

TEST_CASE("cardinality, overlap, and leakage over random corpora") {
  Rng rng(2024);
  for (std::uint32_t ratio : {1u, 2u, 4u, 8u, 16u}) {
    std::size_t n = 12 + rng.below(10);
    std::size_t n_theorems = 3;
    Corpus corpus = chain_corpus(n, n_theorems);
    std::vector<Proof> proofs;
    for (const auto& t : corpus.theorem_names()) {
      auto allowed = corpus.available_premises(t);
      Proof p{t, {}};
      std::size_t size = 1 + rng.below(3);
      for (std::size_t i = 0; i < size; ++i)
        p.premises.push_back(allowed[rng.below(allowed.size())]);
      p.premises = make_premise_set(std::move(p.premises));
      proofs.push_back(std::move(p));
    }
    ProofDb db;
    db.update(proofs);
    TrainingSet ts = create_training_set(db, corpus, PositiveMethod::Simple, ratio, 99);

    std::map<std::string, std::size_t> pos_count, neg_count;
    std::set<std::pair<std::string, std::string>> pos_pairs, neg_pairs;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (ts.labels[i] == 1) {
        ++pos_count[ts.provenance[i].first];
        pos_pairs.insert(ts.provenance[i]);
      } else {
        ++neg_count[ts.provenance[i].first];
        neg_pairs.insert(ts.provenance[i]);
      }
    }
    for (const auto& [t, pos] : pos_count) {
      std::size_t pool = corpus.available_premises(t).size() - db.useful_premises(t).size();
      CHECK(neg_count[t] == std::min<std::size_t>(ratio * pos, pool));
    }
    for (const auto& pair : neg_pairs) {
      CHECK(!pos_pairs.count(pair));  // no overlap
      // no order leakage, and negatives never useful
      CHECK(corpus.position(pair.second) < corpus.position(pair.first));
      PremiseSet useful = db.useful_premises(pair.first);
      CHECK(!std::binary_search(useful.begin(), useful.end(), pair.second));
    }
  }
}

TEST_CASE("training sets are deterministic given the seed") {
  Corpus corpus = chain_corpus(20, 4);
  std::vector<Proof> proofs{{corpus.theorem_names()[0], {"a0", "a1"}},
                            {corpus.theorem_names()[2], {"a3"}}};
  ProofDb db;
  db.update(proofs);
  TrainingSet a = create_training_set(db, corpus, PositiveMethod::Simple, 3, 7);
  TrainingSet b = create_training_set(db, corpus, PositiveMethod::Simple, 3, 7);
  CHECK(same_training_set(a, b));
  TrainingSet c = create_training_set(db, corpus, PositiveMethod::Simple, 3, 8);
  CHECK(!same_training_set(a, c));

  std::ostringstream dump_a, dump_b;
  dump_training_set(a, dump_a);
  dump_training_set(b, dump_b);
  CHECK(dump_a.str() == dump_b.str());
}

TEST_CASE("mining variants match the set definitions on the worked example") {
  // ranking [p3, p1, p4, p2, p5] with useful {p1, p2}
  Corpus corpus = [] {
    std::string text;
    std::vector<std::string> order;
    for (const char* name : {"p3", "p1", "p4", "p2", "p5", "t"}) {
      text += std::string("fof(") + name + ", axiom, s" + name + "(c" + name + ")).\n";
      order.push_back(name);
    }
    return Corpus::build(parse_statements(text), order, {"t"});
  }();
  ProofDb db = db_with("t", {{"p1", "p2"}});
  RankingMap rankings{{"t", {"p3", "p1", "p4", "p2", "p5"}}};

  MiningParams params;
  params.ratio = 1;
  params.seed = 5;

  params.variant = MiningVariant::All;
  auto all = mine_negative_candidates(db, rankings, corpus, params);
  CHECK(all.at("t") == std::vector<std::string>{"p3", "p4"});

  params.variant = MiningVariant::One;
  auto one = mine_negative_candidates(db, rankings, corpus, params);
  CHECK(one.at("t") == std::vector<std::string>{"p3"});

  params.variant = MiningVariant::Rand;
  auto rand = mine_negative_candidates(db, rankings, corpus, params);
  REQUIRE(rand.at("t").size() == 1);  // floor(2/2)
  bool is_p3 = rand.at("t")[0] == "p3";
  bool is_p4 = rand.at("t")[0] == "p4";
  CHECK((is_p3 || is_p4));
}

TEST_CASE("mining equals brute-force set builders on random instances") {
  Rng rng(31337);
  for (int iteration = 0; iteration < 100; ++iteration) {
    std::size_t n_premises = 4 + rng.below(7);  // <= 10
    Corpus corpus = chain_corpus(n_premises + 1, 1);
    const std::string theorem = corpus.theorem_names()[0];
    auto allowed = corpus.available_premises(theorem);

    std::vector<std::string> ranking(allowed.begin(), allowed.end());
    rng.shuffle(ranking);
    std::size_t n_useful = 1 + rng.below(std::min<std::size_t>(3, n_premises));
    std::vector<std::string> useful_pool = ranking;
    rng.sample_prefix(useful_pool, n_useful);
    PremiseSet useful(useful_pool.begin(), useful_pool.begin() + n_useful);
    useful = make_premise_set(std::move(useful));

    ProofDb db = db_with(theorem, {{useful.begin(), useful.end()}});
    RankingMap rankings{{theorem, ranking}};
    std::set<std::string> useful_set(useful.begin(), useful.end());

    MiningParams params;
    params.seed = rng.next();

    auto mined_set = [&](MiningVariant variant) {
      params.variant = variant;
      auto mined = mine_negative_candidates(db, rankings, corpus, params);
      std::set<std::string> out;
      if (mined.count(theorem)) out.insert(mined.at(theorem).begin(), mined.at(theorem).end());
      return out;
    };
    std::set<std::string> expect_all = brute_negmin_all(ranking, useful_set);
    CHECK(mined_set(MiningVariant::All) == expect_all);
    CHECK(mined_set(MiningVariant::One) == brute_negmin_one(ranking, useful_set));
    std::set<std::string> got_rand = mined_set(MiningVariant::Rand);
    CHECK(got_rand.size() == expect_all.size() / 2);
    for (const auto& p : got_rand) CHECK(expect_all.count(p));
  }
}

TEST_CASE("mined pairs are added as extra negatives without duplicates") {
  Corpus corpus = chain_corpus(8, 1);  // theorem a7
  ProofDb db = db_with("a7", {{"a5"}});
  // ranking puts a0..a4 above the useful a5
  RankingMap rankings{{"a7", {"a0", "a1", "a2", "a3", "a4", "a5", "a6"}}};
  MiningParams params;
  params.variant = MiningVariant::All;
  params.positive_method = PositiveMethod::Short;
  params.ratio = 6;  // sampling wants 6 negatives, pool only has 6
  params.seed = 3;
  TrainingSet ts = negative_mining(db, rankings, corpus, params);
  // pool = {a0..a4, a6}: sampling takes all six, mining adds nothing new
  CHECK(ts.positives() == 1);
  CHECK(ts.size() == 7);
  std::set<std::pair<std::string, std::string>> unique(ts.provenance.begin(),
                                                       ts.provenance.end());
  CHECK(unique.size() == ts.size());

  params.ratio = 1;  // sampling takes 1, mining tops it up
  TrainingSet mined = negative_mining(db, rankings, corpus, params);
  std::set<std::pair<std::string, std::string>> mined_unique(mined.provenance.begin(),
                                                             mined.provenance.end());
  CHECK(mined_unique.size() == mined.size());
  // all five non-useful premises ranked above a5 must appear as negatives
  std::set<std::string> negs;
  for (std::size_t i = 0; i < mined.size(); ++i)
    if (mined.labels[i] == 0) negs.insert(mined.provenance[i].second);
  for (const char* p : {"a0", "a1", "a2", "a3", "a4"}) CHECK(negs.count(p));
}

TEST_CASE("mining requires a ranking for every proved theorem") {
  Corpus corpus = chain_corpus(6, 2);
  ProofDb db = db_with("a5", {{"a0"}});
  MiningParams params;
  CHECK_THROWS_AS(mine_negative_candidates(db, RankingMap{}, corpus, params), Error);
}

TEST_CASE("dump format is stable") {
  Corpus corpus = chain_corpus(3, 1);
  ProofDb db = db_with("a2", {{"a0"}});
  TrainingSet ts = create_training_set(db, corpus, PositiveMethod::Simple, 1, 1);
  std::ostringstream out;
  dump_training_set(ts, out);
  std::istringstream lines(out.str());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK((line[0] == '0' || line[0] == '1'));
    CHECK(line.find("a2") != std::string::npos);
    CHECK(line.find(':') != std::string::npos);
  }
  CHECK(rows == ts.size());
}
