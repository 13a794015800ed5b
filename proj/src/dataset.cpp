#include "premsel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <set>
#include <unordered_set>

#include "premsel/rng.hpp"
#include "premsel/util.hpp"

namespace premsel {

PositiveMethod positive_method_from(const std::string& name) {
  if (name == "simple") return PositiveMethod::Simple;
  if (name == "short") return PositiveMethod::Short;
  throw Error("unknown positive method: " + name);
}

MiningVariant mining_variant_from(const std::string& name) {
  if (name == "negmin_all") return MiningVariant::All;
  if (name == "negmin_rand") return MiningVariant::Rand;
  if (name == "negmin_1") return MiningVariant::One;
  throw Error("unknown mining variant: " + name);
}

std::size_t TrainingSet::positives() const {
  std::size_t n = 0;
  for (int label : labels) n += label == 1;
  return n;
}

namespace {

std::vector<std::string> db_theorems_by_position(const ProofDb& db, const Corpus& corpus) {
  std::vector<std::string> theorems = db.theorems();
  for (const auto& t : theorems)
    if (!corpus.contains(t)) throw Error("proof database names theorem absent from corpus: " + t);
  std::sort(theorems.begin(), theorems.end(), [&](const std::string& a, const std::string& b) {
    return corpus.position(a) < corpus.position(b);
  });
  return theorems;
}

// Positive premises for one theorem, in chronological order.
std::vector<std::string> positive_premises(const ProofDb& db, const Corpus& corpus,
                                           const std::string& theorem, PositiveMethod method) {
  PremiseSet useful;
  if (method == PositiveMethod::Simple) {
    useful = db.useful_premises(theorem);
  } else {
    PremiseSet merged;
    for (const auto& set : db.short_proofs(theorem))
      merged.insert(merged.end(), set.begin(), set.end());
    useful = make_premise_set(std::move(merged));
  }
  std::sort(useful.begin(), useful.end(), [&](const std::string& a, const std::string& b) {
    return corpus.position(a) < corpus.position(b);
  });
  return useful;
}

TrainingSet build_set(const ProofDb& db, const Corpus& corpus, PositiveMethod method,
                      std::uint32_t ratio, std::uint64_t seed,
                      const std::map<std::string, std::vector<std::string>>* mined) {
  if (db.theorem_count() == 0) throw Error("cannot build a training set from an empty proof db");
  if (ratio < 1) throw Error("ratio must be >= 1");
  TrainingSet ts;
  for (const auto& theorem : db_theorems_by_position(db, corpus)) {
    std::vector<std::string> positives = positive_premises(db, corpus, theorem, method);
    PremiseSet useful = db.useful_premises(theorem);

    auto add = [&](const std::string& premise, int label) {
      ts.examples.push_back(corpus.pair_vector(theorem, premise));
      ts.labels.push_back(label);
      ts.provenance.emplace_back(theorem, premise);
    };
    for (const auto& p : positives) add(p, 1);

    // Candidate pool: allowed premises that no known proof uses.
    std::vector<std::string> pool;
    for (const auto& p : corpus.available_premises(theorem))
      if (!std::binary_search(useful.begin(), useful.end(), p)) pool.push_back(p);

    std::size_t want = std::min<std::size_t>(
        static_cast<std::size_t>(ratio) * positives.size(), pool.size());
    Rng rng = derive_rng(seed, "negatives/" + theorem);
    rng.sample_prefix(pool, want);
    std::unordered_set<std::string> sampled;
    for (std::size_t i = 0; i < want; ++i) {
      add(pool[i], 0);
      sampled.insert(pool[i]);
    }

    if (mined) {
      auto it = mined->find(theorem);
      if (it != mined->end())
        for (const auto& p : it->second)
          if (!sampled.count(p)) add(p, 0);
    }
  }
  return ts;
}

}  // namespace

TrainingSet create_training_set(const ProofDb& db, const Corpus& corpus, PositiveMethod method,
                                std::uint32_t ratio, std::uint64_t seed) {
  return build_set(db, corpus, method, ratio, seed, nullptr);
}

std::map<std::string, std::vector<std::string>> mine_negative_candidates(
    const ProofDb& db, const RankingMap& rankings, const Corpus& corpus,
    const MiningParams& params) {
  std::map<std::string, std::vector<std::string>> mined;
  for (const auto& theorem : db_theorems_by_position(db, corpus)) {
    auto rit = rankings.find(theorem);
    if (rit == rankings.end())
      throw Error("negative mining: no ranking for proved theorem " + theorem);
    const std::vector<std::string>& ranking = rit->second;
    PremiseSet useful = db.useful_premises(theorem);
    auto is_useful = [&](const std::string& p) {
      return std::binary_search(useful.begin(), useful.end(), p);
    };

    // Bound on ranks to harvest: below the worst-ranked useful premise (All,
    // Rand) or below the useful-premise count (One).
    std::size_t bound = 0;
    if (params.variant == MiningVariant::One) {
      bound = useful.size();
    } else {
      bool found = false;
      for (std::size_t rank = 0; rank < ranking.size(); ++rank) {
        if (is_useful(ranking[rank])) {
          bound = rank;
          found = true;
        }
      }
      if (!found) bound = 0;  // no useful premise ranked: nothing to mine
    }

    std::vector<std::string> mp;
    for (std::size_t rank = 0; rank < std::min(bound, ranking.size()); ++rank)
      if (!is_useful(ranking[rank])) mp.push_back(ranking[rank]);

    if (params.variant == MiningVariant::Rand) {
      std::size_t half = mp.size() / 2;
      Rng rng = derive_rng(params.seed, "mining/" + theorem);
      rng.sample_prefix(mp, half);
      mp.resize(half);
    }
    if (!mp.empty()) mined.emplace(theorem, std::move(mp));
  }
  return mined;
}

TrainingSet negative_mining(const ProofDb& db, const RankingMap& rankings, const Corpus& corpus,
                            const MiningParams& params) {
  auto mined = mine_negative_candidates(db, rankings, corpus, params);
  return build_set(db, corpus, params.positive_method, params.ratio, params.seed, &mined);
}

void dump_training_set(const TrainingSet& ts, std::ostream& out) {
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out << ts.labels[i] << ' ' << ts.provenance[i].first << ' ' << ts.provenance[i].second;
    for (const auto& e : ts.examples[i].entries) {
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), e.value);
      out << ' ' << e.col << ':' << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace premsel
