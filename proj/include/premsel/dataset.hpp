#ifndef PREMSEL_DATASET_HPP
#define PREMSEL_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "premsel/proofdb.hpp"

namespace premsel {

enum class PositiveMethod { Simple, Short };
enum class MiningVariant { All, Rand, One };

PositiveMethod positive_method_from(const std::string& name);
MiningVariant mining_variant_from(const std::string& name);

struct MiningParams {
  MiningVariant variant = MiningVariant::All;
  PositiveMethod positive_method = PositiveMethod::Short;
  std::uint32_t ratio = 16;
  std::uint64_t seed = 0;
};

// Parallel example/label/provenance lists. Row order is deterministic:
// theorems by corpus position; per theorem all positives (premises in
// chronological order), then sampled negatives in draw order, then mined
// negatives in rank order.
struct TrainingSet {
  std::vector<SparseVector> examples;
  std::vector<int> labels;
  std::vector<std::pair<std::string, std::string>> provenance;  // (theorem, premise)

  std::size_t size() const { return examples.size(); }
  std::size_t positives() const;
};

// Positives per theorem from all useful premises (Simple) or from the short
// proofs only (Short); negatives sampled without replacement from the allowed
// non-useful premises, min(ratio * positives_t, pool size) of them.
TrainingSet create_training_set(const ProofDb& db, const Corpus& corpus, PositiveMethod method,
                                std::uint32_t ratio, std::uint64_t seed);

// Highly ranked premises that no known proof uses, per theorem. Ranks are
// 0-based positions in the ranking.
//   All:  rank < max rank of any useful premise
//   One:  rank < number of useful premises
//   Rand: floor(|All| / 2) sampled without replacement from All
std::map<std::string, std::vector<std::string>> mine_negative_candidates(
    const ProofDb& db, const RankingMap& rankings, const Corpus& corpus,
    const MiningParams& params);

// create_training_set plus the mined pairs as extra negatives (deduplicated
// against the sampled ones).
TrainingSet negative_mining(const ProofDb& db, const RankingMap& rankings, const Corpus& corpus,
                            const MiningParams& params);

// Debug dump: `label theorem premise col:val col:val ...`, columns ascending.
void dump_training_set(const TrainingSet& ts, std::ostream& out);

}  // namespace premsel

#endif  // PREMSEL_DATASET_HPP
