#ifndef PREMSEL_SYNTHETIC_HPP
#define PREMSEL_SYNTHETIC_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "premsel/atp.hpp"
#include "premsel/corpus.hpp"

namespace premsel {

// Desk-scale corpus with hidden sufficient premise sets that correlate with
// formula features: every statement is built from the symbol vocabulary of
// its topic, and each theorem is provable exactly from small sets of earlier
// same-topic premises. A learner that picks up the topic signal can place
// those premises at the top; random or vote-based rankings mostly cannot.
struct SyntheticSpec {
  std::size_t theorems = 200;
  std::size_t premises = 500;  // non-theorem premises; they precede all theorems
  std::size_t topics = 25;
  std::uint64_t seed = 0;
  double easy_fraction = 0.2;       // theorems with 1-2 premise proofs
  double second_proof_chance = 0.5;  // theorems with an alternative proof
  double noise_chance = 0.2;         // statements mixing in a foreign symbol
};

struct SyntheticCorpus {
  std::string statements_text;        // fof items, one per line
  std::vector<std::string> order;     // premises then theorems
  std::vector<std::string> theorems;
  OracleTheory theory;
};

SyntheticCorpus gen_synthetic(const SyntheticSpec& spec);

// Writes statements.p, order.txt, theorems.txt, oracle.txt into `dir`.
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

// Convenience for tests: generate and load as a Corpus.
Corpus load_synthetic(const SyntheticCorpus& corpus);

}  // namespace premsel

#endif  // PREMSEL_SYNTHETIC_HPP
