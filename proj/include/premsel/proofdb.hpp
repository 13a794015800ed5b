#ifndef PREMSEL_PROOFDB_HPP
#define PREMSEL_PROOFDB_HPP

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "premsel/corpus.hpp"

namespace premsel {

// A proof abstracted to the set of premises it used; kept sorted and unique.
using PremiseSet = std::vector<std::string>;

struct Proof {
  std::string theorem;
  PremiseSet premises;
};

PremiseSet make_premise_set(std::vector<std::string> names);
bool premise_subset(const PremiseSet& small, const PremiseSet& big);

// Keeps only inclusion-minimal sets, deduplicated; output sorted
// lexicographically.
std::vector<PremiseSet> subsumption_reduce(std::vector<PremiseSet> sets);

// theorem -> antichain of premise sets (no set contains another).
class ProofDb {
 public:
  // Merges new proofs and re-reduces each touched family. The overload with a
  // corpus rejects proofs whose premises do not strictly precede the theorem.
  void update(std::span<const Proof> proofs);
  void update(std::span<const Proof> proofs, const Corpus& corpus);

  bool has(const std::string& theorem) const { return families_.count(theorem) != 0; }
  const std::vector<PremiseSet>& proofs_for(const std::string& theorem) const;

  // Union of all premise sets; empty for unknown theorems.
  PremiseSet useful_premises(const std::string& theorem) const;

  // The sets with at most m+1 premises, m = minimum size over the family.
  std::vector<PremiseSet> short_proofs(const std::string& theorem) const;

  std::size_t theorem_count() const { return families_.size(); }
  std::size_t proof_count() const;
  std::vector<std::string> theorems() const;

  // Keeps only theorems for which `keep` returns true.
  template <typename Pred>
  ProofDb filtered(Pred keep) const {
    ProofDb out;
    for (const auto& [t, family] : families_)
      if (keep(t)) out.families_.emplace(t, family);
    return out;
  }

  // One line per proof: `theorem: p1 p2 p3` (empty premise list legal).
  static ProofDb load(const std::filesystem::path& path, const Corpus* corpus = nullptr);
  static ProofDb from_text(std::string_view text, const Corpus* corpus = nullptr);
  void save(const std::filesystem::path& path) const;
  std::string to_text() const;

  bool operator==(const ProofDb&) const = default;

 private:
  std::map<std::string, std::vector<PremiseSet>> families_;
};

// Parses proof lines without validation; used by both load() and the
// validator, which wants to list violations instead of throwing.
std::vector<Proof> parse_proof_lines(std::string_view text);

}  // namespace premsel

#endif  // PREMSEL_PROOFDB_HPP
