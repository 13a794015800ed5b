#include "premsel/proofdb.hpp"

#include <algorithm>
#include <sstream>

#include "premsel/util.hpp"

namespace premsel {

PremiseSet make_premise_set(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

bool premise_subset(const PremiseSet& small, const PremiseSet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

std::vector<PremiseSet> subsumption_reduce(std::vector<PremiseSet> sets) {
  // Process smallest first so every potential subsumer is kept before the
  // sets it subsumes are examined.
  std::sort(sets.begin(), sets.end(), [](const PremiseSet& a, const PremiseSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<PremiseSet> kept;
  for (auto& s : sets) {
    bool subsumed = false;
    for (const auto& k : kept) {
      if (premise_subset(k, s)) {
        subsumed = true;
        break;
      }
    }
    if (!subsumed) kept.push_back(std::move(s));
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

void ProofDb::update(std::span<const Proof> proofs) {
  std::map<std::string, std::vector<PremiseSet>> incoming;
  for (const auto& p : proofs) incoming[p.theorem].push_back(p.premises);
  for (auto& [theorem, sets] : incoming) {
    auto& family = families_[theorem];
    for (auto& s : sets) family.push_back(make_premise_set(std::move(s)));
    family = subsumption_reduce(std::move(family));
  }
}

void ProofDb::update(std::span<const Proof> proofs, const Corpus& corpus) {
  for (const auto& p : proofs) {
    std::size_t t_pos = corpus.position(p.theorem);
    for (const auto& premise : p.premises)
      if (corpus.position(premise) >= t_pos)
        throw Error("proof of " + p.theorem + " uses premise " + premise +
                    " that does not precede it");
  }
  update(proofs);
}

const std::vector<PremiseSet>& ProofDb::proofs_for(const std::string& theorem) const {
  static const std::vector<PremiseSet> empty;
  auto it = families_.find(theorem);
  return it == families_.end() ? empty : it->second;
}

PremiseSet ProofDb::useful_premises(const std::string& theorem) const {
  PremiseSet out;
  for (const auto& set : proofs_for(theorem)) out.insert(out.end(), set.begin(), set.end());
  return make_premise_set(std::move(out));
}

std::vector<PremiseSet> ProofDb::short_proofs(const std::string& theorem) const {
  const auto& family = proofs_for(theorem);
  if (family.empty()) throw Error("no proofs recorded for " + theorem);
  std::size_t m = family.front().size();
  for (const auto& s : family) m = std::min(m, s.size());
  std::vector<PremiseSet> out;
  for (const auto& s : family)
    if (s.size() <= m + 1) out.push_back(s);
  return out;
}

std::size_t ProofDb::proof_count() const {
  std::size_t n = 0;
  for (const auto& [t, family] : families_) n += family.size();
  return n;
}

std::vector<std::string> ProofDb::theorems() const {
  std::vector<std::string> out;
  out.reserve(families_.size());
  for (const auto& [t, family] : families_) out.push_back(t);
  return out;
}

std::vector<Proof> parse_proof_lines(std::string_view text) {
  std::vector<Proof> proofs;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto colon = t.find(':');
    if (colon == std::string_view::npos)
      throw Error("proofs file line " + std::to_string(lineno) + ": missing ':'");
    Proof p;
    p.theorem = std::string(trim(t.substr(0, colon)));
    if (p.theorem.empty())
      throw Error("proofs file line " + std::to_string(lineno) + ": empty theorem name");
    p.premises = make_premise_set(split_ws(t.substr(colon + 1)));
    proofs.push_back(std::move(p));
  }
  return proofs;
}

ProofDb ProofDb::from_text(std::string_view text, const Corpus* corpus) {
  std::vector<Proof> proofs = parse_proof_lines(text);
  ProofDb db;
  if (corpus)
    db.update(proofs, *corpus);
  else
    db.update(proofs);
  return db;
}

ProofDb ProofDb::load(const std::filesystem::path& path, const Corpus* corpus) {
  return from_text(read_file(path), corpus);
}

std::string ProofDb::to_text() const {
  std::string out;
  for (const auto& [theorem, family] : families_) {
    for (const auto& set : family) {
      out += theorem;
      out += ':';
      for (const auto& p : set) {
        out += ' ';
        out += p;
      }
      out += '\n';
    }
  }
  return out;
}

void ProofDb::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_text());
}

}  // namespace premsel
