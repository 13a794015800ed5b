#ifndef PREMSEL_CORPUS_HPP
#define PREMSEL_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "premsel/tptp.hpp"

namespace premsel {

struct SvEntry {
  std::uint32_t col;
  double value;

  bool operator==(const SvEntry&) const = default;
};

// Sparse feature vector: strictly increasing column ids, values >= 1.
struct SparseVector {
  std::vector<SvEntry> entries;
  std::uint32_t dim = 0;

  std::optional<double> find(std::uint32_t col) const;
  bool operator==(const SparseVector&) const = default;
};

// Conjecture name -> premises ordered by descending relevance.
using RankingMap = std::map<std::string, std::vector<std::string>>;

// Immutable theory: statements, feature bags, a total chronological order on
// premise names, and the theorem subset. Safe to share across threads after
// construction.
class Corpus {
 public:
  static Corpus load(const std::filesystem::path& statements_file,
                     const std::filesystem::path& order_file,
                     const std::filesystem::path& theorems_file,
                     const std::optional<std::filesystem::path>& features_file = std::nullopt);

  // In-memory construction; `order` must list every statement name exactly
  // once, `theorems` a subset of it. `overrides` replaces extracted bags for
  // the named statements only.
  static Corpus build(std::vector<Statement> statements, std::vector<std::string> order,
                      std::vector<std::string> theorems,
                      std::map<std::string, FeatureBag> overrides = {});

  std::size_t size() const { return order_.size(); }
  std::size_t num_features() const { return feature_names_.size(); }

  const std::vector<std::string>& premise_names() const { return order_; }
  const std::vector<std::string>& theorem_names() const { return theorems_; }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  bool is_theorem(const std::string& name) const { return theorem_set_.count(name) != 0; }

  std::size_t position(const std::string& name) const;
  const Statement& statement(const std::string& name) const;
  const FeatureBag& features(const std::string& name) const;
  const SparseVector& feature_vector(const std::string& name) const;

  // All premises strictly preceding `name`, in chronological order.
  std::span<const std::string> available_premises(const std::string& name) const;

  // Concatenated pair vector of dimension 2n: features of `t` in [0, n),
  // features of `p` shifted by +n.
  SparseVector pair_vector(const std::string& t, const std::string& p) const;

  // Lexicographically sorted feature names; column id = index.
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::uint32_t feature_id(const std::string& feature) const;

 private:
  std::vector<std::string> order_;
  std::vector<std::string> theorems_;  // chronological order
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_set<std::string> theorem_set_;
  std::vector<Statement> statements_;     // aligned with order_
  std::vector<FeatureBag> bags_;          // aligned with order_
  std::vector<SparseVector> vectors_;     // aligned with order_
  std::vector<std::string> feature_names_;
  std::unordered_map<std::string, std::uint32_t> feature_ids_;
};

// Parses a `name: feat:count feat:count ...` override file.
std::map<std::string, FeatureBag> parse_features_file(std::string_view text);

}  // namespace premsel

#endif  // PREMSEL_CORPUS_HPP
