#include "premsel/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "premsel/util.hpp"

namespace premsel {

std::optional<double> SparseVector::find(std::uint32_t col) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), col,
                             [](const SvEntry& e, std::uint32_t c) { return e.col < c; });
  if (it != entries.end() && it->col == col) return it->value;
  return std::nullopt;
}

namespace {

std::vector<std::string> read_name_lines(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::vector<std::string> names;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    names.emplace_back(t);
  }
  return names;
}

}  // namespace

std::map<std::string, FeatureBag> parse_features_file(std::string_view text) {
  std::map<std::string, FeatureBag> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto colon = t.find(':');
    if (colon == std::string_view::npos)
      throw Error("features file line " + std::to_string(lineno) + ": missing ':'");
    std::string name(trim(t.substr(0, colon)));
    if (name.empty() || name.find_first_of(" \t") != std::string::npos)
      throw Error("features file line " + std::to_string(lineno) + ": bad name '" + name + "'");
    FeatureBag bag;
    for (const auto& token : split_ws(t.substr(colon + 1))) {
      auto split = token.rfind(':');
      if (split == std::string::npos || split == 0 || split + 1 == token.size())
        throw Error("features file line " + std::to_string(lineno) + ": bad entry '" + token +
                    "'");
      std::string feature = token.substr(0, split);
      std::uint32_t count = 0;
      auto [ptr, ec] = std::from_chars(token.data() + split + 1, token.data() + token.size(), count);
      if (ec != std::errc() || ptr != token.data() + token.size() || count == 0)
        throw Error("features file line " + std::to_string(lineno) + ": bad count in '" + token +
                    "'");
      bag[feature] += count;
    }
    if (!out.emplace(name, std::move(bag)).second)
      throw Error("features file line " + std::to_string(lineno) + ": duplicate name " + name);
  }
  return out;
}

Corpus Corpus::load(const std::filesystem::path& statements_file,
                    const std::filesystem::path& order_file,
                    const std::filesystem::path& theorems_file,
                    const std::optional<std::filesystem::path>& features_file) {
  std::vector<Statement> statements = parse_statements(read_file(statements_file));
  std::vector<std::string> order = read_name_lines(order_file);
  std::vector<std::string> theorems = read_name_lines(theorems_file);
  std::map<std::string, FeatureBag> overrides;
  if (features_file) overrides = parse_features_file(read_file(*features_file));
  return build(std::move(statements), std::move(order), std::move(theorems), std::move(overrides));
}

Corpus Corpus::build(std::vector<Statement> statements, std::vector<std::string> order,
                     std::vector<std::string> theorems,
                     std::map<std::string, FeatureBag> overrides) {
  Corpus c;
  std::unordered_map<std::string, Statement> by_name;
  for (auto& s : statements) {
    if (by_name.count(s.name)) throw Error("duplicate statement name: " + s.name);
    std::string name = s.name;
    by_name.emplace(std::move(name), std::move(s));
  }
  c.order_ = std::move(order);
  c.index_.reserve(c.order_.size());
  c.statements_.reserve(c.order_.size());
  for (std::size_t i = 0; i < c.order_.size(); ++i) {
    const std::string& name = c.order_[i];
    if (!c.index_.emplace(name, i).second)
      throw Error("order file lists name twice: " + name);
    auto it = by_name.find(name);
    if (it == by_name.end()) throw Error("order file names unknown statement: " + name);
    c.statements_.push_back(std::move(it->second));
    by_name.erase(it);
  }
  if (!by_name.empty())
    throw Error("statement missing from order file: " + by_name.begin()->first);

  std::set<std::string> theorem_set;
  for (const auto& t : theorems) {
    if (!c.index_.count(t)) throw Error("theorem not in order file: " + t);
    if (!theorem_set.insert(t).second) throw Error("theorems file lists name twice: " + t);
  }
  c.theorems_.assign(theorem_set.begin(), theorem_set.end());
  std::sort(c.theorems_.begin(), c.theorems_.end(),
            [&](const std::string& a, const std::string& b) {
              return c.index_.at(a) < c.index_.at(b);
            });
  c.theorem_set_.insert(c.theorems_.begin(), c.theorems_.end());

  for (const auto& [name, bag] : overrides)
    if (!c.index_.count(name)) throw Error("features file names unknown statement: " + name);

  c.bags_.reserve(c.order_.size());
  std::set<std::string> all_features;
  for (std::size_t i = 0; i < c.order_.size(); ++i) {
    auto ov = overrides.find(c.order_[i]);
    FeatureBag bag = ov != overrides.end() ? ov->second : extract_features(c.statements_[i].formula);
    for (const auto& [f, n] : bag) {
      if (n == 0) throw Error("zero feature count for " + c.order_[i]);
      all_features.insert(f);
    }
    c.bags_.push_back(std::move(bag));
  }
  c.feature_names_.assign(all_features.begin(), all_features.end());
  c.feature_ids_.reserve(c.feature_names_.size());
  for (std::uint32_t id = 0; id < c.feature_names_.size(); ++id)
    c.feature_ids_.emplace(c.feature_names_[id], id);

  std::uint32_t n = static_cast<std::uint32_t>(c.feature_names_.size());
  c.vectors_.reserve(c.order_.size());
  for (const auto& bag : c.bags_) {
    SparseVector v;
    v.dim = n;
    v.entries.reserve(bag.size());
    for (const auto& [f, count] : bag)
      v.entries.push_back({c.feature_ids_.at(f), static_cast<double>(count)});
    std::sort(v.entries.begin(), v.entries.end(),
              [](const SvEntry& a, const SvEntry& b) { return a.col < b.col; });
    c.vectors_.push_back(std::move(v));
  }
  return c;
}

std::size_t Corpus::position(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown name: " + name);
  return it->second;
}

const Statement& Corpus::statement(const std::string& name) const {
  return statements_[position(name)];
}

const FeatureBag& Corpus::features(const std::string& name) const {
  return bags_[position(name)];
}

const SparseVector& Corpus::feature_vector(const std::string& name) const {
  return vectors_[position(name)];
}

std::span<const std::string> Corpus::available_premises(const std::string& name) const {
  return {order_.data(), position(name)};
}

SparseVector Corpus::pair_vector(const std::string& t, const std::string& p) const {
  const SparseVector& ft = feature_vector(t);
  const SparseVector& fp = feature_vector(p);
  std::uint32_t n = static_cast<std::uint32_t>(num_features());
  SparseVector out;
  out.dim = 2 * n;
  out.entries.reserve(ft.entries.size() + fp.entries.size());
  out.entries = ft.entries;
  for (const auto& e : fp.entries) out.entries.push_back({e.col + n, e.value});
  return out;
}

std::uint32_t Corpus::feature_id(const std::string& feature) const {
  auto it = feature_ids_.find(feature);
  if (it == feature_ids_.end()) throw Error("unknown feature: " + feature);
  return it->second;
}

}  // namespace premsel
