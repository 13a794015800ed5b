#ifndef PREMSEL_TESTS_FIXTURES_HPP
#define PREMSEL_TESTS_FIXTURES_HPP

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "premsel/corpus.hpp"
#include "premsel/util.hpp"

namespace premsel::testing {

inline SparseVector sv(std::vector<SvEntry> entries, std::uint32_t dim) {
  SparseVector v;
  v.entries = std::move(entries);
  v.dim = dim;
  return v;
}

// Corpus with k chained statements a0 < a1 < ... sharing a per-index symbol,
// the last `theorems` of them declared as theorems.
inline Corpus chain_corpus(std::size_t k, std::size_t theorems) {
  std::string text;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < k; ++i) {
    std::string name = "a" + std::to_string(i);
    text += "fof(" + name + ", axiom, s" + std::to_string(i) + "(c" + std::to_string(i) + ")).\n";
    order.push_back(name);
  }
  std::vector<std::string> thms(order.end() - static_cast<std::ptrdiff_t>(theorems), order.end());
  return Corpus::build(parse_statements(text), order, thms);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("premsel_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

}  // namespace premsel::testing

#endif  // PREMSEL_TESTS_FIXTURES_HPP
