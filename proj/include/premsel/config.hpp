#ifndef PREMSEL_CONFIG_HPP
#define PREMSEL_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "premsel/atp.hpp"

namespace premsel {

// Flat `key = value` configuration with `#` comments. Unknown keys are
// rejected. All randomness in a run flows from `seed`.
struct Config {
  // input/output paths
  std::string statements;
  std::string order;
  std::string theorems;
  std::string features;  // optional per-name feature override file
  std::string proofs;
  std::string oracle_theory;
  std::string output_dir;

  std::string algorithm = "scratch";  // split | incremental | scratch
  std::string method = "short";       // simple | short | negmin_* | knn

  std::uint32_t ratio = 16;
  std::uint32_t numberOfTrees = 2000;
  std::uint32_t maxDepth = 10;
  double eta = 0.2;
  double lambda = 1.0;
  double min_child_weight = 1.0;
  std::uint32_t k = 40;

  std::string prover = "oracle";  // oracle | external
  std::string prover_template{kDefaultProverTemplate};
  std::uint32_t cpu_limit = 10;
  std::uint32_t memory_limit = 2000;
  bool keep_problems = false;

  int max_rounds = 30;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double test_fraction = 342.0 / 1342.0;
  std::string timing = "real";  // real | zero (deterministic wall_s column)
  bool dump_training_sets = false;  // one dump file per round under output_dir

  std::vector<std::uint32_t> sweep_ratio;  // split-mode ratio sweep

  bool operator==(const Config&) const = default;
};

Config parse_config_text(std::string_view text);
Config parse_config_file(const std::filesystem::path& path);

// Sets one key; throws on unknown keys or unparsable values.
void config_set(Config& config, std::string_view key, std::string_view value);

// Canonical echo; parse_config_text(print_config(c)) == c.
std::string print_config(const Config& config);

// Range/enum checks shared by all commands.
void validate_config(const Config& config);

}  // namespace premsel

#endif  // PREMSEL_CONFIG_HPP
