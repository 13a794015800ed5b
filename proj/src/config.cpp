#include "premsel/config.hpp"

#include <charconv>
#include <sstream>

#include "premsel/util.hpp"

namespace premsel {

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error("config key '" + std::string(key) + "': bad value '" + std::string(value) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error("config key '" + std::string(key) + "': expected true/false");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void config_set(Config& c, std::string_view key, std::string_view value) {
  std::string v(trim(value));
  if (key == "statements") c.statements = v;
  else if (key == "order") c.order = v;
  else if (key == "theorems") c.theorems = v;
  else if (key == "features") c.features = v;
  else if (key == "proofs") c.proofs = v;
  else if (key == "oracle_theory") c.oracle_theory = v;
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "algorithm") c.algorithm = v;
  else if (key == "method") c.method = v;
  else if (key == "ratio") c.ratio = parse_number<std::uint32_t>(key, v);
  else if (key == "numberOfTrees") c.numberOfTrees = parse_number<std::uint32_t>(key, v);
  else if (key == "maxDepth") c.maxDepth = parse_number<std::uint32_t>(key, v);
  else if (key == "eta") c.eta = parse_number<double>(key, v);
  else if (key == "lambda") c.lambda = parse_number<double>(key, v);
  else if (key == "min_child_weight") c.min_child_weight = parse_number<double>(key, v);
  else if (key == "k") c.k = parse_number<std::uint32_t>(key, v);
  else if (key == "prover") c.prover = v;
  else if (key == "prover_template") c.prover_template = v;
  else if (key == "cpu_limit") c.cpu_limit = parse_number<std::uint32_t>(key, v);
  else if (key == "memory_limit") c.memory_limit = parse_number<std::uint32_t>(key, v);
  else if (key == "keep_problems") c.keep_problems = parse_bool(key, v);
  else if (key == "max_rounds") c.max_rounds = parse_number<int>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "workers") c.workers = parse_number<unsigned>(key, v);
  else if (key == "test_fraction") c.test_fraction = parse_number<double>(key, v);
  else if (key == "timing") c.timing = v;
  else if (key == "dump_training_sets") c.dump_training_sets = parse_bool(key, v);
  else if (key == "sweep_ratio") {
    c.sweep_ratio.clear();
    std::string token;
    std::istringstream in(v);
    while (std::getline(in, token, ','))
      if (!trim(token).empty())
        c.sweep_ratio.push_back(parse_number<std::uint32_t>(key, trim(token)));
  } else {
    throw Error("unknown config key: " + std::string(key));
  }
}

Config parse_config_text(std::string_view text) {
  Config c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    config_set(c, trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return c;
}

Config parse_config_file(const std::filesystem::path& path) {
  return parse_config_text(read_file(path));
}

std::string print_config(const Config& c) {
  std::string out;
  auto kv = [&](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  kv("statements", c.statements);
  kv("order", c.order);
  kv("theorems", c.theorems);
  kv("features", c.features);
  kv("proofs", c.proofs);
  kv("oracle_theory", c.oracle_theory);
  kv("output_dir", c.output_dir);
  kv("algorithm", c.algorithm);
  kv("method", c.method);
  kv("ratio", std::to_string(c.ratio));
  kv("numberOfTrees", std::to_string(c.numberOfTrees));
  kv("maxDepth", std::to_string(c.maxDepth));
  kv("eta", format_double(c.eta));
  kv("lambda", format_double(c.lambda));
  kv("min_child_weight", format_double(c.min_child_weight));
  kv("k", std::to_string(c.k));
  kv("prover", c.prover);
  kv("prover_template", c.prover_template);
  kv("cpu_limit", std::to_string(c.cpu_limit));
  kv("memory_limit", std::to_string(c.memory_limit));
  kv("keep_problems", c.keep_problems ? "true" : "false");
  kv("max_rounds", std::to_string(c.max_rounds));
  kv("seed", std::to_string(c.seed));
  kv("workers", std::to_string(c.workers));
  kv("test_fraction", format_double(c.test_fraction));
  kv("timing", c.timing);
  kv("dump_training_sets", c.dump_training_sets ? "true" : "false");
  std::string sweep;
  for (std::size_t i = 0; i < c.sweep_ratio.size(); ++i) {
    if (i) sweep += ',';
    sweep += std::to_string(c.sweep_ratio[i]);
  }
  kv("sweep_ratio", sweep);
  return out;
}

void validate_config(const Config& c) {
  auto one_of = [](std::string_view key, const std::string& value,
                   std::initializer_list<std::string_view> allowed) {
    for (auto a : allowed)
      if (value == a) return;
    std::string msg = "config key '" + std::string(key) + "': invalid value '" + value + "'";
    throw Error(msg);
  };
  one_of("algorithm", c.algorithm, {"split", "incremental", "scratch"});
  one_of("method", c.method, {"simple", "short", "negmin_all", "negmin_rand", "negmin_1", "knn"});
  one_of("prover", c.prover, {"oracle", "external"});
  one_of("timing", c.timing, {"real", "zero"});
  if (c.ratio < 1) throw Error("config key 'ratio': must be >= 1");
  if (c.eta <= 0 || c.eta > 1) throw Error("config key 'eta': must be in (0, 1]");
  if (c.lambda < 0) throw Error("config key 'lambda': must be >= 0");
  if (c.min_child_weight < 0) throw Error("config key 'min_child_weight': must be >= 0");
  if (c.max_rounds < 0) throw Error("config key 'max_rounds': must be >= 0");
  if (c.test_fraction <= 0 || c.test_fraction >= 1)
    throw Error("config key 'test_fraction': must be in (0, 1)");
  if (c.prover == "external" && c.prover_template.empty())
    throw Error("config key 'prover_template': required for the external prover");
  for (std::uint32_t r : c.sweep_ratio)
    if (r < 1) throw Error("config key 'sweep_ratio': entries must be >= 1");
}

}  // namespace premsel
