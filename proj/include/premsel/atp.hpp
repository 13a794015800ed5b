#ifndef PREMSEL_ATP_HPP
#define PREMSEL_ATP_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "premsel/proofdb.hpp"

namespace premsel {

// Ground truth for simulated runs: a theorem is provable from a set of axioms
// iff one of its sufficient premise sets is contained in them.
class OracleTheory {
 public:
  // Adds one alternative sufficient set; the family is kept as an antichain.
  void add(const std::string& theorem, PremiseSet sufficient);

  const std::vector<PremiseSet>* find(const std::string& theorem) const;
  std::size_t theorem_count() const { return sufficient_.size(); }
  const std::map<std::string, std::vector<PremiseSet>>& all() const { return sufficient_; }

  // `theorem: a b | c d`, alternative sets separated by '|'.
  static OracleTheory load(const std::filesystem::path& path);
  static OracleTheory from_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  std::string to_text() const;

 private:
  std::map<std::string, std::vector<PremiseSet>> sufficient_;
};

enum class ProverKind { Oracle, External };

inline constexpr std::string_view kDefaultProverTemplate =
    "eprover --auto-schedule --free-numbers -s -R --cpu-limit={cpu_limit} "
    "--memory-limit=2000 --print-statistics -p --tstp-format {problem}";

struct ProverConfig {
  ProverKind kind = ProverKind::Oracle;
  const OracleTheory* theory = nullptr;          // required for Oracle
  std::string command_template{kDefaultProverTemplate};  // {problem}, {cpu_limit}, {memory_limit}
  unsigned cpu_limit = 10;      // seconds
  unsigned memory_limit = 2000;  // MB
  unsigned workers = 1;
  std::filesystem::path problem_dir;  // where External problems are written
  bool keep_problems = false;
};

enum class ProverStatus { Proved, Unproved, Error };

std::string_view status_name(ProverStatus status);

struct ProverResult {
  std::string theorem;
  std::size_t slice = 0;  // number of supplied axioms
  ProverStatus status = ProverStatus::Unproved;
  PremiseSet used;  // subset of the supplied axioms when proved
  double wall_s = 0;
  bool minimization_warning = false;
  std::string error;
};

// Top-slice lengths: powers of two up to 512 that fit in L, plus L itself
// when L < 512; ascending, deduplicated.
std::vector<std::size_t> make_slices(std::size_t ranking_length);

struct ParsedProverOutput {
  ProverStatus status = ProverStatus::Unproved;
  PremiseSet used;
  std::string error;
};

// Proved iff a line contains `SZS status Theorem`; used premises are the
// file-source names of proof lines `fof(N, axiom, ..., file(..., N))`.
// A proved status with no recoverable axiom lines is an error, not a silent
// failure.
ParsedProverOutput parse_prover_output(std::string_view text);

// Proved iff some sufficient set is contained in the axioms; `used` is the
// lexicographically first (by sorted premise names) sufficient set among
// those contained.
ProverResult oracle_prove(const std::string& theorem, const PremiseSet& axioms,
                          const OracleTheory& theory);

// Drives one prover (oracle or external command) over ranking slices.
// Results are cached per (theorem, axiom set), so pseudo-minimization reruns
// and repeated rounds do not pay twice.
class Evaluator {
 public:
  Evaluator(const Corpus& corpus, const ProverConfig& config);

  // One result per (theorem, slice); proved results are pseudo-minimized.
  // Output is sorted by (corpus position of theorem, slice) regardless of
  // worker scheduling.
  std::vector<ProverResult> evaluate(const RankingMap& rankings);

  // Reruns the prover on exactly the used premises until used == supplied
  // (at most 10 runs). A rerun that fails to prove, or hitting the bound,
  // returns the last successful set with a warning flag.
  struct Minimized {
    PremiseSet premises;
    bool warning = false;
  };
  Minimized pseudo_minimize(const std::string& theorem, const PremiseSet& premises);

  // Single prover invocation (cached). Axioms are passed in problem order.
  ProverResult prove(const std::string& theorem, const std::vector<std::string>& axioms);

 private:
  ProverResult run_external(const std::string& theorem, const std::vector<std::string>& axioms);

  const Corpus& corpus_;
  ProverConfig config_;
  std::mutex cache_mutex_;
  std::map<std::string, ProverResult> cache_;
  std::uint64_t job_counter_ = 0;
};

// Convenience wrappers matching the per-operation surface.
std::vector<ProverResult> atp_evaluate(const RankingMap& rankings, const Corpus& corpus,
                                       const ProverConfig& config);

}  // namespace premsel

#endif  // PREMSEL_ATP_HPP
