#include "premsel/atp.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "premsel/tptp.hpp"
#include "premsel/util.hpp"

namespace premsel {

std::string_view status_name(ProverStatus status) {
  switch (status) {
    case ProverStatus::Proved: return "proved";
    case ProverStatus::Unproved: return "unproved";
    case ProverStatus::Error: return "error";
  }
  return "?";
}

void OracleTheory::add(const std::string& theorem, PremiseSet sufficient) {
  auto& family = sufficient_[theorem];
  family.push_back(make_premise_set(std::move(sufficient)));
  family = subsumption_reduce(std::move(family));
}

const std::vector<PremiseSet>* OracleTheory::find(const std::string& theorem) const {
  auto it = sufficient_.find(theorem);
  return it == sufficient_.end() ? nullptr : &it->second;
}

OracleTheory OracleTheory::from_text(std::string_view text) {
  OracleTheory theory;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto colon = t.find(':');
    if (colon == std::string_view::npos)
      throw Error("oracle theory line " + std::to_string(lineno) + ": missing ':'");
    std::string theorem(trim(t.substr(0, colon)));
    if (theorem.empty())
      throw Error("oracle theory line " + std::to_string(lineno) + ": empty theorem name");
    std::string_view rest = t.substr(colon + 1);
    std::size_t start = 0;
    for (;;) {
      std::size_t bar = rest.find('|', start);
      std::string_view part =
          bar == std::string_view::npos ? rest.substr(start) : rest.substr(start, bar - start);
      theory.add(theorem, make_premise_set(split_ws(part)));
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
  }
  return theory;
}

OracleTheory OracleTheory::load(const std::filesystem::path& path) {
  return from_text(read_file(path));
}

std::string OracleTheory::to_text() const {
  std::string out;
  for (const auto& [theorem, family] : sufficient_) {
    out += theorem;
    out += ':';
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (i) out += " |";
      for (const auto& p : family[i]) {
        out += ' ';
        out += p;
      }
    }
    out += '\n';
  }
  return out;
}

void OracleTheory::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_text());
}

std::vector<std::size_t> make_slices(std::size_t ranking_length) {
  std::vector<std::size_t> slices;
  for (std::size_t k = 1; k <= 512; k *= 2)
    if (k <= ranking_length) slices.push_back(k);
  if (ranking_length > 0 && ranking_length < 512 &&
      (slices.empty() || slices.back() != ranking_length))
    slices.push_back(ranking_length);
  return slices;
}

ParsedProverOutput parse_prover_output(std::string_view text) {
  ParsedProverOutput out;
  bool theorem_status = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> used;
  while (std::getline(in, line)) {
    if (line.find("SZS status Theorem") != std::string::npos) theorem_status = true;
    // Proof-object axiom lines: fof(name, axiom, ..., file(..., source)).
    auto fof = line.find("fof(");
    if (fof == std::string::npos) continue;
    auto file = line.find("file(", fof);
    if (file == std::string::npos) continue;
    if (line.find(", axiom,", fof) == std::string::npos &&
        line.find(",axiom,", fof) == std::string::npos)
      continue;
    auto close = line.find(')', file);
    if (close == std::string::npos) continue;
    std::string_view args = std::string_view(line).substr(file + 5, close - file - 5);
    auto comma = args.rfind(',');
    if (comma == std::string_view::npos) continue;
    auto name = trim(args.substr(comma + 1));
    if (!name.empty()) used.emplace_back(name);
  }
  if (!theorem_status) {
    out.status = ProverStatus::Unproved;
    return out;
  }
  if (used.empty()) {
    out.status = ProverStatus::Error;
    out.error = "proved status but no axiom lines in the proof object";
    return out;
  }
  out.status = ProverStatus::Proved;
  out.used = make_premise_set(std::move(used));
  return out;
}

ProverResult oracle_prove(const std::string& theorem, const PremiseSet& axioms,
                          const OracleTheory& theory) {
  ProverResult result;
  result.theorem = theorem;
  result.slice = axioms.size();
  const auto* family = theory.find(theorem);
  if (family == nullptr) {
    result.status = ProverStatus::Unproved;
    return result;
  }
  const PremiseSet* best = nullptr;
  for (const auto& sufficient : *family) {
    if (!premise_subset(sufficient, axioms)) continue;
    if (best == nullptr || sufficient < *best) best = &sufficient;
  }
  if (best == nullptr) {
    result.status = ProverStatus::Unproved;
    return result;
  }
  result.status = ProverStatus::Proved;
  result.used = *best;
  return result;
}

Evaluator::Evaluator(const Corpus& corpus, const ProverConfig& config)
    : corpus_(corpus), config_(config) {
  if (config_.kind == ProverKind::Oracle && config_.theory == nullptr)
    throw Error("oracle prover configured without a theory");
  if (config_.kind == ProverKind::External && config_.command_template.empty())
    throw Error("external prover configured without a command template");
}

namespace {

std::string cache_key(const std::string& theorem, const PremiseSet& axioms) {
  std::string key = theorem;
  key += '\n';
  for (const auto& a : axioms) {
    key += a;
    key += ' ';
  }
  return key;
}

std::string substitute(std::string text, std::string_view tag, const std::string& value) {
  for (;;) {
    auto at = text.find(tag);
    if (at == std::string::npos) return text;
    text.replace(at, tag.size(), value);
  }
}

// Captures stdout. Returns false on launch failure.
bool run_command(const std::string& command, std::string& output, int& exit_code) {
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return false;
  char buf[4096];
  std::size_t n;
  output.clear();
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
  int rc = pclose(pipe);
  exit_code = rc;
  return true;
}

}  // namespace

ProverResult Evaluator::run_external(const std::string& theorem,
                                     const std::vector<std::string>& axioms) {
  ProverResult result;
  result.theorem = theorem;
  result.slice = axioms.size();

  std::uint64_t job;
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    job = job_counter_++;
  }
  std::filesystem::path dir =
      config_.problem_dir.empty() ? std::filesystem::temp_directory_path() : config_.problem_dir;
  std::filesystem::create_directories(dir);
  std::filesystem::path problem =
      dir / (theorem + "_" + std::to_string(axioms.size()) + "_" + std::to_string(job) + ".p");

  std::ostringstream text;
  std::vector<Statement> axiom_statements;
  axiom_statements.reserve(axioms.size());
  for (const auto& name : axioms)
    axiom_statements.push_back(with_role(corpus_.statement(name), Role::Axiom));
  write_problem(with_role(corpus_.statement(theorem), Role::Conjecture), axiom_statements, text);
  write_file_atomic(problem, text.str());

  std::string command = config_.command_template;
  command = substitute(std::move(command), "{problem}", problem.string());
  command = substitute(std::move(command), "{cpu_limit}", std::to_string(config_.cpu_limit));
  command = substitute(std::move(command), "{memory_limit}", std::to_string(config_.memory_limit));

  Stopwatch watch;
  std::string output;
  int exit_code = 0;
  bool launched = run_command(command, output, exit_code);
  result.wall_s = watch.seconds();
  if (!config_.keep_problems) {
    std::error_code ec;
    std::filesystem::remove(problem, ec);
  }
  if (!launched || (WIFEXITED(exit_code) && WEXITSTATUS(exit_code) == 127)) {
    result.status = ProverStatus::Error;
    result.error = "prover launch failed";
    return result;
  }
  ParsedProverOutput parsed = parse_prover_output(output);
  result.status = parsed.status;
  result.error = parsed.error;
  if (parsed.status == ProverStatus::Proved) {
    PremiseSet supplied = make_premise_set(axioms);
    for (const auto& name : parsed.used) {
      if (!std::binary_search(supplied.begin(), supplied.end(), name)) {
        result.status = ProverStatus::Error;
        result.error = "proof object uses axiom not supplied: " + name;
        return result;
      }
    }
    result.used = parsed.used;
  }
  return result;
}

ProverResult Evaluator::prove(const std::string& theorem, const std::vector<std::string>& axioms) {
  PremiseSet key_set = make_premise_set(axioms);
  std::string key = cache_key(theorem, key_set);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  ProverResult result;
  if (config_.kind == ProverKind::Oracle) {
    Stopwatch watch;
    result = oracle_prove(theorem, key_set, *config_.theory);
    result.slice = axioms.size();
    result.wall_s = watch.seconds();
  } else {
    result = run_external(theorem, axioms);
  }
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_.emplace(std::move(key), result);
  }
  return result;
}

Evaluator::Minimized Evaluator::pseudo_minimize(const std::string& theorem,
                                                const PremiseSet& premises) {
  Minimized out;
  out.premises = premises;
  PremiseSet supplied = premises;
  for (int iteration = 0; iteration < 10; ++iteration) {
    ProverResult result = prove(theorem, supplied);
    if (result.status != ProverStatus::Proved) {
      out.warning = true;  // prover no longer confirms; keep the last good set
      return out;
    }
    out.premises = result.used;
    if (result.used == supplied) return out;
    supplied = result.used;
  }
  out.warning = true;  // did not reach a fixpoint within the bound
  return out;
}

std::vector<ProverResult> Evaluator::evaluate(const RankingMap& rankings) {
  std::vector<const std::pair<const std::string, std::vector<std::string>>*> jobs;
  jobs.reserve(rankings.size());
  for (const auto& entry : rankings) jobs.push_back(&entry);
  std::sort(jobs.begin(), jobs.end(), [&](const auto* a, const auto* b) {
    return corpus_.position(a->first) < corpus_.position(b->first);
  });

  for (const auto* job : jobs) {
    std::size_t t_pos = corpus_.position(job->first);
    for (const auto& p : job->second)
      if (corpus_.position(p) >= t_pos)
        throw Error("ranking for " + job->first + " contains non-allowed premise " + p);
  }

  std::vector<std::vector<ProverResult>> per_theorem(jobs.size());
  parallel_for(jobs.size(), config_.workers, [&](std::size_t i) {
    const std::string& theorem = jobs[i]->first;
    const std::vector<std::string>& ranking = jobs[i]->second;
    for (std::size_t k : make_slices(ranking.size())) {
      std::vector<std::string> axioms(ranking.begin(), ranking.begin() + k);
      Stopwatch watch;
      ProverResult result = prove(theorem, axioms);
      result.slice = k;
      if (result.status == ProverStatus::Proved) {
        Minimized minimized = pseudo_minimize(theorem, result.used);
        result.used = minimized.premises;
        result.minimization_warning = minimized.warning;
      }
      result.wall_s = watch.seconds();
      per_theorem[i].push_back(std::move(result));
    }
  });

  std::vector<ProverResult> results;
  for (auto& batch : per_theorem)
    for (auto& r : batch) results.push_back(std::move(r));
  return results;
}

std::vector<ProverResult> atp_evaluate(const RankingMap& rankings, const Corpus& corpus,
                                       const ProverConfig& config) {
  Evaluator evaluator(corpus, config);
  return evaluator.evaluate(rankings);
}

}  // namespace premsel
