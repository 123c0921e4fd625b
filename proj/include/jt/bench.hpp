#pragma once

// Experiment runner behind the jtbench CLI: configuration, per-trial
// records, a deterministic worker pool, CSV emission and parsing.
//
// Trial t of an experiment seeded with s uses child_seed(s, t); records
// are stored by trial index, so output does not depend on scheduling.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jt/common.hpp"

namespace jt {

enum class ExperimentKind { Sopp, Junta, Select, Hardness, Tolerant, Truncate };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Sopp;
  unsigned n = 8;
  unsigned k = 2;
  std::uint64_t N = 64;
  double eps = 0.25;
  double delta = 0.05;
  unsigned d = 3;
  unsigned m_pieces = 0;  // 0 means 2d^2 + 1
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  std::string out_path;

  /// Sample-size override: pairs of batches for sopp/junta/select, points
  /// for hardness, samples for tolerant.
  std::optional<std::uint64_t> m;
  /// sopp: sopp | uniform. junta: junta | parity. hardness: parity |
  /// balanced. tolerant: alternate | close | far.
  std::string source;
  /// uniform | product.
  std::string distribution = "uniform";
  unsigned threads = 0;  // 0 means hardware concurrency
  bool timing = false;
  std::uint64_t subset_budget = 10'000'000;

  /// Fills kind-specific defaults and throws InvalidArgument on bad input.
  void validate();
};

/// Reads keys named like the fields above from a TOML table into `config`.
/// Unknown keys are rejected.
void apply_toml(const std::string& path, ExperimentConfig& config);
void apply_toml_string(const std::string& text, ExperimentConfig& config);

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::string kind;
  unsigned n = 0;
  unsigned k = 0;
  std::uint64_t N = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t m = 0;
  std::string truth;
  std::string verdict;
  std::uint64_t samples_used = 0;
  std::uint64_t elapsed_ms = 0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct RateSummary {
  std::uint64_t count = 0;
  double rate = 0.0;
  double stderr_ = 0.0;
};

struct Summary {
  std::uint64_t trials = 0;
  /// Per verdict value.
  std::map<std::string, RateSummary> verdicts;
  std::uint64_t budget_exceeded = 0;

  double rate(const std::string& verdict) const;
};

Summary summarize(const std::vector<TrialRecord>& records);

struct SuiteResult {
  std::vector<TrialRecord> records;
  Summary summary;
};

/// Runs config.trials trials. A trial that hits a budget is recorded with
/// verdict "budget_exceeded".
SuiteResult run_suite(ExperimentConfig config);

/// One suite per value of m; trial indices continue across values.
SuiteResult run_sweep(ExperimentConfig config, const std::vector<std::uint64_t>& ms);

inline constexpr const char* kCsvHeader = "trial,seed,kind,n,k,N,eps,delta,m,truth,verdict,samples_used,elapsed_ms";

void emit_csv(const std::vector<TrialRecord>& records, std::ostream& os);
/// Throws std::runtime_error on I/O failure.
void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_csv(std::istream& is);
std::vector<TrialRecord> read_csv(const std::string& path);

void print_summary(const Summary& summary, std::ostream& os);

}  // namespace jt
