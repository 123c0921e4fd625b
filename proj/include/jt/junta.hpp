#pragma once

// Distribution-free k-junta testing and k-feature selection by running one
// SOPP collision test per candidate variable set on a shared sample.
//
// For a set S, the labeled sample (x, y) maps to the element 2*x_S + y of
// [2 * 2^k]; a SOPP collision in that stream is exactly two samples that
// agree on S and disagree on the label.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "jt/boolfn.hpp"
#include "jt/common.hpp"
#include "jt/distkit.hpp"
#include "jt/sopp.hpp"

namespace jt {

using LabeledSampler = std::function<LabeledSample()>;

/// (x, f(x)) with x ~ D.
LabeledSampler make_labeled_sampler(BoolFn f, ProductCube dist, Rng& rng);
LabeledSampler make_labeled_sampler(BoolFn f, FiniteDist dist, Rng& rng);

/// Element of [2 * 2^|S|] encoding (x_S, y).
inline std::size_t sopp_element(const LabeledSample& s, std::uint64_t mask) {
  return 2 * static_cast<std::size_t>(extract_bits(s.x.value(), mask)) + (s.y ? 1 : 0);
}

enum class SurveyStrategy {
  /// One pass over the sample per subset with a stamped first-label table.
  PerSubset,
  /// Agreement masks of differently labeled sample pairs; each kills every
  /// subset it contains.
  ConflictPairs,
  /// ConflictPairs when there are few distinct agreement masks.
  Auto,
};

inline constexpr std::uint64_t kDefaultSubsetBudget = 10'000'000;

struct SurveyOptions {
  SurveyStrategy strategy = SurveyStrategy::Auto;
  std::uint64_t subset_budget = kDefaultSubsetBudget;
  /// Surviving masks to record, in colex order.
  std::size_t collect = 1;
};

struct SurveyResult {
  std::uint64_t total_sets = 0;
  std::uint64_t surviving_sets = 0;
  std::vector<std::uint64_t> survivors;
};

/// Rules out every k-subset S of [n] for which two samples agree on x_S
/// and carry different labels. Throws BudgetExceeded when C(n,k) exceeds
/// the budget.
SurveyResult survey_subsets(std::span<const LabeledSample> sample, unsigned n, unsigned k,
                            const SurveyOptions& options = {});

/// Indices of two samples agreeing on S with different labels, if any.
std::optional<std::pair<std::size_t, std::size_t>> find_conflict_witness(
    std::span<const LabeledSample> sample, const VarSet& vars);

/// Position of a k-subset mask in colex order.
std::uint64_t colex_rank(std::uint64_t mask);

struct JuntaVerdict {
  Verdict verdict = Verdict::Accept;
  std::uint64_t surviving_sets = 0;
  std::uint64_t samples_used = 0;

  bool accepted() const noexcept { return verdict == Verdict::Accept; }
};

/// Empty `chosen` means no subset survived.
struct SelectionResult {
  std::optional<VarSet> chosen;
  std::uint64_t samples_used = 0;
};

struct JuntaOptions {
  SurveyOptions survey;
  /// Replaces the sample-size formula (2m samples are drawn).
  std::optional<std::uint64_t> m_override;
};

/// sopp_sample_size(2^k, eps/2, delta / C(n,k)).
std::uint64_t junta_sample_size(unsigned n, unsigned k, double eps, double delta);

std::vector<LabeledSample> draw_labeled(const LabeledSampler& draw, std::uint64_t count, unsigned n);

JuntaVerdict junta_test(const LabeledSampler& draw, unsigned n, unsigned k, double eps, double delta,
                        const JuntaOptions& options = {});

/// Returns the colex-first surviving subset.
SelectionResult feature_select(const LabeledSampler& draw, unsigned n, unsigned k, double eps, double delta,
                               const JuntaOptions& options = {});

/// Verdict on an already drawn sample.
JuntaVerdict junta_verdict(std::span<const LabeledSample> sample, unsigned n, unsigned k,
                           const SurveyOptions& options = {});
SelectionResult select_from(std::span<const LabeledSample> sample, unsigned n, unsigned k,
                            const SurveyOptions& options = {});

// Uniform-distribution variants. Below eps = 2^-k, distinct k-juntas are
// at least 2^-k apart, so selection at 2^-k pins down the relevant set and
// a single SOPP test at eps on that set finishes the job. delta is split
// evenly between the two phases.

SelectionResult feature_select_uniform(const LabeledSampler& draw, unsigned n, unsigned k, double eps,
                                       double delta, const JuntaOptions& options = {});

JuntaVerdict junta_test_uniform(const LabeledSampler& draw, unsigned n, unsigned k, double eps, double delta,
                                const JuntaOptions& options = {});

/// Total samples drawn by junta_test_uniform when no early exit happens.
std::uint64_t junta_uniform_sample_budget(unsigned n, unsigned k, double eps, double delta);

// ------------------------------------------------------------------ lift

/// Smallest i >= 1 with 2^-i < eps, i.e. eps/2 <= 2^-i < eps.
unsigned lift_index(double eps);

/// f on n+q bits: f'(x restricted to the first n bits) when bit n+i*-1
/// (0-based) is set, 0 otherwise. Requires eps > 2^-q.
BoolFn lift_eps(const BoolFn& fprime, double eps, unsigned q);

/// Labeled samples under mu_q for the lifted function, built from a
/// labeled uniform oracle for f'. The oracle is queried only when the
/// selector bit is 1.
class MuQAdapter {
 public:
  MuQAdapter(LabeledSampler uniform_oracle, unsigned n, double eps, unsigned q, Rng& rng,
             std::optional<std::uint64_t> oracle_cap = std::nullopt);

  LabeledSample next();
  LabeledSampler as_sampler();

  unsigned dim() const noexcept { return n_ + q_; }
  unsigned selector() const noexcept { return n_ + istar_ - 1; }
  std::uint64_t oracle_calls() const noexcept { return calls_; }
  std::uint64_t emitted() const noexcept { return emitted_; }

 private:
  LabeledSampler oracle_;
  unsigned n_;
  unsigned q_;
  unsigned istar_;
  Rng* rng_;
  std::optional<std::uint64_t> cap_;
  std::uint64_t calls_ = 0;
  std::uint64_t emitted_ = 0;
};

}  // namespace jt
