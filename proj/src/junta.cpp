#include "jt/junta.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>

namespace jt {

LabeledSampler make_labeled_sampler(BoolFn f, ProductCube dist, Rng& rng) {
  if (f.dim() != dist.dim()) throw DimensionMismatch("sampler distribution and function dimensions differ");
  return [f = std::move(f), dist = std::move(dist), &rng]() {
    BitVector x = dist.sample(rng);
    const bool y = f(x.value());
    return LabeledSample{x, y};
  };
}

LabeledSampler make_labeled_sampler(BoolFn f, FiniteDist dist, Rng& rng) {
  if (dist.size() != (std::uint64_t{1} << f.dim())) throw DimensionMismatch("distribution size differs from 2^n");
  return [f = std::move(f), dist = std::move(dist), &rng]() {
    const std::uint64_t x = dist.sample(rng);
    return LabeledSample{BitVector(f.dim(), x), f(x)};
  };
}

namespace {

using Pascal = std::array<std::array<std::uint64_t, 65>, 65>;

const Pascal& pascal() {
  static const Pascal table = [] {
    Pascal c{};
    for (unsigned n = 0; n <= 64; ++n) {
      c[n][0] = 1;
      for (unsigned k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + c[n - 1][k];
    }
    return c;
  }();
  return table;
}

std::vector<std::uint64_t> points_of(std::span<const LabeledSample> sample, unsigned n) {
  std::vector<std::uint64_t> xs;
  xs.reserve(sample.size());
  for (const auto& s : sample) {
    if (s.x.size() != n) throw DimensionMismatch("labeled sample has the wrong dimension");
    xs.push_back(s.x.value());
  }
  return xs;
}

void survey_per_subset(std::span<const LabeledSample> sample, const std::vector<std::uint64_t>& xs, unsigned n,
                       unsigned k, std::size_t collect, SurveyResult& out) {
  // stamp[z] == generation marks z as seen for the current subset.
  std::vector<std::uint32_t> stamp(std::size_t{1} << k, 0);
  std::vector<std::uint8_t> first(std::size_t{1} << k, 0);
  std::uint32_t generation = 0;
  for_each_subset_colex(n, k, [&](std::uint64_t mask) {
    ++generation;
    bool alive = true;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      const auto z = static_cast<std::size_t>(extract_bits(xs[t], mask));
      const std::uint8_t y = sample[t].y ? 1 : 0;
      if (stamp[z] != generation) {
        stamp[z] = generation;
        first[z] = y;
      } else if (first[z] != y) {
        alive = false;
        break;
      }
    }
    if (alive) {
      ++out.surviving_sets;
      if (out.survivors.size() < collect) out.survivors.push_back(mask);
    }
    return true;
  });
}

std::vector<std::uint64_t> agreement_masks(std::span<const LabeledSample> sample,
                                           const std::vector<std::uint64_t>& xs, unsigned n, unsigned k) {
  std::unordered_set<std::uint64_t> zeros;
  std::unordered_set<std::uint64_t> ones;
  for (std::size_t t = 0; t < xs.size(); ++t) (sample[t].y ? ones : zeros).insert(xs[t]);
  std::unordered_set<std::uint64_t> masks;
  const std::uint64_t full = low_mask(n);
  for (std::uint64_t a : zeros) {
    for (std::uint64_t b : ones) {
      const std::uint64_t agree = ~(a ^ b) & full;
      if (static_cast<unsigned>(std::popcount(agree)) >= k) masks.insert(agree);
    }
  }
  std::vector<std::uint64_t> out(masks.begin(), masks.end());
  std::sort(out.begin(), out.end());
  return out;
}

void survey_conflict_pairs(const std::vector<std::uint64_t>& masks, unsigned n, unsigned k, std::uint64_t total,
                           std::size_t collect, SurveyResult& out) {
  std::vector<bool> killed(total, false);
  for (std::uint64_t agree : masks) {
    const auto width = static_cast<unsigned>(std::popcount(agree));
    for_each_subset_colex(width, k, [&](std::uint64_t local) {
      killed[colex_rank(deposit_bits(local, agree))] = true;
      return true;
    });
  }
  std::uint64_t rank = 0;
  for_each_subset_colex(n, k, [&](std::uint64_t mask) {
    if (!killed[rank]) {
      ++out.surviving_sets;
      if (out.survivors.size() < collect) out.survivors.push_back(mask);
    }
    ++rank;
    return true;
  });
}

}  // namespace

std::uint64_t colex_rank(std::uint64_t mask) {
  const auto& c = pascal();
  std::uint64_t r = 0;
  unsigned i = 1;
  while (mask != 0) {
    r += c[static_cast<unsigned>(std::countr_zero(mask))][i++];
    mask &= mask - 1;
  }
  return r;
}

SurveyResult survey_subsets(std::span<const LabeledSample> sample, unsigned n, unsigned k,
                            const SurveyOptions& options) {
  if (n > BitVector::kMaxBits) throw InvalidArgument("dimension exceeds 63");
  if (k > n) throw InvalidArgument("junta size exceeds dimension");
  if (k > TruthTable::kMaxArity) throw InvalidArgument("junta size exceeds 20");
  SurveyResult out;
  out.total_sets = binomial_capped(n, k, options.subset_budget);
  const auto xs = points_of(sample, n);

  SurveyStrategy strategy = options.strategy;
  std::vector<std::uint64_t> masks;
  if (strategy != SurveyStrategy::PerSubset) {
    masks = agreement_masks(sample, xs, n, k);
    if (strategy == SurveyStrategy::Auto) {
      double work = 0.0;
      for (std::uint64_t a : masks) work += binomial(static_cast<unsigned>(std::popcount(a)), k);
      const double per_subset = static_cast<double>(out.total_sets) * static_cast<double>(xs.size());
      strategy = work < per_subset ? SurveyStrategy::ConflictPairs : SurveyStrategy::PerSubset;
    }
  }
  if (strategy == SurveyStrategy::ConflictPairs) {
    survey_conflict_pairs(masks, n, k, out.total_sets, options.collect, out);
  } else {
    survey_per_subset(sample, xs, n, k, options.collect, out);
  }
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> find_conflict_witness(std::span<const LabeledSample> sample,
                                                                         const VarSet& vars) {
  const std::uint64_t mask = varset_mask(vars);
  // First index seen per (restriction, label).
  std::vector<std::int64_t> first(std::size_t{2} << vars.size(), -1);
  for (std::size_t t = 0; t < sample.size(); ++t) {
    validate_varset(vars, sample[t].x.size());
    const std::size_t e = sopp_element(sample[t], mask);
    if (first[partner(e)] >= 0) return std::make_pair(static_cast<std::size_t>(first[partner(e)]), t);
    if (first[e] < 0) first[e] = static_cast<std::int64_t>(t);
  }
  return std::nullopt;
}

std::uint64_t junta_sample_size(unsigned n, unsigned k, double eps, double delta) {
  if (k > n) throw InvalidArgument("junta size exceeds dimension");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  return sopp_sample_size(std::ldexp(1.0, static_cast<int>(k)), eps / 2.0, delta / binomial(n, k));
}

std::vector<LabeledSample> draw_labeled(const LabeledSampler& draw, std::uint64_t count, unsigned n) {
  std::vector<LabeledSample> out;
  out.reserve(count);
  for (std::uint64_t t = 0; t < count; ++t) {
    out.push_back(draw());
    if (out.back().x.size() != n) throw DimensionMismatch("labeled sampler returned the wrong dimension");
  }
  return out;
}

JuntaVerdict junta_verdict(std::span<const LabeledSample> sample, unsigned n, unsigned k,
                           const SurveyOptions& options) {
  SurveyOptions opts = options;
  opts.collect = 0;
  const auto survey = survey_subsets(sample, n, k, opts);
  JuntaVerdict v;
  v.surviving_sets = survey.surviving_sets;
  v.samples_used = sample.size();
  v.verdict = survey.surviving_sets > 0 ? Verdict::Accept : Verdict::Reject;
  return v;
}

SelectionResult select_from(std::span<const LabeledSample> sample, unsigned n, unsigned k,
                            const SurveyOptions& options) {
  SurveyOptions opts = options;
  opts.collect = 1;
  const auto survey = survey_subsets(sample, n, k, opts);
  SelectionResult r;
  r.samples_used = sample.size();
  if (!survey.survivors.empty()) r.chosen = mask_varset(survey.survivors.front());
  return r;
}

namespace {

std::vector<LabeledSample> reduction_sample(const LabeledSampler& draw, unsigned n, unsigned k, double eps,
                                            double delta, const JuntaOptions& options) {
  // Fail on the subset budget before drawing anything.
  binomial_capped(n, k, options.survey.subset_budget);
  const std::uint64_t m = options.m_override ? *options.m_override : junta_sample_size(n, k, eps, delta);
  return draw_labeled(draw, 2 * m, n);
}

}  // namespace

JuntaVerdict junta_test(const LabeledSampler& draw, unsigned n, unsigned k, double eps, double delta,
                        const JuntaOptions& options) {
  const auto sample = reduction_sample(draw, n, k, eps, delta, options);
  return junta_verdict(sample, n, k, options.survey);
}

SelectionResult feature_select(const LabeledSampler& draw, unsigned n, unsigned k, double eps, double delta,
                               const JuntaOptions& options) {
  const auto sample = reduction_sample(draw, n, k, eps, delta, options);
  return select_from(sample, n, k, options.survey);
}

SelectionResult feature_select_uniform(const LabeledSampler& draw, unsigned n, unsigned k, double eps,
                                       double delta, const JuntaOptions& options) {
  const double floor_eps = std::ldexp(1.0, -static_cast<int>(k));
  return feature_select(draw, n, k, std::max(eps, floor_eps), delta, options);
}

JuntaVerdict junta_test_uniform(const LabeledSampler& draw, unsigned n, unsigned k, double eps, double delta,
                                const JuntaOptions& options) {
  const double floor_eps = std::ldexp(1.0, -static_cast<int>(k));
  if (eps >= floor_eps) return junta_test(draw, n, k, eps, delta, options);

  const auto selection = feature_select(draw, n, k, floor_eps, delta / 2.0, options);
  JuntaVerdict v;
  v.samples_used = selection.samples_used;
  if (!selection.chosen) {
    v.verdict = Verdict::Reject;
    return v;
  }
  const std::uint64_t mask = varset_mask(*selection.chosen);
  const std::size_t N = std::size_t{1} << k;
  const auto check = sopp_test(
      [&] {
        const LabeledSample s = draw();
        if (s.x.size() != n) throw DimensionMismatch("labeled sampler returned the wrong dimension");
        return sopp_element(s, mask);
      },
      N, eps, delta / 2.0);
  v.samples_used += check.samples_used;
  v.verdict = check.verdict;
  v.surviving_sets = check.accepted() ? 1 : 0;
  return v;
}

std::uint64_t junta_uniform_sample_budget(unsigned n, unsigned k, double eps, double delta) {
  const double floor_eps = std::ldexp(1.0, -static_cast<int>(k));
  if (eps >= floor_eps) return 2 * junta_sample_size(n, k, eps, delta);
  return 2 * junta_sample_size(n, k, floor_eps, delta / 2.0) +
         2 * sopp_sample_size(std::ldexp(1.0, static_cast<int>(k)), eps, delta / 2.0);
}

// ------------------------------------------------------------------ lift

unsigned lift_index(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("lift needs eps in (0,1]");
  unsigned i = 1;
  while (!(std::ldexp(1.0, -static_cast<int>(i)) < eps)) ++i;
  return i;
}

BoolFn lift_eps(const BoolFn& fprime, double eps, unsigned q) {
  const unsigned istar = lift_index(eps);
  if (istar > q) throw InvalidArgument("eps too small for q: need eps > 2^-q");
  const unsigned n = fprime.dim();
  const std::uint64_t selector = std::uint64_t{1} << (n + istar - 1);
  const std::uint64_t low = low_mask(n);
  if (const Junta* j = fprime.as_junta()) {
    // Keep junta structure: core becomes [selector] AND core'.
    VarSet vars = j->vars();
    vars.push_back(n + istar - 1);
    const TruthTable& core = j->core();
    const std::uint64_t top = std::uint64_t{1} << core.arity();
    TruthTable lifted = TruthTable::from_function(core.arity() + 1, [&](std::uint64_t z) {
      return (z & top) != 0 && core[z & (top - 1)];
    });
    return BoolFn(Junta(n + q, std::move(vars), std::move(lifted)));
  }
  return BoolFn(n + q, [fprime, selector, low](std::uint64_t x) { return (x & selector) != 0 && fprime(x & low); });
}

MuQAdapter::MuQAdapter(LabeledSampler uniform_oracle, unsigned n, double eps, unsigned q, Rng& rng,
                       std::optional<std::uint64_t> oracle_cap)
    : oracle_(std::move(uniform_oracle)), n_(n), q_(q), istar_(lift_index(eps)), rng_(&rng), cap_(oracle_cap) {
  if (istar_ > q) throw InvalidArgument("eps too small for q: need eps > 2^-q");
  if (n + q > BitVector::kMaxBits) throw InvalidArgument("dimension exceeds 63");
}

LabeledSample MuQAdapter::next() {
  std::uint64_t extra = 0;
  for (unsigned i = 1; i <= q_; ++i) {
    if (rng_->bernoulli(std::ldexp(1.0, -static_cast<int>(i)))) extra |= std::uint64_t{1} << (i - 1);
  }
  LabeledSample out;
  if (((extra >> (istar_ - 1)) & 1U) != 0) {
    if (cap_ && calls_ >= *cap_) throw SamplerExhausted("uniform oracle exhausted");
    ++calls_;
    const LabeledSample s = oracle_();
    if (s.x.size() != n_) throw DimensionMismatch("uniform oracle returned the wrong dimension");
    out = LabeledSample{BitVector(n_ + q_, s.x.value() | (extra << n_)), s.y};
  } else {
    const std::uint64_t x = (*rng_)() & low_mask(n_);
    out = LabeledSample{BitVector(n_ + q_, x | (extra << n_)), false};
  }
  ++emitted_;
  return out;
}

LabeledSampler MuQAdapter::as_sampler() {
  return [this] { return next(); };
}

}  // namespace jt
