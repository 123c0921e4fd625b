#include "jt/tolerant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jt {

// -------------------------------------------------------------- PairUniform

PairUniform::PairUniform(BaseFunction base, std::vector<std::uint8_t> swap)
    : base_(std::move(base)), swap_(std::move(swap)) {
  base_.validate();
  if (swap_.size() != base_.size()) throw DimensionMismatch("swap function length differs from N");
  for (double& v : base_.values) v = std::ldexp(std::nearbyint(std::ldexp(v, 53)), -53);
}

double PairUniform::mass(std::size_t element) const {
  const std::size_t i = pair_of(element);
  if (i >= pairs()) throw InvalidArgument("element outside [2N]");
  const double N = static_cast<double>(pairs());
  const double p = base_[i];
  // Light side is 2i+1 when swap = 0, 2i when swap = 1.
  const bool light = (element & 1U) != 0 ? !swap(i) : swap(i);
  return light ? p / N : (1.0 - p) / N;
}

double PairUniform::odd_ratio(std::size_t i) const { return swap(i) ? base_[i] : 1.0 - base_[i]; }

FiniteDist PairUniform::to_dist() const {
  std::vector<double> w(2 * pairs());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = mass(j);
  return FiniteDist(std::move(w));
}

std::size_t PairUniform::sample(Rng& rng) const {
  const auto i = static_cast<std::size_t>(rng.below(pairs()));
  return rng.bernoulli(odd_ratio(i)) ? 2 * i : 2 * i + 1;
}

PairUniform family_member(const BaseFunction& base, Rng& rng) {
  base.validate();
  const std::size_t N = base.size();
  BaseFunction composed;
  composed.values.resize(N);
  std::vector<std::uint8_t> swap(N);
  for (std::size_t i = 0; i < N; ++i) {
    composed.values[i] = base[static_cast<std::size_t>(rng.below(N))];
    swap[i] = rng.coin() ? 1 : 0;
  }
  return PairUniform(std::move(composed), std::move(swap));
}

// ----------------------------------------------------------- LiftedFunction

namespace {
constexpr std::uint64_t kRTag = 0x72A1C3E5F7091B2DULL;
constexpr std::uint64_t kBTag = 0x3C6EF372FE94F82BULL;

double hash_uniform(std::uint64_t seed, std::uint64_t tag, std::uint64_t x) {
  return static_cast<double>(mix64(mix64(seed ^ tag) ^ x) >> 11) * 0x1.0p-53;
}
}  // namespace

LiftedFunction::LiftedFunction(PairUniform dist, unsigned n, std::uint64_t seed, std::optional<std::size_t> memo_cap)
    : dist_(std::move(dist)), n_(n), k_(0), seed_(seed), cap_(memo_cap) {
  const std::size_t N = dist_.pairs();
  if (!std::has_single_bit(N)) throw InvalidArgument("lift needs N to be a power of two");
  k_ = static_cast<unsigned>(std::countr_zero(N));
  if (n <= k_) throw InvalidArgument("lift needs n > log2 N");
  if (n > BitVector::kMaxBits) throw InvalidArgument("lift dimension exceeds 63");
}

bool LiftedFunction::r(std::size_t i) const { return hash_uniform(seed_, kRTag, i) < 0.5; }

bool LiftedFunction::remember(std::uint64_t x, bool b) {
  if (cap_ && memo_.size() >= *cap_) throw SamplerExhausted("lifted function memo cap reached");
  memo_.emplace(x, b);
  return b;
}

bool LiftedFunction::eval(std::uint64_t x) {
  if ((x & ~low_mask(n_)) != 0) throw DimensionMismatch("input has bits beyond the lifted dimension");
  const std::size_t i = x & low_mask(k_);
  auto it = memo_.find(x);
  const bool b = it != memo_.end() ? it->second
                                   : remember(x, hash_uniform(seed_, kBTag, x) < dist_.odd_ratio(i));
  return b != r(i);
}

bool LiftedFunction::eval(const BitVector& x) {
  if (x.size() != n_) throw DimensionMismatch("input length differs from the lifted dimension");
  return eval(x.value());
}

LabeledSample LiftedFunction::next_sample(Rng& rng) {
  const std::uint64_t w = rng() & low_mask(n_ - k_);
  const std::size_t j = dist_.sample(rng);
  ++draws_;
  const std::size_t i = pair_of(j);
  const std::uint64_t x = i | (w << k_);
  // The drawn element is odd (1-based) exactly when its 0-based index is even.
  const bool sigma = (j & 1U) == 0;
  auto it = memo_.find(x);
  const bool b = it != memo_.end() ? it->second : remember(x, sigma);
  return LabeledSample{BitVector(n_, x), b != r(i)};
}

BoolFn as_boolfn(const std::shared_ptr<LiftedFunction>& f) {
  return BoolFn(f->dim(), [f](std::uint64_t x) { return f->eval(x); });
}

// ------------------------------------------------------------------ MaxLoad

namespace {

template <class Draw>
TailEstimate tail_impl(std::size_t N, std::uint64_t m, std::uint64_t threshold, std::uint64_t trials, Draw&& draw) {
  if (m > N) throw InvalidArgument("maxload_tail needs m <= N");
  std::vector<std::uint32_t> load(N, 0);
  std::vector<std::size_t> touched;
  touched.reserve(m);
  TailEstimate est;
  est.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint32_t best = 0;
    for (std::uint64_t s = 0; s < m; ++s) {
      const std::size_t i = pair_of(draw());
      if (load[i]++ == 0) touched.push_back(i);
      best = std::max(best, load[i]);
    }
    if (best > threshold) ++est.exceed;
    for (std::size_t i : touched) load[i] = 0;
    touched.clear();
  }
  return est;
}

}  // namespace

TailEstimate maxload_tail(const PairUniform& dist, std::uint64_t m, std::uint64_t threshold, std::uint64_t trials,
                          Rng& rng) {
  return tail_impl(dist.pairs(), m, threshold, trials, [&] { return dist.sample(rng); });
}

TailEstimate maxload_tail(std::size_t N, std::uint64_t m, std::uint64_t threshold, std::uint64_t trials, Rng& rng) {
  return tail_impl(N, m, threshold, trials, [&] { return static_cast<std::size_t>(rng.below(2 * N)); });
}

double two_proportion_p_value(const TailEstimate& a, const TailEstimate& b) {
  if (a.trials == 0 || b.trials == 0) throw InvalidArgument("two-proportion test needs trials");
  const double na = static_cast<double>(a.trials);
  const double nb = static_cast<double>(b.trials);
  const double pooled = static_cast<double>(a.exceed + b.exceed) / (na + nb);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
  if (se == 0.0) return 1.0;
  const double z = std::abs(a.rate() - b.rate()) / se;
  return std::erfc(z / std::sqrt(2.0));
}

// ------------------------------------------------------------ distinguisher

ProfileLikelihood::ProfileLikelihood(BaseFunction base) : base_(std::move(base)) { base_.validate(); }

double ProfileLikelihood::log_likelihood(std::uint64_t c0, std::uint64_t c1) {
  const std::uint64_t key = (c0 << 32) | c1;
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  double s = 0.0;
  for (double p : base_.values) {
    const double a = std::pow(p, static_cast<double>(c0)) * std::pow(1.0 - p, static_cast<double>(c1));
    const double b = std::pow(1.0 - p, static_cast<double>(c0)) * std::pow(p, static_cast<double>(c1));
    s += 0.5 * (a + b);
  }
  const double v = std::log(s / static_cast<double>(base_.size()));
  cache_.emplace(key, v);
  return v;
}

namespace {

struct Stats {
  double maxload = 0.0;
  double llr = 0.0;
};

Stats draw_stats(const BaseFunction& base, std::uint64_t m, ProfileLikelihood& close, ProfileLikelihood& far,
                 Rng& rng) {
  const PairUniform member = family_member(base, rng);
  std::vector<std::size_t> sample(m);
  for (auto& s : sample) s = member.sample(rng);
  const SampleHistogram h(member.pairs(), sample);
  Stats st;
  st.maxload = static_cast<double>(h.max_load());
  for (std::size_t i = 0; i < h.pairs(); ++i) {
    if (h.pair_load(i) == 0) continue;
    const double lf = far.log_likelihood(h[2 * i], h[2 * i + 1]);
    const double lc = close.log_likelihood(h[2 * i], h[2 * i + 1]);
    // Profiles impossible under both families cannot occur; one-sided
    // impossibility is decisive.
    if (std::isinf(lf) && std::isinf(lc)) continue;
    st.llr += lf - lc;
  }
  return st;
}

struct Rule {
  double threshold = 0.0;
  bool far_above = true;
  double train_advantage = 0.0;

  bool says_far(double s) const { return far_above ? s > threshold : s <= threshold; }
};

Rule train_rule(const std::vector<double>& close, const std::vector<double>& far) {
  std::vector<double> cuts(close);
  cuts.insert(cuts.end(), far.begin(), far.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> c(close), f(far);
  std::sort(c.begin(), c.end());
  std::sort(f.begin(), f.end());
  Rule best;
  best.threshold = cuts.empty() ? 0.0 : cuts.back();
  for (double t : cuts) {
    const double above_f = static_cast<double>(f.end() - std::upper_bound(f.begin(), f.end(), t)) / f.size();
    const double above_c = static_cast<double>(c.end() - std::upper_bound(c.begin(), c.end(), t)) / c.size();
    const double adv = above_f - above_c;
    if (adv > best.train_advantage) best = Rule{t, true, adv};
    if (-adv > best.train_advantage) best = Rule{t, false, -adv};
  }
  return best;
}

double rule_rate(const Rule& r, const std::vector<double>& v) {
  std::uint64_t hits = 0;
  for (double s : v) hits += r.says_far(s) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(v.size());
}

}  // namespace

std::vector<DistinguisherPoint> distinguisher_advantage(const DistinguisherConfig& config) {
  if (config.train_trials == 0 || config.test_trials == 0) throw InvalidArgument("distinguisher needs trials");
  const MuNu pair = build_mu_nu(config.d, 2 * config.d * config.d + 1);
  const BaseFunction close_base = discretize(PushforwardFn(pair.close()), config.N);
  const BaseFunction far_base = discretize(PushforwardFn(pair.far()), config.N);
  ProfileLikelihood close_lik(close_base);
  ProfileLikelihood far_lik(far_base);

  std::vector<DistinguisherPoint> out;
  for (std::size_t s = 0; s < config.sample_sizes.size(); ++s) {
    const std::uint64_t m = config.sample_sizes[s];
    auto collect = [&](const BaseFunction& base, std::uint64_t phase, std::uint64_t trials) {
      std::vector<double> ml, llr;
      for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng(child_seed(child_seed(child_seed(config.seed, s), phase), t));
        const Stats st = draw_stats(base, m, close_lik, far_lik, rng);
        ml.push_back(st.maxload);
        llr.push_back(st.llr);
      }
      return std::make_pair(ml, llr);
    };
    const auto [train_c_ml, train_c_llr] = collect(close_base, 0, config.train_trials);
    const auto [train_f_ml, train_f_llr] = collect(far_base, 1, config.train_trials);
    const auto [test_c_ml, test_c_llr] = collect(close_base, 2, config.test_trials);
    const auto [test_f_ml, test_f_llr] = collect(far_base, 3, config.test_trials);

    const Rule ml_rule = train_rule(train_c_ml, train_f_ml);
    const Rule llr_rule = train_rule(train_c_llr, train_f_llr);

    DistinguisherPoint pt;
    pt.m = m;
    const double ml_f = rule_rate(ml_rule, test_f_ml), ml_c = rule_rate(ml_rule, test_c_ml);
    const double lr_f = rule_rate(llr_rule, test_f_llr), lr_c = rule_rate(llr_rule, test_c_llr);
    pt.advantage_maxload = ml_f - ml_c;
    pt.advantage_likelihood = lr_f - lr_c;
    pt.likelihood_chosen = llr_rule.train_advantage >= ml_rule.train_advantage;
    const double pf = pt.likelihood_chosen ? lr_f : ml_f;
    const double pc = pt.likelihood_chosen ? lr_c : ml_c;
    pt.advantage = pf - pc;
    const double T = static_cast<double>(config.test_trials);
    pt.stderr_ = std::sqrt(pf * (1.0 - pf) / T + pc * (1.0 - pc) / T);
    // A degenerate rule (all or nothing) still has sampling noise of order 1/T.
    pt.stderr_ = std::max(pt.stderr_, 1.0 / T);
    out.push_back(pt);
  }
  return out;
}

}  // namespace jt
