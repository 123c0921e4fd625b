#pragma once

// Pair-uniform distributions over [2N], random members of base-function
// families, the lift of a pair-uniform distribution to a random function on
// {0,1}^n, MaxLoad tails, and an empirical distinguisher between two
// families.
//
// Elements are 0-based: pair i is {2i, 2i+1}. Element 2i is the odd element
// of the pair in 1-based numbering ("2i-1"), element 2i+1 the even one.

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "jt/boolfn.hpp"
#include "jt/common.hpp"
#include "jt/distkit.hpp"
#include "jt/measures.hpp"

namespace jt {

/// D(p, sigma): pair i splits its 1/N between a light element of mass
/// p(i)/N and a heavy one of mass (1 - p(i))/N. sigma(i) = 0 puts the light
/// mass on the even (1-based) element 2i+1, sigma(i) = 1 on the odd one 2i.
class PairUniform {
 public:
  /// Base values are rounded to multiples of 2^-53, which makes both masses
  /// of a pair, and their sum, exact when N is a power of two.
  PairUniform(BaseFunction base, std::vector<std::uint8_t> swap);

  std::size_t pairs() const noexcept { return base_.size(); }
  const BaseFunction& base() const noexcept { return base_; }
  bool swap(std::size_t i) const { return swap_[i] != 0; }

  double mass(std::size_t element) const;
  double pair_mass(std::size_t i) const { return mass(2 * i) + mass(2 * i + 1); }

  /// Pr[odd element | pair i] in 1-based numbering, i.e. the conditional
  /// mass of 0-based element 2i.
  double odd_ratio(std::size_t i) const;
  /// Pr[lighter element | pair i] = p(i).
  double light_ratio(std::size_t i) const { return base_[i]; }

  FiniteDist to_dist() const;
  /// Uniform pair, then a Bernoulli split.
  std::size_t sample(Rng& rng) const;

 private:
  BaseFunction base_;
  std::vector<std::uint8_t> swap_;
};

/// D(base ∘ f, sigma) for uniform f: [N] -> [N] and sigma: [N] -> {0,1}.
PairUniform family_member(const BaseFunction& base, Rng& rng);

/// Random function f(x) = b_i(x) XOR r_i with x = (z, w), z the low k bits
/// identifying pair i = z, b_i(x) ~ Ber(odd_ratio(i)), r_i uniform.
///
/// eval() derives b_i(x) from a keyed hash; the stream view assigns b_i(x)
/// from a fresh draw of D the first time it emits x. Both views share one
/// memo, so a value fixed by either is seen by both. Not thread safe.
class LiftedFunction {
 public:
  LiftedFunction(PairUniform dist, unsigned n, std::uint64_t seed,
                 std::optional<std::size_t> memo_cap = std::nullopt);

  unsigned dim() const noexcept { return n_; }
  unsigned k() const noexcept { return k_; }
  const PairUniform& source() const noexcept { return dist_; }
  bool r(std::size_t i) const;
  std::size_t memo_size() const noexcept { return memo_.size(); }

  bool eval(std::uint64_t x);
  bool eval(const BitVector& x);

  /// One emission: x uniform on {0,1}^n, consuming one draw from D.
  LabeledSample next_sample(Rng& rng);
  std::uint64_t draws_consumed() const noexcept { return draws_; }

 private:
  bool remember(std::uint64_t x, bool b);

  PairUniform dist_;
  unsigned n_;
  unsigned k_;
  std::uint64_t seed_;
  std::optional<std::size_t> cap_;
  std::uint64_t draws_ = 0;
  std::unordered_map<std::uint64_t, bool> memo_;
};

/// Shares the lifted function (and its memo) with the returned BoolFn.
BoolFn as_boolfn(const std::shared_ptr<LiftedFunction>& f);

struct TailEstimate {
  std::uint64_t exceed = 0;
  std::uint64_t trials = 0;
  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(exceed) / static_cast<double>(trials); }
};

/// Fraction of trials in which an m-sample from D has max_load > threshold.
TailEstimate maxload_tail(const PairUniform& dist, std::uint64_t m, std::uint64_t threshold, std::uint64_t trials,
                          Rng& rng);
/// Same with the uniform distribution over [2N] as the pair-uniform source.
TailEstimate maxload_tail(std::size_t N, std::uint64_t m, std::uint64_t threshold, std::uint64_t trials, Rng& rng);

/// Two-sided p-value of the pooled two-proportion z-test.
double two_proportion_p_value(const TailEstimate& a, const TailEstimate& b);

/// Likelihood of a pair profile (c0 samples on element 2i, c1 on 2i+1)
/// under a uniformly random member of the family of `base`, up to the
/// binomial factor shared by every family.
class ProfileLikelihood {
 public:
  explicit ProfileLikelihood(BaseFunction base);
  double log_likelihood(std::uint64_t c0, std::uint64_t c1);

 private:
  BaseFunction base_;
  std::unordered_map<std::uint64_t, double> cache_;
};

struct DistinguisherConfig {
  std::size_t N = 256;
  unsigned d = 3;
  std::vector<std::uint64_t> sample_sizes{16, 64, 256, 2048};
  std::uint64_t train_trials = 400;
  std::uint64_t test_trials = 2000;
  std::uint64_t seed = 1;
};

struct DistinguisherPoint {
  std::uint64_t m = 0;
  double advantage_maxload = 0.0;
  double advantage_likelihood = 0.0;
  /// Test advantage of whichever statistic won on the training draws.
  double advantage = 0.0;
  double stderr_ = 0.0;
  bool likelihood_chosen = true;
};

/// Close family vs far family from build_mu_nu(d, 2d^2+1), discretized at N.
/// Advantage is Pr[say far | far] - Pr[say far | close] on held-out draws.
std::vector<DistinguisherPoint> distinguisher_advantage(const DistinguisherConfig& config);

}  // namespace jt
