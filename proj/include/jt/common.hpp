#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace jt {

// Error hierarchy. Callers that only care about "bad input" can catch
// std::invalid_argument; budget overruns are distinct so the CLI can map
// them to their own exit code.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SamplerExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SplitMix64 finalizer. Used for seed derivation and for hashing inputs
/// into independent uniform bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for trial `index` of an experiment seeded with `seed`:
/// mix64(seed ^ mix64(index)). Stable across platforms and schedules.
constexpr std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index));
}

/// Seeded 64-bit generator. Wraps std::mt19937_64 (whose output sequence is
/// fixed by the standard) and provides distribution helpers with fixed
/// semantics, since std::*_distribution outputs vary between library vendors.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection on the top of the range keeps the result exactly uniform.
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }
  bool coin() { return (engine_() >> 63) != 0; }

  Rng child(std::uint64_t index) { return Rng(child_seed(engine_(), index)); }

 private:
  std::mt19937_64 engine_;
};

/// Binomial coefficient as a double (exact while the result fits in 53 bits).
double binomial(unsigned n, unsigned k);

/// Binomial coefficient, throwing BudgetExceeded if it exceeds `cap`.
std::uint64_t binomial_capped(unsigned n, unsigned k, std::uint64_t cap);

// ---------------------------------------------------------------------------
// Variable sets. Variables are 0-based indices; bit i of an input word is
// variable i.

using VarSet = std::vector<unsigned>;

/// Throws unless `vars` is strictly increasing and every index is < n.
void validate_varset(const VarSet& vars, unsigned n);

std::uint64_t varset_mask(const VarSet& vars);
VarSet mask_varset(std::uint64_t mask);

/// Gathers the bits of `x` selected by `mask` into the low bits of the
/// result, preserving order (software PEXT).
constexpr std::uint64_t extract_bits(std::uint64_t x, std::uint64_t mask) noexcept {
  std::uint64_t out = 0;
  unsigned pos = 0;
  while (mask != 0) {
    const std::uint64_t low = mask & (~mask + 1);
    if ((x & low) != 0) out |= std::uint64_t{1} << pos;
    ++pos;
    mask &= mask - 1;
  }
  return out;
}

/// Scatters the low bits of `v` into the positions selected by `mask`.
constexpr std::uint64_t deposit_bits(std::uint64_t v, std::uint64_t mask) noexcept {
  std::uint64_t out = 0;
  unsigned pos = 0;
  while (mask != 0) {
    const std::uint64_t low = mask & (~mask + 1);
    if (((v >> pos) & 1U) != 0) out |= low;
    ++pos;
    mask &= mask - 1;
  }
  return out;
}

constexpr std::uint64_t low_mask(unsigned bits) noexcept {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

/// Visits every k-subset of [n] as a bit mask in colexicographic order
/// (which is increasing integer order of the masks). Stops early when the
/// visitor returns false.
template <class Visitor>
void for_each_subset_colex(unsigned n, unsigned k, Visitor&& visit) {
  if (k > n) return;
  if (k == 0) {
    visit(std::uint64_t{0});
    return;
  }
  std::uint64_t s = low_mask(k);
  const std::uint64_t limit = n >= 64 ? 0 : (std::uint64_t{1} << n);
  while (true) {
    if (!visit(s)) return;
    // Gosper's hack: next integer with the same popcount.
    const std::uint64_t c = s & (~s + 1);
    const std::uint64_t r = s + c;
    if (r == 0 || (limit != 0 && r >= limit)) return;
    s = (((r ^ s) >> 2) / c) | r;
    if (limit != 0 && s >= limit) return;
  }
}

/// Uniformly random k-subset of [n], sorted.
VarSet random_subset(unsigned n, unsigned k, Rng& rng);

std::string format_varset(const VarSet& vars, char sep = '|');

}  // namespace jt
