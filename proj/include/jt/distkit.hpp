#pragma once

// Finite distributions, product distributions on the cube, sample
// histograms.
//
// Elements of a finite domain are 0-based. For domains of size 2N the
// pairs are {2i, 2i+1} for i in [0, N); the element 2i+1 is the partner
// of 2i and vice versa (partner(j) == j ^ 1).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jt/common.hpp"

namespace jt {

class BitVector;

constexpr std::size_t partner(std::size_t element) noexcept { return element ^ 1U; }
constexpr std::size_t pair_of(std::size_t element) noexcept { return element >> 1U; }

/// Explicit probability vector with an inverse-CDF sampler.
class FiniteDist {
 public:
  /// Normalizes nonnegative weights. Throws on negative, non-finite or
  /// all-zero input.
  explicit FiniteDist(std::vector<double> weights);

  static FiniteDist uniform(std::size_t size);
  static FiniteDist point_mass(std::size_t size, std::size_t at);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t j) const { return probs_[j]; }
  std::span<const double> probs() const noexcept { return probs_; }

  std::size_t sample(Rng& rng) const;

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// Product of Bernoulli distributions on {0,1}^n.
class ProductCube {
 public:
  explicit ProductCube(std::vector<double> params);

  unsigned dim() const noexcept { return static_cast<unsigned>(params_.size()); }
  std::span<const double> params() const noexcept { return params_; }

  BitVector sample(Rng& rng) const;

  /// Probability of the point with integer encoding x.
  double probability(std::uint64_t x) const;

  /// Explicit distribution over the 2^n points indexed by their integer
  /// encoding. Requires n <= 20.
  FiniteDist to_dist() const;

 private:
  std::vector<double> params_;
};

ProductCube uniform_cube(unsigned n);

/// n uniform bits followed by q bits where bit n+i (1-based i) is Ber(2^-i).
ProductCube mu_q(unsigned n, unsigned q);

/// Counts over [2N].
class SampleHistogram {
 public:
  SampleHistogram(std::size_t pairs, std::span<const std::size_t> sample);

  std::size_t pairs() const noexcept { return counts_.size() / 2; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t operator[](std::size_t j) const { return counts_[j]; }
  std::uint64_t pair_load(std::size_t i) const { return counts_[2 * i] + counts_[2 * i + 1]; }

  /// Largest number of samples landing in a single pair.
  std::uint64_t max_load() const;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline SampleHistogram histogram(std::span<const std::size_t> sample, std::size_t pairs) {
  return SampleHistogram(pairs, sample);
}

double tv_distance(const FiniteDist& p, const FiniteDist& q);

/// Plug-in frequency estimate. Throws on an empty sample.
FiniteDist empirical_dist(std::span<const std::size_t> sample, std::size_t domain);

/// Pearson chi-square statistic of the sample counts against p.
double chi_square_statistic(std::span<const std::uint64_t> counts, const FiniteDist& p);

}  // namespace jt
