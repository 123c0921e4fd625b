#include "jt/distkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jt/boolfn.hpp"

namespace jt {

FiniteDist::FiniteDist(std::vector<double> weights) : probs_(std::move(weights)) {
  if (probs_.empty()) throw InvalidArgument("distribution over an empty domain");
  double total = 0.0;
  for (double w : probs_) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidArgument("distribution weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("distribution weights sum to zero");
  // Already-normalized input (up to summation rounding) is kept verbatim
  // so exact masses survive.
  if (std::abs(total - 1.0) > 1e-14) {
    for (double& w : probs_) w /= total;
  }
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
}

FiniteDist FiniteDist::uniform(std::size_t size) { return FiniteDist(std::vector<double>(size, 1.0)); }

FiniteDist FiniteDist::point_mass(std::size_t size, std::size_t at) {
  if (at >= size) throw InvalidArgument("point mass outside the domain");
  std::vector<double> w(size, 0.0);
  w[at] = 1.0;
  return FiniteDist(std::move(w));
}

std::size_t FiniteDist::sample(Rng& rng) const {
  // Scaling by the final cumulative value absorbs rounding in the partial
  // sums, so the last nonzero element is always reachable.
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  auto j = static_cast<std::size_t>(it - cdf_.begin());
  if (j >= probs_.size()) j = probs_.size() - 1;
  // Never return a zero-mass element (possible only at exact ties).
  while (probs_[j] == 0.0 && j > 0) --j;
  return j;
}

ProductCube::ProductCube(std::vector<double> params) : params_(std::move(params)) {
  if (params_.size() > BitVector::kMaxBits) throw InvalidArgument("product cube dimension too large");
  for (double p : params_) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("Bernoulli parameter outside [0,1]");
  }
}

BitVector ProductCube::sample(Rng& rng) const {
  std::uint64_t bits = 0;
  for (unsigned i = 0; i < dim(); ++i) {
    const double p = params_[i];
    const bool b = p == 0.5 ? rng.coin() : rng.bernoulli(p);
    if (b) bits |= std::uint64_t{1} << i;
  }
  return BitVector(dim(), bits);
}

double ProductCube::probability(std::uint64_t x) const {
  double r = 1.0;
  for (unsigned i = 0; i < dim(); ++i) {
    r *= ((x >> i) & 1U) != 0 ? params_[i] : 1.0 - params_[i];
  }
  return r;
}

FiniteDist ProductCube::to_dist() const {
  if (dim() > TruthTable::kMaxArity) throw BudgetExceeded("explicit product distribution needs n <= 20");
  const std::uint64_t size = std::uint64_t{1} << dim();
  std::vector<double> w(size);
  for (std::uint64_t x = 0; x < size; ++x) w[x] = probability(x);
  return FiniteDist(std::move(w));
}

ProductCube uniform_cube(unsigned n) { return ProductCube(std::vector<double>(n, 0.5)); }

ProductCube mu_q(unsigned n, unsigned q) {
  if (q == 0) throw InvalidArgument("mu_q needs q >= 1");
  std::vector<double> params(n, 0.5);
  for (unsigned i = 1; i <= q; ++i) params.push_back(std::ldexp(1.0, -static_cast<int>(i)));
  return ProductCube(std::move(params));
}

SampleHistogram::SampleHistogram(std::size_t pairs, std::span<const std::size_t> sample)
    : counts_(2 * pairs, 0), total_(sample.size()) {
  for (std::size_t j : sample) {
    if (j >= counts_.size()) throw InvalidArgument("sample value outside [2N]");
    ++counts_[j];
  }
}

std::uint64_t SampleHistogram::max_load() const {
  std::uint64_t best = 0;
  for (std::size_t i = 0; i < pairs(); ++i) best = std::max(best, pair_load(i));
  return best;
}

double tv_distance(const FiniteDist& p, const FiniteDist& q) {
  if (p.size() != q.size()) throw DimensionMismatch("tv_distance: domain sizes differ");
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) s += std::abs(p[j] - q[j]);
  return 0.5 * s;
}

FiniteDist empirical_dist(std::span<const std::size_t> sample, std::size_t domain) {
  if (sample.empty()) throw InvalidArgument("empirical_dist: empty sample");
  std::vector<double> w(domain, 0.0);
  for (std::size_t j : sample) {
    if (j >= domain) throw InvalidArgument("sample value outside the domain");
    w[j] += 1.0;
  }
  return FiniteDist(std::move(w));
}

double chi_square_statistic(std::span<const std::uint64_t> counts, const FiniteDist& p) {
  if (counts.size() != p.size()) throw DimensionMismatch("chi_square_statistic: domain sizes differ");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  double stat = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double expected = total * p[j];
    if (expected == 0.0) {
      if (counts[j] != 0) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double diff = static_cast<double>(counts[j]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

}  // namespace jt
