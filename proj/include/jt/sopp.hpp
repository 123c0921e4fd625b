#pragma once

// Distributions supported on at most one element of each pair {2i, 2i+1},
// and the one-sided collision tester for that property.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jt/common.hpp"
#include "jt/distkit.hpp"

namespace jt {

enum class Verdict { Accept, Reject };

inline const char* to_string(Verdict v) { return v == Verdict::Accept ? "accept" : "reject"; }

/// Reject carries the index of a pair whose two elements were both drawn.
struct SoppVerdict {
  Verdict verdict = Verdict::Accept;
  std::optional<std::size_t> witness;
  std::uint64_t samples_used = 0;

  bool accepted() const noexcept { return verdict == Verdict::Accept; }
};

/// TV distance to the nearest SOPP distribution: sum over pairs of the
/// smaller mass.
double sopp_distance(const FiniteDist& p);

bool is_sopp(const FiniteDist& p);

/// ceil((1/eps) * (sqrt(32 N ln(1/delta)) + 32 ln(1/delta))). The tester
/// draws twice this many samples.
std::uint64_t sopp_sample_size(double N, double eps, double delta);

/// Single pass over an explicit sample with a seen-set over [2N]; stops at
/// the first element whose partner has already appeared.
SoppVerdict sopp_scan(std::span<const std::size_t> sample, std::size_t N);

/// Draws up to 2m samples from `draw` (a callable returning an element of
/// [2N]) and rejects iff some pair is fully observed. Stops drawing at the
/// first collision, so samples_used may be below 2m on Reject.
template <class Sampler>
SoppVerdict sopp_test_with(Sampler&& draw, std::size_t N, std::uint64_t m) {
  std::vector<std::uint8_t> seen(2 * N, 0);
  SoppVerdict out;
  for (std::uint64_t t = 0; t < 2 * m; ++t) {
    const std::size_t j = draw();
    if (j >= 2 * N) throw InvalidArgument("sampler returned a value outside [2N]");
    ++out.samples_used;
    seen[j] = 1;
    if (seen[partner(j)] != 0) {
      out.verdict = Verdict::Reject;
      out.witness = pair_of(j);
      return out;
    }
  }
  return out;
}

template <class Sampler>
SoppVerdict sopp_test(Sampler&& draw, std::size_t N, double eps, double delta) {
  return sopp_test_with(std::forward<Sampler>(draw), N, sopp_sample_size(static_cast<double>(N), eps, delta));
}

inline SoppVerdict sopp_test(const FiniteDist& p, double eps, double delta, Rng& rng) {
  if (p.size() % 2 != 0) throw InvalidArgument("SOPP needs an even domain");
  return sopp_test([&] { return p.sample(rng); }, p.size() / 2, eps, delta);
}

}  // namespace jt
