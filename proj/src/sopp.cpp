#include "jt/sopp.hpp"

#include <algorithm>
#include <cmath>

namespace jt {

double sopp_distance(const FiniteDist& p) {
  if (p.size() % 2 != 0) throw InvalidArgument("SOPP needs an even domain");
  double d = 0.0;
  for (std::size_t j = 0; j < p.size(); j += 2) d += std::min(p[j], p[j + 1]);
  return d;
}

bool is_sopp(const FiniteDist& p) {
  if (p.size() % 2 != 0) throw InvalidArgument("SOPP needs an even domain");
  for (std::size_t j = 0; j < p.size(); j += 2) {
    if (p[j] > 0.0 && p[j + 1] > 0.0) return false;
  }
  return true;
}

std::uint64_t sopp_sample_size(double N, double eps, double delta) {
  if (!(N >= 1.0) || !std::isfinite(N)) throw InvalidArgument("sopp_sample_size: N must be >= 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("sopp_sample_size: eps must lie in (0,1]");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("sopp_sample_size: delta must lie in (0,1)");
  const double L = std::log(1.0 / delta);
  const double m = (std::sqrt(32.0 * N * L) + 32.0 * L) / eps;
  if (!(m < 1e18)) throw BudgetExceeded("sopp_sample_size: sample size overflows");
  return static_cast<std::uint64_t>(std::ceil(m));
}

SoppVerdict sopp_scan(std::span<const std::size_t> sample, std::size_t N) {
  std::vector<std::uint8_t> seen(2 * N, 0);
  SoppVerdict out;
  for (std::size_t j : sample) {
    if (j >= 2 * N) throw InvalidArgument("sample value outside [2N]");
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

}  // namespace jt
