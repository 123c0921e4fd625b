#include "jt/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace jt {

double binomial(unsigned n, unsigned k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

std::uint64_t binomial_capped(unsigned n, unsigned k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // Multiplicative formula keeps every intermediate an exact binomial.
  __extension__ using u128 = unsigned __int128;
  u128 r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > cap) {
      throw BudgetExceeded("C(" + std::to_string(n) + "," + std::to_string(k) +
                           ") exceeds budget " + std::to_string(cap));
    }
  }
  return static_cast<std::uint64_t>(r);
}

void validate_varset(const VarSet& vars, unsigned n) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] >= n) {
      throw InvalidArgument("variable index " + std::to_string(vars[i]) +
                            " out of range for dimension " + std::to_string(n));
    }
    if (i > 0 && vars[i] <= vars[i - 1]) {
      throw InvalidArgument("variable set must be strictly increasing");
    }
  }
}

std::uint64_t varset_mask(const VarSet& vars) {
  std::uint64_t mask = 0;
  for (unsigned v : vars) mask |= std::uint64_t{1} << v;
  return mask;
}

VarSet mask_varset(std::uint64_t mask) {
  VarSet out;
  while (mask != 0) {
    out.push_back(static_cast<unsigned>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

VarSet random_subset(unsigned n, unsigned k, Rng& rng) {
  if (k > n) throw InvalidArgument("subset size exceeds ground set");
  std::vector<unsigned> pool(n);
  std::iota(pool.begin(), pool.end(), 0U);
  for (unsigned i = 0; i < k; ++i) {
    const auto j = i + static_cast<unsigned>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  VarSet out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_varset(const VarSet& vars, char sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i > 0) os << sep;
    os << vars[i];
  }
  return os.str();
}

}  // namespace jt
