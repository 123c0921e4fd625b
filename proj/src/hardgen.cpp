#include "jt/hardgen.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace jt {

const char* to_string(SetupKind kind) { return kind == SetupKind::Parity ? "parity" : "balanced"; }

void JuntaSetup::validate() const {
  if (k == 0) throw InvalidArgument("junta setup needs k >= 1");
  if (k > n) throw InvalidArgument("junta setup needs k <= n");
  if (n > BitVector::kMaxBits) throw InvalidArgument("junta setup dimension exceeds 63");
  if (k > 16) throw InvalidArgument("junta setup needs k <= 16");
}

Junta draw_setup_junta(const JuntaSetup& setup, Rng& rng) {
  setup.validate();
  VarSet S = random_subset(setup.n, setup.k, rng);
  TruthTable core = setup.kind == SetupKind::Parity ? TruthTable::parity(setup.k) : sample_balanced(setup.k, rng);
  return Junta(setup.n, std::move(S), std::move(core));
}

std::vector<TruthTable> all_balanced(unsigned k) {
  if (k == 0 || k > 4) throw BudgetExceeded("balanced-function enumeration needs 1 <= k <= 4");
  const unsigned size = 1U << k;
  std::vector<TruthTable> out;
  for_each_subset_colex(size, size / 2, [&](std::uint64_t ones) {
    out.push_back(TruthTable::from_function(k, [ones](std::uint64_t z) { return ((ones >> z) & 1U) != 0; }));
    return true;
  });
  return out;
}

std::vector<unsigned> shared_positions(const VarSet& S, const VarSet& T) {
  std::vector<unsigned> pos;
  for (unsigned i = 0; i < S.size(); ++i) {
    if (std::binary_search(T.begin(), T.end(), S[i])) pos.push_back(i);
  }
  return pos;
}

namespace {

std::uint64_t positions_mask(const std::vector<unsigned>& pos) {
  std::uint64_t m = 0;
  for (unsigned p : pos) m |= std::uint64_t{1} << p;
  return m;
}

void require_core(const TruthTable& core, const VarSet& S) {
  if (core.arity() != S.size()) throw DimensionMismatch("core arity differs from |S|");
}

void require_balanced(const TruthTable& core) {
  if (!core.balanced()) throw InvalidArgument("core must be balanced");
}

}  // namespace

std::uint64_t rho_count(const TruthTable& core, const VarSet& S, const VarSet& T, std::uint64_t z) {
  require_core(core, S);
  const std::uint64_t shared = positions_mask(shared_positions(S, T));
  if ((z & ~low_mask(static_cast<unsigned>(std::popcount(shared)))) != 0) {
    throw DimensionMismatch("z has more bits than |S ∩ T|");
  }
  // Enumerate completions directly: free positions take every value.
  const std::uint64_t free = low_mask(core.arity()) & ~shared;
  const std::uint64_t fixed = deposit_bits(z, shared);
  const std::uint64_t completions = std::uint64_t{1} << std::popcount(free);
  std::uint64_t count = 0;
  for (std::uint64_t w = 0; w < completions; ++w) {
    if (core[fixed | deposit_bits(w, free)]) ++count;
  }
  return count;
}

double rho(const TruthTable& core, const VarSet& S, const VarSet& T, const BitVector& z) {
  const auto delta = static_cast<unsigned>(shared_positions(S, T).size());
  if (z.size() != delta) throw DimensionMismatch("z length differs from |S ∩ T|");
  return std::ldexp(static_cast<double>(rho_count(core, S, T, z.value())),
                    -static_cast<int>(core.arity() - delta));
}

Rational rho_exact(const TruthTable& core, const VarSet& S, const VarSet& T, std::uint64_t z) {
  const auto delta = static_cast<unsigned>(shared_positions(S, T).size());
  return Rational(rho_count(core, S, T, z)) / Rational(boost::multiprecision::cpp_int(1) << (core.arity() - delta));
}

CollisionStatistic collision_R(const VarSet& S, const VarSet& T, const TruthTable& f_core,
                               const TruthTable& g_core) {
  require_core(f_core, S);
  require_core(g_core, T);
  if (S.size() != T.size()) throw DimensionMismatch("S and T differ in size");
  require_balanced(f_core);
  require_balanced(g_core);
  const auto delta = static_cast<unsigned>(shared_positions(S, T).size());
  const unsigned free_bits = f_core.arity() - delta;
  const double scale = std::ldexp(1.0, -static_cast<int>(free_bits));
  const std::uint64_t points = std::uint64_t{1} << delta;

  CollisionStatistic out;
  boost::multiprecision::cpp_int numerator = 0;
  for (std::uint64_t z = 0; z < points; ++z) {
    const std::uint64_t cf = rho_count(f_core, S, T, z);
    const std::uint64_t cg = rho_count(g_core, T, S, z);
    numerator += boost::multiprecision::cpp_int(2) * cf * cg;
    const double rf = static_cast<double>(cf) * scale;
    const double rg = static_cast<double>(cg) * scale;
    out.R += 2.0 * rf * rg;
    out.R_alt += rf * rg + (1.0 - rf) * (1.0 - rg);
  }
  out.R /= static_cast<double>(points);
  out.R_alt /= static_cast<double>(points);
  out.R_exact = Rational(numerator) / Rational(boost::multiprecision::cpp_int(1) << (2 * free_bits + delta));
  return out;
}

UniformCollisionCount check_uniform_collisions(unsigned n, const VarSet& S, const VarSet& T,
                                               const TruthTable& f_core, const TruthTable& g_core) {
  if (n > TruthTable::kMaxArity) throw BudgetExceeded("uniform-collision enumeration needs n <= 20");
  require_balanced(f_core);
  require_balanced(g_core);
  const Junta f(n, S, f_core);
  const Junta g(n, T, g_core);
  UniformCollisionCount c;
  const std::uint64_t points = std::uint64_t{1} << n;
  for (std::uint64_t x = 0; x < points; ++x) {
    const bool a = f.eval(x);
    if (a == g.eval(x)) {
      ++c.agree;
      if (a) ++c.both_one;
    }
  }
  if (c.agree == 0) throw InvalidArgument("no agreeing inputs; conditional undefined");
  return c;
}

std::vector<Rational> intersection_profile_exact(unsigned n, unsigned k) {
  if (k > n) throw InvalidArgument("intersection profile needs k <= n");
  using boost::multiprecision::cpp_int;
  auto C = [](unsigned a, unsigned b) -> cpp_int {
    if (b > a) return 0;
    cpp_int r = 1;
    for (unsigned i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  const cpp_int total = C(n, k);
  std::vector<Rational> out(k + 1);
  for (unsigned d = 0; d <= k; ++d) out[d] = Rational(C(k, d) * C(n - k, k - d)) / Rational(total);
  return out;
}

std::vector<double> intersection_profile(unsigned n, unsigned k) {
  std::vector<double> out;
  for (const auto& r : intersection_profile_exact(n, k)) out.push_back(static_cast<double>(r));
  return out;
}

Rational parity_collision_closed_form(unsigned n, unsigned k, unsigned m) {
  const Rational inv = Rational(1) / Rational(binomial_capped(n, k, ~std::uint64_t{0}));
  const Rational half_m = Rational(1) / Rational(boost::multiprecision::cpp_int(1) << m);
  return (Rational(1) - inv) * half_m + inv;
}

namespace {

// S = {0..k-1}, T = {0..d-1} ∪ {k..2k-d-1}. The law of R depends on (S,T)
// only through the shared positions, and a uniform core is invariant under
// relabeling its inputs, so one representative per d suffices.
std::pair<VarSet, VarSet> canonical_pair(unsigned k, unsigned d) {
  VarSet S(k), T;
  for (unsigned i = 0; i < k; ++i) S[i] = i;
  for (unsigned i = 0; i < d; ++i) T.push_back(i);
  for (unsigned i = 0; i < k - d; ++i) T.push_back(k + i);
  return {S, T};
}

Rational rational_pow(const Rational& base, unsigned m) {
  Rational r = 1;
  for (unsigned i = 0; i < m; ++i) r *= base;
  return r;
}

}  // namespace

CollisionSum collision_sum(const JuntaSetup& setup, unsigned m, Rng* rng, std::uint64_t mc_pairs) {
  setup.validate();
  const auto profile = intersection_profile_exact(setup.n, setup.k);
  const bool exact = setup.kind == SetupKind::Parity || setup.k <= 3;
  if (!exact && (rng == nullptr || mc_pairs == 0)) throw InvalidArgument("Monte-Carlo collision sum needs a generator");

  std::vector<TruthTable> cores;
  if (setup.kind == SetupKind::Parity) {
    cores.push_back(TruthTable::parity(setup.k));
  } else if (exact) {
    cores = all_balanced(setup.k);
  }

  CollisionSum out;
  out.exact = exact;
  double variance = 0.0;
  for (unsigned d = 0; d <= setup.k; ++d) {
    CollisionReport rep;
    rep.delta = d;
    rep.prob_delta_exact = profile[d];
    rep.prob_delta = static_cast<double>(profile[d]);
    if (profile[d] == 0) {
      out.per_delta.push_back(rep);
      continue;
    }
    const auto [S, T] = canonical_pair(setup.k, d);
    if (exact) {
      // R^m depends on the pair only through R; cache by value.
      std::unordered_map<std::string, Rational> pow_cache;
      Rational acc = 0;
      for (const auto& f : cores) {
        for (const auto& g : cores) {
          const Rational R = collision_R(S, T, f, g).R_exact;
          const std::string key = R.str();
          auto it = pow_cache.find(key);
          if (it == pow_cache.end()) it = pow_cache.emplace(key, rational_pow(R, m)).first;
          acc += it->second;
        }
      }
      acc /= Rational(cores.size() * cores.size());
      rep.expected_R_pow_m = static_cast<double>(acc);
      out.value_exact += profile[d] * acc;
    } else {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::uint64_t t = 0; t < mc_pairs; ++t) {
        const TruthTable f = sample_balanced(setup.k, *rng);
        const TruthTable g = sample_balanced(setup.k, *rng);
        const double v = std::pow(collision_R(S, T, f, g).R, static_cast<double>(m));
        sum += v;
        sum_sq += v * v;
      }
      const double n_pairs = static_cast<double>(mc_pairs);
      const double mean = sum / n_pairs;
      const double var = std::max(0.0, sum_sq / n_pairs - mean * mean) / n_pairs;
      rep.expected_R_pow_m = mean;
      variance += rep.prob_delta * rep.prob_delta * var;
    }
    rep.contribution = rep.prob_delta * rep.expected_R_pow_m;
    out.value += rep.contribution;
    out.per_delta.push_back(rep);
  }
  if (exact) out.value = static_cast<double>(out.value_exact);
  out.stderr_ = std::sqrt(variance);
  return out;
}

double labels_tv_to_uniform(const JuntaSetup& setup, const std::vector<BitVector>& X, std::uint64_t ball_budget) {
  setup.validate();
  const auto m = static_cast<unsigned>(X.size());
  if (m > 20) throw BudgetExceeded("label enumeration needs m <= 20");
  for (const auto& x : X) {
    if (x.size() != setup.n) throw DimensionMismatch("point dimension differs from the setup");
  }
  const std::uint64_t sets = binomial_capped(setup.n, setup.k, ball_budget);
  std::vector<TruthTable> cores;
  if (setup.kind == SetupKind::Parity) {
    cores.push_back(TruthTable::parity(setup.k));
  } else {
    if (setup.k > 4) throw BudgetExceeded("too many balanced cores to enumerate");
    cores = all_balanced(setup.k);
  }
  if (static_cast<double>(sets) * static_cast<double>(cores.size()) > static_cast<double>(ball_budget)) {
    throw BudgetExceeded("number of balls exceeds budget");
  }
  const std::uint64_t bins = std::uint64_t{1} << m;
  std::vector<std::uint64_t> counts(bins, 0);
  std::uint64_t balls = 0;
  std::vector<std::uint64_t> restricted(m);
  for_each_subset_colex(setup.n, setup.k, [&](std::uint64_t mask) {
    for (unsigned j = 0; j < m; ++j) restricted[j] = extract_bits(X[j].value(), mask);
    for (const auto& core : cores) {
      std::uint64_t label = 0;
      for (unsigned j = 0; j < m; ++j) {
        if (core[restricted[j]]) label |= std::uint64_t{1} << j;
      }
      ++counts[label];
      ++balls;
    }
    return true;
  });
  const double B = static_cast<double>(balls);
  const double u = 1.0 / static_cast<double>(bins);
  double tv = 0.0;
  for (std::uint64_t c : counts) tv += std::abs(static_cast<double>(c) / B - u);
  return 0.5 * tv;
}

TruncationDraw truncation_sample(const BoolFn& f, Rng& rng, std::uint64_t max_rounds) {
  const std::uint64_t mask = low_mask(f.dim());
  for (std::uint64_t r = 1; r <= max_rounds; ++r) {
    const std::uint64_t x = rng() & mask;
    if (f(x)) return TruncationDraw{BitVector(f.dim(), x), r};
  }
  throw SamplerExhausted("truncation sampler: rejection budget exhausted");
}

}  // namespace jt
