#pragma once

// Random junta "balls" f_S for lower-bound experiments: setups, the
// per-sample agreement statistic R, exact uniform-collision counts, the
// expected collision probability over m samples, label-distribution
// distances, truncation sampling and intersection profiles.
//
// Shared coordinates of S and T are matched in increasing global index
// order; z bit j is the j-th smallest element of S ∩ T.

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "jt/boolfn.hpp"
#include "jt/common.hpp"

namespace jt {

using Rational = boost::multiprecision::cpp_rational;

enum class SetupKind { Parity, AllBalanced };

const char* to_string(SetupKind kind);

/// J is all of C([n],k); F is {parity} or all balanced k-bit functions.
struct JuntaSetup {
  unsigned n = 0;
  unsigned k = 0;
  SetupKind kind = SetupKind::Parity;

  void validate() const;
};

/// Uniform S, then the parity core or a uniform balanced core.
Junta draw_setup_junta(const JuntaSetup& setup, Rng& rng);

/// All C(2^k, 2^(k-1)) balanced tables in colex order of their ones-sets.
/// Requires k <= 4.
std::vector<TruthTable> all_balanced(unsigned k);

/// Positions within S (0-based, in S's order) of the coordinates in S ∩ T.
std::vector<unsigned> shared_positions(const VarSet& S, const VarSet& T);

/// Number of completions of z on which the core of f_S is 1; the
/// denominator is 2^(k - |S ∩ T|).
std::uint64_t rho_count(const TruthTable& core, const VarSet& S, const VarSet& T, std::uint64_t z);

/// Fraction of completions of the shared coordinates z that make the core 1.
double rho(const TruthTable& core, const VarSet& S, const VarSet& T, const BitVector& z);
Rational rho_exact(const TruthTable& core, const VarSet& S, const VarSet& T, std::uint64_t z);

struct CollisionStatistic {
  double R = 0.0;
  /// E_z[rho_f rho_g + (1 - rho_f)(1 - rho_g)].
  double R_alt = 0.0;
  Rational R_exact;
};

/// R = E_z[2 rho_f(S,z) rho_g(T,z)]. Rejects unbalanced cores.
CollisionStatistic collision_R(const VarSet& S, const VarSet& T, const TruthTable& f_core,
                               const TruthTable& g_core);

struct UniformCollisionCount {
  std::uint64_t both_one = 0;
  std::uint64_t agree = 0;

  bool is_half() const noexcept { return agree > 0 && 2 * both_one == agree; }
};

/// Exact counts over x in {0,1}^n of f_S(x) = g_T(x) = 1 and of
/// f_S(x) = g_T(x). Throws when nothing agrees (conditional undefined).
UniformCollisionCount check_uniform_collisions(unsigned n, const VarSet& S, const VarSet& T,
                                               const TruthTable& f_core, const TruthTable& g_core);

struct CollisionReport {
  unsigned delta = 0;
  Rational prob_delta_exact;
  double prob_delta = 0.0;
  /// E_{f,g}[R^m] at this intersection size.
  double expected_R_pow_m = 0.0;
  double contribution = 0.0;
};

struct CollisionSum {
  double value = 0.0;
  double stderr_ = 0.0;
  bool exact = false;
  Rational value_exact;
  std::vector<CollisionReport> per_delta;
};

/// sum_D Pr[|S∩T| = D] * E_{f,g}[R^m]. Exact enumeration of core pairs for
/// Parity or k <= 3; otherwise `mc_pairs` uniform core pairs per D.
CollisionSum collision_sum(const JuntaSetup& setup, unsigned m, Rng* rng = nullptr, std::uint64_t mc_pairs = 20000);

/// Closed form for the Parity setup: (1 - 1/C(n,k)) 2^-m + 1/C(n,k).
Rational parity_collision_closed_form(unsigned n, unsigned k, unsigned m);

inline constexpr std::uint64_t kBallBudget = 1'000'000;

/// Exact TV between the label vector (f_S(x_1), ..., f_S(x_m)) over a
/// uniform ball and the uniform distribution on {0,1}^m.
double labels_tv_to_uniform(const JuntaSetup& setup, const std::vector<BitVector>& X,
                            std::uint64_t ball_budget = kBallBudget);

struct TruncationDraw {
  BitVector x;
  std::uint64_t rounds = 0;
};

inline constexpr std::uint64_t kTruncationBudget = 1U << 20;

/// Uniform element of f^{-1}(1) by rejection from the uniform cube.
TruncationDraw truncation_sample(const BoolFn& f, Rng& rng, std::uint64_t max_rounds = kTruncationBudget);

/// Pr[|S ∩ T| = D] for independent uniform k-subsets, D = 0..k.
std::vector<double> intersection_profile(unsigned n, unsigned k);
std::vector<Rational> intersection_profile_exact(unsigned n, unsigned k);

}  // namespace jt
