#pragma once

// Boolean functions on the hypercube: bit vectors, packed truth tables,
// juntas, and brute-force nearest-junta oracles.
//
// Inputs are encoded as integers with variable 0 in the least significant
// bit. Strings read left to right as variable 0, 1, 2, ...

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "jt/common.hpp"
#include "jt/distkit.hpp"

namespace jt {

class BitVector {
 public:
  static constexpr unsigned kMaxBits = 63;

  BitVector() = default;
  BitVector(unsigned n, std::uint64_t bits);

  /// Parses "0101..."; character i is variable i.
  static BitVector from_string(std::string_view s);

  unsigned size() const noexcept { return n_; }
  std::uint64_t value() const noexcept { return bits_; }
  bool operator[](unsigned i) const;
  BitVector with(unsigned i, bool v) const;
  std::string to_string() const;

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  unsigned n_ = 0;
  std::uint64_t bits_ = 0;
};

/// A point together with its label.
struct LabeledSample {
  BitVector x;
  bool y = false;
};

/// Subsequence of x on the coordinates in S.
BitVector restrict(const BitVector& x, const VarSet& vars);

/// Function {0,1}^k -> {0,1} stored as packed 64-bit blocks indexed by the
/// integer encoding of the input.
class TruthTable {
 public:
  static constexpr unsigned kMaxArity = 20;

  explicit TruthTable(unsigned arity = 0);
  /// Parses a string of 2^k characters; character j is the value at input j.
  static TruthTable from_string(std::string_view values);
  static TruthTable parity(unsigned arity);
  static TruthTable constant(unsigned arity, bool value);
  /// f(z) = z_var.
  static TruthTable dictator(unsigned arity, unsigned var);
  static TruthTable from_function(unsigned arity, const std::function<bool(std::uint64_t)>& fn);

  unsigned arity() const noexcept { return arity_; }
  std::uint64_t size() const noexcept { return std::uint64_t{1} << arity_; }
  std::uint64_t ones_count() const noexcept { return ones_; }
  bool balanced() const noexcept { return arity_ > 0 && 2 * ones_ == size(); }

  bool operator[](std::uint64_t z) const noexcept { return ((blocks_[z >> 6] >> (z & 63)) & 1U) != 0; }
  void set(std::uint64_t z, bool v);
  void flip(std::uint64_t z) { set(z, !(*this)[z]); }

  std::string to_string() const;

  friend bool operator==(const TruthTable& a, const TruthTable& b) {
    return a.arity_ == b.arity_ && a.blocks_ == b.blocks_;
  }

 private:
  unsigned arity_;
  std::uint64_t ones_ = 0;
  std::vector<std::uint64_t> blocks_;
};

/// Uniformly random table with exactly 2^{k-1} ones. Requires 1 <= k <= 16.
TruthTable sample_balanced(unsigned arity, Rng& rng);

inline TruthTable parity_table(unsigned arity) { return TruthTable::parity(arity); }

/// f_S(x) = core(x_S).
class Junta {
 public:
  Junta(unsigned n, VarSet vars, TruthTable core);

  unsigned dim() const noexcept { return n_; }
  const VarSet& vars() const noexcept { return vars_; }
  std::uint64_t mask() const noexcept { return mask_; }
  const TruthTable& core() const noexcept { return core_; }

  bool eval(std::uint64_t x) const noexcept { return core_[extract_bits(x, mask_)]; }
  bool eval(const BitVector& x) const;

 private:
  unsigned n_;
  VarSet vars_;
  std::uint64_t mask_;
  TruthTable core_;
};

inline bool eval_junta(const Junta& j, const BitVector& x) { return j.eval(x); }

/// A boolean function on {0,1}^n: an explicit table, a junta, or an
/// arbitrary callable. Copies share any internal state of a callable.
class BoolFn {
 public:
  using Callable = std::function<bool(std::uint64_t)>;

  /// Explicit table; the table arity is the dimension.
  BoolFn(TruthTable table);  // NOLINT(google-explicit-constructor)
  BoolFn(Junta junta);       // NOLINT(google-explicit-constructor)
  BoolFn(unsigned n, Callable fn);

  unsigned dim() const noexcept { return n_; }
  bool operator()(std::uint64_t x) const;
  bool operator()(const BitVector& x) const;

  /// Materializes all 2^n values. Requires n <= 20.
  TruthTable to_table() const;

  const Junta* as_junta() const noexcept { return std::get_if<Junta>(&impl_); }

 private:
  struct Lazy {
    std::shared_ptr<const Callable> fn;
  };
  unsigned n_;
  std::variant<TruthTable, Junta, Lazy> impl_;
};

/// Exact Pr_{x~D}[f(x) != g(x)] for a distribution over the 2^n points.
double function_distance(const BoolFn& f, const BoolFn& g, const FiniteDist& dist);

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t trials = 0;
};

/// Monte-Carlo estimate of the disagreement probability under a product
/// distribution.
Estimate function_distance(const BoolFn& f, const BoolFn& g, const ProductCube& dist,
                           std::uint64_t trials, Rng& rng);

struct NearestJunta {
  TruthTable core;
  double distance = 0.0;
};

/// Closest junta on `vars` under `dist`: each restriction value takes the
/// weighted majority label, ties going to 0.
NearestJunta nearest_on_set(const BoolFn& f, const VarSet& vars, const FiniteDist& dist);

struct OracleResult {
  double distance = 0.0;
  VarSet best_vars;
};

inline constexpr std::uint64_t kDefaultOracleBudget = 100'000'000;

/// Minimum over all k-subsets S of nearest_on_set(f, S, dist).distance.
/// Throws BudgetExceeded when C(n,k) * 2^n exceeds `budget`.
OracleResult oracle_dist_to_juntas(const BoolFn& f, unsigned k, const FiniteDist& dist,
                                   std::uint64_t budget = kDefaultOracleBudget);

}  // namespace jt
