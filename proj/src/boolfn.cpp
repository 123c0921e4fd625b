#include "jt/boolfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jt {

// ---------------------------------------------------------------- BitVector

BitVector::BitVector(unsigned n, std::uint64_t bits) : n_(n), bits_(bits & low_mask(n)) {
  if (n > kMaxBits) throw InvalidArgument("BitVector length exceeds 63");
  if ((bits & ~low_mask(n)) != 0) throw InvalidArgument("BitVector value has bits beyond its length");
}

BitVector BitVector::from_string(std::string_view s) {
  if (s.size() > kMaxBits) throw InvalidArgument("BitVector string too long");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      bits |= std::uint64_t{1} << i;
    } else if (s[i] != '0') {
      throw InvalidArgument("BitVector string must contain only '0' and '1'");
    }
  }
  return BitVector(static_cast<unsigned>(s.size()), bits);
}

bool BitVector::operator[](unsigned i) const {
  if (i >= n_) throw InvalidArgument("BitVector index out of range");
  return ((bits_ >> i) & 1U) != 0;
}

BitVector BitVector::with(unsigned i, bool v) const {
  if (i >= n_) throw InvalidArgument("BitVector index out of range");
  const std::uint64_t bit = std::uint64_t{1} << i;
  return BitVector(n_, v ? (bits_ | bit) : (bits_ & ~bit));
}

std::string BitVector::to_string() const {
  std::string s(n_, '0');
  for (unsigned i = 0; i < n_; ++i) {
    if (((bits_ >> i) & 1U) != 0) s[i] = '1';
  }
  return s;
}

BitVector restrict(const BitVector& x, const VarSet& vars) {
  validate_varset(vars, x.size());
  return BitVector(static_cast<unsigned>(vars.size()), extract_bits(x.value(), varset_mask(vars)));
}

// --------------------------------------------------------------- TruthTable

TruthTable::TruthTable(unsigned arity) : arity_(arity) {
  if (arity > kMaxArity) throw InvalidArgument("truth table arity exceeds 20");
  blocks_.assign(std::max<std::uint64_t>(1, size() / 64), 0);
}

TruthTable TruthTable::from_string(std::string_view values) {
  const auto len = values.size();
  if (len == 0 || (len & (len - 1)) != 0) throw InvalidArgument("truth table string length must be a power of two");
  TruthTable t(static_cast<unsigned>(std::countr_zero(len)));
  for (std::size_t z = 0; z < len; ++z) {
    if (values[z] != '0' && values[z] != '1') throw InvalidArgument("truth table string must contain only '0' and '1'");
    t.set(z, values[z] == '1');
  }
  return t;
}

TruthTable TruthTable::parity(unsigned arity) {
  if (arity == 0) throw InvalidArgument("parity needs arity >= 1");
  return from_function(arity, [](std::uint64_t z) { return (std::popcount(z) & 1) != 0; });
}

TruthTable TruthTable::constant(unsigned arity, bool value) {
  return from_function(arity, [value](std::uint64_t) { return value; });
}

TruthTable TruthTable::dictator(unsigned arity, unsigned var) {
  if (var >= arity) throw InvalidArgument("dictator variable out of range");
  return from_function(arity, [var](std::uint64_t z) { return ((z >> var) & 1U) != 0; });
}

TruthTable TruthTable::from_function(unsigned arity, const std::function<bool(std::uint64_t)>& fn) {
  TruthTable t(arity);
  for (std::uint64_t z = 0; z < t.size(); ++z) {
    if (fn(z)) t.set(z, true);
  }
  return t;
}

void TruthTable::set(std::uint64_t z, bool v) {
  if (z >= size()) throw InvalidArgument("truth table index out of range");
  const std::uint64_t bit = std::uint64_t{1} << (z & 63);
  std::uint64_t& block = blocks_[z >> 6];
  const bool old = (block & bit) != 0;
  if (old == v) return;
  if (v) {
    block |= bit;
    ++ones_;
  } else {
    block &= ~bit;
    --ones_;
  }
}

std::string TruthTable::to_string() const {
  std::string s(size(), '0');
  for (std::uint64_t z = 0; z < size(); ++z) {
    if ((*this)[z]) s[z] = '1';
  }
  return s;
}

TruthTable sample_balanced(unsigned arity, Rng& rng) {
  if (arity == 0 || arity > 16) throw InvalidArgument("sample_balanced needs 1 <= k <= 16");
  const std::uint64_t size = std::uint64_t{1} << arity;
  std::vector<std::uint64_t> pos(size);
  std::iota(pos.begin(), pos.end(), std::uint64_t{0});
  // Partial Fisher-Yates: the first size/2 slots form a uniform subset.
  TruthTable t(arity);
  for (std::uint64_t i = 0; i < size / 2; ++i) {
    const std::uint64_t j = i + rng.below(size - i);
    std::swap(pos[i], pos[j]);
    t.set(pos[i], true);
  }
  return t;
}

// -------------------------------------------------------------------- Junta

Junta::Junta(unsigned n, VarSet vars, TruthTable core)
    : n_(n), vars_(std::move(vars)), mask_(0), core_(std::move(core)) {
  if (n > BitVector::kMaxBits) throw InvalidArgument("junta dimension exceeds 63");
  validate_varset(vars_, n);
  if (core_.arity() != vars_.size()) throw DimensionMismatch("core arity differs from the number of junta variables");
  mask_ = varset_mask(vars_);
}

bool Junta::eval(const BitVector& x) const {
  if (x.size() != n_) throw DimensionMismatch("input length differs from junta dimension");
  return eval(x.value());
}

// ------------------------------------------------------------------- BoolFn

BoolFn::BoolFn(TruthTable table) : n_(table.arity()), impl_(std::move(table)) {}

BoolFn::BoolFn(Junta junta) : n_(junta.dim()), impl_(std::move(junta)) {}

BoolFn::BoolFn(unsigned n, Callable fn)
    : n_(n), impl_(Lazy{std::make_shared<const Callable>(std::move(fn))}) {
  if (n > BitVector::kMaxBits) throw InvalidArgument("function dimension exceeds 63");
}

bool BoolFn::operator()(std::uint64_t x) const {
  switch (impl_.index()) {
    case 0:
      return std::get<0>(impl_)[x];
    case 1:
      return std::get<1>(impl_).eval(x);
    default:
      return (*std::get<2>(impl_).fn)(x);
  }
}

bool BoolFn::operator()(const BitVector& x) const {
  if (x.size() != n_) throw DimensionMismatch("input length differs from function dimension");
  return (*this)(x.value());
}

TruthTable BoolFn::to_table() const {
  if (n_ > TruthTable::kMaxArity) throw BudgetExceeded("explicit table needs n <= 20");
  if (const auto* t = std::get_if<TruthTable>(&impl_)) return *t;
  TruthTable t(n_);
  for (std::uint64_t x = 0; x < t.size(); ++x) {
    if ((*this)(x)) t.set(x, true);
  }
  return t;
}

// ---------------------------------------------------------------- distances

namespace {

void check_explicit(unsigned n, const FiniteDist& dist) {
  if (n > TruthTable::kMaxArity) throw BudgetExceeded("exact mode needs n <= 20");
  if (dist.size() != (std::uint64_t{1} << n)) throw DimensionMismatch("distribution size differs from 2^n");
}

// Per-restriction label masses, indexed [2*z + label].
std::vector<double> label_masses(const TruthTable& f, std::uint64_t mask, const FiniteDist& dist) {
  std::vector<double> mass(std::size_t{2} << std::popcount(mask), 0.0);
  for (std::uint64_t x = 0; x < f.size(); ++x) {
    const double w = dist[x];
    if (w == 0.0) continue;
    mass[2 * extract_bits(x, mask) + (f[x] ? 1 : 0)] += w;
  }
  return mass;
}

double minority_mass(const std::vector<double>& mass) {
  double d = 0.0;
  for (std::size_t z = 0; z < mass.size() / 2; ++z) d += std::min(mass[2 * z], mass[2 * z + 1]);
  return d;
}

}  // namespace

double function_distance(const BoolFn& f, const BoolFn& g, const FiniteDist& dist) {
  if (f.dim() != g.dim()) throw DimensionMismatch("function dimensions differ");
  check_explicit(f.dim(), dist);
  double d = 0.0;
  for (std::uint64_t x = 0; x < dist.size(); ++x) {
    if (f(x) != g(x)) d += dist[x];
  }
  return d;
}

Estimate function_distance(const BoolFn& f, const BoolFn& g, const ProductCube& dist,
                           std::uint64_t trials, Rng& rng) {
  if (f.dim() != g.dim() || f.dim() != dist.dim()) throw DimensionMismatch("function dimensions differ");
  if (trials == 0) throw InvalidArgument("Monte-Carlo distance needs at least one trial");
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::uint64_t x = dist.sample(rng).value();
    if (f(x) != g(x)) ++hits;
  }
  Estimate e;
  e.trials = trials;
  e.value = static_cast<double>(hits) / static_cast<double>(trials);
  e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
  return e;
}

NearestJunta nearest_on_set(const BoolFn& f, const VarSet& vars, const FiniteDist& dist) {
  check_explicit(f.dim(), dist);
  validate_varset(vars, f.dim());
  const auto mass = label_masses(f.to_table(), varset_mask(vars), dist);
  NearestJunta out{TruthTable(static_cast<unsigned>(vars.size())), minority_mass(mass)};
  for (std::uint64_t z = 0; z < out.core.size(); ++z) {
    // Strict comparison sends ties to 0.
    if (mass[2 * z + 1] > mass[2 * z]) out.core.set(z, true);
  }
  return out;
}

OracleResult oracle_dist_to_juntas(const BoolFn& f, unsigned k, const FiniteDist& dist,
                                   std::uint64_t budget) {
  const unsigned n = f.dim();
  check_explicit(n, dist);
  if (k > n) throw InvalidArgument("junta size exceeds dimension");
  const std::uint64_t points = std::uint64_t{1} << n;
  const std::uint64_t subsets = binomial_capped(n, k, budget / points);
  (void)subsets;
  const TruthTable table = f.to_table();
  OracleResult best{std::numeric_limits<double>::infinity(), {}};
  for_each_subset_colex(n, k, [&](std::uint64_t mask) {
    const double d = minority_mass(label_masses(table, mask, dist));
    if (d < best.distance) {
      best.distance = d;
      best.best_vars = mask_varset(mask);
    }
    return best.distance > 0.0;
  });
  return best;
}

}  // namespace jt
