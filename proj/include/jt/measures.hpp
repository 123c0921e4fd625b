#pragma once

// Piecewise-constant measures on [0,1/2], the signed measure that kills
// mixed moments while keeping a first moment, the pair (mu, nu) built from
// it, monotone pushforward maps, and their discretization into base
// functions [N] -> [0,1/2].
//
// A measure with m pieces has density w_j on I_j = [j/(2m), (j+1)/(2m)),
// j = 0..m-1.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "jt/common.hpp"

namespace jt {

/// Integral of x^a (1-x)^b over [lo, hi] by binomial expansion of (1-x)^b.
template <class Scalar>
Scalar moment_integral(unsigned a, unsigned b, const Scalar& lo, const Scalar& hi) {
  Scalar total = 0;
  Scalar coeff = 1;  // C(b, l) (-1)^l
  for (unsigned l = 0; l <= b; ++l) {
    const unsigned e = a + l + 1;
    Scalar hi_pow = 1;
    Scalar lo_pow = 1;
    for (unsigned t = 0; t < e; ++t) {
      hi_pow *= hi;
      lo_pow *= lo;
    }
    total += coeff * (hi_pow - lo_pow) / Scalar(e);
    coeff = -coeff * Scalar(b - l) / Scalar(l + 1);
  }
  return total;
}

double moment_integral(unsigned a, unsigned b, double lo, double hi);

class PiecewiseMeasure {
 public:
  PiecewiseMeasure(Eigen::VectorXd weights, bool is_signed);

  static PiecewiseMeasure lebesgue_multiple(unsigned m, double density);

  unsigned pieces() const noexcept { return static_cast<unsigned>(weights_.size()); }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  bool is_signed() const noexcept { return signed_; }
  double width() const noexcept { return 0.5 / pieces(); }

  double total() const { return weights_.sum(); }
  /// Mass of [lo, hi] ∩ [0, 1/2].
  double measure(double lo, double hi) const;
  /// Integral of x^a (1-x)^b.
  double moment(unsigned a, unsigned b) const;
  /// Integral of x; the mean when the weights sum to 2m.
  double mean() const { return moment(1, 0); }

  friend bool operator==(const PiecewiseMeasure& x, const PiecewiseMeasure& y) {
    return x.signed_ == y.signed_ && x.weights_.size() == y.weights_.size() && x.weights_ == y.weights_;
  }

 private:
  Eigen::VectorXd weights_;
  bool signed_;
};

/// Row order of the moment system: (1,0), then (a,b) for a = 1..d and
/// b = 1..d in row-major order, then (0,0).
std::vector<std::pair<unsigned, unsigned>> moment_rows(unsigned d);

/// Exact entries M[r][j] = integral over I_j of the row-r monomial.
std::vector<std::vector<boost::multiprecision::cpp_rational>> moment_matrix_exact(unsigned d, unsigned m);
Eigen::MatrixXd moment_matrix(unsigned d, unsigned m);

struct RhoSolution {
  PiecewiseMeasure rho;
  /// ||M w - v||_inf before normalization.
  double residual = 0.0;
  Eigen::Index rank = 0;
  /// max |w| before normalization.
  double scale = 0.0;
};

inline constexpr double kSolveTolerance = 1e-10;

/// Minimum-norm solution of M w = e_(1,0), rescaled to max |w| = 1.
/// Requires m > 2 d^2; throws std::runtime_error if the residual exceeds
/// kSolveTolerance.
RhoSolution solve_rho_measure(unsigned d, unsigned m);

struct MuNu {
  PiecewiseMeasure mu;
  PiecewiseMeasure nu;
  double gap = 0.0;
  /// True when nu has the larger first moment (nu is the far side).
  bool nu_is_far = true;

  const PiecewiseMeasure& close() const { return nu_is_far ? mu : nu; }
  const PiecewiseMeasure& far() const { return nu_is_far ? nu : mu; }
};

/// mu = 2 lambda, nu = mu + rho with max |w_rho| = 1.
MuNu build_mu_nu(unsigned d, unsigned m);

/// Monotone piecewise-linear f: [0,1] -> [0,1/2] with f(t_i) = i/(2m),
/// t_i = (1/2m) sum_{j<i} w_j, slope 1/w_i on piece i. Pushes Lebesgue
/// measure on [0,1] forward to the given measure.
class PushforwardFn {
 public:
  explicit PushforwardFn(const PiecewiseMeasure& measure);

  unsigned pieces() const noexcept { return static_cast<unsigned>(weights_.size()); }
  const std::vector<double>& breakpoints() const noexcept { return t_; }
  double lipschitz() const;

  double operator()(double x) const;
  /// Smallest x with f(x) = y, for y in [0, 1/2].
  double inverse(double y) const;
  /// Exact integral of f over [lo, hi] ⊆ [0, 1].
  double integral(double lo, double hi) const;

 private:
  std::size_t piece_of(double x) const;
  std::vector<double> weights_;
  std::vector<double> t_;
};

/// p(i) for i in [N]; values in [0, 1/2].
struct BaseFunction {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double mean() const;
  void validate() const;

  friend bool operator==(const BaseFunction&, const BaseFunction&) = default;
};

/// p(i) = N * integral of f over [i/N, (i+1)/N].
BaseFunction discretize(const PushforwardFn& fn, std::size_t N);

/// (1/N) sum_i p(i)^a (1 - p(i))^b.
double base_moment(const BaseFunction& p, unsigned a, unsigned b);

struct EquivalenceReport {
  /// max over a,b >= 1, a+b <= d of |sum p^a(1-p)^b - sum q^a(1-q)^b|.
  double gamma_actual = 0.0;
  /// min over a,b >= 0, a+b <= d of (1/N) sum [p^a(1-p)^b + p^b(1-p)^a],
  /// minimized over both functions.
  double alpha_actual = 0.0;
  double mean_p = 0.0;
  double mean_q = 0.0;
};

EquivalenceReport check_equivalence_gap(const BaseFunction& p, const BaseFunction& q, unsigned d);

// Plain-text serialization; 17 significant digits, exact round trip.
void write_measure(std::ostream& os, const PiecewiseMeasure& measure);
PiecewiseMeasure read_measure(std::istream& is);
void write_base(std::ostream& os, const BaseFunction& base);
BaseFunction read_base(std::istream& is);

std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace jt
