#include "jt/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace jt {

using boost::multiprecision::cpp_rational;

double moment_integral(unsigned a, unsigned b, double lo, double hi) {
  if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) throw InvalidArgument("moment_integral needs 0 <= lo <= hi <= 1");
  return moment_integral<double>(a, b, lo, hi);
}

// --------------------------------------------------------- PiecewiseMeasure

PiecewiseMeasure::PiecewiseMeasure(Eigen::VectorXd weights, bool is_signed)
    : weights_(std::move(weights)), signed_(is_signed) {
  if (weights_.size() == 0) throw InvalidArgument("measure needs at least one piece");
  for (Eigen::Index j = 0; j < weights_.size(); ++j) {
    if (!std::isfinite(weights_[j])) throw InvalidArgument("measure weights must be finite");
    if (!signed_ && weights_[j] < 0.0) throw InvalidArgument("unsigned measure has a negative weight");
  }
}

PiecewiseMeasure PiecewiseMeasure::lebesgue_multiple(unsigned m, double density) {
  return PiecewiseMeasure(Eigen::VectorXd::Constant(m, density), density < 0.0);
}

double PiecewiseMeasure::measure(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 0.5);
  if (!(hi > lo)) return 0.0;
  const double h = width();
  double total = 0.0;
  for (unsigned j = 0; j < pieces(); ++j) {
    const double a = std::max(lo, j * h);
    const double b = std::min(hi, (j + 1) * h);
    if (b > a) total += weights_[j] * (b - a);
  }
  return total;
}

double PiecewiseMeasure::moment(unsigned a, unsigned b) const {
  const double h = width();
  double total = 0.0;
  for (unsigned j = 0; j < pieces(); ++j) total += weights_[j] * moment_integral<double>(a, b, j * h, (j + 1) * h);
  return total;
}

// ------------------------------------------------------------ moment system

std::vector<std::pair<unsigned, unsigned>> moment_rows(unsigned d) {
  std::vector<std::pair<unsigned, unsigned>> rows;
  rows.emplace_back(1, 0);
  for (unsigned a = 1; a <= d; ++a) {
    for (unsigned b = 1; b <= d; ++b) rows.emplace_back(a, b);
  }
  rows.emplace_back(0, 0);
  return rows;
}

std::vector<std::vector<cpp_rational>> moment_matrix_exact(unsigned d, unsigned m) {
  if (m == 0) throw InvalidArgument("moment matrix needs m >= 1");
  const auto rows = moment_rows(d);
  std::vector<std::vector<cpp_rational>> M(rows.size(), std::vector<cpp_rational>(m));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (unsigned j = 0; j < m; ++j) {
      const cpp_rational lo(j, 2 * m);
      const cpp_rational hi(j + 1, 2 * m);
      M[r][j] = moment_integral<cpp_rational>(rows[r].first, rows[r].second, lo, hi);
    }
  }
  return M;
}

Eigen::MatrixXd moment_matrix(unsigned d, unsigned m) {
  const auto exact = moment_matrix_exact(d, m);
  Eigen::MatrixXd M(exact.size(), m);
  for (std::size_t r = 0; r < exact.size(); ++r) {
    for (unsigned j = 0; j < m; ++j) M(static_cast<Eigen::Index>(r), j) = static_cast<double>(exact[r][j]);
  }
  return M;
}

RhoSolution solve_rho_measure(unsigned d, unsigned m) {
  if (d == 0) throw InvalidArgument("solve_rho_measure needs d >= 1");
  if (m <= 2 * d * d) throw InvalidArgument("solve_rho_measure needs m > 2 d^2");
  const auto exact = moment_matrix_exact(d, m);
  const Eigen::MatrixXd M = moment_matrix(d, m);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(M.rows());
  v[0] = 1.0;

  // v - M w with M exact and w taken exactly as stored.
  auto exact_residual = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd r(M.rows());
    for (std::size_t row = 0; row < exact.size(); ++row) {
      cpp_rational acc = row == 0 ? 1 : 0;
      for (unsigned j = 0; j < m; ++j) acc -= exact[row][j] * cpp_rational(w[j]);
      r[static_cast<Eigen::Index>(row)] = static_cast<double>(acc);
    }
    return r;
  };

  // The (a,b) rows are linearly dependent for d >= 2, but the system stays
  // consistent; the complete orthogonal decomposition gives the
  // minimum-norm solution. |w| grows quickly with d, so a few rounds of
  // refinement against the exact residual recover the digits lost to
  // cancellation in double precision.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  Eigen::VectorXd w = cod.solve(v);
  Eigen::VectorXd r = exact_residual(w);
  for (int round = 0; round < 4 && r.lpNorm<Eigen::Infinity>() > kSolveTolerance * 1e-3; ++round) {
    const Eigen::VectorXd next = w + cod.solve(r);
    const Eigen::VectorXd next_r = exact_residual(next);
    if (!(next_r.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>())) break;
    w = next;
    r = next_r;
  }
  const double residual = r.lpNorm<Eigen::Infinity>();
  if (!(residual <= kSolveTolerance)) {
    throw std::runtime_error("solve_rho_measure: residual " + std::to_string(residual) + " exceeds tolerance");
  }
  const double scale = w.lpNorm<Eigen::Infinity>();
  if (!(scale > 0.0)) throw std::runtime_error("solve_rho_measure: zero solution");
  return RhoSolution{PiecewiseMeasure(w / scale, true), residual, cod.rank(), scale};
}

MuNu build_mu_nu(unsigned d, unsigned m) {
  const RhoSolution sol = solve_rho_measure(d, m);
  const Eigen::VectorXd mu_w = Eigen::VectorXd::Constant(m, 2.0);
  const Eigen::VectorXd nu_w = mu_w + sol.rho.weights();
  const double first = sol.rho.moment(1, 0);
  return MuNu{PiecewiseMeasure(mu_w, false), PiecewiseMeasure(nu_w, false), std::abs(first), first > 0.0};
}

// ------------------------------------------------------------ PushforwardFn

namespace {
constexpr double kWeightTolerance = 1e-9;
}

PushforwardFn::PushforwardFn(const PiecewiseMeasure& measure) {
  const unsigned m = measure.pieces();
  const double total = measure.total();
  if (std::abs(total - 2.0 * m) > kWeightTolerance * m) throw InvalidArgument("pushforward needs weights summing to 2m");
  weights_.assign(measure.weights().data(), measure.weights().data() + m);
  for (double w : weights_) {
    if (w < 1.0 - kWeightTolerance) throw InvalidArgument("pushforward needs every weight >= 1");
  }
  t_.resize(m + 1);
  t_[0] = 0.0;
  double acc = 0.0;
  for (unsigned i = 0; i < m; ++i) {
    acc += weights_[i];
    t_[i + 1] = acc / (2.0 * m);
  }
  // Pin the endpoint so f covers [0,1] exactly.
  t_[m] = 1.0;
}

double PushforwardFn::lipschitz() const { return 1.0 / *std::min_element(weights_.begin(), weights_.end()); }

std::size_t PushforwardFn::piece_of(double x) const {
  auto it = std::upper_bound(t_.begin(), t_.end(), x);
  auto i = static_cast<std::size_t>(it - t_.begin());
  return std::min<std::size_t>(i == 0 ? 0 : i - 1, pieces() - 1);
}

double PushforwardFn::operator()(double x) const {
  x = std::clamp(x, 0.0, 1.0);
  const std::size_t i = piece_of(x);
  const double v = static_cast<double>(i) / (2.0 * pieces()) + (x - t_[i]) / weights_[i];
  return std::clamp(v, 0.0, 0.5);
}

double PushforwardFn::inverse(double y) const {
  y = std::clamp(y, 0.0, 0.5);
  const double scaled = y * 2.0 * pieces();
  auto i = static_cast<std::size_t>(std::floor(scaled));
  if (i >= pieces()) i = pieces() - 1;
  const double base = static_cast<double>(i) / (2.0 * pieces());
  return std::clamp(t_[i] + weights_[i] * (y - base), 0.0, 1.0);
}

double PushforwardFn::integral(double lo, double hi) const {
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) throw InvalidArgument("integral bounds must satisfy 0 <= lo <= hi <= 1");
  double total = 0.0;
  std::size_t i = piece_of(lo);
  double a = lo;
  while (a < hi && i < pieces()) {
    const double b = std::min(hi, t_[i + 1]);
    if (b > a) {
      const double base = static_cast<double>(i) / (2.0 * pieces());
      const double fa = base + (a - t_[i]) / weights_[i];
      const double fb = base + (b - t_[i]) / weights_[i];
      total += 0.5 * (fa + fb) * (b - a);
    }
    a = std::max(a, b);
    ++i;
  }
  return total;
}

// ------------------------------------------------------------- BaseFunction

double BaseFunction::mean() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

void BaseFunction::validate() const {
  if (values.empty()) throw InvalidArgument("base function needs N >= 1");
  for (double v : values) {
    if (!(v >= 0.0 && v <= 0.5)) throw InvalidArgument("base function values must lie in [0, 1/2]");
  }
}

BaseFunction discretize(const PushforwardFn& fn, std::size_t N) {
  if (N == 0) throw InvalidArgument("discretize needs N >= 1");
  BaseFunction p;
  p.values.resize(N);
  const double width = 1.0 / static_cast<double>(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double lo = static_cast<double>(i) * width;
    const double hi = i + 1 == N ? 1.0 : static_cast<double>(i + 1) * width;
    p.values[i] = std::clamp(fn.integral(lo, hi) / (hi - lo), 0.0, 0.5);
  }
  return p;
}

double base_moment(const BaseFunction& p, unsigned a, unsigned b) {
  double s = 0.0;
  for (double v : p.values) s += std::pow(v, a) * std::pow(1.0 - v, b);
  return s / static_cast<double>(p.size());
}

EquivalenceReport check_equivalence_gap(const BaseFunction& p, const BaseFunction& q, unsigned d) {
  if (p.size() != q.size()) throw DimensionMismatch("base functions differ in N");
  p.validate();
  q.validate();
  const double N = static_cast<double>(p.size());
  EquivalenceReport rep;
  rep.mean_p = p.mean();
  rep.mean_q = q.mean();
  rep.alpha_actual = std::numeric_limits<double>::infinity();
  for (unsigned a = 0; a <= d; ++a) {
    for (unsigned b = 0; a + b <= d; ++b) {
      if (a >= 1 && b >= 1) {
        const double diff = N * std::abs(base_moment(p, a, b) - base_moment(q, a, b));
        rep.gamma_actual = std::max(rep.gamma_actual, diff);
      }
      for (const BaseFunction* f : {&p, &q}) {
        const double bounded = base_moment(*f, a, b) + base_moment(*f, b, a);
        rep.alpha_actual = std::min(rep.alpha_actual, bounded);
      }
    }
  }
  return rep;
}

// ------------------------------------------------------------ serialization

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw InvalidArgument("malformed number: " + s);
  return v;
}

namespace {

std::string read_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("unexpected end of input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::uint64_t parse_field(const std::string& token, const std::string& key) {
  if (token.rfind(key + "=", 0) != 0) throw InvalidArgument("expected field " + key);
  std::uint64_t v = 0;
  const char* first = token.data() + key.size() + 1;
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw InvalidArgument("malformed field " + key);
  return v;
}

}  // namespace

void write_measure(std::ostream& os, const PiecewiseMeasure& measure) {
  os << "m=" << measure.pieces() << " signed=" << (measure.is_signed() ? 1 : 0) << '\n';
  for (unsigned j = 0; j < measure.pieces(); ++j) os << format_double(measure.weights()[j]) << '\n';
}

PiecewiseMeasure read_measure(std::istream& is) {
  const std::string header = read_line(is);
  const auto space = header.find(' ');
  if (space == std::string::npos) throw InvalidArgument("malformed measure header");
  const std::uint64_t m = parse_field(header.substr(0, space), "m");
  const std::uint64_t s = parse_field(header.substr(space + 1), "signed");
  if (m == 0 || s > 1) throw InvalidArgument("malformed measure header");
  Eigen::VectorXd w(static_cast<Eigen::Index>(m));
  for (std::uint64_t j = 0; j < m; ++j) w[static_cast<Eigen::Index>(j)] = parse_double(read_line(is));
  return PiecewiseMeasure(std::move(w), s == 1);
}

void write_base(std::ostream& os, const BaseFunction& base) {
  os << "N=" << base.size() << '\n';
  for (double v : base.values) os << format_double(v) << '\n';
}

BaseFunction read_base(std::istream& is) {
  const std::uint64_t N = parse_field(read_line(is), "N");
  BaseFunction p;
  p.values.reserve(N);
  for (std::uint64_t i = 0; i < N; ++i) p.values.push_back(parse_double(read_line(is)));
  p.validate();
  return p;
}

}  // namespace jt
