#include "jt/bench.hpp"

#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "jt/boolfn.hpp"
#include "jt/hardgen.hpp"
#include "jt/junta.hpp"
#include "jt/measures.hpp"
#include "jt/sopp.hpp"
#include "jt/tolerant.hpp"

namespace jt {

namespace {

constexpr const char* kKindNames[] = {"sopp", "junta", "select", "hardness", "tolerant", "truncate"};

}  // namespace

const char* to_string(ExperimentKind kind) { return kKindNames[static_cast<int>(kind)]; }

ExperimentKind parse_kind(const std::string& s) {
  for (int i = 0; i < 6; ++i) {
    if (s == kKindNames[i]) return static_cast<ExperimentKind>(i);
  }
  throw InvalidArgument("unknown experiment kind: " + s);
}

void ExperimentConfig::validate() {
  if (trials == 0) throw InvalidArgument("trials must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  if (distribution != "uniform" && distribution != "product") {
    throw InvalidArgument("distribution must be uniform or product");
  }
  auto need_source = [&](std::initializer_list<const char*> allowed) {
    if (source.empty()) source = *allowed.begin();
    for (const char* a : allowed) {
      if (source == a) return;
    }
    throw InvalidArgument("source '" + source + "' not valid for kind " + to_string(kind));
  };
  auto need_cube = [&] {
    if (n == 0 || n > 20) throw InvalidArgument("n must lie in [1, 20]");
    if (k > n) throw InvalidArgument("k must not exceed n");
  };
  switch (kind) {
    case ExperimentKind::Sopp:
      need_source({"sopp", "uniform"});
      if (N == 0) throw InvalidArgument("N must be >= 1");
      break;
    case ExperimentKind::Junta:
      need_source({"junta", "parity"});
      need_cube();
      if (source == "parity" && k + 1 > n) throw InvalidArgument("parity source needs k + 1 <= n");
      N = std::uint64_t{1} << k;
      break;
    case ExperimentKind::Select:
      need_source({"junta"});
      need_cube();
      if (k == 0) throw InvalidArgument("select needs k >= 1");
      N = std::uint64_t{1} << k;
      break;
    case ExperimentKind::Hardness:
      need_source({"parity", "balanced"});
      need_cube();
      if (k == 0) throw InvalidArgument("hardness needs k >= 1");
      if (source == "balanced" && k > 16) throw InvalidArgument("balanced setup needs k <= 16");
      if (!m) m = 4;
      if (*m > 63) throw InvalidArgument("hardness m must be <= 63");
      N = std::uint64_t{1} << k;
      break;
    case ExperimentKind::Tolerant:
      need_source({"alternate", "close", "far"});
      if (N < 2) throw InvalidArgument("N must be >= 2");
      if (d == 0 || d > 4) throw InvalidArgument("d must lie in [1, 4]");
      if (m_pieces == 0) m_pieces = 2 * d * d + 1;
      if (m_pieces <= 2 * d * d) throw InvalidArgument("m_pieces must exceed 2 d^2");
      if (!m) m = 8 * N;
      break;
    case ExperimentKind::Truncate:
      need_source({"balanced"});
      need_cube();
      if (k == 0) throw InvalidArgument("truncate needs k >= 1");
      N = std::uint64_t{1} << k;
      break;
  }
}

// --------------------------------------------------------------------- TOML

namespace {

void apply_table(const toml::table& tbl, ExperimentConfig& c) {
  for (const auto& [key, node] : tbl) {
    const std::string k(key.str());
    auto integer = [&]() -> std::int64_t {
      const auto v = node.value<std::int64_t>();
      if (!v || *v < 0) throw InvalidArgument("config key '" + k + "' must be a nonnegative integer");
      return *v;
    };
    auto real = [&]() -> double {
      const auto v = node.value<double>();
      if (!v) throw InvalidArgument("config key '" + k + "' must be a number");
      return *v;
    };
    auto text = [&]() -> std::string {
      const auto v = node.value<std::string>();
      if (!v) throw InvalidArgument("config key '" + k + "' must be a string");
      return *v;
    };
    if (k == "kind") {
      c.kind = parse_kind(text());
    } else if (k == "n") {
      c.n = static_cast<unsigned>(integer());
    } else if (k == "k") {
      c.k = static_cast<unsigned>(integer());
    } else if (k == "N") {
      c.N = static_cast<std::uint64_t>(integer());
    } else if (k == "eps") {
      c.eps = real();
    } else if (k == "delta") {
      c.delta = real();
    } else if (k == "d") {
      c.d = static_cast<unsigned>(integer());
    } else if (k == "m_pieces") {
      c.m_pieces = static_cast<unsigned>(integer());
    } else if (k == "trials") {
      c.trials = static_cast<std::uint64_t>(integer());
    } else if (k == "seed") {
      c.seed = static_cast<std::uint64_t>(integer());
    } else if (k == "out" || k == "out_path") {
      c.out_path = text();
    } else if (k == "m") {
      c.m = static_cast<std::uint64_t>(integer());
    } else if (k == "source") {
      c.source = text();
    } else if (k == "distribution") {
      c.distribution = text();
    } else if (k == "threads") {
      c.threads = static_cast<unsigned>(integer());
    } else if (k == "timing") {
      const auto v = node.value<bool>();
      if (!v) throw InvalidArgument("config key 'timing' must be a boolean");
      c.timing = *v;
    } else if (k == "subset_budget") {
      c.subset_budget = static_cast<std::uint64_t>(integer());
    } else {
      throw InvalidArgument("unknown config key '" + k + "'");
    }
  }
}

}  // namespace

void apply_toml_string(const std::string& text, ExperimentConfig& config) {
  try {
    apply_table(toml::parse(text), config);
  } catch (const toml::parse_error& e) {
    throw InvalidArgument(std::string("config parse error: ") + std::string(e.description()));
  }
}

void apply_toml(const std::string& path, ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_toml_string(ss.str(), config);
}

// ------------------------------------------------------------------- trials

namespace {

TruthTable random_table(unsigned k, Rng& rng) {
  TruthTable t(k);
  for (std::uint64_t z = 0; z < t.size(); ++z) t.set(z, rng.coin());
  return t;
}

bool depends_on_all(const TruthTable& t) {
  for (unsigned v = 0; v < t.arity(); ++v) {
    bool relevant = false;
    for (std::uint64_t z = 0; z < t.size() && !relevant; ++z) relevant = t[z] != t[z ^ (std::uint64_t{1} << v)];
    if (!relevant) return false;
  }
  return true;
}

ProductCube trial_cube(const ExperimentConfig& c, Rng& rng) {
  if (c.distribution == "uniform") return uniform_cube(c.n);
  std::vector<double> params(c.n);
  for (double& p : params) p = 0.1 + 0.8 * rng.uniform();
  return ProductCube(std::move(params));
}

struct Shared {
  // Tolerant families, built once per suite.
  BaseFunction close_base;
  BaseFunction far_base;
};

void run_sopp(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  std::vector<double> w(2 * c.N, 0.0);
  if (c.source == "sopp") {
    for (std::uint64_t i = 0; i < c.N; ++i) w[2 * i + (rng.coin() ? 1 : 0)] = 0.05 + rng.uniform();
    r.truth = "sopp";
  } else {
    std::fill(w.begin(), w.end(), 1.0);
    r.truth = "far";
  }
  const FiniteDist p(std::move(w));
  r.m = c.m ? *c.m : sopp_sample_size(static_cast<double>(c.N), c.eps, c.delta);
  const SoppVerdict v = sopp_test_with([&] { return p.sample(rng); }, c.N, r.m);
  r.verdict = to_string(v.verdict);
  r.samples_used = v.samples_used;
}

void run_junta(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const ProductCube cube = trial_cube(c, rng);
  BoolFn f = [&]() -> BoolFn {
    if (c.source == "parity") {
      r.truth = "far";
      return Junta(c.n, random_subset(c.n, c.k + 1, rng), TruthTable::parity(c.k + 1));
    }
    r.truth = "junta";
    return Junta(c.n, random_subset(c.n, c.k, rng), random_table(c.k, rng));
  }();
  JuntaOptions opts;
  opts.survey.subset_budget = c.subset_budget;
  opts.m_override = c.m;
  r.m = c.m ? *c.m : junta_sample_size(c.n, c.k, c.eps, c.delta);
  const JuntaVerdict v = junta_test(make_labeled_sampler(f, cube, rng), c.n, c.k, c.eps, c.delta, opts);
  r.verdict = to_string(v.verdict);
  r.samples_used = v.samples_used;
}

void run_select(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const ProductCube cube = trial_cube(c, rng);
  const VarSet S = random_subset(c.n, c.k, rng);
  TruthTable core = random_table(c.k, rng);
  while (!depends_on_all(core)) core = random_table(c.k, rng);
  const BoolFn f = Junta(c.n, S, std::move(core));
  JuntaOptions opts;
  opts.survey.subset_budget = c.subset_budget;
  opts.m_override = c.m;
  const auto draw = make_labeled_sampler(f, cube, rng);
  const double floor_eps = std::ldexp(1.0, -static_cast<int>(c.k));
  const bool uniform = c.distribution == "uniform";
  r.m = c.m ? *c.m : junta_sample_size(c.n, c.k, uniform ? std::max(c.eps, floor_eps) : c.eps, c.delta);
  const SelectionResult sel = uniform ? feature_select_uniform(draw, c.n, c.k, c.eps, c.delta, opts)
                                      : feature_select(draw, c.n, c.k, c.eps, c.delta, opts);
  r.truth = format_varset(S);
  r.verdict = !sel.chosen ? "none" : (*sel.chosen == S ? "exact" : "other");
  r.samples_used = sel.samples_used;
}

void run_hardness(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const JuntaSetup setup{c.n, c.k, c.source == "parity" ? SetupKind::Parity : SetupKind::AllBalanced};
  const Junta f = draw_setup_junta(setup, rng);
  const Junta g = draw_setup_junta(setup, rng);
  r.m = *c.m;
  bool collide = true;
  for (std::uint64_t j = 0; j < r.m; ++j) {
    const std::uint64_t x = rng() & low_mask(c.n);
    if (f.eval(x) != g.eval(x)) collide = false;
  }
  r.truth = c.source;
  r.verdict = collide ? "collide" : "distinct";
  r.samples_used = r.m;
}

void run_tolerant(const ExperimentConfig& c, const Shared& shared, Rng& rng, TrialRecord& r) {
  const bool far = c.source == "far" || (c.source == "alternate" && r.trial % 2 == 1);
  const PairUniform member = family_member(far ? shared.far_base : shared.close_base, rng);
  ProfileLikelihood close_lik(shared.close_base);
  ProfileLikelihood far_lik(shared.far_base);
  r.m = *c.m;
  std::vector<std::size_t> sample(r.m);
  for (auto& s : sample) s = member.sample(rng);
  const SampleHistogram h(member.pairs(), sample);
  double llr = 0.0;
  for (std::size_t i = 0; i < h.pairs(); ++i) {
    if (h.pair_load(i) == 0) continue;
    const double lf = far_lik.log_likelihood(h[2 * i], h[2 * i + 1]);
    const double lc = close_lik.log_likelihood(h[2 * i], h[2 * i + 1]);
    if (std::isinf(lf) && std::isinf(lc)) continue;
    llr += lf - lc;
  }
  r.truth = far ? "far" : "close";
  r.verdict = llr > 0.0 ? "far" : "close";
  r.samples_used = r.m;
}

void run_truncate(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const Junta f = draw_setup_junta(JuntaSetup{c.n, c.k, SetupKind::AllBalanced}, rng);
  const TruncationDraw t = truncation_sample(BoolFn(f), rng);
  r.m = 1;
  r.truth = "balanced";
  r.verdict = f.eval(t.x) ? "ok" : "bad";
  r.samples_used = t.rounds;
}

TrialRecord run_trial(const ExperimentConfig& c, const Shared& shared, std::uint64_t trial) {
  TrialRecord r;
  r.trial = trial;
  r.seed = child_seed(c.seed, trial);
  r.kind = to_string(c.kind);
  r.n = c.kind == ExperimentKind::Sopp || c.kind == ExperimentKind::Tolerant ? 0 : c.n;
  r.k = c.kind == ExperimentKind::Sopp || c.kind == ExperimentKind::Tolerant ? 0 : c.k;
  r.N = c.N;
  r.eps = c.eps;
  r.delta = c.delta;
  Rng rng(r.seed);
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (c.kind) {
      case ExperimentKind::Sopp:
        run_sopp(c, rng, r);
        break;
      case ExperimentKind::Junta:
        run_junta(c, rng, r);
        break;
      case ExperimentKind::Select:
        run_select(c, rng, r);
        break;
      case ExperimentKind::Hardness:
        run_hardness(c, rng, r);
        break;
      case ExperimentKind::Tolerant:
        run_tolerant(c, shared, rng, r);
        break;
      case ExperimentKind::Truncate:
        run_truncate(c, rng, r);
        break;
    }
  } catch (const BudgetExceeded&) {
    r.verdict = "budget_exceeded";
  } catch (const SamplerExhausted&) {
    r.verdict = "budget_exceeded";
  }
  if (c.timing) {
    r.elapsed_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
  }
  return r;
}

}  // namespace

double Summary::rate(const std::string& verdict) const {
  auto it = verdicts.find(verdict);
  return it == verdicts.end() ? 0.0 : it->second.rate;
}

Summary summarize(const std::vector<TrialRecord>& records) {
  Summary s;
  s.trials = records.size();
  for (const auto& r : records) {
    ++s.verdicts[r.verdict].count;
    if (r.verdict == "budget_exceeded") ++s.budget_exceeded;
  }
  for (auto& [name, rs] : s.verdicts) {
    rs.rate = static_cast<double>(rs.count) / static_cast<double>(s.trials);
    rs.stderr_ = std::sqrt(rs.rate * (1.0 - rs.rate) / static_cast<double>(s.trials));
  }
  return s;
}

SuiteResult run_suite(ExperimentConfig config) {
  config.validate();
  Shared shared;
  if (config.kind == ExperimentKind::Tolerant) {
    const MuNu pair = build_mu_nu(config.d, config.m_pieces);
    shared.close_base = discretize(PushforwardFn(pair.close()), config.N);
    shared.far_base = discretize(PushforwardFn(pair.far()), config.N);
  }
  SuiteResult out;
  out.records.resize(config.trials);
  unsigned workers = config.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : config.threads;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, config.trials));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::uint64_t t = next++; t < config.trials; t = next++) {
      try {
        out.records[t] = run_trial(config, shared, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  out.summary = summarize(out.records);
  return out;
}

SuiteResult run_sweep(ExperimentConfig config, const std::vector<std::uint64_t>& ms) {
  SuiteResult all;
  std::uint64_t offset = 0;
  const std::uint64_t base_seed = config.seed;
  for (std::uint64_t m : ms) {
    config.m = m;
    config.seed = child_seed(base_seed, 0x5EEDULL + offset);
    SuiteResult part = run_suite(config);
    for (auto& r : part.records) {
      r.trial += offset;
      all.records.push_back(std::move(r));
    }
    offset += config.trials;
  }
  all.summary = summarize(all.records);
  return all;
}

// ---------------------------------------------------------------------- CSV

void emit_csv(const std::vector<TrialRecord>& records, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.trial << ',' << r.seed << ',' << r.kind << ',' << r.n << ',' << r.k << ',' << r.N << ','
       << format_double(r.eps) << ',' << format_double(r.delta) << ',' << r.m << ',' << r.truth << ',' << r.verdict
       << ',' << r.samples_used << ',' << r.elapsed_ms << '\n';
  }
}

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  emit_csv(records, out);
  out.flush();
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

namespace {

template <class T>
T parse_uint(const std::string& s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InvalidArgument("malformed integer: " + s);
  return v;
}

}  // namespace

std::vector<TrialRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw InvalidArgument("missing or unexpected CSV header");
  std::vector<TrialRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) {
      f.push_back(line.substr(start, pos - start));
    }
    f.push_back(line.substr(start));
    if (f.size() != 13) throw InvalidArgument("CSV row has " + std::to_string(f.size()) + " fields");
    TrialRecord r;
    r.trial = parse_uint<std::uint64_t>(f[0]);
    r.seed = parse_uint<std::uint64_t>(f[1]);
    r.kind = f[2];
    r.n = parse_uint<unsigned>(f[3]);
    r.k = parse_uint<unsigned>(f[4]);
    r.N = parse_uint<std::uint64_t>(f[5]);
    r.eps = parse_double(f[6]);
    r.delta = parse_double(f[7]);
    r.m = parse_uint<std::uint64_t>(f[8]);
    r.truth = f[9];
    r.verdict = f[10];
    r.samples_used = parse_uint<std::uint64_t>(f[11]);
    r.elapsed_ms = parse_uint<std::uint64_t>(f[12]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

void print_summary(const Summary& summary, std::ostream& os) {
  os << "trials " << summary.trials << '\n';
  for (const auto& [name, rs] : summary.verdicts) {
    os << std::left << std::setw(16) << name << std::right << std::setw(8) << rs.count << "  rate "
       << std::fixed << std::setprecision(4) << rs.rate << " ± " << rs.stderr_ << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

}  // namespace jt
