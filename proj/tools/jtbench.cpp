// jtbench: experiment runner.
//
//   jtbench <kind> [--seed S] [--trials T] [--out file.csv] [--config file.toml] ...
//   jtbench verify
//
// Exit codes: 0 success, 2 invalid configuration, 3 budget exceeded.

#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jt/bench.hpp"
#include "jt/boolfn.hpp"
#include "jt/hardgen.hpp"
#include "jt/junta.hpp"
#include "jt/measures.hpp"
#include "jt/sopp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitBudget = 3;

struct Flags {
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::string out;
  std::string config;
  unsigned n = 0;
  unsigned k = 0;
  std::uint64_t N = 0;
  double eps = 0.0;
  double delta = 0.0;
  unsigned d = 0;
  unsigned m_pieces = 0;
  std::vector<std::uint64_t> m;
  std::string source;
  std::string distribution;
  unsigned threads = 0;
  bool timing = false;
  std::uint64_t subset_budget = 0;
};

struct Bound {
  CLI::App* app;
  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

Bound add_experiment(CLI::App& root, const std::string& name, const std::string& help, Flags& f) {
  Bound b{root.add_subcommand(name, help), {}};
  auto* app = b.app;
  b.opts["seed"] = app->add_option("--seed", f.seed, "base seed");
  b.opts["trials"] = app->add_option("--trials", f.trials, "number of trials");
  b.opts["out"] = app->add_option("--out", f.out, "CSV output path (default stdout)");
  b.opts["config"] = app->add_option("--config", f.config, "TOML config file; flags override it");
  b.opts["n"] = app->add_option("--n", f.n, "dimension");
  b.opts["k"] = app->add_option("--k", f.k, "junta size");
  b.opts["N"] = app->add_option("--N", f.N, "number of pairs");
  b.opts["eps"] = app->add_option("--eps", f.eps, "distance parameter");
  b.opts["delta"] = app->add_option("--delta", f.delta, "error probability");
  b.opts["d"] = app->add_option("--d", f.d, "moment degree");
  b.opts["m_pieces"] = app->add_option("--m-pieces", f.m_pieces, "measure pieces");
  b.opts["m"] = app->add_option("--m", f.m, "sample size override; several values run a sweep");
  b.opts["source"] = app->add_option("--source", f.source, "input family");
  b.opts["distribution"] = app->add_option("--distribution", f.distribution, "uniform | product");
  b.opts["threads"] = app->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  b.opts["timing"] = app->add_flag("--timing", f.timing, "record wall-clock elapsed_ms");
  b.opts["subset_budget"] = app->add_option("--subset-budget", f.subset_budget, "cap on C(n,k)");
  return b;
}

jt::ExperimentConfig build_config(jt::ExperimentKind kind, const Bound& b, const Flags& f) {
  jt::ExperimentConfig c;
  c.kind = kind;
  if (b.given("config")) {
    jt::apply_toml(f.config, c);
    if (c.kind != kind) throw jt::InvalidArgument("config kind differs from the subcommand");
  }
  if (b.given("seed")) c.seed = f.seed;
  if (b.given("trials")) c.trials = f.trials;
  if (b.given("out")) c.out_path = f.out;
  if (b.given("n")) c.n = f.n;
  if (b.given("k")) c.k = f.k;
  if (b.given("N")) c.N = f.N;
  if (b.given("eps")) c.eps = f.eps;
  if (b.given("delta")) c.delta = f.delta;
  if (b.given("d")) c.d = f.d;
  if (b.given("m_pieces")) c.m_pieces = f.m_pieces;
  if (b.given("m") && f.m.size() == 1) c.m = f.m.front();
  if (b.given("source")) c.source = f.source;
  if (b.given("distribution")) c.distribution = f.distribution;
  if (b.given("threads")) c.threads = f.threads;
  if (b.given("timing")) c.timing = f.timing;
  if (b.given("subset_budget")) c.subset_budget = f.subset_budget;
  return c;
}

int run_experiment(jt::ExperimentKind kind, const Bound& b, const Flags& f) {
  jt::ExperimentConfig c = build_config(kind, b, f);
  const jt::SuiteResult result = f.m.size() > 1 ? jt::run_sweep(c, f.m) : jt::run_suite(c);
  if (c.out_path.empty()) {
    jt::emit_csv(result.records, std::cout);
  } else {
    jt::emit_csv(result.records, c.out_path);
  }
  jt::print_summary(result.summary, std::cerr);
  return result.summary.budget_exceeded > 0 ? kExitBudget : kExitOk;
}

// ------------------------------------------------------------------- verify

struct Check {
  const char* name;
  std::function<bool()> run;
};

bool check_one_sided() {
  for (std::uint64_t t = 0; t < 500; ++t) {
    jt::Rng rng(jt::child_seed(11, t));
    std::vector<double> w(32, 0.0);
    for (std::size_t i = 0; i < 16; ++i) w[2 * i + (rng.coin() ? 1 : 0)] = 0.01 + rng.uniform();
    if (!jt::sopp_test(jt::FiniteDist(w), 0.25, 0.1, rng).accepted()) return false;
  }
  return true;
}

bool check_junta_one_sided() {
  for (std::uint64_t t = 0; t < 100; ++t) {
    jt::Rng rng(jt::child_seed(12, t));
    const jt::Junta j(6, jt::random_subset(6, 2, rng), jt::sample_balanced(2, rng));
    const auto sampler = jt::make_labeled_sampler(j, jt::uniform_cube(6), rng);
    if (!jt::junta_test(sampler, 6, 2, 0.25, 0.1).accepted()) return false;
  }
  return true;
}

bool check_strategies_agree() {
  for (std::uint64_t t = 0; t < 50; ++t) {
    jt::Rng rng(jt::child_seed(13, t));
    std::vector<jt::LabeledSample> s;
    for (int i = 0; i < 40; ++i) s.push_back({jt::BitVector(6, rng() & 63), rng.coin()});
    jt::SurveyOptions a{jt::SurveyStrategy::PerSubset, jt::kDefaultSubsetBudget, 100};
    jt::SurveyOptions b{jt::SurveyStrategy::ConflictPairs, jt::kDefaultSubsetBudget, 100};
    if (jt::survey_subsets(s, 6, 2, a).survivors != jt::survey_subsets(s, 6, 2, b).survivors) return false;
  }
  return true;
}

bool check_uniform_collisions() {
  for (std::uint64_t t = 0; t < 50; ++t) {
    jt::Rng rng(jt::child_seed(14, t));
    const jt::JuntaSetup setup{8, 3, jt::SetupKind::AllBalanced};
    const jt::Junta f = jt::draw_setup_junta(setup, rng);
    const jt::Junta g = jt::draw_setup_junta(setup, rng);
    if (!jt::check_uniform_collisions(8, f.vars(), g.vars(), f.core(), g.core()).is_half()) return false;
  }
  return true;
}

bool check_parity_collision_sum() {
  for (unsigned m = 0; m <= 8; ++m) {
    const auto cs = jt::collision_sum({5, 2, jt::SetupKind::Parity}, m);
    if (cs.value_exact != jt::parity_collision_closed_form(5, 2, m)) return false;
  }
  return true;
}

bool check_measures() {
  for (unsigned d : {2U, 3U}) {
    const auto mn = jt::build_mu_nu(d, 2 * d * d + 1);
    for (unsigned a = 1; a <= d; ++a) {
      for (unsigned b = 1; b <= d; ++b) {
        if (std::abs(mn.mu.moment(a, b) - mn.nu.moment(a, b)) > 1e-10) return false;
      }
    }
    if (!(mn.gap > 0.0) || mn.nu.weights().minCoeff() < 1.0) return false;
  }
  return true;
}

int run_verify() {
  const std::vector<Check> checks = {
      {"sopp tester is one-sided", check_one_sided},
      {"junta tester is one-sided", check_junta_one_sided},
      {"subset survey strategies agree", check_strategies_agree},
      {"uniform collisions ratio is 1/2", check_uniform_collisions},
      {"parity collision sum closed form", check_parity_collision_sum},
      {"mu and nu match mixed moments", check_measures},
  };
  bool all = true;
  for (const auto& c : checks) {
    const bool ok = c.run();
    all = all && ok;
    std::cout << (ok ? "PASS " : "FAIL ") << c.name << '\n';
  }
  return all ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Junta and SOPP testing experiments"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<jt::ExperimentKind, Bound>> kinds = {
      {jt::ExperimentKind::Sopp, add_experiment(app, "sopp", "SOPP tester on generated sources", flags)},
      {jt::ExperimentKind::Junta, add_experiment(app, "junta", "junta tester", flags)},
      {jt::ExperimentKind::Select, add_experiment(app, "select", "feature selection", flags)},
      {jt::ExperimentKind::Hardness, add_experiment(app, "hardness", "junta-ball collisions", flags)},
      {jt::ExperimentKind::Tolerant, add_experiment(app, "tolerant", "close vs far pair-uniform families", flags)},
      {jt::ExperimentKind::Truncate, add_experiment(app, "truncate", "truncation sampler", flags)},
  };
  auto* verify = app.add_subcommand("verify", "run the built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (verify->parsed()) return run_verify();
    for (const auto& [kind, bound] : kinds) {
      if (bound.app->parsed()) return run_experiment(kind, bound, flags);
    }
  } catch (const jt::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitInvalid;
}
