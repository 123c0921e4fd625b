#include <gtest/gtest.h>

#include <cmath>

#include "jt/junta.hpp"
#include "test_util.hpp"

namespace jt {
namespace {

std::vector<LabeledSample> random_labeled(unsigned n, std::size_t count, Rng& rng) {
  std::vector<LabeledSample> s;
  for (std::size_t i = 0; i < count; ++i) s.push_back({BitVector(n, rng() & low_mask(n)), rng.coin()});
  return s;
}

// Samples from a random junta on `vars` with a few label flips, so some
// subsets die and some survive.
std::vector<LabeledSample> noisy_junta_sample(unsigned n, unsigned k, std::size_t count, Rng& rng) {
  const Junta j(n, random_subset(n, k, rng), TruthTable::from_function(k, [&](std::uint64_t) { return rng.coin(); }));
  std::vector<LabeledSample> s;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t x = rng() & low_mask(n);
    s.push_back({BitVector(n, x), j.eval(x) != (rng.below(20) == 0)});
  }
  return s;
}

TEST(Survey, InjectedPointsKillEverySingleton) {
  const std::vector<LabeledSample> s{
      {BitVector::from_string("000"), false},
      {BitVector::from_string("001"), true},
      {BitVector::from_string("100"), true},
  };
  const auto v = junta_verdict(s, 3, 1);
  EXPECT_FALSE(v.accepted());
  EXPECT_EQ(v.surviving_sets, 0U);
  EXPECT_TRUE(find_conflict_witness(s, {0}).has_value());
  EXPECT_TRUE(find_conflict_witness(s, {1}).has_value());
  EXPECT_EQ(find_conflict_witness(s, {2}), (std::make_pair(std::size_t{0}, std::size_t{2})));
}

TEST(Survey, PerSubsetRuleIsSoppCollisionOnEncodedStream) {
  Rng rng(1);
  for (unsigned n = 1; n <= 6; ++n) {
    for (unsigned k = 0; k <= std::min(n, 2U); ++k) {
      for (int t = 0; t < 30; ++t) {
        const auto sample = t % 2 == 0 ? random_labeled(n, 1 + rng.below(12), rng)
                                       : noisy_junta_sample(n, std::max(k, 1U), 40, rng);
        SurveyOptions opts{SurveyStrategy::PerSubset, kDefaultSubsetBudget, 1000};
        const auto survey = survey_subsets(sample, n, k, opts);
        std::vector<std::uint64_t> expected;
        for_each_subset_colex(n, k, [&](std::uint64_t mask) {
          std::vector<std::size_t> stream;
          for (const auto& s : sample) stream.push_back(sopp_element(s, mask));
          if (sopp_scan(stream, std::size_t{1} << k).accepted()) expected.push_back(mask);
          return true;
        });
        ASSERT_EQ(survey.survivors, expected) << "n=" << n << " k=" << k;
        ASSERT_EQ(survey.surviving_sets, expected.size());
      }
    }
  }
}

TEST(Survey, StrategiesAgree) {
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const unsigned n = 2 + static_cast<unsigned>(rng.below(9));
    const unsigned k = 1 + static_cast<unsigned>(rng.below(std::min(n, 4U)));
    const auto sample = t % 3 == 0 ? random_labeled(n, rng.below(30), rng) : noisy_junta_sample(n, k, 5 + rng.below(60), rng);
    SurveyResult r[3];
    const SurveyStrategy all[3] = {SurveyStrategy::PerSubset, SurveyStrategy::ConflictPairs, SurveyStrategy::Auto};
    for (int i = 0; i < 3; ++i) r[i] = survey_subsets(sample, n, k, {all[i], kDefaultSubsetBudget, 500});
    ASSERT_EQ(r[0].survivors, r[1].survivors);
    ASSERT_EQ(r[0].survivors, r[2].survivors);
    ASSERT_EQ(r[0].surviving_sets, r[1].surviving_sets);
    ASSERT_EQ(r[0].total_sets, static_cast<std::uint64_t>(binomial(n, k)));
  }
}

TEST(Survey, ColexRankMatchesEnumerationOrder) {
  for (unsigned n : {5U, 9U}) {
    for (unsigned k = 0; k <= n; ++k) {
      std::uint64_t r = 0;
      for_each_subset_colex(n, k, [&](std::uint64_t mask) {
        EXPECT_EQ(colex_rank(mask), r++);
        return true;
      });
    }
  }
}

TEST(Survey, AcceptForKImpliesAcceptForKPlusOne) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const unsigned n = 3 + static_cast<unsigned>(rng.below(5));
    const auto sample = noisy_junta_sample(n, 2, 10 + rng.below(40), rng);
    for (unsigned k = 0; k < n; ++k) {
      if (junta_verdict(sample, n, k).accepted()) ASSERT_TRUE(junta_verdict(sample, n, k + 1).accepted());
    }
  }
}

TEST(Survey, EveryKilledSubsetHasAWitness) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const unsigned n = 6;
    const unsigned k = 2;
    const auto sample = noisy_junta_sample(n, k, 30, rng);
    const auto survey = survey_subsets(sample, n, k, {SurveyStrategy::ConflictPairs, kDefaultSubsetBudget, 1000});
    std::size_t next = 0;
    for_each_subset_colex(n, k, [&](std::uint64_t mask) {
      const bool survives = next < survey.survivors.size() && survey.survivors[next] == mask;
      if (survives) ++next;
      const auto w = find_conflict_witness(sample, mask_varset(mask));
      EXPECT_EQ(w.has_value(), !survives);
      if (w) {
        const auto& a = sample[w->first];
        const auto& b = sample[w->second];
        EXPECT_NE(a.y, b.y);
        EXPECT_EQ(extract_bits(a.x.value(), mask), extract_bits(b.x.value(), mask));
      }
      return true;
    });
  }
}

TEST(Survey, BudgetThrowsBeforeDrawing) {
  Rng rng(5);
  int draws = 0;
  const LabeledSampler counting = [&] {
    ++draws;
    return LabeledSample{BitVector(40, 0), false};
  };
  JuntaOptions opts;
  opts.survey.subset_budget = 1000;
  EXPECT_THROW(junta_test(counting, 40, 5, 0.25, 0.1, opts), BudgetExceeded);
  EXPECT_EQ(draws, 0);
}

TEST(JuntaTest, SampleSizeFormula) {
  EXPECT_EQ(junta_sample_size(8, 2, 0.25, 0.1), sopp_sample_size(4, 0.125, 0.1 / 28));
  EXPECT_THROW(junta_sample_size(3, 4, 0.25, 0.1), InvalidArgument);
}

TEST(JuntaTest, NeverRejectsJuntas) {
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    const unsigned n = 4 + static_cast<unsigned>(rng.below(4));
    const unsigned k = 1 + static_cast<unsigned>(rng.below(3));
    const Junta j(n, random_subset(n, k, rng), TruthTable::from_function(k, [&](std::uint64_t) { return rng.coin(); }));
    std::vector<double> params(n);
    for (auto& p : params) p = 0.05 + 0.9 * rng.uniform();
    const auto sampler = t % 2 == 0 ? make_labeled_sampler(j, uniform_cube(n), rng)
                                    : make_labeled_sampler(j, ProductCube(params), rng);
    ASSERT_TRUE(junta_test(sampler, n, k, 0.2, 0.1).accepted());
  }
}

TEST(JuntaTest, RejectsParityOfThree) {
  Rng rng(7);
  const Junta f(8, {1, 4, 6}, TruthTable::parity(3));
  int rejects = 0;
  for (int t = 0; t < 100; ++t) rejects += junta_test(make_labeled_sampler(f, uniform_cube(8), rng), 8, 2, 0.25, 0.1).accepted() ? 0 : 1;
  EXPECT_GE(rejects, 90);
}

TEST(FeatureSelect, NEqualsKReturnsEverything) {
  Rng rng(8);
  const BoolFn f = TruthTable::parity(4);
  const auto r = feature_select(make_labeled_sampler(f, uniform_cube(4), rng), 4, 4, 0.25, 0.1);
  ASSERT_TRUE(r.chosen.has_value());
  EXPECT_EQ(*r.chosen, (VarSet{0, 1, 2, 3}));
}

TEST(FeatureSelect, ColexFirstSurvivor) {
  // Constant labels: every subset survives and the first one is {0, 1}.
  Rng rng(9);
  const auto sample = random_labeled(6, 20, rng);
  std::vector<LabeledSample> constant = sample;
  for (auto& s : constant) s.y = false;
  EXPECT_EQ(*select_from(constant, 6, 2).chosen, (VarSet{0, 1}));
}

TEST(FeatureSelect, UniformPathFindsExactSet) {
  Rng rng(10);
  int exact = 0;
  for (int t = 0; t < 40; ++t) {
    const VarSet S = random_subset(8, 2, rng);
    // Any core that depends on both variables; constant or dictator cores
    // leave the relevant set ambiguous.
    TruthTable core = TruthTable::from_function(2, [&](std::uint64_t) { return rng.coin(); });
    while (!(core[0] != core[1] || core[2] != core[3]) || !(core[0] != core[2] || core[1] != core[3])) {
      core = TruthTable::from_function(2, [&](std::uint64_t) { return rng.coin(); });
    }
    const Junta f(8, S, core);
    const auto r = feature_select_uniform(make_labeled_sampler(f, uniform_cube(8), rng), 8, 2, 1.0 / 16, 0.1);
    exact += r.chosen && *r.chosen == S ? 1 : 0;
  }
  EXPECT_GE(exact, 36);
}

TEST(FeatureSelect, ProductDistributionSelectionIsClose) {
  Rng rng(11);
  const double eps = 0.2;
  int good = 0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    const Junta f(8, random_subset(8, 2, rng), sample_balanced(2, rng));
    std::vector<double> params(8);
    for (auto& p : params) p = 0.1 + 0.8 * rng.uniform();
    const ProductCube cube(params);
    const auto r = feature_select(make_labeled_sampler(f, cube, rng), 8, 2, eps, 0.1);
    if (r.chosen && nearest_on_set(f, *r.chosen, cube.to_dist()).distance <= eps) ++good;
  }
  EXPECT_GE(good, trials * 3 / 4);
}

// k-junta XOR an indicator of two restriction values times the parity of
// the other variables. On those two cells the function is balanced, so it
// sits at distance 2 * 2^-k * 1/2 = 2^-k from the junta family.
BoolFn two_cell_perturbation(const Junta& base, std::uint64_t z1, std::uint64_t z2) {
  const std::uint64_t rest = low_mask(base.dim()) & ~base.mask();
  return BoolFn(base.dim(), [base, z1, z2, rest](std::uint64_t x) {
    const std::uint64_t z = extract_bits(x, base.mask());
    const bool flip = (z == z1 || z == z2) && (std::popcount(x & rest) % 2 == 1);
    return base.eval(x) != flip;
  });
}

TEST(JuntaTestUniform, PerturbedJuntaAtDistanceTwoToMinusK) {
  Rng rng(12);
  const Junta base(8, {0, 3, 5}, sample_balanced(3, rng));
  const BoolFn f = two_cell_perturbation(base, 1, 6);
  EXPECT_EQ(oracle_dist_to_juntas(f, 3, FiniteDist::uniform(256)).distance, 1.0 / 8);
  int rejects = 0;
  for (int t = 0; t < 30; ++t) {
    rejects += junta_test_uniform(make_labeled_sampler(f, uniform_cube(8), rng), 8, 3, 1.0 / 16, 0.1).accepted() ? 0 : 1;
  }
  EXPECT_GE(rejects, 27);
}

TEST(JuntaTestUniform, AcceptsJuntasBelowTheFloor) {
  Rng rng(13);
  for (int t = 0; t < 30; ++t) {
    const Junta f(8, random_subset(8, 3, rng), TruthTable::from_function(3, [&](std::uint64_t) { return rng.coin(); }));
    ASSERT_TRUE(junta_test_uniform(make_labeled_sampler(f, uniform_cube(8), rng), 8, 3, 1.0 / 32, 0.1).accepted());
  }
}

TEST(JuntaTestUniform, BudgetFormula) {
  const unsigned n = 10;
  for (unsigned k = 1; k <= 4; ++k) {
    const double floor_eps = std::ldexp(1.0, -static_cast<int>(k));
    for (double eps : {floor_eps / 8, floor_eps / 2, floor_eps, 2 * floor_eps}) {
      if (eps >= 1.0) continue;
      const double delta = 0.1;
      const double K = std::ldexp(1.0, static_cast<int>(k));
      auto ceil_m = [](double N, double e, double d) {
        const double L = std::log(1.0 / d);
        return std::ceil((std::sqrt(32 * N * L) + 32 * L) / e);
      };
      const double C = binomial(n, k);
      double expected;
      if (eps >= floor_eps) {
        expected = 2 * ceil_m(K, eps / 2, delta / C);
      } else {
        // min{1/eps, 2^k} = 2^k factor from selection at 2^-k, plus sqrt(2^k)/eps
        expected = 2 * ceil_m(K, floor_eps / 2, delta / 2 / C) + 2 * ceil_m(K, eps, delta / 2);
      }
      EXPECT_EQ(static_cast<double>(junta_uniform_sample_budget(n, k, eps, delta)), expected) << k << " " << eps;
    }
  }
}

TEST(Lift, Index) {
  EXPECT_EQ(lift_index(0.3), 2U);
  EXPECT_EQ(lift_index(0.25), 3U);
  EXPECT_EQ(lift_index(1.0), 1U);
  for (double eps = 0.011; eps < 1.0; eps *= 1.37) {
    const double p = std::ldexp(1.0, -static_cast<int>(lift_index(eps)));
    ASSERT_LE(eps / 2, p);
    ASSERT_LT(p, eps);
  }
  EXPECT_THROW(lift_eps(TruthTable::parity(2), 0.1, 2), InvalidArgument);
}

TEST(Lift, JuntaLiftsToJuntaOnOneMoreVariable) {
  Rng rng(14);
  const unsigned n = 4, q = 3;
  const double eps = 0.3;
  const FiniteDist mu = mu_q(n, q).to_dist();
  for (int t = 0; t < 10; ++t) {
    const Junta fp(n, random_subset(n, 2, rng), sample_balanced(2, rng));
    const BoolFn lifted = lift_eps(fp, eps, q);
    ASSERT_NE(lifted.as_junta(), nullptr);
    VarSet expect = fp.vars();
    expect.push_back(n + lift_index(eps) - 1);
    EXPECT_EQ(lifted.as_junta()->vars(), expect);
    EXPECT_EQ(oracle_dist_to_juntas(lifted, 3, mu).distance, 0.0);
    // The table form and the generic callable form agree everywhere.
    const BoolFn generic = lift_eps(BoolFn(fp.dim(), [fp](std::uint64_t x) { return fp.eval(x); }), eps, q);
    EXPECT_EQ(generic.to_table(), lifted.to_table());
  }
}

TEST(Lift, FarFunctionStaysFar) {
  const unsigned n = 4, q = 3;
  const double eps = 0.3;
  const BoolFn fp = BoolFn(Junta(n, {0, 1, 2}, TruthTable::parity(3)));
  const double far = oracle_dist_to_juntas(fp, 2, FiniteDist::uniform(16)).distance;
  EXPECT_EQ(far, 0.5);
  const double lifted = oracle_dist_to_juntas(lift_eps(fp, eps, q), 3, mu_q(n, q).to_dist()).distance;
  EXPECT_GE(lifted, eps * far / 2);
}

TEST(MuQAdapter, OracleConsumptionAndLabels) {
  Rng oracle_rng(15), rng(16);
  const unsigned n = 3, q = 3;
  const double eps = 0.3;
  const Junta fp(n, {0, 2}, TruthTable::parity(2));
  MuQAdapter adapter(make_labeled_sampler(fp, uniform_cube(n), oracle_rng), n, eps, q, rng);
  const BoolFn lifted = lift_eps(fp, eps, q);
  std::vector<std::uint64_t> low(8, 0);
  const std::uint64_t draws = 100000;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const LabeledSample s = adapter.next();
    ASSERT_EQ(s.y, lifted(s.x));
    if (!s.x[adapter.selector()]) ASSERT_FALSE(s.y);
    ++low[s.x.value() & 7];
  }
  EXPECT_EQ(adapter.emitted(), draws);
  EXPECT_LT(testing::binomial_z(adapter.oracle_calls(), draws, 0.25), 4.0);
  EXPECT_LT(chi_square_statistic(low, FiniteDist::uniform(8)), testing::chi_square_quantile(7, 0.999));
}

TEST(MuQAdapter, OracleCap) {
  Rng a(1), b(2);
  MuQAdapter adapter(make_labeled_sampler(TruthTable::parity(2), uniform_cube(2), a), 2, 0.9, 2, b, 3);
  EXPECT_THROW(
      {
        for (int i = 0; i < 1000; ++i) adapter.next();
      },
      SamplerExhausted);
  EXPECT_EQ(adapter.oracle_calls(), 3U);
}

}  // namespace
}  // namespace jt
