#include <gtest/gtest.h>

#include <random>

#include "fracpow/schlag.hpp"
#include "fracpow/verify.hpp"
#include "oracles.hpp"

using namespace fracpow;
using oracle::toy_params;

namespace {

RunOptions relaxed() {
  RunOptions o;
  o.strict = false;
  o.threads = 1;
  return o;
}

// Smallest t for which the default constants pass every required check.
const Chain& strict_chain() {
  static const Chain chain = [] {
    RunOptions o;
    o.threads = 1;
    return run_construction(params_from_t(4), 2, o);
  }();
  return chain;
}

}  // namespace

TEST(Levels, FirstLevelAndSchedule) {
  const ConstructionParams toy = toy_params();
  EXPECT_EQ(compute_l1(toy), 12);
  // 4 * 16 * e^4 / psi is about 232,487, inside (2^17, 2^18].
  EXPECT_EQ(level_from_anchor(DyadicRational::pow2(-2), 16, toy), 18);
  std::int64_t last = 0;
  for (long w = 0; w <= 64; w += 8) {
    const std::int64_t l = level_from_anchor(DyadicRational::on_grid(w, 8), 16, toy);
    EXPECT_GE(l, last);
    last = l;
  }
  // 4 k / psi with anchor 0 needs no exponential at all.
  EXPECT_EQ(level_from_anchor(DyadicRational(0), 16, toy), 13);
}

TEST(Levels, GapCheck) {
  const ConstructionParams toy = toy_params();  // 2t = 6, 2h = 16
  EXPECT_FALSE(check_level_gap(12, 18, toy).has_value());
  EXPECT_FALSE(check_level_gap(12, 28, toy).has_value());
  EXPECT_TRUE(check_level_gap(12, 15, toy).has_value());
  EXPECT_TRUE(check_level_gap(12, 29, toy).has_value());
}

TEST(Levels, ZeroPsiSchedule) {
  ParamOverrides o;
  o.zero_psi = true;
  o.first_level = 20;
  const ConstructionParams p = params_from_t(3, o);
  std::vector<StepRecord> steps(2);
  steps[0].level = 20;
  EXPECT_EQ(compute_ln(2, steps, p), 26);
  EXPECT_EQ(compute_ln(3, steps, p), 32);
}

TEST(InitialStep, ZeroPsiTakesFirstCell) {
  ParamOverrides o;
  o.zero_psi = true;
  o.first_level = 20;
  const ConstructionParams p = params_from_t(3, o);
  const StepRecord s = initial_step(p, relaxed());
  const DyadicRational floor_w = p.eta + p.eta.ldexp(-6);
  EXPECT_EQ(s.W(), DyadicRational::on_grid(*floor_w.scaled_integer(20), 20));
  EXPECT_EQ(s.cells_inspected, 1);
}

TEST(InitialStep, ToyAvoidsEveryDangerInterval) {
  const ConstructionParams toy = toy_params();
  const StepRecord s = initial_step(toy, relaxed());
  EXPECT_GE(s.W(), toy.eta + toy.eta.ldexp(-6));
  EXPECT_LE(s.interval().hi, toy.eta.ldexp(1));
  for (std::uint64_t k = 1; k <= toy.h; ++k)
    EXPECT_TRUE(oracle::dangerous_m_exhaustive(k, s.interval(), toy).empty()) << "k = " << k;
  EXPECT_FALSE(find_danger_hit(s.interval(), {0, toy.h}, toy).has_value());
}

TEST(InitialStep, StrictRejectsToyParameters) {
  RunOptions o;
  o.threads = 1;
  EXPECT_THROW(initial_step(toy_params(), o), ConstructionError);
}

TEST(Survivor, TrivialCases) {
  const ConstructionParams toy = toy_params();
  const DyadicWindow J = DyadicWindow::cell(140, 10);
  const SurvivorMeasure none = survivor_measure(J, {8, 8}, 14, toy);
  EXPECT_TRUE(none.covered_hi.is_zero());
  EXPECT_EQ(none.survivor_lo(), J.length());

  // A cell strictly inside the cover (559, 566) of A(8, 3) at level 12.
  const DyadicWindow inside = DyadicWindow::cell(561, 12);
  const SurvivorMeasure all = survivor_measure(inside, {7, 8}, 12, toy);
  EXPECT_TRUE(all.exact);
  EXPECT_EQ(all.covered_lo, inside.length());
  EXPECT_TRUE(all.survivor_lo().is_zero());
  EXPECT_TRUE(all.runs.empty());
}

TEST(Survivor, MatchesRasterization) {
  std::mt19937_64 rng(5);
  int compared = 0;
  for (int i = 0; i < 25; ++i) {
    const ConstructionParams toy = toy_params(3);
    const std::int64_t base_level = 6 + static_cast<std::int64_t>(rng() % 4);
    const std::int64_t level = base_level + 2 + static_cast<std::int64_t>(rng() % 5);
    const mpz_class cells = mpz_class(1) << (base_level - 3);
    const DyadicWindow J = DyadicWindow::cell(cells + static_cast<unsigned long>(rng() % cells.get_ui()), base_level);
    const std::uint64_t lo = rng() % 24, hi = lo + 1 + rng() % 8;
    const SurvivorMeasure s = survivor_measure(J, {lo, hi}, level, toy);
    if (!s.exact) continue;
    const mpz_class raster = oracle::rasterized_cover(J, {lo, hi}, level, toy);
    EXPECT_EQ(s.covered_lo, DyadicRational::on_grid(raster, level + 4)) << "case " << i;
    EXPECT_EQ(s.covered_lo, s.covered_hi);
    ++compared;
  }
  EXPECT_GT(compared, 15);
}

TEST(Construction, ToyChainIsNested) {
  const ConstructionParams toy = toy_params();
  const Chain c = run_construction(toy, 3, relaxed());
  ASSERT_EQ(c.steps.size(), 3u);
  for (std::size_t i = 1; i < c.steps.size(); ++i) {
    const DyadicWindow outer = c.steps[i - 1].interval(), inner = c.steps[i].interval();
    EXPECT_LE(outer.lo, inner.lo);
    EXPECT_LE(inner.hi, outer.hi);
    EXPECT_EQ(c.steps[i].level, c.steps[i - 1].lookahead_level);
  }
  EXPECT_LT(c.epsilon_enclosure.width(), DyadicRational::pow2(-c.steps.back().level + 2));
  EXPECT_EQ(c.k_max, 3 * toy.h);
  const ScanResult scan = min_distance_scan(
      [&](Precision) { return RealInterval(c.epsilon_representative + DyadicRational(1)); }, 1, {}, c.k_max);
  EXPECT_GE(scan.min_dist.lo(), c.guarantee);
}

TEST(Construction, SingleStepIsInitialStep) {
  const ConstructionParams toy = toy_params();
  const Chain c = run_construction(toy, 1, relaxed());
  const StepRecord s = initial_step(toy, relaxed());
  ASSERT_EQ(c.steps.size(), 1u);
  EXPECT_EQ(c.steps[0].w, s.w);
  EXPECT_EQ(c.steps[0].level, s.level);
}

TEST(Construction, EmptyLookaheadKeepsWholeCell) {
  ParamOverrides o = overrides_of(toy_params());
  o.lookahead_span = 0;
  const Chain c = run_construction(params_from_t(3, o), 2, relaxed());
  for (const StepRecord& s : c.steps) {
    EXPECT_TRUE(s.lookahead.empty());
    EXPECT_TRUE(s.covered_measure.hi().is_zero());
  }
}

TEST(Construction, CensusCountsAdmissibleCells) {
  RunOptions o = relaxed();
  o.census = true;
  const Chain full = run_construction(toy_params(), 1, o);
  EXPECT_TRUE(full.steps[0].census_complete);
  EXPECT_GE(full.steps[0].admissible_count, 1);
  o.census_cap = 1;
  const Chain capped = run_construction(toy_params(), 1, o);
  EXPECT_EQ(capped.steps[0].w, full.steps[0].w);
  EXPECT_LE(capped.steps[0].admissible_count, 1);
}

TEST(Construction, ThreadCountDoesNotChangeTheChain) {
  RunOptions one = relaxed(), three = relaxed();
  three.threads = 3;
  const Chain a = run_construction(toy_params(4), 2, one);
  const Chain b = run_construction(toy_params(4), 2, three);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].w, b.steps[i].w);
    EXPECT_EQ(a.steps[i].level, b.steps[i].level);
    EXPECT_EQ(a.steps[i].covered_measure.hi(), b.steps[i].covered_measure.hi());
  }
  EXPECT_EQ(a.epsilon_representative, b.epsilon_representative);
}

TEST(Construction, StrictChainMeetsEveryInequality) {
  const Chain& c = strict_chain();
  const ConstructionParams& p = c.params;
  ASSERT_EQ(c.steps.size(), 2u);
  EXPECT_GE(c.steps[0].level, 5 * p.t);
  BigFloat bound(128);
  mpfr_mul_ui(bound.get(), p.psi.lo_ptr(), 16, MPFR_RNDD);
  for (const StepRecord& s : c.steps) {
    EXPECT_TRUE(s.warnings.empty());
    EXPECT_FALSE(check_level_gap(s.level, s.lookahead_level, p).has_value());
    EXPECT_TRUE(s.cover_ratio_certified);
    EXPECT_LE(s.covered_measure.hi().ldexp(1), s.interval().length());
    if (s.n >= 2) {
      ASSERT_TRUE(s.lemma1_max_ratio.has_value());
      EXPECT_TRUE(mpfr_less_p(s.lemma1_max_ratio->hi_ptr(), bound.get()));
    }
  }
  const StepRecord &s1 = c.steps[0], &s2 = c.steps[1];
  EXPECT_LE(s1.interval().lo, s2.interval().lo);
  EXPECT_LE(s2.interval().hi, s1.interval().hi);
  EXPECT_GE(s2.level - s1.level, 2 * p.t);
}

TEST(Guarantee, UnitTargetsGiveHalfPsi) {
  const ConstructionParams p = params_from_t(6);
  const DyadicRational g = distance_guarantee(p, p.h);
  const RealInterval half = ldexp(p.psi, -1);
  EXPECT_LE(g, half.lo());
  EXPECT_GE(g.ldexp(1) + DyadicRational::pow2(-100), half.lo());
}
