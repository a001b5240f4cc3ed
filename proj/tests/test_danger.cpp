#include <gtest/gtest.h>

#include <random>

#include "fracpow/danger.hpp"
#include "oracles.hpp"

using namespace fracpow;
using oracle::toy_params;

namespace {

DyadicWindow window_around(double lo, double hi, std::int64_t bits = 20) {
  const double scale = std::ldexp(1.0, static_cast<int>(bits));
  return {DyadicRational::on_grid(static_cast<long>(std::floor(lo * scale)), bits),
          DyadicRational::on_grid(static_cast<long>(std::ceil(hi * scale)), bits)};
}

bool overlaps(const RealInterval& a, const RealInterval& b) {
  return mpfr_lessequal_p(a.lo_ptr(), b.hi_ptr()) && mpfr_lessequal_p(b.lo_ptr(), a.hi_ptr());
}

}  // namespace

TEST(Params, FullScaleValues) {
  const ConstructionParams p10 = params_from_t(10);
  EXPECT_EQ(p10.h, 1048576u);
  EXPECT_NEAR(p10.psi.mid_double(), 8.599e-9, 1e-12);
  // h = (2^6/(eta ln 2)) ln(2^6/eta) at t = 10, as an enclosure identity.
  const Precision p(128);
  const RealInterval ln2 = ln2_interval(p);
  const RealInterval rhs = mul(div(RealInterval(DyadicRational::pow2(16)), ln2, p),
                               mul(RealInterval(DyadicRational(16)), ln2, p), p);
  EXPECT_TRUE(rhs.contains(DyadicRational(static_cast<long>(p10.h))));

  const ConstructionParams p8 = params_from_t(8);
  EXPECT_EQ(p8.h, 229376u);
  EXPECT_GE(p8.first_level, 40);
  EXPECT_TRUE(p8.feasible());
  EXPECT_FALSE(params_from_t(2).feasible());
}

TEST(Params, ExplicitDefaultsAreDefaults) {
  ParamOverrides o;
  o.a_psi = mpz_class(16384);
  o.h_const_log2 = 6;
  const ConstructionParams a = params_from_t(10), b = params_from_t(10, o);
  EXPECT_EQ(a.h, b.h);
  EXPECT_EQ(a.first_level, b.first_level);
  EXPECT_EQ(a.psi.lo(), b.psi.lo());
  EXPECT_EQ(a.psi.hi(), b.psi.hi());
}

TEST(Params, RejectsBadInput) {
  EXPECT_THROW(params_from_t(1), DomainError);
  ParamOverrides zero_scale;
  zero_scale.mode = TargetMode::theorem2;
  zero_scale.scale = 0;
  EXPECT_THROW(params_from_t(4, zero_scale), DomainError);
}

TEST(Params, ToyFirstLevel) {
  const ConstructionParams toy = toy_params();
  EXPECT_EQ(toy.h, 8u);
  EXPECT_NEAR(toy.psi.mid_double(), 0.015028, 1e-5);
  EXPECT_EQ(first_grid_level(toy), 12);
  // Doubling psi moves l_1 down by one here.
  ParamOverrides o;
  o.a_psi = 2;
  o.h_const_log2 = -1;
  EXPECT_EQ(first_grid_level(params_from_t(3, o)), 11);
}

TEST(MRange, ToyAndLimit) {
  const ConstructionParams toy = toy_params();
  const MRange r8 = m_range_for_k(8, toy);
  EXPECT_EQ(r8.lo, 2);
  EXPECT_EQ(r8.hi, 8);
  const MRange r1 = m_range_for_k(1, toy);
  EXPECT_EQ(r1.lo, 1);
  EXPECT_EQ(r1.hi, 2);
  const MRange big_t = m_range_for_k(1, params_from_t(20));
  EXPECT_EQ(big_t.lo, 1);
  EXPECT_EQ(big_t.hi, 2);
}

TEST(DangerInterval, Examples) {
  const ConstructionParams toy = toy_params();
  const auto d11 = danger_interval(1, 1, toy);
  ASSERT_TRUE(d11);
  EXPECT_TRUE(overlaps(d11->lower, negate(toy.psi)));
  EXPECT_TRUE(overlaps(d11->upper, toy.psi));

  const auto d83 = danger_interval(8, 3, toy);
  ASSERT_TRUE(d83);
  const double lo = d83->lower.mid_double(), hi = d83->upper.mid_double();
  EXPECT_NEAR((lo + hi) / 2, 0.137327, 1e-6);
  EXPECT_NEAR((hi - lo) / 2, 6.26e-4, 1e-6);
}

TEST(DangerInterval, ModeReduction) {
  ParamOverrides o;
  o.a_psi = 4;
  o.h_const_log2 = -1;
  o.mode = TargetMode::theorem2;
  o.scale = 1;
  o.shifts = {0, 0, 0};
  const ConstructionParams t2 = params_from_t(3, o);
  const ConstructionParams t1 = toy_params();
  for (std::uint64_t k : {1u, 5u, 8u}) {
    const MRange r = m_range_for_k(k, t1);
    for (mpz_class m = r.lo; m <= r.hi; ++m) {
      const auto a = danger_interval(k, m, t1), b = danger_interval(k, m, t2);
      ASSERT_TRUE(a && b);
      EXPECT_EQ(a->lower.lo(), b->lower.lo());
      EXPECT_EQ(a->upper.hi(), b->upper.hi());
    }
  }
}

TEST(DyadicCover, GridArithmetic) {
  const DyadicCover a = dyadic_cover(mpq_class(3, 10), mpq_class(32, 100), 4);
  EXPECT_EQ(a.a1, 4);
  EXPECT_EQ(a.a2, 6);
  const DyadicCover b = dyadic_cover(mpq_class(1, 4), mpq_class(3, 8), 3);
  EXPECT_EQ(b.a1, 2);
  EXPECT_EQ(b.a2, 3);
}

TEST(DyadicCover, ToyA83AtLevel12) {
  const ConstructionParams toy = toy_params();
  const DyadicCover c = dyadic_cover(*danger_interval(8, 3, toy), 12, toy);
  // 2 psi/(k m) is about 5.1 grid units, so the shortest cover spans 7.
  EXPECT_EQ(c.a1, 559);
  EXPECT_EQ(c.a2, 566);
  EXPECT_EQ(c.length(), DyadicRational::on_grid(7, 12));
}

TEST(DangerousM, Examples) {
  const ConstructionParams toy = toy_params();
  const std::vector<mpz_class> hit = dangerous_m_in_window(8, window_around(0.137, 0.1375), toy);
  ASSERT_EQ(hit.size(), 1u);
  EXPECT_EQ(hit[0], 3);
  // ln(8)/8 + psi/8 is about 0.262: a window beyond it sees nothing.
  EXPECT_TRUE(dangerous_m_in_window(8, window_around(0.3, 0.31), toy).empty());
}

TEST(DangerousM, CountBoundAtFullParameters) {
  const ConstructionParams p = params_from_t(4);
  const DyadicWindow w = DyadicWindow::cell(mpz_class(3) << 26, 30);  // [3/16, 3/16 + 2^-30]
  for (std::uint64_t k : {50u, 200u, 640u}) {
    const auto list = dangerous_m_in_window(k, w, p);
    const MRange r = m_range_for_k(k, p);
    const mpz_class bound = (r.hi * k + (mpz_class(1) << 30) - 1) / (mpz_class(1) << 30) + 2;
    EXPECT_LE(mpz_class(list.size()), bound) << "k = " << k;
  }
}

TEST(DangerousM, AgreesWithExhaustiveScan) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 150; ++i) {
    const int t = 3 + static_cast<int>(rng() % 2);
    const ConstructionParams p = toy_params(t);
    const std::uint64_t k_cap = t == 3 ? 40 : 64;
    const std::uint64_t k = 1 + rng() % k_cap;
    const std::int64_t level = 6 + static_cast<std::int64_t>(rng() % 14);
    const mpz_class cells = mpz_class(1) << (level - t);  // cells of [eta, 2 eta]
    const mpz_class w = cells + static_cast<unsigned long>(rng() % cells.get_ui());
    const DyadicWindow win = DyadicWindow::cell(w, level);
    bool undecided = false;
    const auto expected = oracle::dangerous_m_exhaustive(k, win, p, &undecided);
    if (undecided) continue;
    EXPECT_EQ(dangerous_m_in_window(k, win, p), expected) << "t=" << t << " k=" << k << " level=" << level;
  }
}

TEST(Sweep, MatchesDirectEnclosuresAcrossReseed) {
  const ConstructionParams p = params_from_t(4);
  const DyadicWindow w = DyadicWindow::cell(mpz_class(5) << 10, 16);
  const std::uint64_t first = 4090, last = 4110;
  KSweeper sweep(w, first, last, p);
  for (std::uint64_t k = first; k <= last; ++k) {
    const KEnclosures a = sweep.current(), b = k_enclosures(k, w, p);
    EXPECT_EQ(a.k, k);
    EXPECT_TRUE(overlaps(a.exp_lo, b.exp_lo));
    EXPECT_TRUE(overlaps(a.exp_hi, b.exp_hi));
    EXPECT_TRUE(overlaps(a.exp_eta, b.exp_eta));
    EXPECT_TRUE(overlaps(a.exp_2eta, b.exp_2eta));
    if (k < last) sweep.advance();
  }
}

TEST(Tally, BoundModeDominatesExact) {
  const ConstructionParams exact = toy_params(4);
  ParamOverrides o = overrides_of(exact);
  o.enumeration_limit = 0;
  const ConstructionParams bound = params_from_t(4, o);
  const DyadicWindow w = DyadicWindow::cell(mpz_class(9) << 4, 12);
  for (std::uint64_t k : {20u, 40u, 60u}) {
    const CoverTally a = tally_covers(k_enclosures(k, w, exact), w, 16, exact);
    const CoverTally b = tally_covers(k_enclosures(k, w, bound), w, 16, bound);
    ASSERT_TRUE(a.exact);
    EXPECT_FALSE(b.exact && b.candidates > 0);
    EXPECT_LE(a.measure_upper, b.measure_upper);
    EXPECT_LE(b.measure_upper, w.length());
  }
}

TEST(UnionLength, Overlaps) {
  EXPECT_EQ(union_length({{0, 3}, {2, 5}, {7, 8}}), 6);
  EXPECT_EQ(union_length({}), 0);
  EXPECT_EQ(union_length({{4, 6}, {0, 1}, {5, 9}}), 6);
}

TEST(Overrides, RoundTrip) {
  ParamOverrides o;
  o.mode = TargetMode::theorem2;
  o.scale = mpq_class(3, 2);
  o.shifts = {mpq_class(1, 3), mpq_class(-1, 4)};
  o.a_psi = 64;
  const ConstructionParams p = params_from_t(5, o);
  const ConstructionParams q = params_from_t(5, overrides_of(p));
  EXPECT_EQ(p.shifts, q.shifts);
  EXPECT_EQ(p.h, q.h);
  EXPECT_EQ(p.first_level, q.first_level);
  EXPECT_EQ(p.psi.lo(), q.psi.lo());
}
