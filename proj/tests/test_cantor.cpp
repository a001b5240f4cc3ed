#include <gtest/gtest.h>

#include "fracpow/cantor.hpp"
#include "fracpow/verify.hpp"

using namespace fracpow;

namespace {

// H = 100, eta = 1/2: c = 8 children, root i = 100, band [0.4, 0.55].
BandSpec reference_spec() {
  BandSpec s = make_band_spec(mpq_class(3, 20), mpq_class(1, 2), 100, BandSequence::constant(mpq_class(2, 5)));
  validate(s);
  return s;
}

}  // namespace

TEST(Params, SmallestAdmissibleH) {
  const BandSpec a = choose_params(mpq_class(3, 20), mpq_class(1, 2));
  EXPECT_EQ(a.H, 45);
  EXPECT_EQ(a.c, 4);
  const BandSpec b = choose_params(mpq_class(1, 2), mpq_class(1, 2));
  EXPECT_EQ(b.H, 9);
  EXPECT_EQ(b.c, 1);
}

TEST(Params, ExplicitH) {
  const BandSpec a = make_band_spec(mpq_class(1, 2), mpq_class(1, 2), 17, BandSequence::constant(0));
  EXPECT_NO_THROW(validate(a));
  EXPECT_EQ(a.c, 2);
  const BandSpec b = make_band_spec(mpq_class(1, 2), mpq_class(3, 5), 10, BandSequence::constant(0));
  EXPECT_EQ(b.c, 1);  // 10^0.6 is about 3.98
  EXPECT_NO_THROW(validate(b));
  // H^eta = 2 exactly is not enough.
  EXPECT_THROW(validate(make_band_spec(mpq_class(1, 2), mpq_class(1, 2), 4, BandSequence::constant(0))),
               DomainError);
  // eps H = 1.5 does not beat H^eta = 3.
  EXPECT_THROW(validate(make_band_spec(mpq_class(1, 6), mpq_class(1, 2), 9, BandSequence::constant(0))),
               DomainError);
  EXPECT_THROW(choose_params(mpq_class(3, 4), mpq_class(1, 2)), DomainError);
}

TEST(Params, FloorPowerIsExact) {
  EXPECT_EQ(floor_power(100, mpq_class(1, 2)), 10);
  EXPECT_EQ(floor_power(99, mpq_class(1, 2)), 9);
  EXPECT_EQ(floor_power(1000, mpq_class(2, 3)), 100);
  EXPECT_EQ(floor_power(999, mpq_class(2, 3)), 99);
}

TEST(Bands, Sequences) {
  const BandSequence p = BandSequence::periodic({mpq_class(0), mpq_class(1, 4)});
  EXPECT_EQ(p.at(1), 0);
  EXPECT_EQ(p.at(2), mpq_class(1, 4));
  EXPECT_EQ(p.at(5), 0);
  EXPECT_FALSE(p.length().has_value());
  const BandSequence f = BandSequence::finite({mpq_class(1, 3), mpq_class(1, 5)});
  EXPECT_EQ(*f.length(), 2u);
  EXPECT_THROW(f.at(3), DomainError);
  BandSpec s = reference_spec();
  s.bands = BandSequence::constant(mpq_class(9, 10));  // a >= 1 - eps
  EXPECT_THROW(validate(s), DomainError);
}

TEST(Tree, RootAndChildren) {
  const BandSpec s = reference_spec();
  const CantorNode root = root_node(s);
  EXPECT_EQ(root.i, 100);
  EXPECT_NEAR(root.interval.lo().to_double(), 100.4, 1e-12);
  EXPECT_NEAR(root.interval.hi().to_double(), 100.55, 1e-12);
  EXPECT_EQ(next_integers(root, s), 10081);
  const std::vector<CantorNode> kids = children(root, s);
  ASSERT_EQ(kids.size(), 8u);
  EXPECT_NEAR(kids[0].interval.lo().to_double(), 100.406175, 1e-6);
  EXPECT_NEAR(kids[0].interval.hi().to_double(), 100.406922, 1e-6);
  for (std::size_t n = 0; n < kids.size(); ++n) {
    EXPECT_EQ(kids[n].i, 10081 + static_cast<long>(n));
    EXPECT_TRUE(root.interval.contains(kids[n].interval));
    if (n > 0) EXPECT_LT(kids[n - 1].interval.hi(), kids[n].interval.lo());
  }
}

TEST(Tree, NarrowWindowThrows) {
  // eps too small for the branching: the image window cannot hold c + 1 integers.
  BandSpec s = reference_spec();
  s.epsilon = mpq_class(1, 100);
  EXPECT_THROW(next_integers(root_node(s), s), ConstructionError);
}

TEST(Path, DepthTwelve) {
  const BandSpec s = reference_spec();
  const CantorPath path = build_path(s, 12);
  ASSERT_EQ(path.nodes.size(), 12u);
  EXPECT_EQ(path.nodes[0].i, 100);
  EXPECT_EQ(path.nodes[1].i, 10081);
  EXPECT_EQ(path.choices, std::vector<std::uint64_t>(11, 0));
  // Width of the last node is below 2 eps H^-(D-1).
  const mpq_class bound = mpq_class(2) * s.epsilon / mpq_class(mpz_class("10000000000000000000000"));
  EXPECT_LE(path.alpha.width().to_rational(), bound);
  EXPECT_TRUE(check_band_membership(path.alpha, s.xi, s.bands, s.epsilon, 12).accepted);
}

TEST(Path, SelectorsStayInTheTree) {
  const BandSpec s = reference_spec();
  const CantorPath picked = build_path(s, 4, IndexSelector{{7, 3, 5}});
  EXPECT_EQ(picked.choices, (std::vector<std::uint64_t>{7, 3, 5}));
  EXPECT_EQ(picked.nodes[1].i, 10088);
  const CantorPath a = build_path(s, 6, RandomSelector{42}), b = build_path(s, 6, RandomSelector{42});
  EXPECT_EQ(a.choices, b.choices);
  EXPECT_TRUE(check_band_membership(a.alpha, s.xi, s.bands, s.epsilon, 6).accepted);
  EXPECT_THROW(build_path(s, 3, IndexSelector{{8, 0}}), DomainError);
  EXPECT_THROW(build_path(s, 3, IndexSelector{{0}}), DomainError);
}

TEST(Path, ScaledAndPeriodicBands) {
  const BandSpec s = make_band_spec(mpq_class(1, 5), mpq_class(1, 2), 64,
                                    BandSequence::periodic({mpq_class(0), mpq_class(1, 2)}), mpq_class(3, 2));
  validate(s, 8);
  const CantorPath path = build_path(s, 8, RandomSelector{3});
  EXPECT_TRUE(check_band_membership(path.alpha, s.xi, s.bands, s.epsilon, 8).accepted);
}

TEST(Dimension, Bounds) {
  EXPECT_NEAR(dimension_lower_bound(100, 8).mid_double(), 0.45154, 1e-5);
  EXPECT_TRUE(dimension_lower_bound(45, 1).lo().is_zero());
  EXPECT_TRUE(dimension_lower_bound(45, 1).is_point());
  EXPECT_EQ(dimension_lower_bound(7, 7).lo(), DyadicRational(1));
}
