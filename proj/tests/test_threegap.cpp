#include <diophlab/threegap.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace diophlab;

namespace {

// double-precision oracle for the largest gap
double float_max_gap(double alpha, int m) {
  std::vector<double> pts{0.0, 1.0};
  for (int i = 1; i <= m; ++i) pts.push_back(i * alpha - std::floor(i * alpha));
  std::sort(pts.begin(), pts.end());
  double best = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) best = std::max(best, pts[i + 1] - pts[i]);
  return best;
}

}  // namespace

TEST(ThreeGap, DecompositionExamples) {
  ContinuedFraction golden(rules::golden_conjugate());
  auto g = gap_decomposition(5, golden);
  EXPECT_EQ(g.k, 3u);
  EXPECT_EQ(g.r, 1);
  EXPECT_EQ(g.s, 0);
  ContinuedFraction c2(rules::constant(0, 2, "twos"));
  auto one = gap_decomposition(1, c2);
  EXPECT_EQ(one.k, 0u);
  EXPECT_EQ(one.r, 1);
  EXPECT_EQ(one.s, 0);
  ContinuedFraction s2 = cf_of(RealSpec::sqrt(7));
  auto t = convergents(s2, 10);
  for (std::size_t k = 2; k <= 9; ++k) {
    auto d = gap_decomposition(t.q[k], s2);
    EXPECT_EQ(d.k, k - 1);
    EXPECT_EQ(d.r, s2.a(k));
    EXPECT_EQ(d.s, 0);
  }
  EXPECT_THROW(gap_decomposition(0, c2), ParameterError);
}

TEST(ThreeGap, DecompositionUniqueAndRecomposes) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ContinuedFraction cf(rules::random_bounded(seed, 7));
    auto t = convergents(cf, 12);
    for (long m = 1; m <= 3000; ++m) {
      auto d = gap_decomposition(m, cf);
      BigInt qkm1 = d.k == 0 ? BigInt(0) : t.q[d.k - 1];
      EXPECT_EQ(d.r * t.q[d.k] + qkm1 + d.s, m);
      EXPECT_GE(d.r, 1);
      EXPECT_LE(d.r, cf.a(d.k + 1));
      EXPECT_GE(d.s, 0);
      EXPECT_LT(d.s, t.q[d.k]);
      // no other k admits a representation
      int count = 0;
      for (std::size_t k = 0; k < 10; ++k) {
        BigInt qp = k == 0 ? BigInt(0) : t.q[k - 1];
        BigInt rest = BigInt(m) - qp;
        if (rest < t.q[k]) continue;
        BigInt r = rest / t.q[k];
        for (BigInt rr = 1; rr <= cf.a(k + 1) && rr <= r; ++rr) {
          BigInt s = rest - rr * t.q[k];
          if (s >= 0 && s < t.q[k]) ++count;
        }
      }
      EXPECT_EQ(count, 1) << m;
    }
  }
}

TEST(ThreeGap, SqrtTwoFormulaMatchesBrute) {
  ContinuedFraction cf = cf_of(RealSpec::sqrt(2));
  LargestGap lg = largest_gap(10, cf, pow2(-60));
  BruteGaps bg = brute_gaps(10, cf.value());
  EXPECT_EQ(lg.form, bg.largest);
  EXPECT_LE(bg.distinct.size(), 3u);
  EXPECT_NEAR(lg.enclosure.mid().get_d(), float_max_gap(std::sqrt(2.0), 10), 1e-12);
}

TEST(ThreeGap, MEqualsOne) {
  for (auto spec : {RealSpec::sqrt(2), RealSpec::sqrt(3), RealSpec(rules::golden_conjugate())}) {
    ContinuedFraction cf = cf_of(spec);
    LargestGap lg = largest_gap(1, cf, pow2(-60));
    RealEnclosure a = enclose(spec, pow2(-70));
    BigRational frac = a.mid() - BigRational(floor_of(a.mid()));
    BigRational expect = std::max(frac, BigRational(1 - frac));
    EXPECT_LT(abs(lg.enclosure.mid() - expect), pow2(-55));
  }
}

TEST(ThreeGap, CaseSEqualsQkMinusOne) {
  // golden: m = q_{k+1} + q_k - 1 gives s = q_k - 1 and r = a_{k+1} = 1, so the gap is |D_k|
  ContinuedFraction cf(rules::golden_conjugate());
  auto t = convergents(cf, 12);
  for (std::size_t k = 1; k < 10; ++k) {
    BigInt m = t.q[k + 1] + t.q[k] - 1;
    LargestGap lg = largest_gap(m, cf, pow2(-60));
    EXPECT_EQ(lg.decomposition.s, t.q[k] - 1);
    EXPECT_EQ(lg.decomposition.r, 1);
    EXPECT_EQ(lg.form, abs_d_form(t, k));
    EXPECT_EQ(lg.form, brute_gaps(m.get_ui(), cf.value()).largest);
  }
}

TEST(ThreeGap, FormulaAgainstBruteManyCFs) {
  std::vector<RealSpec> alphas{RealSpec::sqrt(2), RealSpec::sqrt(5), RealSpec(rules::euler_e())};
  for (std::uint64_t seed = 40; seed < 43; ++seed) alphas.push_back(RealSpec(rules::random_bounded(seed, 12)));
  for (const auto& a : alphas) {
    ContinuedFraction cf = cf_of(a);
    Orbit orbit(a, 150);
    for (std::size_t m = 1; m <= 150; ++m) {
      LargestGap lg = largest_gap(m, cf, pow2(-60));
      BruteGaps bg = brute_gaps(orbit, m);
      EXPECT_TRUE(same_gap(lg.form, bg.largest, a)) << m;
      EXPECT_LE(bg.distinct.size(), 3u);
    }
  }
}

TEST(ThreeGap, RationalAlphaHasGapOneOverQ) {
  RealSpec a(BigRational(3, 7));
  BruteGaps bg = brute_gaps(10, a);
  ASSERT_EQ(bg.distinct.size(), 1u);
  EXPECT_EQ(bg.enclosures.front().lo, BigRational(1, 7));
  EXPECT_EQ(bg.gaps.size(), 7u);
  EXPECT_THROW(largest_gap(3, cf_of_rational(BigRational(3, 7)), pow2(-10)), ParameterError);
}

TEST(ThreeGap, SmallShiftExamples) {
  ContinuedFraction cf = cf_of(RealSpec::sqrt(2));
  RealEnclosure a = enclose(cf.value(), pow2(-80));
  // gamma = {alpha}
  for (std::size_t t = 1; t <= 8; ++t) {
    LinearReal frac(1, cf.value());
    frac.add_constant(-1);
    RealSpec g = RealSpec::surd(-1, 1, 2);
    SmallShift s = find_small_shift(t, cf, g);
    EXPECT_EQ(s.b, 1);
    EXPECT_TRUE(s.exact_hit);
  }
  // gamma = 0 gives an exact hit at b = q_t
  SmallShift z = find_small_shift(5, cf, RealSpec(BigRational(0)));
  EXPECT_EQ(z.b, 70);
  EXPECT_TRUE(certify_small_shift(z, cf, RealSpec(BigRational(0))));
  // gamma = 1/2, t = 6
  RealSpec half(BigRational(1, 2));
  SmallShift h = find_small_shift(6, cf, half);
  EXPECT_GE(h.b, 1);
  EXPECT_LE(h.b, 70);
  EXPECT_TRUE(certify_small_shift(h, cf, half));
  BigInt brute = find_small_shift_brute(6, cf, half);
  LinearReal vb(BigRational(brute), cf.value()), vh(BigRational(h.b), cf.value());
  vb.add_constant(BigRational(-1, 2));
  vh.add_constant(BigRational(-1, 2));
  RealEnclosure db = dist_nearest_integer(vb.enclose(pow2(-80))), dh = dist_nearest_integer(vh.enclose(pow2(-80)));
  EXPECT_LE(db.lo, dh.hi);
  (void)a;
}

TEST(ThreeGap, SmallShiftAlwaysCertifies) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> num(0, 999);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    ContinuedFraction cf(rules::random_bounded(seed, 9));
    for (std::size_t t = 1; t <= 6; ++t) {
      for (int trial = 0; trial < 5; ++trial) {
        RealSpec g(make_rational(num(rng), 1000) + 3);
        SmallShift s = find_small_shift(t, cf, g);
        EXPECT_TRUE(certify_small_shift(s, cf, g)) << seed << " " << t;
        EXPECT_GE(s.b, 1);
        EXPECT_LE(s.b, s.q_t);
      }
      RealSpec sq = RealSpec::surd(BigRational(1, 3), 1, 3);
      EXPECT_TRUE(certify_small_shift(find_small_shift(t, cf, sq), cf, sq));
    }
  }
}
