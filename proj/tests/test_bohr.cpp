#include <diophlab/bohr.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace diophlab;

namespace {

std::vector<long> as_longs(const std::vector<BigInt>& xs) {
  std::vector<long> out;
  for (const auto& x : xs) out.push_back(x.get_si());
  return out;
}

double float_dist(double x) { return std::abs(x - std::nearbyint(x)); }

}  // namespace

TEST(Bohr, RationalThirds) {
  auto p = BohrParams::rank_one(RealSpec(BigRational(1, 3)), BigRational(1, 10), 10);
  EXPECT_EQ(as_longs(enumerate_bohr(p)), (std::vector<long>{-9, -6, -3, 0, 3, 6, 9}));
}

TEST(Bohr, BoundaryCountsAsInside) {
  auto p = BohrParams::rank_one(RealSpec(BigRational(1, 4)), BigRational(1, 4), 4);
  EXPECT_EQ(as_longs(enumerate_bohr(p)), (std::vector<long>{-4, -3, -1, 0, 1, 3, 4}));
}

TEST(Bohr, SqrtTwoMatchesFloatScan) {
  auto p = BohrParams::rank_one(RealSpec::sqrt(2), BigRational(1, 20), 100);
  auto members = as_longs(enumerate_bohr(p));
  std::vector<long> oracle;
  for (long n = -100; n <= 100; ++n) {
    double d = float_dist(n * std::sqrt(2.0));
    ASSERT_GT(std::abs(d - 0.05), 1e-12);
    if (d <= 0.05) oracle.push_back(n);
  }
  EXPECT_EQ(members, oracle);
}

TEST(Bohr, FullWidthIsEverything) {
  auto p = BohrParams::rank_one(RealSpec::sqrt(3), BigRational(1), 25);
  EXPECT_EQ(enumerate_bohr(p).size(), 51u);
}

TEST(Bohr, SymmetricAndMonotone) {
  BohrParams p{{RealSpec::sqrt(2), RealSpec(rules::golden_conjugate())}, {RealSpec(), RealSpec()}, 400,
               {BigRational(1, 10), BigRational(1, 7)}};
  auto m = as_longs(enumerate_bohr(p));
  std::set<long> s(m.begin(), m.end());
  for (long n : m) EXPECT_TRUE(s.count(-n));
  BohrParams wider = p;
  wider.rho[1] = BigRational(1, 5);
  auto w = as_longs(enumerate_bohr(wider));
  std::set<long> ws(w.begin(), w.end());
  for (long n : m) EXPECT_TRUE(ws.count(n));
  EXPECT_GE(w.size(), m.size());
}

TEST(Bohr, ShiftedTwoDimensional) {
  BohrParams p{{RealSpec::sqrt(2), RealSpec::sqrt(5)},
               {RealSpec(BigRational(1, 3)), RealSpec::surd(0, BigRational(1, 2), 3)}, 300,
               {BigRational(1, 8), BigRational(1, 6)}};
  auto m = as_longs(enumerate_bohr(p));
  std::vector<long> oracle;
  for (long n = -300; n <= 300; ++n) {
    double d1 = float_dist(n * std::sqrt(2.0) - 1.0 / 3), d2 = float_dist(n * std::sqrt(5.0) - std::sqrt(3.0) / 2);
    if (d1 <= 0.125 && d2 <= 1.0 / 6) oracle.push_back(n);
  }
  EXPECT_EQ(m, oracle);
}

TEST(Bohr, ValidatesParameters) {
  EXPECT_THROW(enumerate_bohr(BohrParams::rank_one(RealSpec::sqrt(2), BigRational(0), 5)), ParameterError);
  EXPECT_THROW(enumerate_bohr(BohrParams::rank_one(RealSpec::sqrt(2), BigRational(3, 2), 5)), ParameterError);
  BohrParams bad{{RealSpec::sqrt(2)}, {}, 5, {BigRational(1, 2)}};
  EXPECT_THROW(enumerate_bohr(bad), ParameterError);
}

TEST(Bohr, CardinalityCheck) {
  auto rep = bohr_cardinality_check(RealSpec::sqrt(2), BigRational(1, 100), 10000);
  EXPECT_TRUE(rep.hypothesis_met);
  ASSERT_TRUE(rep.bounds_hold.has_value());
  EXPECT_TRUE(*rep.bounds_hold);
  EXPECT_EQ(*rep.q_ell, 70);
  // ||5 sqrt 2|| / 2 ~ 0.0355
  EXPECT_THROW(bohr_cardinality_check(RealSpec::sqrt(2), BigRational(1, 28), 1000), ParameterError);
  EXPECT_THROW(bohr_cardinality_check(RealSpec(BigRational(1, 3)), BigRational(1, 100), 1000), ParameterError);
  auto small = bohr_cardinality_check(RealSpec::sqrt(2), BigRational(1, 100), 10);
  EXPECT_FALSE(small.hypothesis_met);
  EXPECT_FALSE(small.bounds_hold.has_value());
}

TEST(Bohr, LocalisedIdentityHat) {
  BohrParams p = BohrParams::rank_one(RealSpec::sqrt(2), BigRational(1, 50), 100);
  auto loc = as_longs(localized_bohr(p, 4));
  std::vector<long> oracle;
  for (long n = 101; n <= 400; ++n) {
    double d = float_dist(n * std::sqrt(2.0));
    if (d > 0.02 && d <= 0.08) oracle.push_back(n);
  }
  EXPECT_EQ(loc, oracle);
}

TEST(Bohr, LocalisedPowerOfFourHat) {
  BohrParams p = BohrParams::rank_one(RealSpec::sqrt(3), BigRational(1, 40), 30);
  auto hat = power_of_four_hat([](const BigInt& n) { return n % 2 == 0 ? 1UL : 0UL; });
  auto loc = as_longs(localized_bohr(p, 4, hat));
  // hat(30) = 120, hat(120) = 480
  std::vector<long> oracle;
  for (long n = 1; n <= 480; ++n) {
    long h = n % 2 == 0 ? 4 * n : n;
    if (h <= 120 || h > 480) continue;
    double d = float_dist(h * std::sqrt(3.0));
    if (d > 0.025 && d <= 0.1) oracle.push_back(n);
  }
  EXPECT_EQ(loc, oracle);
}

TEST(Gap, Examples) {
  auto a = enumerate_gap(GAP{0, {1}, {5}, GapShape::ProperAsymmetric});
  EXPECT_EQ(a.members, (std::vector<long long>{1, 2, 3, 4, 5}));
  EXPECT_TRUE(a.proper);
  auto b = enumerate_gap(GAP{0, {2, 3}, {2, 2}, GapShape::ProperAsymmetric});
  std::vector<long long> bs = b.members;
  std::sort(bs.begin(), bs.end());
  EXPECT_EQ(bs, (std::vector<long long>{5, 7, 8, 10}));
  EXPECT_TRUE(b.proper);
  auto c = enumerate_gap(GAP{0, {1, 1}, {2, 2}, GapShape::ProperAsymmetric});
  EXPECT_FALSE(c.proper);
  EXPECT_EQ(*c.collision, 3);
  auto s = enumerate_gap(GAP{10, {1}, {3}, GapShape::Symmetric});
  EXPECT_EQ(s.members, (std::vector<long long>{7, 8, 9, 10, 11, 12, 13}));
  EXPECT_THROW(enumerate_gap(GAP{0, {1}, {0}, GapShape::ProperAsymmetric}), ParameterError);
  EXPECT_THROW(enumerate_gap(GAP{0, {1, 1, 1}, {1000, 1000, 1000}, GapShape::ProperAsymmetric}), BudgetExceeded);
}

TEST(Gap, Containment) {
  auto bohr = BohrParams::rank_one(RealSpec::sqrt(2), BigRational(1), 20);
  GAP g{0, {1}, {20}, GapShape::Symmetric};
  EXPECT_TRUE(verify_containment(bohr, g, Containment::GapInBohr).holds);
  EXPECT_TRUE(verify_containment(bohr, g, Containment::BohrInGap).holds);
  // multiples of 5 up to 20 lie in B(20; 1/10) for sqrt 2? 5 sqrt 2 ~ 7.07: yes, 10 sqrt 2 ~ 14.14: no
  auto narrow = BohrParams::rank_one(RealSpec::sqrt(2), BigRational(1, 10), 20);
  GAP fives{0, {5}, {4}, GapShape::ProperAsymmetric};
  auto rep = verify_containment(narrow, fives, Containment::GapInBohr);
  EXPECT_FALSE(rep.holds);
  EXPECT_EQ(rep.counterexamples, (std::vector<long long>{10, 15, 20}));
  auto back = verify_containment(narrow, fives, Containment::BohrInGap);
  EXPECT_FALSE(back.holds);
  EXPECT_TRUE(std::find(back.counterexamples.begin(), back.counterexamples.end(), 0) != back.counterexamples.end());
}

namespace {

// pointwise oracle over [-R, R]^k
bool pointwise_equivalent(const CongruenceLattice& L, long R) {
  std::size_t k = L.rank();
  std::vector<BigInt> n(k, -R);
  for (;;) {
    if (L.satisfies(n) != L.coordinates(n).has_value()) return false;
    std::size_t i = 0;
    for (; i < k; ++i) {
      if (n[i] < R) {
        ++n[i];
        break;
      }
      n[i] = -R;
    }
    if (i == k) return true;
  }
}

}  // namespace

TEST(Lattice, Examples) {
  auto l1 = lattice_basis({1}, 5);
  ASSERT_EQ(l1.basis.size(), 1u);
  EXPECT_EQ(l1.basis[0][0], 5);
  EXPECT_EQ(l1.determinant(), 5);
  auto l2 = lattice_basis({2, 3}, 5);
  EXPECT_EQ(abs(l2.determinant()), 5);
  EXPECT_TRUE(pointwise_equivalent(l2, 5));
  auto l3 = lattice_basis({6, 10, 15}, 7);
  EXPECT_EQ(abs(l3.determinant()), 7);
  EXPECT_TRUE(pointwise_equivalent(l3, 7));
  for (const auto& b : l3.basis) EXPECT_TRUE(l3.satisfies(b));
  EXPECT_THROW(lattice_basis({2, 4}, 6), ConstraintViolation);
}

TEST(Lattice, RandomAgainstPointwiseOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> coef(1, 5000);
  for (std::size_t k = 1; k <= 4; ++k) {
    for (long d = 1; d <= (k == 4 ? 6 : 12); ++d) {
      for (int trial = 0; trial < 6; ++trial) {
        std::vector<BigInt> A;
        BigInt g;
        do {
          A.clear();
          for (std::size_t i = 0; i < k; ++i) A.push_back(coef(rng));
          g = d;
          for (const auto& a : A) g = gcd(g, a);
        } while (g != 1);
        auto L = lattice_basis(A, d);
        EXPECT_EQ(abs(L.determinant()), d);
        EXPECT_TRUE(pointwise_equivalent(L, d)) << k << " " << d;
        EXPECT_TRUE(verify_lattice_membership(L, d).equivalent);
      }
    }
  }
}

TEST(Lattice, LineCheckCatchesBrokenBasis) {
  auto L = lattice_basis({3, 5, 7}, 12);
  ASSERT_TRUE(verify_lattice_membership(L, 12).equivalent);
  auto broken = L;
  broken.basis[1][2] += 1;
  ASSERT_FALSE(pointwise_equivalent(broken, 12));
  auto rep = verify_lattice_membership(broken, 12);
  EXPECT_FALSE(rep.equivalent);
  ASSERT_TRUE(rep.counterexample.has_value());
  std::vector<BigInt> n;
  for (long long x : *rep.counterexample) n.push_back(static_cast<long>(x));
  EXPECT_NE(broken.satisfies(n), broken.coordinates(n).has_value());
}

TEST(Divisibility, Examples) {
  auto r1 = count_divisible_in_gap(GAP{0, {1}, {60}, GapShape::ProperAsymmetric}, 12);
  EXPECT_EQ(r1.count, 5);
  EXPECT_EQ(r1.defect, 0);
  auto r2 = count_divisible_in_gap(GAP{4, {3, 7}, {6, 5}, GapShape::ProperAsymmetric}, 1);
  EXPECT_EQ(r2.count, 30);
  GAP p35{1, {3, 5}, {20, 20}, GapShape::ProperAsymmetric};
  EXPECT_THROW(count_divisible_in_gap(p35, 7), ParameterError);  // 3*6 + 5 = 3 + 5*4
  auto r3 = count_divisible_in_gap(p35, 7, 4, false);
  EXPECT_FALSE(r3.proper);
  long brute = 0;
  for (long a = 1; a <= 20; ++a)
    for (long b = 1; b <= 20; ++b) brute += (1 + 3 * a + 5 * b) % 7 == 0;
  EXPECT_EQ(r3.count, brute);
  EXPECT_EQ(r3.main_term, BigRational(400, 7));
  EXPECT_TRUE(r3.within);
  auto r4 = count_divisible_in_gap(GAP{1, {1, 20}, {20, 20}, GapShape::ProperAsymmetric}, 7);
  EXPECT_TRUE(r4.proper);
  EXPECT_EQ(r4.count, 57);  // multiples of 7 in [22, 421]
  EXPECT_TRUE(r4.within);
  EXPECT_THROW(count_divisible_in_gap(GAP{0, {2, 4}, {3, 3}, GapShape::ProperAsymmetric}, 3), ParameterError);
  EXPECT_THROW(count_divisible_in_gap(GAP{0, {1, 1}, {3, 3}, GapShape::ProperAsymmetric}, 3), ParameterError);
  EXPECT_THROW(count_divisible_in_gap(GAP{0, {1}, {3}, GapShape::Symmetric}, 3), ParameterError);
}

TEST(Davenport, IntegerLatticeUnitBox) {
  auto L = lattice_basis({1, 1}, 1);
  LatticeBox box{{BigRational(1, 2), BigRational(1, 2)}, {BigRational(7, 2), BigRational(11, 2)}};
  auto rep = davenport_check(box, L);
  EXPECT_EQ(rep.count, 15);
  EXPECT_EQ(rep.main_term, 15);
  EXPECT_TRUE(rep.holds);
}

TEST(Davenport, DiagonalLattice) {
  auto L = lattice_basis({1, 1}, 3);
  LatticeBox box{{BigRational(0), BigRational(0)}, {BigRational(30), BigRational(30)}};
  auto rep = davenport_check(box, L);
  long brute = 0;
  for (long a = 0; a <= 30; ++a)
    for (long b = 0; b <= 30; ++b) brute += (a + b) % 3 == 0;
  EXPECT_EQ(rep.count, brute);
  EXPECT_EQ(rep.main_term, 300);
  EXPECT_EQ(rep.minima_sq, (std::vector<BigInt>{2, 5}));
  EXPECT_TRUE(rep.holds);
}

TEST(Davenport, DegenerateBox) {
  auto L = lattice_basis({2, 3, 5}, 7);
  LatticeBox box{{BigRational(0), BigRational(3), BigRational(-10)}, {BigRational(0), BigRational(3), BigRational(40)}};
  auto rep = davenport_check(box, L);
  EXPECT_EQ(rep.main_term, 0);
  long brute = 0;
  for (long c = -10; c <= 40; ++c) brute += (9 + 5 * c) % 7 == 0;
  EXPECT_EQ(rep.count, brute);
  EXPECT_TRUE(rep.holds);
}
