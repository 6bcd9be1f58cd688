#include <diophlab/ostrowski.hpp>

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

using namespace diophlab;

namespace {

ContinuedFraction golden() { return ContinuedFraction(rules::golden_conjugate()); }
ContinuedFraction threes() { return ContinuedFraction(rules::constant(0, 3, "threes")); }

std::vector<long> longs(const OstrowskiDigits& d) {
  std::vector<long> out;
  for (const auto& x : d.digits) out.push_back(x.get_si());
  return out;
}

// independent validity check written directly from the three rules
bool valid_digits(const std::vector<long>& c, const std::vector<long>& a) {
  for (std::size_t i = 1; i <= c.size(); ++i) {
    long ci = c[i - 1];
    if (ci < 0) return false;
    if (i == 1 && ci >= a[1]) return false;
    if (i > 1 && ci > a[i]) return false;
    if (i > 1 && ci == a[i] && c[i - 2] != 0) return false;
  }
  return true;
}

}  // namespace

TEST(Ostrowski, EncodeExamples) {
  // golden: q = 1, 1, 2, 3, 5; 4 = q_3 + q_1, so c_4 = 1 and c_2 = 1
  EXPECT_EQ(longs(ostrowski_encode(4, golden())), (std::vector<long>{0, 1, 0, 1}));
  auto cf = ContinuedFraction(rules::sqrt2());
  auto t = convergents(cf, 8);
  for (std::size_t k = 1; k <= 8; ++k) {
    OstrowskiDigits d = ostrowski_encode(t.q[k], cf);
    for (std::size_t i = 1; i <= d.digits.size(); ++i) EXPECT_EQ(d.c(i), i == k + 1 ? 1 : 0);
  }
  ContinuedFraction seven(rules::constant(0, 7, "sevens"));
  EXPECT_EQ(longs(ostrowski_encode(6, seven)), (std::vector<long>{6}));
  EXPECT_THROW(ostrowski_encode(0, seven), ParameterError);
  EXPECT_EQ(ostrowski_decode(OstrowskiDigits{{0, 1, 0, 1}}, golden()), 4);
  EXPECT_EQ(ostrowski_decode(OstrowskiDigits{{6}}, seven), 6);
}

TEST(Ostrowski, DecodeNamesViolatedRule) {
  auto expect_rule = [](const OstrowskiDigits& d, const ContinuedFraction& cf, const std::string& rule) {
    try {
      ostrowski_decode(d, cf);
      ADD_FAILURE() << "expected violation " << rule;
    } catch (const ConstraintViolation& e) {
      EXPECT_EQ(e.rule(), rule);
    }
  };
  expect_rule(OstrowskiDigits{{1}}, golden(), "c_1<a_1");
  expect_rule(OstrowskiDigits{{0, 4}}, threes(), "c_2<=a_2");
  expect_rule(OstrowskiDigits{{1, 3}}, threes(), "c_2=a_2=>c_1=0");
  expect_rule(OstrowskiDigits{{0, -1}}, threes(), "c_2>=0");
}

TEST(Ostrowski, EncodingIsBijectionOntoValidStrings) {
  // every valid string of length L encodes a distinct n in [0, q_L)
  for (const ContinuedFraction& cf : {golden(), threes(), ContinuedFraction(rules::random_bounded(3, 5))}) {
    const std::size_t L = 7;
    auto t = convergents(cf, L);
    std::vector<long> a{0};
    for (std::size_t j = 1; j <= L; ++j) a.push_back(cf.a(j).get_si());
    std::set<long> seen;
    std::vector<long> c(L, 0);
    OstrowskiTable table(cf, t.q[L]);
    for (;;) {
      if (valid_digits(c, a)) {
        long n = 0;
        for (std::size_t k = 0; k < L; ++k) n += c[k] * t.q[k].get_si();
        EXPECT_TRUE(seen.insert(n).second);
        if (n > 0) {
          auto enc = longs(table.encode(n));
          enc.resize(L, 0);
          EXPECT_EQ(enc, c) << n;
        }
      }
      std::size_t i = 0;
      while (i < L && c[i] == a[i + 1]) c[i++] = 0;
      if (i == L) break;
      ++c[i];
    }
    EXPECT_EQ(static_cast<long>(seen.size()), t.q[L].get_si());
    EXPECT_EQ(*seen.rbegin(), t.q[L].get_si() - 1);
  }
}

TEST(Ostrowski, RoundTripSmallRange) {
  for (const ContinuedFraction& cf : {golden(), threes(), cf_of(RealSpec::sqrt(2))}) {
    OstrowskiTable t(cf, 5000);
    for (long n = 1; n <= 5000; ++n) EXPECT_EQ(t.decode(t.encode(n)), n);
  }
}

TEST(Ostrowski, CylinderExamples) {
  EXPECT_THROW(cylinder_elements({1}, golden(), 3), ConstraintViolation);
  auto els = cylinder_elements({1}, threes(), 4);
  // brute force: n <= 200 with c_1 = 1
  OstrowskiTable t(threes(), 200);
  std::vector<BigInt> brute;
  for (long n = 1; n <= 200 && brute.size() < 4; ++n)
    if (t.encode(n).c(1) == 1) brute.push_back(n);
  EXPECT_EQ(els, brute);
  EXPECT_TRUE(check_gap_pattern({1}, threes(), cylinder_elements({1}, threes(), 60)).ok);
  auto zero = cylinder_elements({0}, ContinuedFraction(rules::sqrt2()), 3);
  EXPECT_EQ(zero, (std::vector<BigInt>{2, 4, 5}));
}

TEST(Ostrowski, CylindersMatchBruteScanAndGaps) {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    ContinuedFraction cf(rules::random_bounded(seed, 6));
    const long N = 20000;
    OstrowskiTable t(cf, N);
    std::map<std::vector<long>, std::vector<BigInt>> by_prefix;
    for (long n = 1; n <= N; ++n) {
      auto d = t.encode(n);
      for (std::size_t len = 1; len <= 3; ++len) {
        std::vector<long> p;
        for (std::size_t i = 1; i <= len; ++i) p.push_back(d.c(i).get_si());
        by_prefix[p].push_back(n);
      }
    }
    int checked = 0;
    for (const auto& [p, members] : by_prefix) {
      if (checked++ % 3) continue;
      std::vector<BigInt> prefix(p.begin(), p.end());
      auto upto = cylinder_elements_upto(prefix, cf, N);
      EXPECT_EQ(upto, members);
      auto rep = check_gap_pattern(prefix, cf, upto);
      EXPECT_TRUE(rep.ok) << rep.failure;
    }
  }
}

TEST(Ostrowski, GapPatternDetectsBrokenList) {
  auto els = cylinder_elements({0}, threes(), 12);
  els.erase(els.begin() + 5);
  EXPECT_FALSE(check_gap_pattern({0}, threes(), els).ok);
}

TEST(Ostrowski, GammaFromDigits) {
  ContinuedFraction c64(rules::constant(0, 64, "c64"));
  GammaDigits zero(c64, {}, GammaDigits::Tail::Zero);
  RealEnclosure z = gamma_from_digits(zero, BigRational(1, 1000));
  EXPECT_EQ(z.lo, 0);
  EXPECT_EQ(z.hi, 0);

  GammaDigits quarter(c64, {}, GammaDigits::Tail::Constant, 16, {}, true);
  DandyCertificate cert = certify_dandy(quarter);
  EXPECT_TRUE(cert.ok()) << cert.failure;
  EXPECT_GE(cert.gamma.lo, 0);

  GammaDigits half(c64, {}, GammaDigits::Tail::Constant, 32, {}, true);
  RealEnclosure g = gamma_from_digits(half, pow2(-100));
  // gamma <= b_1 D_0 = 32 alpha
  RealEnclosure b1d0 = BigRational(32) * enclose(c64.value(), pow2(-110));
  EXPECT_LT(g.hi, b1d0.lo);
  EXPECT_TRUE(certify_dandy(half).ok());

  // gamma = sum b_{k+1} D_k against a direct convergent evaluation with alpha known exactly
  // alpha = [0; 64, 64, ...] = -32 + sqrt(1025)
  RealSpec alpha = RealSpec::surd(-32, 1, 1025);
  LinearReal partial;
  auto t = convergents(c64, 30);
  for (std::size_t k = 0; k < 30; ++k) {
    partial.add(BigRational(32 * t.q[k]), alpha);
    partial.add_constant(-BigRational(32 * t.p[k]));
  }
  RealEnclosure ref = partial.enclose(pow2(-200));
  EXPECT_LT(abs(ref.mid() - g.mid()), pow2(-90));
}

TEST(Ostrowski, DandyViolationsDetected) {
  ContinuedFraction c32(rules::constant(0, 32, "c32"));
  GammaDigits small(c32, {}, GammaDigits::Tail::Half, 0, {}, true);
  EXPECT_FALSE(certify_dandy(small).digits_ok);
  ContinuedFraction c64(rules::constant(0, 64, "c64"));
  GammaDigits low(c64, {}, GammaDigits::Tail::Constant, 15, {}, true);
  EXPECT_EQ(*low.dandy_violation(5), "a_1/4<=b_1");
}

TEST(Ostrowski, SigmaDecompositionExamples) {
  ContinuedFraction c64(rules::constant(0, 64, "c64"));
  GammaDigits g(c64, {}, GammaDigits::Tail::Constant, 20, {}, true);
  // n = b_1 + 1: c_1 = 21, so m(n) = 0 and delta_1 = 1
  SigmaDecomposition s = sigma_decompose(21, g, pow2(-100));
  ASSERT_TRUE(s.m.has_value());
  EXPECT_EQ(*s.m, 0u);
  EXPECT_EQ(s.delta[0], 1);
  EXPECT_TRUE(s.agree);
  // n whose digits match b on the first two places: |Sigma| is small
  BigInt n = 20 + 20 * 64;
  SigmaDecomposition close = sigma_decompose(n, g, pow2(-100));
  EXPECT_EQ(*close.m, 2u);
  EXPECT_LT(close.dist_sigma.hi, BigRational(1, 64 * 64));
  EXPECT_TRUE(close.agree);
}

TEST(Ostrowski, SigmaRouteAgreesWithDirectRoute) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<long> pick(1, 10000);
  for (auto sched : {Schedule::Relaxed}) {
    SharpnessPair pair = sharpness_construct({1, 0, 1}, sched, 4);
    SigmaEvaluator ev(pair.gamma, 10000, BigRational(1, BigInt("1000000000000000000000000000000")));
    for (int i = 0; i < 200; ++i) {
      SigmaDecomposition s = ev.decompose(pick(rng));
      EXPECT_TRUE(s.agree) << s.n;
      EXPECT_GT(s.dist_sigma.lo, 0);
      EXPECT_LE(s.dist_sigma.width(), BigRational(1, BigInt("1000000000000000000000000000000")));
      EXPECT_LE(s.dist_direct.width(), BigRational(1, BigInt("1000000000000000000000000000000")));
    }
  }
}

TEST(Ostrowski, SharpnessConstruction) {
  SharpnessPair paper = sharpness_construct({0, 0}, Schedule::Paper, 2);
  EXPECT_EQ(paper.a[0], 64);
  BigInt f64;
  mpz_fac_ui(f64.get_mpz_t(), 64);
  EXPECT_EQ(paper.a[1], f64);  // 64! is already a multiple of 64
  EXPECT_TRUE(paper.factorial_growth);
  EXPECT_THROW(sharpness_construct({0, 0, 0}, Schedule::Paper, 3), DepthError);

  SharpnessPair q = sharpness_construct({1}, Schedule::Relaxed, 2);
  EXPECT_EQ(q.gamma.b(1), 16);
  EXPECT_EQ(q.gamma.b(2), q.a[1] / 2);

  SharpnessPair relaxed = sharpness_construct({0, 1, 1, 0, 1, 0}, Schedule::Relaxed, 6);
  for (std::size_t u = 0; u + 1 < relaxed.q.size(); ++u) EXPECT_EQ(relaxed.a[u], 64 * relaxed.q[u] * relaxed.q[u] * relaxed.q[u]);
  EXPECT_FALSE(relaxed.gamma.dandy_violation(12).has_value());
  EXPECT_TRUE(certify_dandy(relaxed.gamma).ok());
  for (std::size_t i = 1; i <= 6; ++i)
    EXPECT_EQ(relaxed.gamma.b(i) << (1 + relaxed.sigma[i - 1]), relaxed.a[i - 1]);
}

TEST(Ostrowski, SudPartialSums) {
  SharpnessPair pair = sharpness_construct({0, 0, 0}, Schedule::Relaxed, 3);
  const GammaDigits& g = pair.gamma;
  BigInt a1 = pair.a[0], b1 = g.b(1);
  EXPECT_THROW(sud_partial_sum(0, a1 - b1 + 1, g, 10000), ParameterError);
  EXPECT_THROW(sud_partial_sum(0, 0, g, 10000), ParameterError);

  OstrowskiTable t(g.cf(), 10000);
  for (long d : {1L, 5L, 31L, 32L}) {
    SudResult r = sud_partial_sum(0, d, g, 10000);
    // oracle: scan n, compare m(n) = 0 and |c_1 - b_1| = d
    std::vector<BigInt> brute;
    for (long n = 1; n <= 10000; ++n) {
      auto c = t.encode(n);
      BigInt delta = c.c(1) - b1;
      if (delta != 0 && abs(delta) == d) brute.push_back(n);
    }
    EXPECT_EQ(r.members, brute) << d;
    EXPECT_EQ(r.empty, brute.empty());
    if (!r.empty) {
      EXPECT_GE(*r.min_w_over_qu, BigRational(1));
      EXPECT_GT(r.sum.lo, 0);
      EXPECT_LE(r.sum.width(), pow2(-100));
    }
    EXPECT_EQ(r.branch, d > 32 ? SudBranch::Above : (d == 32 ? SudBranch::Equal : SudBranch::Below));
  }
  // u = 1: m(n) = 1 requires c_1 = b_1
  SudResult r1 = sud_partial_sum(1, 3, g, 100000);
  for (const auto& n : r1.members) {
    auto c = OstrowskiTable(g.cf(), n).encode(n);
    EXPECT_EQ(c.c(1), b1);
    EXPECT_EQ(abs(c.c(2) - g.b(2)), 3);
  }
}
