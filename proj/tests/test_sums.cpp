#include "diophlab/sums.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace diophlab;

namespace {

RealSpec Q(const char* s) { return RealSpec::rational(s); }
RealSpec zero() { return RealSpec(BigRational(0)); }

std::vector<RealSpec> fig_alphas() {
  return {Q("957363115715396/1000000000000000"), Q("3049448415027476/10000000000000000")};
}

long double dist_ld(long double x) {
  long double f = x - std::floor(x);
  return std::min(f, 1 - f);
}

}  // namespace

TEST(PaperLog, Examples) {
  EXPECT_EQ(paper_log(1.0), 1.0);
  EXPECT_DOUBLE_EQ(paper_log(std::exp(1.0)), 1.0);
  EXPECT_NEAR(paper_log(std::exp(2.0)), 2.0, 1e-15);
  EXPECT_EQ(paper_log(0.5), 1.0);
  EXPECT_NEAR(paper_log(BigRational(1000000)), std::log(1e6), 1e-12);
  EXPECT_NEAR(paper_log(BigRational(7, 2)), 1.252762968495368, 1e-12);
  EXPECT_THROW(paper_log(0.0), ParameterError);
  EXPECT_THROW(paper_log(BigRational(-1)), ParameterError);
}

TEST(ApproxFunction, RationalRules) {
  auto c = ApproxFunction::constant(BigRational(1, 3));
  EXPECT_EQ(c.rational_at(17), BigRational(1, 3));
  auto r = ApproxFunction::reciprocal(4);
  EXPECT_EQ(r.rational_at(5), BigRational(1, 20));
  auto s = ApproxFunction::inverse_square();
  EXPECT_EQ(s.rational_at(7), BigRational(1, 49));
  EXPECT_TRUE(s.is_rational());
  EXPECT_THROW(s.at(0), ParameterError);
  auto t = ApproxFunction::table({BigRational(1, 2), BigRational(1, 3)}, true);
  EXPECT_EQ(t.rational_at(2), BigRational(1, 3));
  EXPECT_THROW(t.rational_at(3), ParameterError);
}

TEST(ApproxFunction, LogSquareXi) {
  auto f = ApproxFunction::reciprocal_log_square_xi(xi_constant(4));
  EXPECT_FALSE(f.is_rational());
  EXPECT_THROW(f.rational_at(3), ParameterError);
  for (std::uint64_t n : {1ULL, 2ULL, 3ULL, 100ULL, 99991ULL}) {
    RealEnclosure e = f.at(n);
    double l = std::max(std::log(static_cast<double>(n)), 1.0);
    double oracle = 1.0 / (4.0 * n * l * l);
    EXPECT_LT(e.width().get_d(), 1e-30);
    EXPECT_NEAR(e.mid().get_d(), oracle, 1e-14 * oracle);
    EXPECT_NEAR(f.approx(n), oracle, 1e-14 * oracle);
  }
  EXPECT_EQ(f.at(1).lo, BigRational(1, 4));
  EXPECT_NO_THROW(f.validate_monotone(300));
  EXPECT_NO_THROW(ApproxFunction::reciprocal_log_square_xi(xi_loglog()).validate_monotone(300));
}

TEST(ApproxFunction, Parse) {
  EXPECT_EQ(ApproxFunction::parse("recip:4").rational_at(2), BigRational(1, 8));
  EXPECT_EQ(ApproxFunction::parse("const:1/2").rational_at(9), BigRational(1, 2));
  EXPECT_EQ(ApproxFunction::parse("inv_square").rational_at(3), BigRational(1, 9));
  EXPECT_EQ(ApproxFunction::parse("logsq:log").name(), "logsq:log");
  EXPECT_TRUE(ApproxFunction::parse("table:1/2,1/4").monotone());
  EXPECT_FALSE(ApproxFunction::parse("table:1/4,1/2").monotone());
  EXPECT_THROW(ApproxFunction::parse("wiggly"), ParameterError);
  EXPECT_THROW(ApproxFunction::parse("recip:0"), ParameterError);
}

TEST(ApproxFunction, MonotoneFlagValidated) {
  auto bad = ApproxFunction::table({BigRational(1, 4), BigRational(1, 5), BigRational(1, 2)}, true);
  EXPECT_THROW(bad.validate_monotone(3), ParameterError);
  EXPECT_NO_THROW(bad.validate_monotone(2));
  auto unflagged = ApproxFunction::table({BigRational(1, 4), BigRational(1, 2)}, false);
  EXPECT_NO_THROW(unflagged.validate_monotone(2));
}

TEST(PhiBig, Examples) {
  auto psi = ApproxFunction::constant(BigRational(1, 10));
  // ||1/2|| = 1/2 gives twice psi
  PhiValue v = phi_big(1, {Q("1/2")}, {zero()}, psi);
  EXPECT_FALSE(v.infinite);
  EXPECT_EQ(v.value.lo, BigRational(1, 5));
  EXPECT_EQ(v.value.hi, BigRational(1, 5));
  // aligned rational
  EXPECT_TRUE(phi_big(3, {Q("1/3")}, {zero()}, psi).infinite);
  EXPECT_TRUE(phi_big(2, {Q("1/3")}, {Q("2/3")}, psi).infinite);
  EXPECT_FALSE(phi_big(2, {Q("1/3")}, {zero()}, psi).infinite);
}

TEST(PhiBig, IrrationalAgainstFloat) {
  auto psi = ApproxFunction::reciprocal(1);
  PhiValue v = phi_big(10, {RealSpec::sqrt(2)}, {zero()}, psi);
  long double oracle = 1.0L / (10.0L * dist_ld(10.0L * std::sqrt(2.0L)));
  EXPECT_TRUE(v.value.lo <= v.value.hi);
  EXPECT_LT(BigRational(v.value.width() / v.value.lo).get_d(), 1e-12);
  EXPECT_NEAR(v.value.mid().get_d(), static_cast<double>(oracle), 1e-15 * static_cast<double>(oracle));
  // two factors, shifted
  PhiValue w = phi_big(7, {RealSpec::sqrt(2), RealSpec::sqrt(3)}, {Q("1/5"), zero()}, psi);
  long double o2 = (1.0L / 7) / (dist_ld(7 * std::sqrt(2.0L) - 0.2L) * dist_ld(7 * std::sqrt(3.0L)));
  EXPECT_NEAR(w.value.mid().get_d(), static_cast<double>(o2), 1e-13 * static_cast<double>(o2));
}

TEST(LogAvgSum, SingleTerm) {
  auto a = fig_alphas();
  // ||alpha_1|| = 1 - alpha_1, ||alpha_2|| = alpha_2
  BigRational d1 = 1 - a[0].as_rational(), d2 = a[1].as_rational();
  BigRational expected = 1 / (d1 * d2);
  LogAvgResult r = log_avg_sum(1, a, {zero(), zero()});
  EXPECT_FALSE(r.infinite);
  EXPECT_LE(std::abs(r.value - expected.get_d()), r.error_bound);
  EXPECT_GT(r.error_bound, 0);
  ExactSum e = log_avg_sum_exact(1, a, {zero(), zero()});
  EXPECT_EQ(BigRational(e.num, e.den), expected);
  EXPECT_NEAR(r.value, 77.0, 1.0);
}

TEST(LogAvgSum, SpotChecksAgreeWithinBound) {
  auto a = fig_alphas();
  for (std::uint64_t N : {1000ULL, 10000ULL}) {
    SpotCheck s = exact_spotcheck(N, a, {zero(), zero()});
    EXPECT_TRUE(s.agrees) << "N=" << N << " diff " << s.difference << " bound " << s.approx.error_bound;
    EXPECT_LT(s.approx.error_bound / s.approx.value, 1e-10);
  }
}

TEST(LogAvgSum, ShiftedAndThreeFactors) {
  std::vector<RealSpec> a = {Q("31415926/100000000"), Q("2718281/10000000"), Q("1414213/1000000")};
  std::vector<RealSpec> g = {Q("1/7"), zero(), Q("3/11")};
  SpotCheck s = exact_spotcheck(3000, a, g);
  EXPECT_TRUE(s.agrees);
  long double oracle = 0;
  for (int n = 1; n <= 3000; ++n)
    oracle += 1.0L / (n * dist_ld(n * 0.31415926L - 1.0L / 7) * dist_ld(n * 0.2718281L) *
                      dist_ld(n * 1.414213L - 3.0L / 11));
  EXPECT_NEAR(s.approx.value, static_cast<double>(oracle), 1e-9 * static_cast<double>(oracle));
}

TEST(LogAvgSum, IrrationalFloatMode) {
  std::vector<RealSpec> a = {RealSpec::sqrt(2)};
  LogAvgResult r = log_avg_sum(300, a, {zero()});
  EXPECT_TRUE(std::isfinite(r.error_bound));
  // certified enclosure of the same sum
  RealEnclosure acc(BigRational(0));
  auto one = ApproxFunction::reciprocal(1);
  for (std::uint64_t n = 1; n <= 300; ++n) acc = acc + phi_big(n, a, {zero()}, one).value;
  EXPECT_LE(r.value - r.error_bound, acc.hi.get_d() * (1 + 1e-15));
  EXPECT_GE(r.value + r.error_bound, acc.lo.get_d() * (1 - 1e-15));
}

TEST(LogAvgSum, ZeroFactorIsInfinite) {
  LogAvgResult r = log_avg_sum(10, {Q("1/3")}, {zero()});
  EXPECT_TRUE(r.infinite);
  EXPECT_EQ(r.first_infinite, 3u);
  ExactSum e = log_avg_sum_exact(10, {Q("1/3")}, {zero()});
  EXPECT_TRUE(e.infinite);
  EXPECT_EQ(e.first_infinite, 3u);
  EXPECT_EQ(log_avg_sum(2, {Q("1/3")}, {zero()}).infinite, false);
}

TEST(LogAvgSum, Errors) {
  EXPECT_THROW(log_avg_sum(0, {Q("1/3")}, {zero()}), ParameterError);
  EXPECT_THROW(log_avg_sum(10, {Q("1/3")}, {}), ParameterError);
  EXPECT_THROW(log_avg_sum(kSumBudget + 1, {Q("1/3")}, {zero()}), BudgetExceeded);
  EXPECT_THROW(log_avg_sum_exact(10, {RealSpec::sqrt(2)}, {zero()}), ParameterError);
}

TEST(Figure1, ConstantMatchesPublishedValue) {
  Figure1Result r = figure1(1000000, fig_alphas());
  EXPECT_GE(r.c, 1.717);
  EXPECT_LE(r.c, 1.752);
  EXPECT_NEAR(r.c, 1.73475, 1e-3);
  EXPECT_EQ(r.S.size(), 1000000u);
  for (std::size_t i = 1; i < r.S.size(); ++i) ASSERT_LE(r.S[i - 1], r.S[i]);
  LogAvgResult direct = log_avg_sum(1000000, fig_alphas(), {zero(), zero()});
  EXPECT_LE(std::abs(direct.value - r.S.back()), direct.error_bound + r.error_bound);
}

TEST(Figure1, HOneAndReproducibility) {
  Figure1Result one = figure1(1, fig_alphas());
  EXPECT_EQ(one.c, one.S[0]);
  set_thread_cap(1);
  Figure1Result a = figure1(200000, fig_alphas());
  set_thread_cap(4);
  Figure1Result b = figure1(200000, fig_alphas());
  set_thread_cap(0);
  EXPECT_EQ(a.S, b.S);
  EXPECT_EQ(a.c, b.c);
}

TEST(Figure1, CsvAndScript) {
  Figure1Result r = figure1(10, fig_alphas());
  std::ostringstream csv, gp;
  write_figure1_csv(csv, r, 3);
  std::string text = csv.str();
  EXPECT_EQ(text.rfind("N,S,fit\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 5);  // 1, 3, 6, 9, 10
  write_figure1_gnuplot(gp, "figure1.csv", r);
  EXPECT_NE(gp.str().find("figure1.csv"), std::string::npos);
}

// ---------------------------------------------------------------------------

namespace {

/// Literal count for rational inputs with 64-bit denominators.
std::vector<std::uint64_t> brute_counts(const std::vector<BigRational>& fixed, const std::vector<BigRational>& gammas,
                                        const std::vector<BigRational>& grid, const ApproxFunction& psi,
                                        std::uint64_t N) {
  std::vector<std::uint64_t> out;
  for (const auto& a : grid) {
    std::uint64_t c = 0;
    for (std::uint64_t n = 1; n <= N; ++n) {
      BigRational prod = 1;
      auto dist = [](const BigRational& x) {
        BigRational f = x - BigRational(floor_of(x));
        return std::min(f, BigRational(1 - f));
      };
      for (std::size_t i = 0; i < fixed.size(); ++i)
        prod *= dist(BigRational(static_cast<unsigned long>(n)) * fixed[i] - gammas[i]);
      prod *= dist(BigRational(static_cast<unsigned long>(n)) * a - gammas.back());
      if (prod < psi.rational_at(n)) ++c;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST(Gallagher, TrivialPsi) {
  GallagherSpec s;
  s.gammas = {zero()};
  s.grid = dyadic_grid(8, 16);
  s.N = 500;
  s.psi = ApproxFunction::constant(1);
  for (auto c : gallagher_counter(s).counts) EXPECT_EQ(c, 500u);
  s.psi = ApproxFunction::constant(0);
  auto r = gallagher_counter(s);
  for (auto c : r.counts) EXPECT_EQ(c, 0u);
  EXPECT_EQ(r.fraction_at_least, (std::vector<double>{0, 0, 0}));
}

TEST(Gallagher, DyadicGrid) {
  auto g = dyadic_grid(16, 512);
  ASSERT_EQ(g.size(), 512u);
  EXPECT_EQ(g[0], BigRational(63, 65536));
  EXPECT_EQ(g[511], BigRational(128 * 511 + 63, 65536));
  for (const auto& a : g) EXPECT_EQ(a.get_den(), 65536);
  EXPECT_THROW(dyadic_grid(4, 16), ParameterError);
}

TEST(Gallagher, MatchesBruteForce) {
  auto grid = dyadic_grid(10, 32);
  GallagherSpec s;
  s.gammas = {zero()};
  s.grid = grid;
  s.N = 1500;
  s.psi = ApproxFunction::reciprocal(4);
  EXPECT_EQ(gallagher_counter(s).counts, brute_counts({}, {BigRational(0)}, grid, s.psi, s.N));

  // k = 2 with a fixed rational alpha_1 and shifts
  s.alphas = {Q("355/113")};
  s.gammas = {Q("1/9"), Q("1/4")};
  s.psi = ApproxFunction::reciprocal(1);
  s.N = 800;
  EXPECT_EQ(gallagher_counter(s).counts,
            brute_counts({BigRational(355, 113)}, {BigRational(1, 9), BigRational(1, 4)}, grid, s.psi, s.N));
}

TEST(Gallagher, IrrationalFixedFactor) {
  GallagherSpec s;
  s.alphas = {RealSpec::sqrt(2)};
  s.gammas = {zero(), zero()};
  s.grid = dyadic_grid(8, 8);
  s.N = 400;
  s.psi = ApproxFunction::reciprocal(1);
  auto r = gallagher_counter(s);
  EXPECT_TRUE(r.undecided.empty());
  for (std::size_t j = 0; j < s.grid.size(); ++j) {
    long double a = s.grid[j].get_d();
    std::uint64_t c = 0;
    for (int n = 1; n <= 400; ++n)
      if (dist_ld(n * std::sqrt(2.0L)) * dist_ld(n * a) < 1.0L / n) ++c;
    EXPECT_EQ(r.counts[j], c) << j;
  }
}

TEST(Gallagher, MonotoneInNAndPsi) {
  GallagherSpec s;
  s.gammas = {zero()};
  s.grid = dyadic_grid(12, 64);
  s.N = 20000;
  s.checkpoints = {100, 1000, 5000, 20000};
  s.psi = ApproxFunction::reciprocal(8);
  auto small = gallagher_counter(s);
  s.psi = ApproxFunction::reciprocal(4);
  auto large = gallagher_counter(s);
  for (std::size_t j = 0; j < s.grid.size(); ++j) {
    for (std::size_t c = 1; c < s.checkpoints.size(); ++c)
      EXPECT_LE(large.at_checkpoint[c - 1][j], large.at_checkpoint[c][j]);
    EXPECT_EQ(large.at_checkpoint.back()[j], large.counts[j]);
    EXPECT_LE(small.counts[j], large.counts[j]);
  }
}

TEST(Gallagher, ContrastAgainstBrute) {
  auto grid = dyadic_grid(16, 512);
  GallagherSpec s;
  s.gammas = {zero()};
  s.grid = grid;
  s.N = 100000;
  s.psi = ApproxFunction::reciprocal(4);
  auto div = gallagher_counter(s);
  s.psi = ApproxFunction::inverse_square();
  auto conv = gallagher_counter(s);
  // integer oracle: ||n a|| = min(r, 2^16 - r) / 2^16
  std::size_t wins = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::uint64_t A = grid[j].get_num().get_ui(), d = 0, c = 0;
    for (std::uint64_t n = 1; n <= 100000; ++n) {
      std::uint64_t r = n * A % 65536;
      r = std::min<std::uint64_t>(r, 65536 - r);
      if (4 * n * r < 65536) ++d;
      if (n * n * r < 65536) ++c;
    }
    ASSERT_EQ(div.counts[j], d) << j;
    ASSERT_EQ(conv.counts[j], c) << j;
    wins += d > c;
  }
  EXPECT_EQ(wins, 486u);
}

TEST(Gallagher, Errors) {
  GallagherSpec s;
  s.gammas = {zero()};
  s.N = 10;
  EXPECT_THROW(gallagher_counter(s), ParameterError);
  s.grid = dyadic_grid(8, 8);
  s.checkpoints = {11};
  EXPECT_THROW(gallagher_counter(s), ParameterError);
  s.checkpoints.clear();
  s.gammas.clear();
  EXPECT_THROW(gallagher_counter(s), ParameterError);
}

// ---------------------------------------------------------------------------

TEST(Dyadic, ConstantFunction) {
  DyadicReport r = dyadic_ratio_check([](std::uint64_t) { return 1.0; }, 2, 0, 1, 100000);
  EXPECT_EQ(r.J, 16u);
  EXPECT_DOUBLE_EQ(static_cast<double>(r.left), 100000 - 2 + 1);
  EXPECT_DOUBLE_EQ(static_cast<double>(r.right), (1 << 17) - 2);
  EXPECT_TRUE(r.in_band);
}

TEST(Dyadic, ReciprocalLog) {
  for (std::uint64_t C : {2ULL, 3ULL, 10ULL}) {
    DyadicReport r = dyadic_ratio_check([](std::uint64_t n) { return 1.0 / static_cast<double>(n); }, C, 1, 1, 1000000);
    EXPECT_TRUE(r.in_band) << C << " " << r.ratio;
    // left side ~ (log N)^2 / 2 from the integral of log x / x
    double L = std::log(1e6), l0 = std::log(static_cast<double>(C));
    EXPECT_NEAR(static_cast<double>(r.left), (L * L - l0 * l0) / 2, 0.1 * L * L);
  }
}

TEST(Dyadic, SingleTermEdge) {
  // J0 = J: only n = 2^16 .. N on the left and j = 16 on the right
  DyadicReport r = dyadic_ratio_check([](std::uint64_t n) { return 1.0 / static_cast<double>(n); }, 2, 2, 16, 100000);
  EXPECT_EQ(r.J, 16u);
  double hj = 1.0 / 65536;
  EXPECT_NEAR(static_cast<double>(r.right), 256 * 65536 * hj, 1e-9);
  EXPECT_TRUE(r.in_band);
}

TEST(Dyadic, BandHoldsForRandomStepFunctions) {
  std::mt19937_64 rng(20260311);
  for (int trial = 0; trial < 200; ++trial) {
    std::uint64_t C = 2 + rng() % 4;
    double kappa = static_cast<double>(rng() % 7) / 2;
    std::uint64_t N = 1000 + rng() % 50000;
    std::uint64_t J0 = 1 + rng() % 3;
    std::vector<double> h(N);
    double v = 1.0;
    for (auto& x : h) {
      if (rng() % 50 == 0) v *= static_cast<double>(rng() % 1000) / 1000;
      x = v;
    }
    std::uint64_t p = 1;
    for (std::uint64_t j = 0; j < J0; ++j) p *= C;
    if (p > N || h[p - 1] == 0) continue;
    DyadicReport r = dyadic_ratio_check(h, C, kappa, J0, N);
    EXPECT_TRUE(r.in_band) << "C=" << C << " kappa=" << kappa << " ratio=" << r.ratio << " band [" << r.band_lo
                           << ", " << r.band_hi << "]";
  }
}

TEST(Dyadic, Errors) {
  auto one = [](std::uint64_t) { return 1.0; };
  EXPECT_THROW(dyadic_ratio_check(one, 1, 0, 1, 100), ParameterError);
  EXPECT_THROW(dyadic_ratio_check(one, 2, 0, 0, 100), ParameterError);
  EXPECT_THROW(dyadic_ratio_check(one, 2, 0, 7, 100), ParameterError);
  EXPECT_THROW(dyadic_ratio_check([](std::uint64_t n) { return n == 50 ? 2.0 : 1.0; }, 2, 1, 1, 100),
               ParameterError);
  EXPECT_THROW(dyadic_ratio_check([](std::uint64_t) { return 0.0; }, 2, 1, 1, 100), ParameterError);
}
