#pragma once

// Scalar experiments: approximation functions, the log-averaged sums
// S(N) = sum_{n <= N} 1 / (n prod ||n alpha_i - gamma_i||), solution counters
// over a grid of alphas, and the dyadic truncation ratio.

#include "contfrac.hpp"
#include "parallel.hpp"

#include <array>
#include <cfloat>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace diophlab {

/// max(ln x, 1)
inline double paper_log(double x) {
  if (!(x > 0)) throw ParameterError("logarithm of a non-positive number");
  return std::max(std::log(x), 1.0);
}

inline double paper_log(const BigRational& x) {
  if (x <= 0) throw ParameterError("logarithm of a non-positive number");
  return std::max(ln_big(x.get_num()) - ln_big(x.get_den()), 1.0);
}

// ---------------------------------------------------------------------------
// Approximation functions

/// xi: N -> [1, inf), non-decreasing.
struct XiRule {
  std::string name;
  std::function<RealEnclosure(std::uint64_t)> at;
  std::function<double(std::uint64_t)> approx;
};

inline XiRule xi_constant(const BigRational& c) {
  if (c < 1) throw ParameterError("xi must be at least 1");
  return {"const:" + to_string(c), [c](std::uint64_t) { return RealEnclosure(c); },
          [d = c.get_d()](std::uint64_t) { return d; }};
}

/// xi(n) = log n
inline XiRule xi_log() {
  return {"log",
          [](std::uint64_t n) { return paper_log_enclosure(BigRational(static_cast<unsigned long>(n))); },
          [](std::uint64_t n) { return paper_log(static_cast<double>(n)); }};
}

/// xi(n) = log log n
inline XiRule xi_loglog() {
  return {"loglog",
          [](std::uint64_t n) {
            RealEnclosure l = paper_log_enclosure(BigRational(static_cast<unsigned long>(n)));
            return RealEnclosure(paper_log_enclosure(l.lo).lo, paper_log_enclosure(l.hi).hi);
          },
          [](std::uint64_t n) { return paper_log(paper_log(static_cast<double>(n))); }};
}

class ApproxFunction {
 public:
  using RationalRule = std::function<BigRational(std::uint64_t)>;

  static ApproxFunction rational(std::string name, RationalRule f, bool monotone) {
    ApproxFunction out;
    out.name_ = std::move(name);
    out.monotone_ = monotone;
    out.rational_ = std::move(f);
    return out;
  }

  static ApproxFunction constant(const BigRational& c) {
    if (c < 0) throw ParameterError("approximation function must be non-negative");
    return rational("const:" + to_string(c), [c](std::uint64_t) { return c; }, true);
  }

  /// 1/(c n)
  static ApproxFunction reciprocal(const BigRational& c) {
    if (c <= 0) throw ParameterError("reciprocal needs c > 0");
    return rational(
        "recip:" + to_string(c), [c](std::uint64_t n) -> BigRational { return 1 / (c * static_cast<unsigned long>(n)); },
        true);
  }

  /// 1/n^2
  static ApproxFunction inverse_square() {
    return rational(
        "inv_square",
        [](std::uint64_t n) -> BigRational {
          BigInt nn = static_cast<unsigned long>(n);
          return make_rational(1, nn * nn);
        },
        true);
  }

  /// values[n-1] = psi(n)
  static ApproxFunction table(std::vector<BigRational> values, bool monotone) {
    for (const auto& v : values)
      if (v < 0) throw ParameterError("approximation function must be non-negative");
    auto shared = std::make_shared<const std::vector<BigRational>>(std::move(values));
    return rational(
        "table",
        [shared](std::uint64_t n) -> BigRational {
          if (n == 0 || n > shared->size())
            throw ParameterError("table approximation function queried outside its range (n = " +
                                 std::to_string(n) + ")");
          return (*shared)[n - 1];
        },
        monotone);
  }

  /// 1 / (n (log n)^2 xi(n))
  static ApproxFunction reciprocal_log_square_xi(XiRule xi) {
    ApproxFunction out;
    out.name_ = "logsq:" + xi.name;
    out.monotone_ = true;
    out.enclosure_ = [at = xi.at](std::uint64_t n) {
      BigRational nn = static_cast<unsigned long>(n);
      RealEnclosure l = paper_log_enclosure(nn);
      return diophlab::reciprocal(nn * (l * l * at(n)));
    };
    out.approx_ = [ap = xi.approx](std::uint64_t n) {
      double l = paper_log(static_cast<double>(n));
      return 1.0 / (static_cast<double>(n) * l * l * ap(n));
    };
    return out;
  }

  /// const:c | recip:c | inv_square | logsq:const:c | logsq:log | logsq:loglog | table:v1,v2,...
  static ApproxFunction parse(const std::string& text) {
    auto rest = [&](std::size_t k) { return text.substr(k); };
    if (text.rfind("const:", 0) == 0) return constant(parse_rational(rest(6)));
    if (text.rfind("recip:", 0) == 0) return reciprocal(parse_rational(rest(6)));
    if (text == "inv_square") return inverse_square();
    if (text == "logsq:log") return reciprocal_log_square_xi(xi_log());
    if (text == "logsq:loglog") return reciprocal_log_square_xi(xi_loglog());
    if (text.rfind("logsq:const:", 0) == 0) return reciprocal_log_square_xi(xi_constant(parse_rational(rest(12))));
    if (text.rfind("table:", 0) == 0) {
      std::vector<BigRational> v;
      std::stringstream ss(rest(6));
      for (std::string item; std::getline(ss, item, ',');) v.push_back(parse_rational(item));
      if (v.empty()) throw ParameterError("empty table");
      bool mono = std::is_sorted(v.rbegin(), v.rend());
      return table(std::move(v), mono);
    }
    throw ParameterError("unknown approximation function '" + text + "'");
  }

  const std::string& name() const { return name_; }
  bool monotone() const { return monotone_; }
  bool is_rational() const { return static_cast<bool>(rational_); }

  BigRational rational_at(std::uint64_t n) const {
    check(n);
    if (!rational_) throw ParameterError(name_ + " has no exact rational values");
    return rational_(n);
  }

  RealEnclosure at(std::uint64_t n) const {
    check(n);
    if (rational_) return RealEnclosure(rational_(n));
    return enclosure_(n);
  }

  double approx(std::uint64_t n) const {
    check(n);
    if (approx_) return approx_(n);
    return rational_(n).get_d();
  }

  /// Throws when flagged monotone but increasing somewhere on [1, n_max].
  void validate_monotone(std::uint64_t n_max) const {
    if (!monotone_ || n_max < 2) return;
    RealEnclosure prev = at(1);
    for (std::uint64_t n = 2; n <= n_max; ++n) {
      RealEnclosure cur = at(n);
      if (cur.lo > prev.hi)
        throw ParameterError(name_ + " is flagged non-increasing but increases at n = " + std::to_string(n));
      prev = std::move(cur);
    }
  }

 private:
  static void check(std::uint64_t n) {
    if (n == 0) throw ParameterError("approximation functions are defined for n >= 1");
  }

  std::string name_;
  bool monotone_ = false;
  RationalRule rational_;
  std::function<RealEnclosure(std::uint64_t)> enclosure_;
  std::function<double(std::uint64_t)> approx_;
};

// ---------------------------------------------------------------------------
// Distances ||n alpha - gamma||

namespace detail {

using u128 = unsigned __int128;

inline u128 to_u128(const BigInt& x) {
  if (x < 0 || bit_length(x) > 128) throw ParameterError("value does not fit 128 bits");
  std::uint64_t words[2] = {0, 0};
  std::size_t count = 0;
  mpz_export(words, &count, -1, sizeof(std::uint64_t), 0, 0, x.get_mpz_t());
  return (static_cast<u128>(words[1]) << 64) | words[0];
}

inline BigInt u128_to_big(u128 x) {
  BigInt out;
  std::array<std::uint64_t, 2> w{static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(x >> 64)};
  mpz_import(out.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, w.data());
  return out;
}

inline BigRational frac(const BigRational& x) { return x - BigRational(floor_of(x)); }

/// n alpha - gamma = (n A - G) / M mod 1, exactly or up to n slope_err + const_err.
struct ModularForm {
  u128 A = 0;
  u128 G = 0;
  u128 M = 1;
  double Md = 1;
  bool exact = true;
  double slope_err = 0;
  double const_err = 0;

  u128 residue(std::uint64_t n) const {
    u128 r = (static_cast<u128>(n) * A + (M - G)) % M;
    return std::min(r, M - r);
  }
  double value(u128 r) const { return static_cast<double>(r) / Md; }
  double abs_err(std::uint64_t n) const { return static_cast<double>(n) * slope_err + const_err; }
};

inline constexpr unsigned kModularBits = 96;

inline ModularForm modular_form(const RealSpec& alpha, const RealSpec& gamma, std::uint64_t n_max) {
  ModularForm f;
  std::size_t nbits = bit_length(BigInt(static_cast<unsigned long>(std::max<std::uint64_t>(n_max, 1))));
  if (alpha.is_rational() && gamma.is_rational()) {
    BigRational a = frac(alpha.as_rational()), g = frac(gamma.as_rational());
    BigInt M;
    mpz_lcm(M.get_mpz_t(), a.get_den().get_mpz_t(), g.get_den().get_mpz_t());
    if (bit_length(M) + nbits <= 126) {
      f.M = to_u128(M);
      f.A = to_u128(BigInt(a.get_num() * (M / a.get_den())));
      f.G = to_u128(BigInt(g.get_num() * (M / g.get_den())));
      f.Md = static_cast<double>(f.M);
      return f;
    }
  }
  if (nbits + kModularBits > 126) throw BudgetExceeded("n range too large for the modular representation");
  BigRational scale = pow2(kModularBits);
  BigRational w = pow2(-static_cast<long>(kModularBits) - 4);
  auto approx = [&](const RealSpec& x) { return to_u128(floor_of(frac(enclose(x, w).lo) * scale)); };
  f.exact = false;
  f.M = static_cast<u128>(1) << kModularBits;
  f.Md = std::ldexp(1.0, kModularBits);
  f.A = approx(alpha);
  f.G = approx(gamma);
  f.slope_err = std::ldexp(1.0, -static_cast<int>(kModularBits) + 1);
  f.const_err = f.slope_err;
  return f;
}

inline std::vector<ModularForm> modular_forms(const std::vector<RealSpec>& alphas, const std::vector<RealSpec>& gammas,
                                              std::uint64_t n_max) {
  if (alphas.size() != gammas.size()) throw ParameterError("alphas and gammas differ in length");
  std::vector<ModularForm> out;
  for (std::size_t i = 0; i < alphas.size(); ++i) out.push_back(modular_form(alphas[i], gammas[i], n_max));
  return out;
}

inline LinearReal shift_form(std::uint64_t n, const RealSpec& alpha, const RealSpec& gamma) {
  LinearReal x(BigRational(static_cast<unsigned long>(n)), alpha);
  x.add(-1, gamma);
  return x;
}

/// Enclosure of ||x|| with lo > 0 and relative width <= 2^-50, or nullopt when ||x|| = 0.
inline std::optional<RealEnclosure> positive_dist(const LinearReal& x) {
  if (compare_dist(x, 0) == 0) return std::nullopt;
  const int budget = refinement_budget();
  for (int round = 0; round < budget; ++round) {
    RealEnclosure d = dist_nearest_integer(x.enclose(resolve_width(round)));
    if (d.lo > 0 && d.width() <= d.lo * pow2(-50)) return d;
  }
  throw PrecisionUnattainable("distance enclosure too wide at refinement budget",
                              dist_nearest_integer(x.enclose(resolve_width(budget))));
}

}  // namespace detail

struct PhiValue {
  RealEnclosure value;
  bool infinite = false;
};

/// psi(n) / prod ||n alpha_i - gamma_i||
inline PhiValue phi_big(std::uint64_t n, const std::vector<RealSpec>& alphas, const std::vector<RealSpec>& gammas,
                        const ApproxFunction& psi) {
  if (alphas.empty()) throw ParameterError("phi needs at least one alpha");
  if (alphas.size() != gammas.size()) throw ParameterError("alphas and gammas differ in length");
  RealEnclosure prod(BigRational(1));
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    auto d = detail::positive_dist(detail::shift_form(n, alphas[i], gammas[i]));
    if (!d) return {RealEnclosure(BigRational(0)), true};
    prod = prod * *d;
  }
  return {psi.at(n) * reciprocal(prod), false};
}

// ---------------------------------------------------------------------------
// Log-averaged sums

struct LogAvgResult {
  std::uint64_t N = 0;
  double value = 0;
  double error_bound = 0;
  bool infinite = false;
  std::uint64_t first_infinite = 0;
};

namespace detail {

inline constexpr double kUnitRoundoff = DBL_EPSILON / 2;
inline constexpr std::size_t kSumChunk = 1 << 16;

struct TermChunk {
  std::vector<double> prefix;  // local partial sums, if requested
  double sum = 0;
  double err = 0;
  std::uint64_t first_infinite = 0;
};

/// Terms for n in [b, e): each term is 1/(n prod d_i) with d_i = r_i / M_i
/// rounded. Per-term rounding: 3 per factor, one per product, one reciprocal.
inline TermChunk sum_chunk(const std::vector<ModularForm>& forms, std::uint64_t b, std::uint64_t e, bool keep_prefix) {
  TermChunk out;
  if (keep_prefix) out.prefix.reserve(e - b);
  const double u = kUnitRoundoff;
  const double m = 4.0 * static_cast<double>(forms.size()) + 1;
  const double gamma_m = 1.01 * m * u;
  for (std::uint64_t n = b; n < e; ++n) {
    double denom = static_cast<double>(n);
    double rel = 0;
    bool zero = false;
    for (const auto& f : forms) {
      u128 r = f.residue(n);
      if (f.exact && r == 0) {
        zero = true;
        break;
      }
      double d = f.value(r);
      if (!f.exact) {
        double delta = f.abs_err(n);
        if (d <= 2 * delta) {
          out.err = std::numeric_limits<double>::infinity();
          rel = 0;
        } else {
          rel += 2 * delta / d;
        }
      }
      denom *= d;
    }
    if (zero) {
      if (out.first_infinite == 0) out.first_infinite = n;
      out.sum = std::numeric_limits<double>::infinity();
    } else if (!std::isinf(out.sum)) {
      double t = 1.0 / denom;
      out.sum += t;
      out.err += (gamma_m + 1.01 * rel) * t + u * out.sum;
    }
    if (keep_prefix) out.prefix.push_back(out.sum);
  }
  return out;
}

inline std::vector<TermChunk> sum_chunks(const std::vector<ModularForm>& forms, std::uint64_t N, bool keep_prefix) {
  auto chunks = split_range(1, N + 1, kSumChunk);
  return parallel_chunks<TermChunk>(chunks, [&](std::size_t, ChunkRange r) {
    return sum_chunk(forms, r.begin, r.end, keep_prefix);
  });
}

}  // namespace detail

inline constexpr std::uint64_t kSumBudget = 10000000;

/// S(N) in double arithmetic with a carried bound on |S(N) - value|.
/// Chunks of 2^16 terms are merged in index order whatever the thread count.
inline LogAvgResult log_avg_sum(std::uint64_t N, const std::vector<RealSpec>& alphas,
                                const std::vector<RealSpec>& gammas) {
  if (N < 1) throw ParameterError("N must be positive");
  if (N > kSumBudget) throw BudgetExceeded("log-averaged sums limited to N <= 10^7");
  if (alphas.empty()) throw ParameterError("at least one alpha required");
  auto forms = detail::modular_forms(alphas, gammas, N);
  LogAvgResult out;
  out.N = N;
  for (const auto& c : detail::sum_chunks(forms, N, false)) {
    if (c.first_infinite && !out.infinite) {
      out.infinite = true;
      out.first_infinite = c.first_infinite;
    }
    out.value += c.sum;
    out.error_bound += c.err + detail::kUnitRoundoff * std::abs(out.value);
  }
  if (out.infinite) {
    out.value = std::numeric_limits<double>::infinity();
    out.error_bound = 0;
  }
  return out;
}

/// Exact S(N) = num / den (not reduced), from a product tree.
struct ExactSum {
  BigInt num;
  BigInt den;
  bool infinite = false;
  std::uint64_t first_infinite = 0;

  double to_double() const {
    if (infinite) return std::numeric_limits<double>::infinity();
    return BigRational(num, den).get_d();
  }
};

inline ExactSum log_avg_sum_exact(std::uint64_t N, const std::vector<RealSpec>& alphas,
                                  const std::vector<RealSpec>& gammas) {
  if (N < 1) throw ParameterError("N must be positive");
  if (N > 1000000) throw BudgetExceeded("exact sums limited to N <= 10^6");
  for (std::size_t i = 0; i < alphas.size(); ++i)
    if (!alphas[i].is_rational() || (i < gammas.size() && !gammas[i].is_rational()))
      throw ParameterError("exact sums need rational alphas and gammas");
  auto forms = detail::modular_forms(alphas, gammas, N);
  for (const auto& f : forms)
    if (!f.exact) throw BudgetExceeded("denominators too large for exact sums");
  // S = prod M_i * sum 1 / (n prod r_i)
  ExactSum out;
  std::vector<std::pair<BigInt, BigInt>> level;
  level.reserve(N);
  for (std::uint64_t n = 1; n <= N; ++n) {
    BigInt d = static_cast<unsigned long>(n);
    for (const auto& f : forms) {
      auto r = f.residue(n);
      if (r == 0) {
        out.infinite = true;
        out.first_infinite = n;
        return out;
      }
      d *= detail::u128_to_big(r);
    }
    level.emplace_back(BigInt(1), std::move(d));
  }
  while (level.size() > 1) {
    std::vector<std::pair<BigInt, BigInt>> next;
    next.reserve(level.size() / 2 + 1);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      auto& [p1, q1] = level[i];
      auto& [p2, q2] = level[i + 1];
      next.emplace_back(BigInt(p1 * q2 + p2 * q1), BigInt(q1 * q2));
    }
    if (level.size() % 2) next.push_back(std::move(level.back()));
    level.swap(next);
  }
  out.num = level[0].first;
  out.den = level[0].second;
  for (const auto& f : forms) out.num *= detail::u128_to_big(f.M);
  return out;
}

struct SpotCheck {
  LogAvgResult approx;
  ExactSum exact;
  double difference = 0;
  bool agrees = false;
};

/// Float-mode S(N) against the exact value: |exact - value| <= error_bound.
inline SpotCheck exact_spotcheck(std::uint64_t N, const std::vector<RealSpec>& alphas,
                                 const std::vector<RealSpec>& gammas) {
  SpotCheck s;
  s.approx = log_avg_sum(N, alphas, gammas);
  s.exact = log_avg_sum_exact(N, alphas, gammas);
  if (s.exact.infinite || s.approx.infinite) {
    s.agrees = s.exact.infinite == s.approx.infinite && s.exact.first_infinite == s.approx.first_infinite;
    return s;
  }
  BigRational v(s.approx.value), b(s.approx.error_bound);
  BigRational diff = BigRational(s.exact.num) - v * BigRational(s.exact.den);
  s.agrees = abs(diff) <= b * BigRational(s.exact.den);
  s.difference = s.exact.to_double() - s.approx.value;
  return s;
}

// ---------------------------------------------------------------------------
// figure1: S(N) against c (log N)^3

struct Figure1Result {
  std::uint64_t H = 0;
  std::size_t k = 0;  // number of factors; the fit exponent is k + 1
  std::vector<double> S;  // S[N-1]
  double c = 0;
  double error_bound = 0;  // on S(H)
  bool infinite = false;

  double fit(std::uint64_t N) const { return c * std::pow(paper_log(static_cast<double>(N)), static_cast<double>(k + 1)); }
};

inline Figure1Result figure1(std::uint64_t H, const std::vector<RealSpec>& alphas,
                             std::vector<RealSpec> gammas = {}) {
  if (H < 1) throw ParameterError("H must be positive");
  if (H > kSumBudget) throw BudgetExceeded("figure1 limited to H <= 10^7");
  if (gammas.empty()) gammas.assign(alphas.size(), RealSpec(BigRational(0)));
  auto forms = detail::modular_forms(alphas, gammas, H);
  Figure1Result out;
  out.H = H;
  out.k = alphas.size();
  out.S.reserve(H);
  double offset = 0;
  for (auto& c : detail::sum_chunks(forms, H, true)) {
    if (c.first_infinite) out.infinite = true;
    for (double p : c.prefix) out.S.push_back(offset + p);
    offset += c.sum;
    out.error_bound += c.err + detail::kUnitRoundoff * std::abs(offset);
  }
  double L = paper_log(static_cast<double>(H));
  out.c = out.S.back() / std::pow(L, static_cast<double>(out.k + 1));
  return out;
}

inline void write_figure1_csv(std::ostream& os, const Figure1Result& r, std::uint64_t every = 1) {
  every = std::max<std::uint64_t>(every, 1);
  os << "N,S,fit\n";
  os.precision(17);
  for (std::uint64_t N = 1; N <= r.H; ++N)
    if (N % every == 0 || N == 1 || N == r.H) os << N << ',' << r.S[N - 1] << ',' << r.fit(N) << '\n';
}

inline void write_figure1_gnuplot(std::ostream& os, const std::string& csv_name, const Figure1Result& r) {
  os << "set datafile separator ','\n"
     << "set key top left\n"
     << "set xlabel 'N'\n"
     << "set logscale x\n"
     << "set terminal pngcairo size 900,600\n"
     << "set output '" << csv_name << ".png'\n"
     << "plot '" << csv_name << "' using 1:2 every ::1 with lines title 'S(N)', \\\n"
     << "     '' using 1:3 every ::1 with lines dt 2 title sprintf('%.5f (log N)^" << r.k + 1 << "', " << r.c
     << ")\n";
}

// ---------------------------------------------------------------------------
// Solution counters over a grid of alpha_k

struct GallagherSpec {
  std::vector<RealSpec> alphas;   // alpha_1 .. alpha_{k-1}, fixed
  std::vector<RealSpec> gammas;   // gamma_1 .. gamma_k
  ApproxFunction psi = ApproxFunction::constant(0);
  std::vector<BigRational> grid;  // values of alpha_k
  std::uint64_t N = 0;
  std::vector<std::uint64_t> checkpoints;  // extra N at which counts are recorded
  std::vector<std::uint64_t> thresholds = {1, 5, 25};
};

struct GallagherResult {
  std::vector<std::uint64_t> counts;                     // per grid point, n <= N
  std::vector<std::vector<std::uint64_t>> at_checkpoint;  // [checkpoint][grid point]
  std::vector<std::pair<std::uint64_t, std::size_t>> undecided;  // (n, grid index)
  std::vector<double> fraction_at_least;                 // per threshold
};

/// a_j = (s j + s/2 - 1) / 2^bits with s = 2^bits / count, j < count.
inline std::vector<BigRational> dyadic_grid(unsigned bits, std::uint64_t count) {
  if (bits < 2 || bits > 62) throw ParameterError("grid bits out of range");
  std::uint64_t den = std::uint64_t{1} << bits;
  if (count == 0 || den % count != 0 || den / count < 2) throw ParameterError("grid count must divide 2^bits / 2");
  std::uint64_t s = den / count;
  std::vector<BigRational> g;
  for (std::uint64_t j = 0; j < count; ++j)
    g.push_back(make_rational(static_cast<unsigned long>(s * j + s / 2 - 1), static_cast<unsigned long>(den)));
  return g;
}

namespace detail {

/// Double bracket of a rational or enclosure endpoint.
inline double down(const BigRational& x) { return x.get_d() * (1 - 4 * kUnitRoundoff) - DBL_MIN; }
inline double up(const BigRational& x) { return x.get_d() * (1 + 4 * kUnitRoundoff) + DBL_MIN; }

}  // namespace detail

inline constexpr std::uint64_t kGallagherBudget = 1000000000;

/// Counts n <= N with prod_{i <= k} ||n alpha_i - gamma_i|| < psi(n) for each
/// alpha_k in the grid.
inline GallagherResult gallagher_counter(const GallagherSpec& spec) {
  const std::size_t k = spec.alphas.size() + 1;
  if (spec.gammas.size() != k) throw ParameterError("need one gamma per alpha, including alpha_k");
  if (spec.grid.empty()) throw ParameterError("empty alpha grid");
  if (spec.N < 1) throw ParameterError("N must be positive");
  if (static_cast<double>(spec.N) * static_cast<double>(spec.grid.size()) > static_cast<double>(kGallagherBudget))
    throw BudgetExceeded("grid size times N exceeds 10^9");
  for (auto c : spec.checkpoints)
    if (c < 1 || c > spec.N) throw ParameterError("checkpoints must lie in [1, N]");

  std::vector<RealSpec> fixed_g(spec.gammas.begin(), spec.gammas.end() - 1);
  auto fixed = detail::modular_forms(spec.alphas, fixed_g, spec.N);
  std::vector<detail::ModularForm> last;
  for (const auto& a : spec.grid) last.push_back(detail::modular_form(RealSpec(a), spec.gammas.back(), spec.N));
  bool all_exact = spec.psi.is_rational() && std::all_of(fixed.begin(), fixed.end(), [](auto& f) { return f.exact; }) &&
                   std::all_of(last.begin(), last.end(), [](auto& f) { return f.exact; });

  std::vector<std::uint64_t> cps = spec.checkpoints;
  std::sort(cps.begin(), cps.end());
  GallagherResult out;
  out.counts.assign(spec.grid.size(), 0);
  out.at_checkpoint.assign(cps.size(), std::vector<std::uint64_t>(spec.grid.size(), 0));

  struct ChunkOut {
    std::vector<std::uint64_t> counts;
    std::vector<std::pair<std::uint64_t, std::size_t>> undecided;
  };
  const std::size_t block = 1 << 14;
  auto grid_chunks = split_range(0, spec.grid.size(), 16);
  std::size_t next_cp = 0;
  for (std::uint64_t b = 1, e; b <= spec.N; b = e) {
    e = std::min<std::uint64_t>(spec.N + 1, b + block);
    if (next_cp < cps.size() && cps[next_cp] < e) e = cps[next_cp] + 1;
    // per n: double bracket of psi, exact value when rational, fixed-factor bracket
    std::vector<double> psi_lo(e - b), psi_hi(e - b), fix_lo(e - b), fix_hi(e - b);
    std::vector<char> psi_zero(e - b);
    std::vector<BigRational> psi_q(all_exact ? e - b : 0);
    std::vector<BigInt> fix_r(all_exact ? e - b : 0);
    BigInt mprod = 1;
    for (const auto& f : fixed) mprod *= detail::u128_to_big(f.M);
    for (std::uint64_t n = b; n < e; ++n) {
      std::size_t i = n - b;
      RealEnclosure p = spec.psi.at(n);
      psi_lo[i] = p.lo == 0 ? 0 : detail::down(p.lo);
      psi_hi[i] = detail::up(p.hi);
      psi_zero[i] = p.hi == 0;
      if (all_exact) psi_q[i] = p.lo;
      double lo = 1, hi = 1;
      BigInt rprod = 1;
      for (const auto& f : fixed) {
        auto r = f.residue(n);
        double d = f.value(r), delta = f.exact ? 0 : f.abs_err(n);
        lo *= std::max(0.0, (d - delta) * (1 - 4 * detail::kUnitRoundoff));
        hi *= (d + delta) * (1 + 4 * detail::kUnitRoundoff);
        if (all_exact) rprod *= detail::u128_to_big(r);
      }
      fix_lo[i] = lo;
      fix_hi[i] = hi;
      if (all_exact) fix_r[i] = rprod;
    }
    auto results = parallel_chunks<ChunkOut>(grid_chunks, [&](std::size_t, ChunkRange r) {
      ChunkOut co;
      co.counts.assign(r.end - r.begin, 0);
      for (std::size_t j = r.begin; j < r.end; ++j) {
        const auto& f = last[j];
        BigInt mj = all_exact ? BigInt(mprod * detail::u128_to_big(f.M)) : BigInt(0);
        for (std::uint64_t n = b; n < e; ++n) {
          std::size_t i = n - b;
          auto res = f.residue(n);
          double d = f.value(res), delta = f.exact ? 0 : f.abs_err(n);
          double lo = fix_lo[i] * std::max(0.0, (d - delta) * (1 - 4 * detail::kUnitRoundoff));
          double hi = fix_hi[i] * (d + delta) * (1 + 4 * detail::kUnitRoundoff);
          int verdict;  // 1 counts, 0 does not, -1 unresolved
          if (psi_zero[i]) {
            verdict = 0;
          } else if (hi < psi_lo[i]) {
            verdict = 1;
          } else if (lo > psi_hi[i]) {
            verdict = 0;
          } else if (all_exact) {
            // prod r / prod M < P / Q
            BigInt lhs = fix_r[i] * detail::u128_to_big(res) * psi_q[i].get_den();
            verdict = lhs < psi_q[i].get_num() * mj ? 1 : 0;
          } else {
            verdict = -1;
            try {
              RealEnclosure prod(BigRational(1));
              bool zero = false;
              for (std::size_t t = 0; t + 1 < k && !zero; ++t) {
                auto dd = detail::positive_dist(detail::shift_form(n, spec.alphas[t], spec.gammas[t]));
                if (!dd) zero = true;
                else prod = prod * *dd;
              }
              if (!zero) {
                auto dd = detail::positive_dist(detail::shift_form(n, RealSpec(spec.grid[j]), spec.gammas.back()));
                if (!dd) zero = true;
                else prod = prod * *dd;
              }
              RealEnclosure p = spec.psi.at(n);
              if (zero) verdict = p.lo > 0 ? 1 : (p.hi == 0 ? 0 : -1);
              else if (prod.hi < p.lo) verdict = 1;
              else if (prod.lo >= p.hi) verdict = 0;
            } catch (const BudgetExceeded&) {
            }
          }
          if (verdict == 1) ++co.counts[j - r.begin];
          if (verdict == -1) co.undecided.emplace_back(n, j);
        }
      }
      return co;
    });
    for (std::size_t c = 0; c < results.size(); ++c) {
      for (std::size_t j = grid_chunks[c].begin; j < grid_chunks[c].end; ++j)
        out.counts[j] += results[c].counts[j - grid_chunks[c].begin];
      out.undecided.insert(out.undecided.end(), results[c].undecided.begin(), results[c].undecided.end());
    }
    while (next_cp < cps.size() && cps[next_cp] == e - 1) out.at_checkpoint[next_cp++] = out.counts;
  }
  for (auto t : spec.thresholds) {
    std::size_t hit = std::count_if(out.counts.begin(), out.counts.end(), [t](auto c) { return c >= t; });
    out.fraction_at_least.push_back(static_cast<double>(hit) / static_cast<double>(out.counts.size()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dyadic truncation ratio

struct DyadicReport {
  long double left = 0;   // sum_{C^J0 <= n <= N} h(n) (log n)^kappa
  long double right = 0;  // sum_{j=J0}^{J} j^kappa C^j h(C^j)
  double ratio = 0;
  std::uint64_t J = 0;
  double band_lo = 0;
  double band_hi = 0;
  bool in_band = false;
};

/// Band [lo, hi] with lo R <= L <= hi R for every non-negative non-increasing
/// h, integer C >= 2 and J0 >= 1:
///   hi = C (2 max(ln C, 1))^kappa,
///   lo = min(C^-J0 min(ln C, 1)^kappa, (ln C / 2)^kappa / 2).
inline std::pair<double, double> dyadic_band(std::uint64_t C, double kappa, std::uint64_t J0) {
  double lc = std::log(static_cast<double>(C));
  double hi = static_cast<double>(C) * std::pow(2 * std::max(lc, 1.0), kappa);
  double lo = std::min(std::pow(static_cast<double>(C), -static_cast<double>(J0)) * std::pow(std::min(lc, 1.0), kappa),
                       std::pow(lc / 2, kappa) / 2);
  return {lo, hi};
}

inline DyadicReport dyadic_ratio_check(const std::function<double(std::uint64_t)>& h, std::uint64_t C, double kappa,
                                       std::uint64_t J0, std::uint64_t N) {
  if (C < 2) throw ParameterError("C must be an integer >= 2");
  if (J0 < 1) throw ParameterError("J0 must be >= 1");
  if (!(kappa >= 0)) throw ParameterError("kappa must be non-negative");
  if (N > 100000000) throw BudgetExceeded("dyadic check limited to N <= 10^8");
  std::uint64_t start = 1;
  for (std::uint64_t j = 0; j < J0; ++j) {
    if (start > N / C) throw ParameterError("C^J0 exceeds N");
    start *= C;
  }
  DyadicReport rep;
  double prev = std::numeric_limits<double>::infinity();
  std::uint64_t next_power = start, j = J0;
  for (std::uint64_t n = start; n <= N; ++n) {
    double v = h(n);
    if (v < 0 || v > prev)
      throw ParameterError("h must be non-negative and non-increasing (violated at n = " + std::to_string(n) + ")");
    prev = v;
    rep.left += static_cast<long double>(v) * std::pow(static_cast<long double>(paper_log(static_cast<double>(n))),
                                                       static_cast<long double>(kappa));
    if (n == next_power) {
      rep.right += std::pow(static_cast<long double>(j), static_cast<long double>(kappa)) *
                   static_cast<long double>(n) * static_cast<long double>(v);
      rep.J = j;
      ++j;
      next_power = n > N / C ? 0 : n * C;
    }
  }
  if (rep.right <= 0) throw ParameterError("h vanishes on the dyadic points");
  rep.ratio = static_cast<double>(rep.left / rep.right);
  std::tie(rep.band_lo, rep.band_hi) = dyadic_band(C, kappa, J0);
  rep.in_band = rep.band_lo <= rep.ratio && rep.ratio <= rep.band_hi;
  return rep;
}

inline DyadicReport dyadic_ratio_check(const std::vector<double>& table, std::uint64_t C, double kappa,
                                       std::uint64_t J0, std::uint64_t N) {
  if (table.size() < N) throw ParameterError("table shorter than N");
  return dyadic_ratio_check([&](std::uint64_t n) { return table[n - 1]; }, C, kappa, J0, N);
}

}  // namespace diophlab
