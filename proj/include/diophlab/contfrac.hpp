#pragma once

#include "numbers.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace diophlab {

// ---------------------------------------------------------------------------
// ContinuedFraction: a0; a1, a2, ... together with the real it expands.
// A finite expansion (rational value) follows the a_t > 1 convention.

class ContinuedFraction {
 public:
  /// Expansion of a real given by its partial quotients. A stream without a
  /// rule is a known prefix of an irrational; use of_rational for finite CFs.
  explicit ContinuedFraction(PartialQuotientStream s)
      : stream_(s), value_(std::move(s)), finite_(false) {}

  ContinuedFraction(PartialQuotientStream s, RealSpec value, bool finite)
      : stream_(std::move(s)), value_(std::move(value)), finite_(finite) {}

  const BigInt& a0() const { return stream_.a0(); }
  BigInt a(std::size_t j) const { return stream_.at(j); }
  bool has(std::size_t j) const { return stream_.has(j); }
  bool finite() const { return finite_; }
  /// Number of partial quotients after a0, if bounded.
  std::optional<std::size_t> length() const { return stream_.available(); }
  const PartialQuotientStream& stream() const { return stream_; }
  /// The real number expanded by this continued fraction.
  const RealSpec& value() const { return value_; }

  std::vector<BigInt> partials(std::size_t upto) const {
    std::vector<BigInt> out;
    for (std::size_t j = 1; j <= upto; ++j) out.push_back(a(j));
    return out;
  }

 private:
  PartialQuotientStream stream_;
  RealSpec value_;
  bool finite_;
};

/// Euclidean expansion of r; the last partial quotient exceeds 1 unless r is an integer.
inline ContinuedFraction cf_of_rational(const BigRational& r) {
  BigInt num = r.get_num(), den = r.get_den();
  BigInt a0 = floor_of(r);
  std::vector<BigInt> parts;
  num -= a0 * den;
  while (num != 0) {
    std::swap(num, den);
    BigInt q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    parts.push_back(q);
    num -= q * den;
  }
  if (parts.size() >= 2 && parts.back() == 1) {
    parts.pop_back();
    parts.back() += 1;
  }
  return ContinuedFraction(PartialQuotientStream(a0, std::move(parts)), RealSpec(r), true);
}

namespace detail {

/// Exact expansion of (P + sqrt(d)) / Q with Q | d - P^2.
class SurdExpansion {
 public:
  SurdExpansion(BigInt P, BigInt Q, BigInt d) : P_(std::move(P)), Q_(std::move(Q)), d_(std::move(d)), s_(isqrt(d_)) {
    step();  // a_0
  }

  BigInt a0() const { return terms_.front(); }

  BigInt at(std::size_t j) {
    std::lock_guard<std::mutex> lock(mu_);
    while (terms_.size() <= j) step();
    return terms_[j];
  }

 private:
  void step() {
    BigInt a;
    if (Q_ > 0) {
      mpz_fdiv_q(a.get_mpz_t(), BigInt(P_ + s_).get_mpz_t(), Q_.get_mpz_t());
    } else {
      BigInt aq = -Q_;
      mpz_fdiv_q(a.get_mpz_t(), BigInt(P_ + s_).get_mpz_t(), aq.get_mpz_t());
      a = -(a + 1);
    }
    terms_.push_back(a);
    P_ = a * Q_ - P_;
    Q_ = (d_ - P_ * P_) / Q_;
  }

  BigInt P_, Q_, d_, s_;
  std::mutex mu_;
  std::vector<BigInt> terms_;
};

}  // namespace detail

/// Continued fraction of a quadratic surd, generated exactly on demand.
inline ContinuedFraction cf_of_surd(const QuadraticSurd& s) {
  // a + b sqrt(D) = (A + B sqrt(D)) / C with integers, B > 0 after a sign flip
  BigInt C;
  mpz_lcm(C.get_mpz_t(), s.a.get_den_mpz_t(), s.b.get_den_mpz_t());
  BigInt A = BigInt(s.a * C), B = BigInt(s.b * C);
  if (B < 0) {
    A = -A;
    B = -B;
    C = -C;
  }
  BigInt absC = abs(C);
  auto gen = std::make_shared<detail::SurdExpansion>(A * absC, C * absC, B * B * s.D * C * C);
  PartialQuotientRule rule = [gen](std::size_t j) { return gen->at(j); };
  return ContinuedFraction(PartialQuotientStream(gen->a0(), {}, rule, "surd"), RealSpec(s), false);
}

/// Continued fraction of any real specification.
inline ContinuedFraction cf_of(const RealSpec& x) {
  if (x.is_rational()) return cf_of_rational(x.as_rational());
  if (x.is_surd()) return cf_of_surd(x.as_surd());
  if (x.is_stream()) return ContinuedFraction(x.as_stream(), x, false);
  throw ParameterError("no continued fraction available for computed real '" + x.as_computed().label + "'");
}

// ---------------------------------------------------------------------------
// Named partial-quotient rules.

namespace rules {

inline PartialQuotientStream constant(const BigInt& a0, const BigInt& k, const std::string& name) {
  if (k < 1) throw ParameterError("constant partial quotient must be >= 1");
  return PartialQuotientStream(a0, {}, [k](std::size_t) { return k; }, name);
}

/// [1; 1, 1, ...]
inline PartialQuotientStream golden() { return constant(1, 1, "golden"); }
/// [0; 1, 1, ...] = golden ratio - 1
inline PartialQuotientStream golden_conjugate() { return constant(0, 1, "golden_conjugate"); }
/// [1; 2, 2, ...]
inline PartialQuotientStream sqrt2() { return constant(1, 2, "sqrt2"); }

/// e = [2; 1, 2, 1, 1, 4, 1, 1, 6, ...]
inline PartialQuotientStream euler_e() {
  return PartialQuotientStream(
      2, {},
      [](std::size_t j) -> BigInt {
        if (j % 3 == 2) return BigInt(2 * ((j + 1) / 3));
        return 1;
      },
      "e");
}

/// a_j = q_{j-1}: ratios log q_{j+1} / log q_j approach 2.
inline PartialQuotientStream rapid() {
  struct State {
    std::mutex mu;
    std::vector<BigInt> q{1};  // q_0
  };
  auto st = std::make_shared<State>();
  return PartialQuotientStream(
      0, {},
      [st](std::size_t j) -> BigInt {
        std::lock_guard<std::mutex> lock(st->mu);
        auto& q = st->q;
        while (q.size() < j) {
          std::size_t i = q.size();  // next index i, a_i = q_{i-1}
          BigInt ai = q[i - 1];
          BigInt prev = i >= 2 ? q[i - 2] : BigInt(0);
          q.push_back(ai * q[i - 1] + prev);
        }
        return q[j - 1];
      },
      "rapid");
}

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Pseudo-random a_j in [1, bound], a pure function of (seed, j).
inline PartialQuotientStream random_bounded(std::uint64_t seed, unsigned bound, const BigInt& a0 = 0) {
  if (bound < 1) throw ParameterError("random partial quotient bound must be >= 1");
  return PartialQuotientStream(
      a0, {},
      [seed, bound](std::size_t j) {
        return BigInt(static_cast<unsigned long>(1 + mix64(seed * 0x100000001b3ULL + j) % bound));
      },
      "random:" + std::to_string(seed) + ":" + std::to_string(bound));
}

/// Known prefix followed by the last `period` terms repeated forever.
inline PartialQuotientStream periodic(const BigInt& a0, std::vector<BigInt> prefix, std::size_t period) {
  if (period == 0 || period > prefix.size()) throw ParameterError("invalid period for cf prefix");
  std::vector<BigInt> cycle(prefix.end() - static_cast<std::ptrdiff_t>(period), prefix.end());
  std::size_t start = prefix.size() - period;  // index (0-based) where the cycle begins
  return PartialQuotientStream(
      a0, prefix, [cycle, start](std::size_t j) { return cycle[(j - 1 - start) % cycle.size()]; },
      "periodic:" + std::to_string(period));
}

/// Resolves names: golden, golden_conjugate, sqrt2, e, rapid, const:k,
/// const:a0:k, random:seed:bound.
inline PartialQuotientStream named(const std::string& name) {
  if (name == "golden") return golden();
  if (name == "golden_conjugate") return golden_conjugate();
  if (name == "sqrt2") return sqrt2();
  if (name == "e") return euler_e();
  if (name == "rapid") return rapid();
  auto fields = [&](std::size_t skip) {
    std::vector<std::string> out;
    std::string rest = name.substr(skip);
    std::size_t pos;
    while ((pos = rest.find(':')) != std::string::npos) {
      out.push_back(rest.substr(0, pos));
      rest = rest.substr(pos + 1);
    }
    out.push_back(rest);
    return out;
  };
  try {
    if (name.rfind("const:", 0) == 0) {
      auto f = fields(6);
      if (f.size() == 1) return constant(0, BigInt(f[0]), name);
      if (f.size() == 2) return constant(BigInt(f[0]), BigInt(f[1]), name);
    }
    if (name.rfind("random:", 0) == 0) {
      auto f = fields(7);
      if (f.size() == 2) return random_bounded(std::stoull(f[0]), static_cast<unsigned>(std::stoul(f[1])));
    }
  } catch (const std::invalid_argument&) {
  } catch (const std::out_of_range&) {
  }
  throw ParameterError("unknown cf_rule '" + name + "'");
}

}  // namespace rules

// ---------------------------------------------------------------------------
// Convergents.

struct ConvergentTable {
  std::vector<BigInt> p;  // p_0 .. p_J
  std::vector<BigInt> q;

  std::size_t depth() const { return q.empty() ? 0 : q.size() - 1; }
  BigRational convergent(std::size_t j) const { return make_rational(p.at(j), q.at(j)); }
};

/// Rows 0..J of (p_j, q_j).
inline ConvergentTable convergents(const ContinuedFraction& cf, std::size_t J) {
  if (!cf.has(J))
    throw DepthError("depth " + std::to_string(J) + " exceeds the " + std::to_string(*cf.length()) +
                     " available partial quotients");
  ConvergentTable t;
  t.p.reserve(J + 1);
  t.q.reserve(J + 1);
  BigInt pm = 1, qm = 0;
  BigInt p = cf.a0(), q = 1;
  t.p.push_back(p);
  t.q.push_back(q);
  for (std::size_t j = 1; j <= J; ++j) {
    BigInt a = cf.a(j);
    BigInt pn = a * p + pm, qn = a * q + qm;
    pm = std::move(p);
    qm = std::move(q);
    p = std::move(pn);
    q = std::move(qn);
    t.p.push_back(p);
    t.q.push_back(q);
  }
  return t;
}

/// Convergent table extended until q_J > bound (or the expansion ends).
inline ConvergentTable convergents_beyond(const ContinuedFraction& cf, const BigInt& bound) {
  ConvergentTable t = convergents(cf, 0);
  while (t.q.back() <= bound && cf.has(t.depth() + 1)) {
    std::size_t j = t.depth() + 1;
    BigInt a = cf.a(j);
    BigInt pm = j >= 2 ? t.p[j - 2] : BigInt(1);
    BigInt qm = j >= 2 ? t.q[j - 2] : BigInt(0);
    t.p.push_back(a * t.p.back() + pm);
    t.q.push_back(a * t.q.back() + qm);
  }
  return t;
}

/// Bracket of the value given the expansion to depth j: between p_j/q_j and p_{j+1}/q_{j+1}.
inline RealEnclosure bracket(const ContinuedFraction& cf, std::size_t j) {
  if (cf.finite() && !cf.has(j + 1)) {
    auto t = convergents(cf, *cf.length());
    return RealEnclosure(t.convergent(t.depth()));
  }
  auto t = convergents(cf, j + 1);
  BigRational x = t.convergent(j), y = t.convergent(j + 1);
  return {std::min(x, y), std::max(x, y)};
}

// ---------------------------------------------------------------------------
// D_j = q_j alpha - p_j

struct DValue {
  std::size_t j = 0;
  RealEnclosure enclosure;  // of D_j
  int sign = 0;             // (-1)^j for irrational alpha
  RealEnclosure scaled;     // of |D_j| q_{j+1}
  bool bound_certified = false;
};

/// D_j as an exact linear form in alpha.
inline LinearReal d_form(const ConvergentTable& t, const RealSpec& alpha, std::size_t j) {
  LinearReal x(BigRational(t.q.at(j)), alpha);
  x.add_constant(-BigRational(t.p.at(j)));
  return x;
}

/// Enclosure of D_j with 1/2 <= |D_j| q_{j+1} <= 1 certified by refinement.
inline DValue d_value(const ContinuedFraction& cf, const RealSpec& alpha, std::size_t j, const BigRational& width) {
  if (cf.finite() && !cf.has(j + 1))
    throw DepthError("D_j bound needs q_{j+1}; expansion has only " + std::to_string(*cf.length()) + " terms");
  ConvergentTable t = convergents(cf, j + 1);
  LinearReal form = d_form(t, alpha, j);
  DValue out;
  out.j = j;
  out.sign = sign(form);
  BigRational qn(t.q[j + 1]);
  BigRational w = width;
  const int budget = refinement_budget();
  for (int round = 0; round <= budget; ++round) {
    RealEnclosure e = form.enclose(w);
    RealEnclosure s = qn * abs(e);
    out.enclosure = e;
    out.scaled = s;
    if (s.lo >= BigRational(1, 2) && s.hi <= 1) {
      out.bound_certified = true;
      return out;
    }
    w = std::min(w, resolve_width(round));
  }
  throw UndecidableAtBudget("|D_" + std::to_string(j) + "| q_{j+1} bound not certified at refinement budget");
}

inline DValue d_value(const ContinuedFraction& cf, std::size_t j, const BigRational& width) {
  return d_value(cf, cf.value(), j, width);
}

// ---------------------------------------------------------------------------
// Finite-depth lower estimate of omega(alpha) = limsup log q_{k+1} / log q_k.

/// ln(n) for n >= 1 from the leading 53 bits and the binary exponent; absolute
/// error below 1e-12 for any n representable in memory.
inline double ln_big(const BigInt& n) {
  if (n <= 0) throw ParameterError("ln of non-positive integer");
  long e = 0;
  double m = mpz_get_d_2exp(&e, n.get_mpz_t());
  return std::log(m) + static_cast<double>(e) * std::log(2.0);
}

inline double paper_log_big(const BigInt& n) { return std::max(ln_big(n), 1.0); }

struct OmegaEstimate {
  std::size_t depth = 0;
  BigRational full_max;  // max over 1 <= k < J
  BigRational tail_max;  // max over ceil(J/2) <= k < J
  std::size_t argmax = 0;
};

/// Lower estimate at depth J of omega(alpha), with log x = max(ln x, 1).
inline OmegaEstimate omega_estimate(const ContinuedFraction& cf, std::size_t J) {
  if (J < 2) throw ParameterError("omega_estimate needs J >= 2");
  ConvergentTable t = convergents(cf, J);
  OmegaEstimate out;
  out.depth = J;
  bool first = true, first_tail = true;
  std::size_t tail_start = (J + 1) / 2;
  for (std::size_t k = 1; k < J; ++k) {
    BigRational r(paper_log_big(t.q[k + 1]) / paper_log_big(t.q[k]));
    if (first || r > out.full_max) {
      out.full_max = r;
      out.argmax = k;
      first = false;
    }
    if (k >= tail_start && (first_tail || r > out.tail_max)) {
      out.tail_max = r;
      first_tail = false;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

/// Columns j, p_j, q_j, D_j_lo, D_j_hi; D_j endpoints rounded outward to `digits` decimals.
inline void write_convergent_csv(std::ostream& os, const ContinuedFraction& cf, const ConvergentTable& t,
                                 unsigned digits = 30) {
  os << "j,p_j,q_j,D_j_lo,D_j_hi\n";
  BigRational width = pow2(-static_cast<long>(4 * digits + 8));
  for (std::size_t j = 0; j <= t.depth(); ++j) {
    os << j << ',' << t.p[j].get_str() << ',' << t.q[j].get_str() << ',';
    try {
      RealEnclosure e = d_form(t, cf.value(), j).enclose(width);
      os << to_decimal(e.lo, digits, Rounding::Down) << ',' << to_decimal(e.hi, digits, Rounding::Up);
    } catch (const PrecisionUnattainable& err) {
      const RealEnclosure& b = err.best();
      // best available bracket for alpha, propagated through q_j alpha - p_j
      RealEnclosure e = BigRational(t.q[j]) * b - BigRational(t.p[j]);
      os << to_decimal(e.lo, digits, Rounding::Down) << ',' << to_decimal(e.hi, digits, Rounding::Up);
    }
    os << '\n';
  }
}

}  // namespace diophlab
