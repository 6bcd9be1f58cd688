#pragma once

// Exact arithmetic substrate: big rationals, two-sided rational enclosures,
// symbolic real specifications, and the certified-comparison protocol that the
// rest of the library relies on. No machine floats are used for decisions here.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace diophlab {

using BigInt = mpz_class;
using BigRational = mpq_class;

// ---------------------------------------------------------------------------
// Errors. The CLI maps ParameterError-derived errors to exit status 2 and
// budget-derived errors to exit status 3.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DepthError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

class ConstraintViolation : public ParameterError {
 public:
  ConstraintViolation(std::string rule, const std::string& what)
      : ParameterError(what), rule_(std::move(rule)) {}
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class UndecidableAtBudget : public BudgetExceeded {
 public:
  using BudgetExceeded::BudgetExceeded;
};

// ---------------------------------------------------------------------------
// Small rational helpers.

inline BigRational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw ParameterError("zero denominator");
  BigRational r(num, den);
  r.canonicalize();
  return r;
}

inline BigInt floor_of(const BigRational& x) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

inline BigInt ceil_of(const BigRational& x) {
  BigInt q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

/// 2^e as an exact rational (e may be negative).
inline BigRational pow2(long e) {
  BigInt one = 1;
  BigInt p;
  mpz_mul_2exp(p.get_mpz_t(), one.get_mpz_t(), static_cast<mp_bitcnt_t>(e < 0 ? -e : e));
  return e < 0 ? make_rational(1, p) : BigRational(p);
}

inline BigInt isqrt(const BigInt& n) {
  if (n < 0) throw ParameterError("isqrt of negative");
  BigInt r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

inline bool is_perfect_square(const BigInt& n) {
  return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

inline std::size_t bit_length(const BigInt& n) {
  return n == 0 ? 0 : mpz_sizeinbase(n.get_mpz_t(), 2);
}

/// Parses "p/q", "p" or a plain decimal such as "0.957363115715396".
inline BigRational parse_rational(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw ParameterError("empty rational literal");
  try {
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      bool neg = s[0] == '-';
      std::string body = neg || s[0] == '+' ? s.substr(1) : s;
      dot = body.find('.');
      std::string digits = body.substr(0, dot) + body.substr(dot + 1);
      std::size_t scale = body.size() - dot - 1;
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw ParameterError("malformed decimal '" + text + "'");
      BigInt num(digits, 10);
      BigInt den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, scale);
      return make_rational(neg ? BigInt(-num) : num, den);
    }
    auto slash = s.find('/');
    if (slash == std::string::npos) return BigRational(BigInt(s, 10));
    return make_rational(BigInt(s.substr(0, slash), 10), BigInt(s.substr(slash + 1), 10));
  } catch (const std::invalid_argument&) {
    throw ParameterError("malformed rational '" + text + "'");
  }
}

inline std::string to_string(const BigRational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

enum class Rounding { Down, Up, Nearest };

/// Decimal rendering with `digits` fractional digits, rounded in the given direction.
inline std::string to_decimal(const BigRational& r, unsigned digits, Rounding mode = Rounding::Nearest) {
  BigInt scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  BigRational scaled = r * scale;
  BigInt n;
  switch (mode) {
    case Rounding::Down: n = floor_of(scaled); break;
    case Rounding::Up: n = ceil_of(scaled); break;
    case Rounding::Nearest: n = floor_of(scaled + BigRational(1, 2)); break;
  }
  bool neg = n < 0;
  if (neg) n = -n;
  std::string s = n.get_str();
  if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
  if (digits > 0) s.insert(s.size() - digits, ".");
  return neg ? "-" + s : s;
}

// ---------------------------------------------------------------------------
// RealEnclosure

struct RealEnclosure {
  BigRational lo;
  BigRational hi;

  RealEnclosure() = default;
  explicit RealEnclosure(const BigRational& x) : lo(x), hi(x) {}
  RealEnclosure(BigRational l, BigRational h) : lo(std::move(l)), hi(std::move(h)) {
    if (hi < lo) throw ParameterError("enclosure with lo > hi");
  }

  BigRational width() const { return hi - lo; }
  bool degenerate() const { return lo == hi; }
  bool contains(const BigRational& x) const { return lo <= x && x <= hi; }
  bool intersects(const RealEnclosure& o) const { return !(hi < o.lo || o.hi < lo); }
  bool within(const RealEnclosure& o) const { return o.lo <= lo && hi <= o.hi; }
  BigRational mid() const { return (lo + hi) / 2; }
};

inline RealEnclosure operator+(const RealEnclosure& a, const RealEnclosure& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}
inline RealEnclosure operator-(const RealEnclosure& a, const RealEnclosure& b) {
  return {a.lo - b.hi, a.hi - b.lo};
}
inline RealEnclosure operator-(const RealEnclosure& a) { return {-a.hi, -a.lo}; }
inline RealEnclosure operator+(const RealEnclosure& a, const BigRational& c) {
  return {a.lo + c, a.hi + c};
}
inline RealEnclosure operator-(const RealEnclosure& a, const BigRational& c) {
  return {a.lo - c, a.hi - c};
}
inline RealEnclosure operator+(const BigRational& c, const RealEnclosure& a) { return a + c; }
inline RealEnclosure operator*(const BigRational& c, const RealEnclosure& a) {
  if (c >= 0) return {c * a.lo, c * a.hi};
  return {c * a.hi, c * a.lo};
}
inline RealEnclosure operator*(const RealEnclosure& a, const RealEnclosure& b) {
  BigRational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}
inline RealEnclosure abs(const RealEnclosure& a) {
  if (a.lo >= 0) return a;
  if (a.hi <= 0) return -a;
  return {BigRational(0), std::max(BigRational(-a.lo), a.hi)};
}
/// Reciprocal; the enclosure must exclude zero.
inline RealEnclosure reciprocal(const RealEnclosure& a) {
  if (a.contains(0)) throw UndecidableAtBudget("reciprocal of an enclosure containing 0");
  return {1 / a.hi, 1 / a.lo};
}
inline RealEnclosure hull(const RealEnclosure& a, const RealEnclosure& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

/// Enclosure of ||x|| (distance to the nearest integer) for every x in e.
inline RealEnclosure dist_nearest_integer(const RealEnclosure& e) {
  auto dist = [](const BigRational& x) {
    BigRational f = x - BigRational(floor_of(x));
    return std::min(f, BigRational(1 - f));
  };
  if (e.width() >= 1) return {BigRational(0), BigRational(1, 2)};
  BigRational dlo = dist(e.lo);
  BigRational dhi = dist(e.hi);
  // integer inside [lo, hi]?
  bool has_integer = ceil_of(e.lo) <= floor_of(e.hi);
  BigRational half(1, 2);
  bool has_half = ceil_of(e.lo - half) <= floor_of(e.hi - half);
  BigRational lo = has_integer ? BigRational(0) : std::min(dlo, dhi);
  BigRational hi = has_half ? half : std::max(dlo, dhi);
  return {lo, hi};
}

/// Outward rounding of an enclosure to dyadic endpoints with `bits` fractional bits.
inline RealEnclosure round_out(const RealEnclosure& e, unsigned bits) {
  BigRational s = pow2(bits);
  return {make_rational(floor_of(e.lo * s), s.get_num()), make_rational(ceil_of(e.hi * s), s.get_num())};
}

/// Thrown when a finite description cannot deliver the requested width.
class PrecisionUnattainable : public BudgetExceeded {
 public:
  PrecisionUnattainable(const std::string& what, RealEnclosure best)
      : BudgetExceeded(what), best_(std::move(best)) {}
  const RealEnclosure& best() const noexcept { return best_; }

 private:
  RealEnclosure best_;
};

// ---------------------------------------------------------------------------
// Refinement budget: number of refinement rounds an undecided comparison may
// take; each round shrinks the working width by 2^-32.

inline std::atomic<int>& refinement_budget_slot() {
  static std::atomic<int> budget{24};
  return budget;
}
inline int refinement_budget() { return refinement_budget_slot().load(); }
inline void set_refinement_budget(int rounds) {
  if (rounds <= 0) throw ParameterError("refinement budget must be positive");
  refinement_budget_slot().store(rounds);
}

// ---------------------------------------------------------------------------
// Real specifications.

struct QuadraticSurd {
  BigRational a;  // value = a + b * sqrt(D)
  BigRational b;
  BigInt D;
};

/// a_j for j >= 1; must be a pure function of j.
using PartialQuotientRule = std::function<BigInt(std::size_t)>;

/// Partial quotients a_0; a_1, a_2, ... given as a known prefix followed by an
/// optional rule. Without a rule the stream is exhausted after the prefix.
class PartialQuotientStream {
 public:
  PartialQuotientStream(BigInt a0, std::vector<BigInt> prefix, PartialQuotientRule rule = {},
                        std::string name = {})
      : data_(std::make_shared<Data>()) {
    data_->a0 = std::move(a0);
    data_->prefix = std::move(prefix);
    data_->rule = std::move(rule);
    data_->name = std::move(name);
    for (const auto& a : data_->prefix)
      if (a < 1) throw ConstraintViolation("a_j>=1", "partial quotients a_j (j>=1) must be >= 1");
  }

  const BigInt& a0() const { return data_->a0; }
  const std::vector<BigInt>& prefix() const { return data_->prefix; }
  bool has_rule() const { return static_cast<bool>(data_->rule); }
  const std::string& name() const { return data_->name; }

  /// Number of available partial quotients after a_0, if bounded.
  std::optional<std::size_t> available() const {
    if (has_rule()) return std::nullopt;
    return data_->prefix.size();
  }

  bool has(std::size_t j) const { return j == 0 || has_rule() || j <= data_->prefix.size(); }

  BigInt at(std::size_t j) const {
    if (j == 0) return data_->a0;
    if (j <= data_->prefix.size()) return data_->prefix[j - 1];
    if (!has_rule())
      throw DepthError("partial quotient a_" + std::to_string(j) + " not available (stream has " +
                       std::to_string(data_->prefix.size()) + " terms)");
    std::lock_guard<std::mutex> lock(data_->mu);
    auto& cache = data_->cache;
    std::size_t base = data_->prefix.size();
    while (cache.size() + base < j) {
      BigInt a = data_->rule(base + cache.size() + 1);
      if (a < 1) throw ConstraintViolation("a_j>=1", "partial quotient rule produced a_j < 1");
      cache.push_back(std::move(a));
    }
    return cache[j - base - 1];
  }

  /// Identity of the underlying stream, used to cancel identical terms exactly.
  const void* identity() const { return data_.get(); }

 private:
  struct Data {
    BigInt a0;
    std::vector<BigInt> prefix;
    PartialQuotientRule rule;
    std::string name;
    std::mutex mu;
    std::vector<BigInt> cache;
  };
  std::shared_ptr<Data> data_;
};

/// A real computed by some other module (e.g. a shift built from Ostrowski
/// digits). Not serialisable.
struct ComputedReal {
  std::string label;
  std::function<RealEnclosure(const BigRational&)> enclose;
  std::shared_ptr<const int> id = std::make_shared<const int>(0);
};

class RealSpec {
 public:
  using Variant = std::variant<BigRational, QuadraticSurd, PartialQuotientStream, ComputedReal>;

  RealSpec() : v_(BigRational(0)) {}
  RealSpec(BigRational r) : v_(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  RealSpec(QuadraticSurd s) : v_(validated(std::move(s))) {}  // NOLINT
  RealSpec(PartialQuotientStream s) : v_(std::move(s)) {}  // NOLINT
  RealSpec(ComputedReal c) : v_(std::move(c)) {}  // NOLINT

  static RealSpec rational(const std::string& text) { return RealSpec(parse_rational(text)); }
  static RealSpec surd(BigRational a, BigRational b, BigInt D) { return RealSpec(QuadraticSurd{std::move(a), std::move(b), std::move(D)}); }
  static RealSpec sqrt(const BigInt& D) { return surd(0, 1, D); }

  const Variant& variant() const { return v_; }
  bool is_rational() const { return std::holds_alternative<BigRational>(v_); }
  bool is_surd() const { return std::holds_alternative<QuadraticSurd>(v_); }
  bool is_stream() const { return std::holds_alternative<PartialQuotientStream>(v_); }
  bool is_computed() const { return std::holds_alternative<ComputedReal>(v_); }
  const BigRational& as_rational() const { return std::get<BigRational>(v_); }
  const QuadraticSurd& as_surd() const { return std::get<QuadraticSurd>(v_); }
  const PartialQuotientStream& as_stream() const { return std::get<PartialQuotientStream>(v_); }
  const ComputedReal& as_computed() const { return std::get<ComputedReal>(v_); }

  /// Pointer identity for stream/computed reals; null otherwise.
  const void* identity() const {
    if (is_stream()) return as_stream().identity();
    if (is_computed()) return as_computed().id.get();
    return nullptr;
  }

 private:
  static QuadraticSurd validated(QuadraticSurd s) {
    if (s.D <= 0 || is_perfect_square(s.D))
      throw ConstraintViolation("D nonsquare", "quadratic surd requires a positive nonsquare D");
    return s;
  }
  Variant v_;
};

// ---------------------------------------------------------------------------
// Enclosure of a real specification.

namespace detail {

/// Convergent bracket of a stream: smallest depth whose bracket is narrower than
/// `width`. For exhaustible streams the bracket after the last known term covers
/// every admissible continuation.
inline RealEnclosure enclose_stream(const PartialQuotientStream& s, const BigRational& width) {
  BigInt p_prev = 1, q_prev = 0;  // p_{-1}, q_{-1}
  BigInt p = s.a0(), q = 1;
  for (std::size_t j = 1;; ++j) {
    if (!s.has(j)) {
      // value lies between p/q and (p + p_prev)/(q + q_prev)
      BigRational x = make_rational(p, q);
      BigRational y = make_rational(p + p_prev, q + q_prev);
      RealEnclosure best(std::min(x, y), std::max(x, y));
      if (best.width() <= width) return best;
      throw PrecisionUnattainable("partial quotient stream exhausted before target width", best);
    }
    BigInt a = s.at(j);
    BigInt pn = a * p + p_prev;
    BigInt qn = a * q + q_prev;
    // bracket between consecutive convergents p/q and pn/qn, width 1/(q qn)
    if (q * qn * width >= 1) {
      BigRational x = make_rational(p, q);
      BigRational y = make_rational(pn, qn);
      if (s.has(j + 1)) return {std::min(x, y), std::max(x, y)};
      // pn/qn may be the final (exact) value; keep going so the exhausted case is handled
    }
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(pn);
    q = std::move(qn);
  }
}

inline RealEnclosure enclose_surd(const QuadraticSurd& s, const BigRational& width) {
  // sqrt(D) in [r / 2^k, (r + 1) / 2^k] with r = isqrt(D 4^k); width |b| / 2^k
  BigRational absb = abs(s.b);
  if (absb == 0) return RealEnclosure(s.a);
  BigInt need = ceil_of(absb / width);
  long k = static_cast<long>(bit_length(need));
  BigInt scaled = s.D;
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), static_cast<mp_bitcnt_t>(2 * k));
  BigInt r = isqrt(scaled);
  BigRational unit = pow2(-k);
  RealEnclosure root(BigRational(r) * unit, BigRational(r + 1) * unit);
  return s.a + s.b * root;
}

}  // namespace detail

/// Enclosure of x with width <= target_width. Rationals yield degenerate enclosures.
inline RealEnclosure enclose(const RealSpec& x, const BigRational& target_width) {
  if (target_width <= 0) throw ParameterError("target width must be positive");
  return std::visit(
      [&](const auto& v) -> RealEnclosure {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BigRational>) {
          return RealEnclosure(v);
        } else if constexpr (std::is_same_v<T, QuadraticSurd>) {
          return detail::enclose_surd(v, target_width);
        } else if constexpr (std::is_same_v<T, PartialQuotientStream>) {
          return detail::enclose_stream(v, target_width);
        } else {
          RealEnclosure e = v.enclose(target_width);
          if (e.width() > target_width)
            throw PrecisionUnattainable("computed real '" + v.label + "' missed the target width", e);
          return e;
        }
      },
      x.variant());
}

// ---------------------------------------------------------------------------
// Linear combinations c + sum_i coef_i * x_i and the resolve protocol.

class LinearReal {
 public:
  LinearReal() = default;
  explicit LinearReal(BigRational c) : constant_(std::move(c)) {}
  LinearReal(BigRational coef, RealSpec x) { add(std::move(coef), std::move(x)); }

  LinearReal& add(BigRational coef, RealSpec x) {
    if (coef == 0) return *this;
    if (x.is_rational()) {
      constant_ += coef * x.as_rational();
      return *this;
    }
    if (const void* id = x.identity()) {
      for (auto& [c, t] : terms_) {
        if (t.identity() == id) {
          c += coef;
          prune();
          return *this;
        }
      }
    }
    terms_.emplace_back(std::move(coef), std::move(x));
    return *this;
  }
  LinearReal& add_constant(const BigRational& c) {
    constant_ += c;
    return *this;
  }
  LinearReal& add(const LinearReal& o, const BigRational& scale = 1) {
    constant_ += scale * o.constant_;
    for (const auto& [c, t] : o.terms_) add(scale * c, t);
    return *this;
  }

  const BigRational& constant() const { return constant_; }
  const std::vector<std::pair<BigRational, RealSpec>>& terms() const { return terms_; }

  RealEnclosure enclose(const BigRational& width) const {
    RealEnclosure acc(constant_);
    if (terms_.empty()) return acc;
    BigRational share = width / static_cast<long>(terms_.size());
    for (const auto& [c, t] : terms_) acc = acc + c * diophlab::enclose(t, share / abs(c));
    return acc;
  }

  /// Exact value u + v sqrt(D) when every term is rational or a surd over one D.
  std::optional<QuadraticSurd> exact_form() const {
    QuadraticSurd f{constant_, 0, 0};
    for (const auto& [c, t] : terms_) {
      if (!t.is_surd()) return std::nullopt;
      const auto& s = t.as_surd();
      if (f.D != 0 && f.D != s.D) return std::nullopt;
      f.D = s.D;
      f.a += c * s.a;
      f.b += c * s.b;
    }
    return f;
  }

 private:
  void prune() {
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(), [](const auto& t) { return t.first == 0; }),
                 terms_.end());
  }
  BigRational constant_ = 0;
  std::vector<std::pair<BigRational, RealSpec>> terms_;
};

/// Sign of u + v sqrt(D), exactly.
inline int exact_sign(const QuadraticSurd& f) {
  int su = sgn(f.a);
  int sv = f.D == 0 ? 0 : sgn(f.b);
  if (sv == 0) return su;
  if (su == 0 || su == sv) return sv;
  // opposite signs: compare a^2 with b^2 D
  BigRational lhs = f.a * f.a;
  BigRational rhs = f.b * f.b * BigRational(f.D);
  return lhs > rhs ? su : sv;  // never equal since D is nonsquare
}

/// Initial working width of the resolve protocol and per-round shrink factor.
inline BigRational resolve_width(int round) { return pow2(-64 - 32L * round); }

/// Certified sign of a linear combination; exact for rationals and surds,
/// otherwise refines until the enclosure clears zero or the budget runs out.
inline int sign(const LinearReal& x) {
  if (auto f = x.exact_form()) return exact_sign(*f);
  const int budget = refinement_budget();
  for (int round = 0; round < budget; ++round) {
    RealEnclosure e = x.enclose(resolve_width(round));
    if (e.lo > 0) return 1;
    if (e.hi < 0) return -1;
    if (e.degenerate()) return 0;
  }
  throw UndecidableAtBudget("sign undecidable at refinement budget " + std::to_string(budget));
}

/// Three-way comparison a <=> b for linear combinations.
inline int compare(const LinearReal& a, const LinearReal& b) {
  LinearReal d = a;
  d.add(b, -1);
  return sign(d);
}

/// Certified floor of a linear combination.
inline BigInt floor_of(const LinearReal& x) {
  if (auto f = x.exact_form(); f && f->b == 0) return floor_of(f->a);
  const int budget = refinement_budget();
  for (int round = 0; round < budget; ++round) {
    RealEnclosure e = x.enclose(resolve_width(round));
    BigInt fl = floor_of(e.lo);
    if (floor_of(e.hi) == fl) return fl;
    if (e.width() < 1 && x.exact_form()) {
      LinearReal shifted = x;
      shifted.add_constant(-BigRational(fl + 1));
      return sign(shifted) >= 0 ? BigInt(fl + 1) : fl;
    }
  }
  throw UndecidableAtBudget("floor undecidable at refinement budget");
}

/// sign(||x|| - rho), certified; 0 means ||x|| = rho exactly.
inline int compare_dist(const LinearReal& x, const BigRational& rho) {
  BigRational half(1, 2);
  if (rho < 0) return 1;
  if (rho > half) return -1;
  const int budget = refinement_budget();
  for (int round = 0; round < budget; ++round) {
    RealEnclosure e = x.enclose(resolve_width(round));
    RealEnclosure d = dist_nearest_integer(e);
    if (d.lo > rho) return 1;
    if (d.hi < rho) return -1;
    if (e.width() >= half) continue;
    bool has_half = ceil_of(e.lo - half) <= floor_of(e.hi - half);
    if (!has_half) {
      // ||x|| = |x - m| with m the integer nearest to the whole enclosure
      BigInt m = floor_of(e.lo + half);
      LinearReal upper = x;
      upper.add_constant(-BigRational(m) - rho);
      LinearReal lower = x;
      lower.add_constant(-BigRational(m) + rho);
      int su = sign(upper);
      int sl = sign(lower);
      if (su > 0 || sl < 0) return 1;
      if (su == 0 || sl == 0) return 0;
      return -1;
    }
    if (x.exact_form()) {
      BigRational h = BigRational(ceil_of(e.lo - half)) + half;
      LinearReal at_half = x;
      at_half.add_constant(-h);
      if (sign(at_half) == 0) return half > rho ? 1 : (half == rho ? 0 : -1);
    }
  }
  throw UndecidableAtBudget("||x|| vs threshold undecidable at refinement budget");
}

// ---------------------------------------------------------------------------
// Certified natural logarithms (MPFR with directed rounding).

namespace detail {

inline BigRational mpfr_to_rational(mpfr_srcptr v) {
  BigInt m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), v);
  return BigRational(m) * pow2(static_cast<long>(e));
}

class MpfrValue {
 public:
  explicit MpfrValue(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~MpfrValue() { mpfr_clear(v_); }
  MpfrValue(const MpfrValue&) = delete;
  MpfrValue& operator=(const MpfrValue&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

}  // namespace detail

/// Enclosure of ln(x) for x > 0 with dyadic endpoints at `prec` bits.
inline RealEnclosure ln_enclosure(const BigRational& x, mpfr_prec_t prec = 128) {
  if (x <= 0) throw ParameterError("logarithm of a non-positive number");
  if (x == 1) return RealEnclosure(BigRational(0));
  detail::MpfrValue lo(prec), hi(prec);
  mpfr_set_q(lo.get(), x.get_mpq_t(), MPFR_RNDD);
  mpfr_log(lo.get(), lo.get(), MPFR_RNDD);
  mpfr_set_q(hi.get(), x.get_mpq_t(), MPFR_RNDU);
  mpfr_log(hi.get(), hi.get(), MPFR_RNDU);
  return {detail::mpfr_to_rational(lo.get()), detail::mpfr_to_rational(hi.get())};
}

/// Enclosure of the convention log(x) = max(ln x, 1).
inline RealEnclosure paper_log_enclosure(const BigRational& x, mpfr_prec_t prec = 128) {
  if (x > 0 && x <= 2) return RealEnclosure(BigRational(1));  // ln 2 < 1
  RealEnclosure l = ln_enclosure(x, prec);
  return {std::max(l.lo, BigRational(1)), std::max(l.hi, BigRational(1))};
}

}  // namespace diophlab
