#pragma once

#include "contfrac.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace diophlab {

// ---------------------------------------------------------------------------
// Ostrowski numeration: n = sum_{k>=0} c_{k+1} q_k with
//   0 <= c_1 < a_1,  0 <= c_{k+1} <= a_{k+1},  c_{k+1} = a_{k+1} => c_k = 0.
// Digit vectors are stored 0-based: digits[k] = c_{k+1}, the multiplier of q_k.

struct OstrowskiDigits {
  std::vector<BigInt> digits;

  /// c_{i}; zero beyond the stored length.
  BigInt c(std::size_t i) const { return i >= 1 && i <= digits.size() ? digits[i - 1] : BigInt(0); }
  bool operator==(const OstrowskiDigits&) const = default;
};

/// Convergent denominators of a fixed cf, covering every n below `bound`.
class OstrowskiTable {
 public:
  OstrowskiTable(ContinuedFraction cf, const BigInt& bound) : cf_(std::move(cf)) {
    auto t = convergents_beyond(cf_, bound);
    q_ = std::move(t.q);
    if (q_.back() <= bound && !cf_.has(q_.size()))
      throw DepthError("continued fraction too short to resolve q_K <= n < q_{K+1} for n = " + bound.get_str());
    a_.push_back(cf_.a0());
    for (std::size_t j = 1; j < q_.size(); ++j) a_.push_back(cf_.a(j));
  }

  const ContinuedFraction& cf() const { return cf_; }
  const BigInt& q(std::size_t k) const { return q_.at(k); }
  const BigInt& a(std::size_t j) const { return a_.at(j); }
  std::size_t size() const { return q_.size(); }
  /// Largest n the table can encode.
  BigInt capacity() const { return q_.back() - 1; }

  OstrowskiDigits encode(const BigInt& n) const {
    if (n < 1) throw ParameterError("Ostrowski encoding needs n >= 1");
    if (n > capacity()) throw DepthError("n = " + n.get_str() + " exceeds the table capacity");
    std::size_t K = 0;
    while (K + 1 < q_.size() && q_[K + 1] <= n) ++K;
    OstrowskiDigits d;
    d.digits.assign(K + 1, 0);
    BigInt rem = n;
    for (std::size_t k = K + 1; k-- > 0;) {
      if (rem >= q_[k]) {
        mpz_fdiv_qr(d.digits[k].get_mpz_t(), rem.get_mpz_t(), rem.get_mpz_t(), q_[k].get_mpz_t());
      }
    }
    return d;
  }

  /// Name of the first violated rule, if any.
  std::optional<std::string> violation(const OstrowskiDigits& d) const {
    for (std::size_t i = 1; i <= d.digits.size(); ++i) {
      const BigInt& ci = d.digits[i - 1];
      if (ci < 0) return "c_" + std::to_string(i) + ">=0";
      if (ci == 0) continue;
      if (i >= q_.size()) return "depth:c_" + std::to_string(i);
      if (i == 1 && ci >= a_[1]) return "c_1<a_1";
      if (i > 1 && ci > a_[i]) return "c_" + std::to_string(i) + "<=a_" + std::to_string(i);
      if (i > 1 && ci == a_[i] && d.digits[i - 2] != 0)
        return "c_" + std::to_string(i) + "=a_" + std::to_string(i) + "=>c_" + std::to_string(i - 1) + "=0";
    }
    return std::nullopt;
  }

  BigInt decode(const OstrowskiDigits& d) const {
    if (auto v = violation(d)) {
      if (v->rfind("depth:", 0) == 0) throw DepthError("digit " + v->substr(6) + " beyond the table depth");
      throw ConstraintViolation(*v, "invalid Ostrowski digits: rule " + *v + " violated");
    }
    BigInt n = 0;
    for (std::size_t k = 0; k < d.digits.size(); ++k) n += d.digits[k] * q_[k];
    return n;
  }

 private:
  ContinuedFraction cf_;
  std::vector<BigInt> q_;
  std::vector<BigInt> a_;
};

inline OstrowskiDigits ostrowski_encode(const BigInt& n, const ContinuedFraction& cf) {
  return OstrowskiTable(cf, n).encode(n);
}

inline BigInt ostrowski_decode(const OstrowskiDigits& d, const ContinuedFraction& cf) {
  BigInt bound = 0;
  if (!d.digits.empty()) {
    auto t = convergents(cf, d.digits.size() - 1);
    for (std::size_t k = 0; k < d.digits.size(); ++k) bound += abs(d.digits[k]) * t.q[k];
  }
  return OstrowskiTable(cf, bound).decode(d);
}

// ---------------------------------------------------------------------------
// Cylinder sets A(d_1, ..., d_{m+1}).

/// Violated rule of a digit prefix, if any.
inline std::optional<std::string> prefix_violation(const std::vector<BigInt>& prefix, const ContinuedFraction& cf) {
  OstrowskiDigits d{prefix};
  BigInt bound = 1;
  auto t = convergents(cf, prefix.size());
  bound = t.q.back();
  return OstrowskiTable(cf, bound).violation(d);
}

/// Iterates A(d_1, ..., d_{m+1}) in increasing order.
class CylinderWalker {
 public:
  CylinderWalker(std::vector<BigInt> prefix, ContinuedFraction cf)
      : prefix_(std::move(prefix)), cf_(std::move(cf)) {
    if (prefix_.empty()) throw ParameterError("cylinder prefix must be non-empty");
    if (auto v = prefix_violation(prefix_, cf_))
      throw ConstraintViolation(*v, "invalid cylinder prefix: rule " + *v + " violated");
    auto t = convergents(cf_, prefix_.size());
    q_ = t.q;
    base_ = 0;
    for (std::size_t k = 0; k < prefix_.size(); ++k) base_ += prefix_[k] * q_[k];
    value_ = base_;
    if (value_ == 0) advance();
  }

  const BigInt& current() const { return value_; }
  /// Ostrowski digit c_{m+2} of the current element.
  BigInt next_digit() const { return high_.empty() ? BigInt(0) : high_[0]; }

  void advance() {
    const std::size_t m1 = prefix_.size();  // index of d_{m+1}
    for (std::size_t i = 0;; ++i) {
      if (i == high_.size()) high_.push_back(0);
      std::size_t idx = m1 + 1 + i;  // digit c_idx
      BigInt a = digit_bound(idx);
      BigInt next = high_[i] + 1;
      const BigInt& below = i == 0 ? prefix_.back() : BigInt(0);
      bool above_full = i + 1 < high_.size() && high_[i + 1] == digit_bound(idx + 1);
      bool ok = next <= a && (next < a || below == 0) && !above_full;
      if (ok) {
        // zero the lower positions and bump position i
        for (std::size_t j = 0; j < i; ++j) high_[j] = 0;
        high_[i] = next;
        recompute();
        return;
      }
    }
  }

 private:
  BigInt digit_bound(std::size_t idx) const { return cf_.a(idx); }

  void recompute() {
    while (q_.size() < prefix_.size() + 1 + high_.size()) {
      std::size_t j = q_.size();
      q_.push_back(cf_.a(j) * q_[j - 1] + q_[j - 2]);
    }
    value_ = base_;
    for (std::size_t i = 0; i < high_.size(); ++i)
      if (high_[i] != 0) value_ += high_[i] * q_[prefix_.size() + i];
  }

  std::vector<BigInt> prefix_;
  ContinuedFraction cf_;
  std::vector<BigInt> q_;
  std::vector<BigInt> high_;  // c_{m+2}, c_{m+3}, ...
  BigInt base_;
  BigInt value_;
};

/// First `count` elements of A(prefix).
inline std::vector<BigInt> cylinder_elements(const std::vector<BigInt>& prefix, const ContinuedFraction& cf,
                                             std::size_t count) {
  std::vector<BigInt> out;
  if (count == 0) return out;
  CylinderWalker w(prefix, cf);
  while (out.size() < count) {
    out.push_back(w.current());
    if (out.size() < count) w.advance();
  }
  return out;
}

/// Elements of A(prefix) not exceeding n_max.
inline std::vector<BigInt> cylinder_elements_upto(const std::vector<BigInt>& prefix, const ContinuedFraction& cf,
                                                  const BigInt& n_max) {
  std::vector<BigInt> out;
  CylinderWalker w(prefix, cf);
  while (w.current() <= n_max) {
    out.push_back(w.current());
    w.advance();
  }
  return out;
}

struct GapsReport {
  bool ok = true;
  std::size_t gaps_checked = 0;
  std::size_t short_gaps = 0;  // gaps equal to q_m (when d_{m+1} = 0)
  std::string failure;
};

/// Checks the gap pattern of consecutive cylinder elements: gaps >= q_{m+1} when
/// d_{m+1} > 0; otherwise gaps in {q_{m+1}, q_m}, a q_m gap following an element
/// with c_{m+2} = a_{m+2} and a_{m+2} gaps of q_{m+1} (truncated at the list start).
inline GapsReport check_gap_pattern(const std::vector<BigInt>& prefix, const ContinuedFraction& cf,
                                   const std::vector<BigInt>& elements) {
  GapsReport r;
  const std::size_t m = prefix.size() - 1;
  OstrowskiTable table(cf, elements.empty() ? BigInt(1) : elements.back());
  auto t = convergents(cf, m + 2);
  const BigInt& qm = t.q[m];
  const BigInt& qm1 = t.q[m + 1];
  BigInt am2 = cf.a(m + 2);
  auto fail = [&](std::size_t i, const std::string& why) {
    r.ok = false;
    r.failure = "gap after n = " + elements[i].get_str() + ": " + why;
  };
  std::vector<BigInt> gaps;
  for (std::size_t i = 0; i + 1 < elements.size(); ++i) gaps.push_back(elements[i + 1] - elements[i]);
  for (std::size_t i = 0; i < gaps.size() && r.ok; ++i) {
    ++r.gaps_checked;
    const BigInt& g = gaps[i];
    if (prefix.back() > 0) {
      if (g < qm1) fail(i, "gap " + g.get_str() + " < q_{m+1} = " + qm1.get_str());
      continue;
    }
    if (g == qm1) continue;
    if (g != qm) {
      fail(i, "gap " + g.get_str() + " not in {q_{m+1}, q_m}");
      continue;
    }
    ++r.short_gaps;
    if (table.encode(elements[i]).c(m + 2) != am2) {
      fail(i, "q_m gap but c_{m+2}(n_i) != a_{m+2}");
      continue;
    }
    std::size_t need = static_cast<std::size_t>(am2.get_ui());
    std::size_t have = std::min(need, i);
    for (std::size_t j = 1; j <= have; ++j)
      if (gaps[i - j] != qm1) {
        fail(i, "q_m gap not preceded by a_{m+2} gaps of q_{m+1}");
        break;
      }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Shifts gamma = sum_{k>=0} b_{k+1} D_k given by digits b_k.

class GammaDigits {
 public:
  enum class Tail { Zero, Constant, Half, Quarter, Sigma };

  GammaDigits(ContinuedFraction cf, std::vector<BigInt> prefix, Tail tail, BigInt constant = 0,
              std::vector<int> sigma = {}, bool dandy = false)
      : cf_(std::move(cf)), prefix_(std::move(prefix)), tail_(tail), constant_(std::move(constant)),
        sigma_(std::move(sigma)), dandy_(dandy) {
    for (const auto& b : prefix_)
      if (b < 0) throw ParameterError("gamma digits must be non-negative");
    if (tail_ == Tail::Constant && constant_ < 0) throw ParameterError("gamma digits must be non-negative");
    for (int s : sigma_)
      if (s != 0 && s != 1) throw ParameterError("sigma bits must be 0 or 1");
  }

  static Tail parse_tail(const std::string& name, BigInt* constant) {
    if (name == "zero" || name == "none") return Tail::Zero;
    if (name == "half") return Tail::Half;
    if (name == "quarter") return Tail::Quarter;
    if (name == "sigma") return Tail::Sigma;
    if (name.rfind("const:", 0) == 0) {
      try {
        *constant = BigInt(name.substr(6));
      } catch (const std::invalid_argument&) {
        throw ParameterError("bad constant tail rule '" + name + "'");
      }
      return Tail::Constant;
    }
    throw ParameterError("unknown b_tail_rule '" + name + "'");
  }

  static std::string tail_name(Tail t, const BigInt& constant) {
    switch (t) {
      case Tail::Zero: return "zero";
      case Tail::Constant: return "const:" + constant.get_str();
      case Tail::Half: return "half";
      case Tail::Quarter: return "quarter";
      case Tail::Sigma: return "sigma";
    }
    return "zero";
  }

  const ContinuedFraction& cf() const { return cf_; }
  const std::vector<BigInt>& prefix() const { return prefix_; }
  Tail tail() const { return tail_; }
  const BigInt& tail_constant() const { return constant_; }
  const std::vector<int>& sigma() const { return sigma_; }
  bool dandy() const { return dandy_; }

  /// b_k for k >= 1.
  BigInt b(std::size_t k) const {
    if (k == 0) throw ParameterError("gamma digits start at b_1");
    if (k <= prefix_.size()) return prefix_[k - 1];
    switch (tail_) {
      case Tail::Zero: return 0;
      case Tail::Constant: return constant_;
      case Tail::Half: return BigInt(cf_.a(k) / 2);
      case Tail::Quarter: return BigInt(cf_.a(k) / 4);
      case Tail::Sigma: {
        int s = k <= sigma_.size() ? sigma_[k - 1] : 0;
        return BigInt(cf_.a(k) >> (1 + s));
      }
    }
    return 0;
  }

  /// True when every b_k vanishes.
  bool identically_zero() const {
    for (const auto& b : prefix_)
      if (b != 0) return false;
    return tail_ == Tail::Zero || (tail_ == Tail::Constant && constant_ == 0);
  }

  /// Checks a_0 = 0, a_k >= 64 and a_k/4 <= b_k <= a_k/2 for k <= depth.
  std::optional<std::string> dandy_violation(std::size_t depth) const {
    if (cf_.a0() != 0) return std::string("a_0=0");
    for (std::size_t k = 1; k <= depth && cf_.has(k); ++k) {
      BigInt a = cf_.a(k), bk = b(k);
      if (a < 64) return "a_" + std::to_string(k) + ">=64";
      if (4 * bk < a) return "a_" + std::to_string(k) + "/4<=b_" + std::to_string(k);
      if (2 * bk > a) return "b_" + std::to_string(k) + "<=a_" + std::to_string(k) + "/2";
    }
    return std::nullopt;
  }

 private:
  ContinuedFraction cf_;
  std::vector<BigInt> prefix_;
  Tail tail_;
  BigInt constant_;
  std::vector<int> sigma_;
  bool dandy_;
};

namespace detail {

/// Depth K with 4 / q_K <= w, and the q table up to K + 1.
inline std::pair<std::size_t, ConvergentTable> tail_depth(const ContinuedFraction& cf, const BigRational& w) {
  BigInt need = ceil_of(BigRational(4) / w);
  ConvergentTable t = convergents_beyond(cf, need);
  if (t.q.back() < need) throw PrecisionUnattainable("continued fraction too short for the gamma tail bound", {});
  std::size_t K = t.depth();
  t = convergents(cf, K + 1);
  return {K, std::move(t)};
}

}  // namespace detail

/// Enclosures of D_0..D_{K-1} and of alpha for digit sums with total error <= w.
struct DTable {
  std::size_t K = 0;
  ConvergentTable t;
  RealEnclosure alpha;
  std::vector<RealEnclosure> D;
  BigRational tail;  // bound on |sum_{k>=K} x_{k+1} D_k| for |x_{k+1}| <= a_{k+1}

  static DTable build(const ContinuedFraction& cf, const BigRational& w) {
    DTable d;
    auto [K, t] = detail::tail_depth(cf, w / 4);
    d.K = K;
    d.t = std::move(t);
    d.tail = BigRational(4) / BigRational(d.t.q[K]);
    // alpha width small enough that sum_k a_{k+1} q_k width(alpha) <= w / 2
    BigInt weight = 0;
    for (std::size_t k = 0; k < K; ++k) weight += cf.a(k + 1) * d.t.q[k];
    BigRational aw = w / (2 * BigRational(weight + 1));
    d.alpha = enclose(cf.value(), aw);
    for (std::size_t k = 0; k < K; ++k)
      d.D.push_back(BigRational(d.t.q[k]) * d.alpha - BigRational(d.t.p[k]));
    return d;
  }
};

/// Enclosure of gamma = sum b_{k+1} D_k of width <= width; exact 0 when b vanishes.
inline RealEnclosure gamma_from_digits(const GammaDigits& g, const BigRational& width) {
  if (width <= 0) throw ParameterError("target width must be positive");
  if (g.identically_zero()) return RealEnclosure(BigRational(0));
  DTable d = DTable::build(g.cf(), width / 2);
  for (std::size_t k = 1; k <= d.K + 1; ++k)
    if (g.b(k) > g.cf().a(k)) throw ParameterError("digit b_" + std::to_string(k) + " exceeds a_" + std::to_string(k));
  RealEnclosure acc(BigRational(0));
  for (std::size_t k = 0; k < d.K; ++k) acc = acc + BigRational(g.b(k + 1)) * d.D[k];
  acc = acc + RealEnclosure(-d.tail, d.tail);
  if (acc.width() > width) throw PrecisionUnattainable("gamma enclosure wider than requested", acc);
  return acc;
}

/// gamma as a real specification usable by other modules.
inline RealSpec gamma_real(const GammaDigits& g) {
  if (g.identically_zero()) return RealSpec(BigRational(0));
  return RealSpec(ComputedReal{"gamma(b-digits)", [g](const BigRational& w) { return gamma_from_digits(g, w); }});
}

struct DandyCertificate {
  bool alpha_ok = false;  // 0 < alpha < 1/64
  bool gamma_ok = false;  // 0 <= gamma < 1 - alpha
  bool digits_ok = false;
  RealEnclosure alpha;
  RealEnclosure gamma;
  std::string failure;
  bool ok() const { return alpha_ok && gamma_ok && digits_ok; }
};

/// Certifies 0 < alpha < 1/64 and 0 <= gamma < 1 - alpha for the pair, checking the digit
/// conditions up to `depth`.
inline DandyCertificate certify_dandy(const GammaDigits& g, std::size_t depth = 32) {
  DandyCertificate c;
  auto v = g.dandy_violation(depth);
  c.digits_ok = !v;
  if (v) c.failure = "digit rule " + *v + " violated";
  for (int round = 0; round < refinement_budget(); ++round) {
    BigRational w = resolve_width(round);
    c.alpha = enclose(g.cf().value(), w);
    c.gamma = gamma_from_digits(g, w);
    RealEnclosure slack = RealEnclosure(BigRational(1)) - c.alpha - c.gamma;  // 1 - alpha - gamma
    c.alpha_ok = c.alpha.lo > 0 && c.alpha.hi < BigRational(1, 64);
    c.gamma_ok = c.gamma.lo >= 0 && slack.lo > 0;
    if (c.alpha_ok && c.gamma_ok) break;
  }
  if (!c.alpha_ok && c.failure.empty()) c.failure = "0 < alpha < 1/64 not certified";
  if (!c.gamma_ok && c.failure.empty()) c.failure = "0 <= gamma < 1 - alpha not certified";
  return c;
}

// ---------------------------------------------------------------------------
// The Sigma functional.

struct SigmaDecomposition {
  BigInt n;
  OstrowskiDigits c;
  std::vector<BigInt> delta;         // delta_1 .. delta_K (c_k - b_k)
  std::optional<std::size_t> m;      // least i >= 0 with delta_{i+1} != 0
  RealEnclosure sigma;               // Sigma = sum delta_{k+1} D_k
  RealEnclosure dist_sigma;          // min(|Sigma|, 1 - |Sigma|)
  RealEnclosure dist_direct;         // ||n alpha - gamma|| from enclosures of alpha, gamma
  bool agree = false;                // the two distance enclosures intersect
};

/// Precomputed data for evaluating ||n alpha - gamma|| along two routes.
class SigmaEvaluator {
 public:
  SigmaEvaluator(GammaDigits g, const BigInt& n_max, const BigRational& width)
      : g_(std::move(g)), table_(g_.cf(), n_max), width_(width) {
    if (width <= 0) throw ParameterError("target width must be positive");
    // per-term D_k error scaled by |delta| <= a_{k+1}, n alpha error scaled by n
    d_ = DTable::build(g_.cf(), width / (2 * BigRational(n_max + 1)));
    gamma_ = gamma_from_digits(g_, width / 4);
    for (std::size_t k = 1; k <= d_.K + 1; ++k) b_.push_back(g_.b(k));
  }

  const GammaDigits& gamma_digits() const { return g_; }
  const OstrowskiTable& table() const { return table_; }
  const RealEnclosure& gamma() const { return gamma_; }
  const RealEnclosure& alpha() const { return d_.alpha; }
  const ConvergentTable& convergents() const { return d_.t; }

  std::optional<std::size_t> m_of(const OstrowskiDigits& c) const {
    for (std::size_t i = 0; i < b_.size(); ++i)
      if (c.c(i + 1) != b_[i]) return i;
    return std::nullopt;
  }

  SigmaDecomposition decompose(const BigInt& n) const {
    SigmaDecomposition s;
    s.n = n;
    s.c = table_.encode(n);
    if (s.c.digits.size() > d_.K) throw PrecisionUnattainable("digit depth exceeds the D_k table", {});
    RealEnclosure acc(BigRational(0));
    for (std::size_t k = 0; k < d_.K; ++k) {
      BigInt delta = s.c.c(k + 1) - b_[k];
      s.delta.push_back(delta);
      if (delta != 0) acc = acc + BigRational(delta) * d_.D[k];
    }
    s.m = m_of(s.c);
    // tail: delta_{k+1} = -b_{k+1} for k >= K
    s.sigma = acc + RealEnclosure(-d_.tail, d_.tail);
    if (g_.identically_zero()) s.sigma = acc;
    RealEnclosure as = abs(s.sigma);
    RealEnclosure one_minus = RealEnclosure(BigRational(1)) - as;
    s.dist_sigma = {std::min(as.lo, one_minus.lo), std::min(as.hi, one_minus.hi)};
    if (!g_.dandy()) s.dist_sigma = dist_nearest_integer(s.sigma);
    s.dist_direct = dist_nearest_integer(BigRational(n) * d_.alpha - gamma_);
    s.agree = s.dist_sigma.intersects(s.dist_direct);
    return s;
  }

 private:
  GammaDigits g_;
  OstrowskiTable table_;
  BigRational width_;
  DTable d_;
  RealEnclosure gamma_;
  std::vector<BigInt> b_;
};

inline SigmaDecomposition sigma_decompose(const BigInt& n, const GammaDigits& g, const BigRational& width) {
  return SigmaEvaluator(g, n, width).decompose(n);
}

// ---------------------------------------------------------------------------
// Sharpness construction: a_i in 64N, b_i = a_i / 2^{1 + sigma_i}.

enum class Schedule { Paper, Relaxed };

inline Schedule parse_schedule(const std::string& s) {
  if (s == "paper") return Schedule::Paper;
  if (s == "relaxed") return Schedule::Relaxed;
  throw ParameterError("unknown schedule '" + s + "' (expected paper|relaxed)");
}

struct SharpnessPair {
  Schedule schedule = Schedule::Relaxed;
  std::vector<BigInt> a;  // a_1 .. a_depth
  std::vector<BigInt> q;  // q_0 .. q_depth
  std::vector<int> sigma;
  bool factorial_growth = false;  // a_{u+1} >= q_u! verified for all constructed u
  GammaDigits gamma;
};

/// Builds the pair to `depth` constructed partial quotients; the stream then repeats
/// a_depth and sigma is padded with zeros. The factorial schedule throws DepthError once
/// log2(q_u!) would exceed `bit_budget`.
inline SharpnessPair sharpness_construct(std::vector<int> sigma_bits, Schedule schedule, std::size_t depth,
                                         std::size_t bit_budget = 1u << 20) {
  if (depth < 1) throw ParameterError("sharpness depth must be >= 1");
  for (int s : sigma_bits)
    if (s != 0 && s != 1) throw ParameterError("sigma bits must be 0 or 1");
  std::vector<BigInt> a, q{1};
  BigInt q_prev = 0;
  bool fact_ok = true;
  for (std::size_t u = 0; u < depth; ++u) {
    const BigInt& qu = q.back();
    BigInt next;
    if (schedule == Schedule::Paper) {
      // lgamma(q+1)/ln 2 bits for q!
      double bits = std::lgamma(qu.get_d() + 1.0) / std::log(2.0);
      if (!std::isfinite(bits) || bits > static_cast<double>(bit_budget))
        throw DepthError("paper schedule exceeds the bit budget at depth " + std::to_string(u + 1) +
                         " (q_" + std::to_string(u) + "! has ~" + std::to_string(bits) + " bits)");
      BigInt f;
      mpz_fac_ui(f.get_mpz_t(), qu.get_ui());
      next = ((f + 63) / 64) * 64;
      if (next < 64) next = 64;
      fact_ok = fact_ok && next >= f;
    } else {
      next = 64 * qu * qu * qu;
    }
    a.push_back(next);
    BigInt qn = next * qu + q_prev;
    q_prev = qu;
    q.push_back(qn);
  }
  BigInt last = a.back();
  std::vector<BigInt> prefix = a;
  PartialQuotientStream s(0, prefix, [last](std::size_t) { return last; },
                          schedule == Schedule::Paper ? "sharpness:paper" : "sharpness:relaxed");
  ContinuedFraction cf(s);
  std::vector<BigInt> b;
  for (std::size_t i = 0; i < depth; ++i) {
    int si = i < sigma_bits.size() ? sigma_bits[i] : 0;
    b.push_back(a[i] >> (1 + si));
  }
  GammaDigits g(cf, b, GammaDigits::Tail::Sigma, 0, sigma_bits, true);
  return SharpnessPair{schedule, std::move(a), std::move(q), std::move(sigma_bits),
                       schedule == Schedule::Paper && fact_ok, std::move(g)};
}

// ---------------------------------------------------------------------------
// Partial sums S_{u,d} over W_{u,d} = {n : m(n) = u, |delta_{u+1}(n)| = d}.

enum class SudBranch { Above, Equal, Below };  // d > b_{u+1}, d = b_{u+1}, d < b_{u+1}

inline const char* to_string(SudBranch b) {
  switch (b) {
    case SudBranch::Above: return "d>b";
    case SudBranch::Equal: return "d=b";
    case SudBranch::Below: return "d<b";
  }
  return "?";
}

struct SudResult {
  std::size_t u = 0;
  BigInt d;
  SudBranch branch = SudBranch::Above;
  RealEnclosure sum;
  std::size_t terms = 0;
  bool empty = true;
  std::optional<BigInt> min_w;
  std::optional<BigRational> min_w_over_qu;
  std::vector<BigInt> members;
};

/// The elements of W_{u,d} up to n_max, from the two cylinders
/// A(b_1..b_u, b_{u+1} + d) and A(b_1..b_u, b_{u+1} - d).
inline std::vector<BigInt> w_set(const GammaDigits& g, std::size_t u, const BigInt& d, const BigInt& n_max) {
  std::vector<BigInt> out;
  std::vector<BigInt> base;
  for (std::size_t k = 1; k <= u; ++k) base.push_back(g.b(k));
  BigInt bu = g.b(u + 1);
  for (int s : {+1, -1}) {
    BigInt digit = bu + s * d;
    if (digit < 0) continue;
    std::vector<BigInt> prefix = base;
    prefix.push_back(digit);
    if (prefix_violation(prefix, g.cf())) continue;
    auto part = cylinder_elements_upto(prefix, g.cf(), n_max);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Sum over n in W_{u,d}, n <= n_max, of 1 / (n (log n)^2 ||n alpha - gamma||) with
/// log x = max(ln x, 1); each term rounded outward to 2^-bits.
inline SudResult sud_partial_sum(std::size_t u, const BigInt& d, const GammaDigits& g, const BigInt& n_max,
                                 unsigned bits = 160) {
  BigInt au = g.cf().a(u + 1), bu = g.b(u + 1);
  if (d < 1 || d > au - bu)
    throw ParameterError("d must satisfy 1 <= d <= a_{u+1} - b_{u+1} = " + BigInt(au - bu).get_str());
  if (n_max < 1) throw ParameterError("n_max must be >= 1");
  SudResult r;
  r.u = u;
  r.d = d;
  r.branch = d > bu ? SudBranch::Above : (d == bu ? SudBranch::Equal : SudBranch::Below);
  r.members = w_set(g, u, d, n_max);
  r.sum = RealEnclosure(BigRational(0));
  if (r.members.empty()) return r;
  r.empty = false;
  r.terms = r.members.size();
  r.min_w = r.members.front();
  auto t = convergents(g.cf(), u);
  r.min_w_over_qu = make_rational(*r.min_w, t.q[u]);
  SigmaEvaluator ev(g, r.members.back(), pow2(-static_cast<long>(bits)));
  BigRational lo = 0, hi = 0;
  for (const auto& n : r.members) {
    RealEnclosure dist = ev.decompose(n).dist_sigma;
    if (dist.lo <= 0) throw UndecidableAtBudget("||n alpha - gamma|| not separated from 0 at n = " + n.get_str());
    RealEnclosure lg = paper_log_enclosure(BigRational(n), bits + 32);
    RealEnclosure denom = BigRational(n) * (lg * lg) * dist;
    RealEnclosure term = round_out(reciprocal(denom), bits);
    lo += term.lo;
    hi += term.hi;
  }
  r.sum = {lo, hi};
  return r;
}

// ---------------------------------------------------------------------------
// CSV

/// Rows n, c_1, ..., c_width.
inline void write_digit_csv(std::ostream& os, const OstrowskiTable& t, const BigInt& n_from, const BigInt& n_to) {
  std::size_t width = 0;
  while (width + 1 < t.size() && t.q(width + 1) <= n_to) ++width;
  ++width;
  os << "n";
  for (std::size_t i = 1; i <= width; ++i) os << ",c_" << i;
  os << '\n';
  for (BigInt n = n_from; n <= n_to; ++n) {
    OstrowskiDigits d = t.encode(n);
    os << n.get_str();
    for (std::size_t i = 1; i <= width; ++i) os << ',' << d.c(i).get_str();
    os << '\n';
  }
}

}  // namespace diophlab
