#pragma once

// Bohr sets, generalised arithmetic progressions, congruence lattices and the
// lattice-point counts built on them.

#include "contfrac.hpp"
#include "parallel.hpp"

#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace diophlab {

// ---------------------------------------------------------------------------
// Bohr sets B(N; rho) = { |n| <= N : ||n alpha_i - gamma_i|| <= rho_i }.

struct BohrParams {
  std::vector<RealSpec> alpha;
  std::vector<RealSpec> gamma;
  BigInt N;
  std::vector<BigRational> rho;

  static BohrParams rank_one(RealSpec a, BigRational r, BigInt n, RealSpec g = RealSpec()) {
    return {{std::move(a)}, {std::move(g)}, std::move(n), {std::move(r)}};
  }

  void validate() const {
    if (alpha.empty()) throw ParameterError("Bohr set needs at least one frequency");
    if (gamma.size() != alpha.size() || rho.size() != alpha.size())
      throw ParameterError("alpha, gamma and rho must have equal length");
    if (N < 0) throw ParameterError("Bohr set length N must be nonnegative");
    for (const auto& r : rho)
      if (r <= 0 || r > 1) throw ParameterError("rho_i must lie in (0, 1]");
  }
};

/// Certified membership queries against fixed frequencies and shifts.
class BohrTester {
 public:
  BohrTester(std::vector<RealSpec> alpha, std::vector<RealSpec> gamma, const BigInt& scale)
      : alpha_(std::move(alpha)), gamma_(std::move(gamma)) {
    BigRational w = pow2(-100) / BigRational(BigInt(scale + 1));
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
      alpha_enc_.push_back(enclose(alpha_[i], w));
      gamma_enc_.push_back(enclose(gamma_[i], pow2(-100)));
    }
  }
  explicit BohrTester(const BohrParams& p) : BohrTester(p.alpha, p.gamma, abs(p.N)) {}

  std::size_t rank() const { return alpha_.size(); }

  /// sign(||n alpha_i - gamma_i|| - rho); 0 means equality.
  int compare(std::size_t i, const BigInt& n, const BigRational& rho) const {
    RealEnclosure e = BigRational(n) * alpha_enc_[i] - gamma_enc_[i];
    RealEnclosure d = dist_nearest_integer(e);
    if (d.hi < rho) return -1;
    if (d.lo > rho) return 1;
    return compare_dist(form(i, n), rho);
  }

  LinearReal form(std::size_t i, const BigInt& n) const {
    LinearReal v(BigRational(n), alpha_[i]);
    v.add(BigRational(-1), gamma_[i]);
    return v;
  }

  bool within(const BigInt& n, const std::vector<BigRational>& rho) const {
    for (std::size_t i = 0; i < rank(); ++i)
      if (compare(i, n, rho[i]) > 0) return false;
    return true;
  }

 private:
  std::vector<RealSpec> alpha_, gamma_;
  std::vector<RealEnclosure> alpha_enc_, gamma_enc_;
};

namespace detail {

inline std::string list_integers(const std::vector<BigInt>& xs, std::size_t limit = 20) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size() && i < limit; ++i) os << (i ? ", " : "") << xs[i];
  if (xs.size() > limit) os << ", ...";
  return os.str();
}

inline long checked_long(const BigInt& n, const char* what) {
  if (!n.fits_slong_p()) throw BudgetExceeded(std::string(what) + " exceeds the enumeration range");
  return n.get_si();
}

}  // namespace detail

/// Members of B(N; rho) in increasing order.
inline std::vector<BigInt> enumerate_bohr(const BohrParams& p) {
  p.validate();
  long N = detail::checked_long(p.N, "Bohr length");
  if (N > 100000000) throw BudgetExceeded("Bohr enumeration beyond 2*10^8 candidates");
  BohrTester tester(p);
  struct Part {
    std::vector<BigInt> members, undecided;
  };
  auto chunks = split_range(0, static_cast<std::size_t>(2 * N + 1), 4096);
  auto parts = parallel_chunks<Part>(chunks, [&](std::size_t, ChunkRange r) {
    Part part;
    for (std::size_t i = r.begin; i < r.end; ++i) {
      BigInt n = static_cast<long>(i) - N;
      try {
        if (tester.within(n, p.rho)) part.members.push_back(n);
      } catch (const UndecidableAtBudget&) {
        part.undecided.push_back(n);
      }
    }
    return part;
  });
  std::vector<BigInt> out, undecided;
  for (auto& part : parts) {
    out.insert(out.end(), part.members.begin(), part.members.end());
    undecided.insert(undecided.end(), part.undecided.begin(), part.undecided.end());
  }
  if (!undecided.empty())
    throw UndecidableAtBudget("Bohr membership undecidable at budget for n = " + detail::list_integers(undecided));
  return out;
}

struct BohrCardinalityReport {
  BigInt count;
  BigRational lower;  // delta N - 1
  BigRational upper;  // 32 delta N
  bool hypothesis_met = false;
  std::optional<BigInt> q_ell;
  std::optional<bool> bounds_hold;  // set only when the hypothesis is met
};

/// Rank-one size bound: delta N - 1 <= #B(N; delta) <= 32 delta N when some
/// q_l lies in [1/(2 delta), N].
inline BohrCardinalityReport bohr_cardinality_check(const RealSpec& alpha, const BigRational& delta, const BigInt& N) {
  if (delta <= 0) throw ParameterError("delta must be positive");
  ContinuedFraction cf = cf_of(alpha);
  if (cf.finite()) throw ParameterError("cardinality bound requires irrational alpha");
  auto t = convergents(cf, 2);
  if (compare_dist(LinearReal(BigRational(t.q[2]), alpha), 2 * delta) <= 0)
    throw ParameterError("delta must lie below ||q_2 alpha|| / 2");
  BohrCardinalityReport rep;
  rep.lower = delta * BigRational(N) - 1;
  rep.upper = 32 * delta * BigRational(N);
  auto table = convergents_beyond(cf, N);
  for (const auto& q : table.q) {
    if (q <= N && 2 * delta * BigRational(q) >= 1) {
      rep.hypothesis_met = true;
      rep.q_ell = q;
      break;
    }
  }
  rep.count = static_cast<unsigned long>(enumerate_bohr(BohrParams::rank_one(alpha, delta, N)).size());
  if (rep.hypothesis_met) rep.bounds_hold = rep.lower <= BigRational(rep.count) && BigRational(rep.count) <= rep.upper;
  return rep;
}

/// n -> n-hat; must satisfy hat(n) >= n.
using HatMap = std::function<BigInt(const BigInt&)>;

inline BigInt identity_hat(const BigInt& n) { return n; }

/// n-hat = 4^{f(n)} n.
inline HatMap power_of_four_hat(std::function<unsigned long(const BigInt&)> f) {
  return [f = std::move(f)](const BigInt& n) {
    BigInt out;
    mpz_mul_2exp(out.get_mpz_t(), n.get_mpz_t(), 2 * f(n));
    return out;
  };
}

/// Localised Bohr set: n >= 1 with hat(N) < hat(n) <= hat(C N) and
/// rho_i < ||hat(n) alpha_i - gamma_i|| <= C rho_i.
inline std::vector<BigInt> localized_bohr(const BohrParams& p, const BigInt& C, const HatMap& hat = identity_hat) {
  p.validate();
  if (C < 2) throw ParameterError("localisation constant C must be at least 2");
  BigInt lo = hat(p.N), hi = hat(C * p.N);
  long top = detail::checked_long(hi, "localised scale");
  if (top > 100000000) throw BudgetExceeded("localised Bohr enumeration beyond 10^8 candidates");
  std::vector<BigRational> outer;
  for (const auto& r : p.rho) outer.push_back(BigRational(C) * r);
  BohrTester tester(p.alpha, p.gamma, hi);
  std::vector<BigInt> out, undecided;
  for (long i = 1; i <= top; ++i) {
    BigInt n = i;
    BigInt h = hat(n);
    if (h < n) throw ParameterError("hat map must satisfy hat(n) >= n");
    if (h <= lo || h > hi) continue;
    try {
      bool in = true;
      for (std::size_t k = 0; k < tester.rank() && in; ++k)
        in = tester.compare(k, h, p.rho[k]) > 0 && tester.compare(k, h, outer[k]) <= 0;
      if (in) out.push_back(n);
    } catch (const UndecidableAtBudget&) {
      undecided.push_back(n);
    }
  }
  if (!undecided.empty())
    throw UndecidableAtBudget("localised membership undecidable for n = " + detail::list_integers(undecided));
  return out;
}

// ---------------------------------------------------------------------------
// Generalised arithmetic progressions.

enum class GapShape { Symmetric, ProperAsymmetric };

inline std::string to_string(GapShape s) { return s == GapShape::Symmetric ? "symmetric" : "proper_asymmetric"; }

inline GapShape parse_gap_shape(const std::string& s) {
  if (s == "symmetric") return GapShape::Symmetric;
  if (s == "proper_asymmetric" || s == "asymmetric") return GapShape::ProperAsymmetric;
  throw ParameterError("unknown GAP shape '" + s + "'");
}

/// b + A_1 n_1 + ... + A_k n_k with |n_i| <= N_i (symmetric) or 1 <= n_i <= N_i.
struct GAP {
  long long b = 0;
  std::vector<long long> A;
  std::vector<long long> N;
  GapShape shape = GapShape::ProperAsymmetric;

  std::size_t rank() const { return A.size(); }
  long long lo_digit() const { return shape == GapShape::Symmetric ? -1 : 1; }

  void validate() const {
    if (A.empty() || A.size() != N.size()) throw ParameterError("GAP needs matching nonempty A and N");
    __int128 reach = b < 0 ? -static_cast<__int128>(b) : b;
    for (std::size_t i = 0; i < A.size(); ++i) {
      if (A[i] < 1) throw ParameterError("GAP steps A_i must be positive");
      if (N[i] < 1) throw ParameterError("GAP lengths N_i must be positive");
      reach += static_cast<__int128>(A[i]) * N[i];
    }
    if (reach > (static_cast<__int128>(1) << 62)) throw ParameterError("GAP members exceed 62-bit range");
  }

  /// Number of digit vectors.
  __int128 box_size() const {
    __int128 s = 1;
    for (long long n : N) s *= shape == GapShape::Symmetric ? 2 * n + 1 : n;
    return s;
  }
};

struct GapEnumeration {
  std::vector<long long> members;  // one per digit vector, odometer order
  bool proper = true;
  std::optional<long long> collision;  // a member with two representations
};

inline constexpr long long kGapBudget = 10000000;

/// Visits every digit vector; fn(value, digits).
template <class Fn>
void for_each_gap_vector(const GAP& g, Fn&& fn) {
  std::vector<long long> n(g.rank());
  long long lo = g.shape == GapShape::Symmetric ? 0 : 1;
  long long value = g.b;
  for (std::size_t i = 0; i < g.rank(); ++i) {
    n[i] = g.shape == GapShape::Symmetric ? -g.N[i] : lo;
    value += g.A[i] * n[i];
  }
  for (;;) {
    fn(value, n);
    std::size_t i = 0;
    for (; i < g.rank(); ++i) {
      if (n[i] < g.N[i]) {
        ++n[i];
        value += g.A[i];
        break;
      }
      long long start = g.shape == GapShape::Symmetric ? -g.N[i] : 1;
      value -= g.A[i] * (n[i] - start);
      n[i] = start;
    }
    if (i == g.rank()) return;
  }
}

inline GapEnumeration enumerate_gap(const GAP& g, long long budget = kGapBudget) {
  g.validate();
  if (g.box_size() > budget) throw BudgetExceeded("GAP has more digit vectors than the enumeration budget");
  GapEnumeration out;
  out.members.reserve(static_cast<std::size_t>(g.box_size()));
  for_each_gap_vector(g, [&](long long v, const std::vector<long long>&) { out.members.push_back(v); });
  std::vector<long long> sorted = out.members;
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    out.proper = false;
    out.collision = *dup;
  }
  return out;
}

enum class Containment { GapInBohr, BohrInGap };

inline Containment parse_containment(const std::string& s) {
  if (s == "gap_in_bohr") return Containment::GapInBohr;
  if (s == "bohr_in_gap") return Containment::BohrInGap;
  throw ParameterError("direction must be gap_in_bohr or bohr_in_gap");
}

struct ContainmentReport {
  bool holds = true;
  std::size_t checked = 0;
  std::vector<long long> counterexamples;  // at most 10, ascending
};

inline ContainmentReport verify_containment(const BohrParams& bohr, const GAP& g, Containment dir) {
  bohr.validate();
  auto gap = enumerate_gap(g);
  std::set<long long> gap_set(gap.members.begin(), gap.members.end());
  ContainmentReport rep;
  auto fail = [&](long long x) {
    rep.holds = false;
    if (rep.counterexamples.size() < 10) rep.counterexamples.push_back(x);
  };
  if (dir == Containment::BohrInGap) {
    for (const auto& n : enumerate_bohr(bohr)) {
      ++rep.checked;
      if (!gap_set.count(n.get_si())) fail(n.get_si());
    }
    return rep;
  }
  BohrTester tester(bohr);
  std::vector<BigInt> undecided;
  for (long long m : gap_set) {
    ++rep.checked;
    BigInt n = static_cast<long>(m);
    if (abs(n) > bohr.N) {
      fail(m);
      continue;
    }
    try {
      if (!tester.within(n, bohr.rho)) fail(m);
    } catch (const UndecidableAtBudget&) {
      undecided.push_back(n);
    }
  }
  if (!undecided.empty())
    throw UndecidableAtBudget("Bohr membership undecidable for n = " + detail::list_integers(undecided));
  return rep;
}

// ---------------------------------------------------------------------------
// The lattice A . n = 0 (mod d).

struct CongruenceLattice {
  std::vector<BigInt> A;
  BigInt d;
  // basis[j] is the j-th basis vector; basis[j][i] = 0 for i < j, so the matrix
  // with these vectors as columns is lower triangular.
  std::vector<std::vector<BigInt>> basis;

  std::size_t rank() const { return A.size(); }

  bool satisfies(const std::vector<BigInt>& n) const {
    BigInt s = 0;
    for (std::size_t i = 0; i < rank(); ++i) s += A[i] * n[i];
    return mpz_divisible_p(s.get_mpz_t(), d.get_mpz_t()) != 0;
  }

  /// Integer coordinates of n in the basis, if n lies in its span.
  std::optional<std::vector<BigInt>> coordinates(const std::vector<BigInt>& n) const {
    std::vector<BigInt> c(rank());
    for (std::size_t i = 0; i < rank(); ++i) {
      BigInt r = n[i];
      for (std::size_t j = 0; j < i; ++j) r -= basis[j][i] * c[j];
      if (!mpz_divisible_p(r.get_mpz_t(), basis[i][i].get_mpz_t())) return std::nullopt;
      mpz_divexact(c[i].get_mpz_t(), r.get_mpz_t(), basis[i][i].get_mpz_t());
    }
    return c;
  }

  /// det of the basis matrix by fraction-free elimination.
  BigInt determinant() const {
    std::size_t k = rank();
    std::vector<std::vector<BigInt>> m(k, std::vector<BigInt>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) m[i][j] = basis[j][i];
    BigInt prev = 1;
    int flip = 1;
    for (std::size_t p = 0; p < k; ++p) {
      if (m[p][p] == 0) {
        std::size_t r = p + 1;
        while (r < k && m[r][p] == 0) ++r;
        if (r == k) return 0;
        std::swap(m[p], m[r]);
        flip = -flip;
      }
      for (std::size_t i = p + 1; i < k; ++i) {
        for (std::size_t j = p + 1; j < k; ++j) {
          BigInt t = m[i][j] * m[p][p] - m[i][p] * m[p][j];
          mpz_divexact(m[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        }
        m[i][p] = 0;
      }
      prev = m[p][p];
    }
    return flip * m[k - 1][k - 1];
  }
};

namespace detail {

inline BigInt mod_inverse(const BigInt& a, const BigInt& m) {
  if (m == 1) return 0;
  BigInt inv;
  if (!mpz_invert(inv.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t())) throw ParameterError("no modular inverse");
  return inv;
}

inline BigInt mod_floor(const BigInt& a, const BigInt& m) {
  BigInt r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

// Induction on k: a basis of A_1 n_1 + ... + A_{k-1} n_{k-1} = 0 mod g, with
// g = gcd(A_k, m), lifted by f_j = -inv(A_k/g) (A.b^(j))/g, plus (0,..,0,m/g).
inline std::vector<std::vector<BigInt>> congruence_basis(const std::vector<BigInt>& A, std::size_t k, const BigInt& m) {
  if (k == 1) return {{m}};
  BigInt g = gcd(A[k - 1], m);
  BigInt mg = m / g;
  auto sub = congruence_basis(A, k - 1, g);
  BigInt inv = mod_inverse(A[k - 1] / g, mg);
  std::vector<std::vector<BigInt>> out;
  for (auto& b : sub) {
    BigInt dot = 0;
    for (std::size_t i = 0; i + 1 < k; ++i) dot += A[i] * b[i];
    b.push_back(mod_floor(-inv * (dot / g), mg));
    out.push_back(std::move(b));
  }
  std::vector<BigInt> last(k, 0);
  last[k - 1] = mg;
  out.push_back(std::move(last));
  return out;
}

}  // namespace detail

inline CongruenceLattice lattice_basis(std::vector<BigInt> A, BigInt d) {
  if (A.empty()) throw ParameterError("lattice needs at least one coefficient");
  if (d < 1) throw ParameterError("modulus d must be positive");
  BigInt g = d;
  for (const auto& a : A) {
    if (a < 1) throw ParameterError("coefficients A_i must be positive");
    g = gcd(g, a);
  }
  if (g != 1) throw ConstraintViolation("gcd(A,d)=1", "gcd(A_1, ..., A_k, d) must be 1");
  CongruenceLattice L{std::move(A), std::move(d), {}};
  L.basis = detail::congruence_basis(L.A, L.rank(), L.d);
  return L;
}

struct LatticeCheck {
  bool equivalent = true;
  std::uint64_t lines = 0;  // lines along the last axis that were compared
  std::optional<std::vector<long long>> counterexample;
};

/// Congruence membership vs basis membership over [-R, R]^k. Each line along
/// the last axis meets either side in a residue class modulo at most d (or not
/// at all); the classes are compared exactly, and any mismatch is located by a
/// pointwise scan of its line.
inline LatticeCheck verify_lattice_membership(const CongruenceLattice& L, long long R) {
  std::size_t k = L.rank();
  if (!L.d.fits_slong_p() || L.d > 1000000) throw BudgetExceeded("modulus too large for the exhaustive check");
  long long d = L.d.get_si();
  if (R < d) throw ParameterError("radius must be at least d");
  std::vector<long long> A(k);
  std::vector<std::vector<long long>> M(k, std::vector<long long>(k, 0));  // M[i][j] = basis[j][i]
  for (std::size_t i = 0; i < k; ++i) A[i] = detail::mod_floor(L.A[i], L.d).get_si();
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k; ++i) {
      if (!L.basis[j][i].fits_slong_p() || abs(L.basis[j][i]) > 1000000)
        throw BudgetExceeded("basis entries too large for the exhaustive check");
      M[i][j] = L.basis[j][i].get_si();
    }
  auto fmod = [](long long a, long long m) { return ((a % m) + m) % m; };
  // last axis: A_k n = -r mod d has solutions n = t mod d/g iff g | r
  long long ak = A[k - 1];
  long long g = std::gcd(ak, d);
  long long mc = d / g;
  long long inv = mc == 1 ? 0 : detail::mod_inverse(BigInt(static_cast<long>(ak / g)), BigInt(static_cast<long>(mc))).get_si();
  long long mb = M[k - 1][k - 1];

  // residue class of the last digit given the prefix residue r, or -1
  std::vector<long long> tc_of(static_cast<std::size_t>(d));
  for (long long rr = 0; rr < d; ++rr) {
    long long need = fmod(-rr, d);
    tc_of[rr] = need % g == 0 ? fmod((need / g) % mc * inv, mc) : -1;
  }

  LatticeCheck out;
  std::vector<long long> n(k, 0), c(k, 0), r(k, 0), s(k, 0);
  std::vector<char> integral(k, 1);

  auto check_line = [&]() {
    ++out.lines;
    long long rr = r[k - 1];
    long long tc = tc_of[rr];
    bool basis_nonempty = integral[k - 1];
    long long tb = basis_nonempty ? fmod(s[k - 1], mb) : -1;
    if (tc == tb && (tc < 0 || mc == mb)) return true;
    for (long long x = -R; x <= R; ++x) {
      bool in_c = fmod(rr + ak * x, d) == 0;
      bool in_b = basis_nonempty && fmod(x - s[k - 1], mb) == 0;
      if (in_c != in_b) {
        n[k - 1] = x;
        out.counterexample = n;
        break;
      }
    }
    out.equivalent = false;
    return false;
  };

  // r[i], s[i], integral[i] describe the prefix n_0..n_{i-1}
  std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
    if (i + 1 == k) return check_line();
    long long base = 0;
    for (std::size_t j = 0; j < i; ++j) base += M[i][j] * c[j];
    long long res = fmod(r[i] - A[i] * R, d);
    for (long long x = -R; x <= R; ++x) {
      n[i] = x;
      r[i + 1] = res;
      res += A[i];
      if (res >= d) res -= d;
      integral[i + 1] = 0;
      if (integral[i]) {
        long long rem = x - base;
        if (rem % M[i][i] == 0) {
          c[i] = rem / M[i][i];
          integral[i + 1] = 1;
          s[i + 1] = s[i] + M[k - 1][i] * c[i];
        }
      }
      if (!rec(i + 1)) return false;
    }
    return true;
  };
  rec(0);
  return out;
}

// ---------------------------------------------------------------------------
// Divisibility in GAPs.

struct DivisibilityReport {
  long long count = 0;    // digit vectors whose member is divisible by d
  bool proper = true;
  BigRational main_term;  // N_1 ... N_k / d
  BigRational defect;     // |count - main_term|
  BigRational bound;      // C N_1 ... N_k / min N_i
  bool within = true;
};

inline long long gcd_of(const std::vector<long long>& xs) {
  long long g = 0;
  for (long long x : xs) g = std::gcd(g, x);
  return g;
}

/// With require_proper off, non-proper GAPs are accepted and digit vectors are
/// counted with multiplicity.
inline DivisibilityReport count_divisible_in_gap(const GAP& g, long long d, long long C = 4,
                                                 bool require_proper = true) {
  g.validate();
  if (d < 1) throw ParameterError("divisor d must be positive");
  if (g.shape != GapShape::ProperAsymmetric) throw ParameterError("divisibility count needs an asymmetric GAP");
  if (gcd_of(g.A) != 1) throw ParameterError("divisibility count needs gcd(A_1, ..., A_k) = 1");
  auto e = enumerate_gap(g);
  if (!e.proper && require_proper) throw ParameterError("divisibility count needs a proper GAP");
  DivisibilityReport rep;
  rep.proper = e.proper;
  for (long long v : e.members)
    if (v % d == 0) ++rep.count;
  BigInt prod = 1;
  long long mn = g.N.front();
  for (long long n : g.N) {
    prod *= static_cast<long>(n);
    mn = std::min(mn, n);
  }
  rep.main_term = make_rational(prod, static_cast<long>(d));
  rep.defect = abs(BigRational(static_cast<long>(rep.count)) - rep.main_term);
  rep.bound = make_rational(BigInt(static_cast<long>(C)) * prod, static_cast<long>(mn));
  rep.within = rep.defect <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Lattice points of a congruence lattice in a box.

struct LatticeBox {
  std::vector<BigRational> lo;
  std::vector<BigRational> hi;

  std::size_t dim() const { return lo.size(); }
  BigRational volume() const {
    BigRational v = 1;
    for (std::size_t i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  /// V_j: sum over j-subsets of side products; V_0 = 1.
  std::vector<BigRational> projection_bounds() const {
    std::vector<BigRational> e(dim() + 1, 0);
    e[0] = 1;
    for (std::size_t i = 0; i < dim(); ++i) {
      BigRational s = hi[i] - lo[i];
      for (std::size_t j = i + 1; j >= 1; --j) e[j] += e[j - 1] * s;
    }
    return e;
  }
};

/// Squared successive minima of the lattice in the Euclidean norm.
inline std::vector<BigInt> successive_minima(const CongruenceLattice& L, long long budget = kGapBudget) {
  std::size_t k = L.rank();
  // the basis vectors are independent, and d e_i lies in the lattice
  BigInt r2 = L.d * L.d;
  BigInt widest = 0;
  for (const auto& b : L.basis) {
    BigInt s = 0;
    for (const auto& x : b) s += x * x;
    widest = std::max(widest, s);
  }
  r2 = std::min(r2, widest);
  long long R = isqrt(r2).get_si();
  __int128 pts = 1;
  for (std::size_t i = 0; i < k; ++i) pts *= 2 * R + 1;
  if (pts > budget) throw BudgetExceeded("short-vector search exceeds its budget");
  std::vector<std::pair<BigInt, std::vector<BigInt>>> cands;
  std::vector<BigInt> v(k);
  std::function<void(std::size_t, const BigInt&)> rec = [&](std::size_t i, const BigInt& norm) {
    if (norm > r2) return;
    if (i == k) {
      bool zero = std::all_of(v.begin(), v.end(), [](const BigInt& x) { return x == 0; });
      if (!zero && L.satisfies(v)) cands.push_back({norm, v});
      return;
    }
    for (long long x = -R; x <= R; ++x) {
      v[i] = static_cast<long>(x);
      rec(i + 1, norm + v[i] * v[i]);
    }
  };
  rec(0, 0);
  std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::vector<BigRational>> echelon;
  std::vector<std::size_t> pivots;
  std::vector<BigInt> minima;
  for (const auto& [norm, vec] : cands) {
    std::vector<BigRational> w(vec.begin(), vec.end());
    for (std::size_t e = 0; e < echelon.size(); ++e) {
      BigRational f = w[pivots[e]] / echelon[e][pivots[e]];
      for (std::size_t i = 0; i < k; ++i) w[i] -= f * echelon[e][i];
    }
    auto it = std::find_if(w.begin(), w.end(), [](const BigRational& x) { return x != 0; });
    if (it == w.end()) continue;
    pivots.push_back(static_cast<std::size_t>(it - w.begin()));
    echelon.push_back(std::move(w));
    minima.push_back(norm);
    if (minima.size() == k) break;
  }
  if (minima.size() != k) throw BudgetExceeded("short-vector search did not reach full rank");
  return minima;
}

/// Suite constant C_k in |count - vol/det| <= C_k sum_j V_j / (lambda_1 ... lambda_j).
inline BigRational davenport_constant(std::size_t k) { return BigRational(1L << k); }

struct DavenportReport {
  BigInt count;
  BigRational main_term;  // vol / det
  BigRational error;      // |count - main_term|
  std::vector<BigInt> minima_sq;
  std::vector<BigRational> V;
  RealEnclosure bound;  // C_k sum_j V_j / (lambda_1 ... lambda_j)
  bool holds = false;
};

inline DavenportReport davenport_check(const LatticeBox& box, const CongruenceLattice& L, long long budget = kGapBudget) {
  std::size_t k = L.rank();
  if (k > 3) throw ParameterError("Davenport check is limited to k <= 3");
  if (box.dim() != k || box.hi.size() != k) throw ParameterError("box dimension must match the lattice");
  for (std::size_t i = 0; i < k; ++i)
    if (box.hi[i] < box.lo[i]) throw ParameterError("box sides must have hi >= lo");
  std::vector<long> lo(k), hi(k);
  __int128 pts = 1;
  for (std::size_t i = 0; i < k; ++i) {
    lo[i] = detail::checked_long(ceil_of(box.lo[i]), "box corner");
    hi[i] = detail::checked_long(floor_of(box.hi[i]), "box corner");
    pts *= std::max(0L, hi[i] - lo[i] + 1);
  }
  if (pts > budget) throw BudgetExceeded("box has more lattice candidates than the budget");
  DavenportReport rep;
  rep.count = 0;
  if (pts > 0) {
    std::vector<BigInt> n(k);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == k) {
        if (L.satisfies(n)) ++rep.count;
        return;
      }
      for (long x = lo[i]; x <= hi[i]; ++x) {
        n[i] = x;
        rec(i + 1);
      }
    };
    rec(0);
  }
  rep.main_term = box.volume() / BigRational(L.determinant());
  rep.error = abs(BigRational(rep.count) - rep.main_term);
  rep.minima_sq = successive_minima(L);
  rep.V = box.projection_bounds();
  RealEnclosure sum(BigRational(0), BigRational(0));
  BigInt prod = 1;
  for (std::size_t j = 0; j < k; ++j) {
    if (j > 0) prod *= rep.minima_sq[j - 1];
    RealEnclosure root = is_perfect_square(prod) ? RealEnclosure(BigRational(isqrt(prod)), BigRational(isqrt(prod)))
                                                 : enclose(RealSpec::sqrt(prod), pow2(-64));
    sum = sum + rep.V[j] * reciprocal(root);
  }
  rep.bound = davenport_constant(k) * sum;
  rep.holds = rep.error <= rep.bound.lo;
  return rep;
}

}  // namespace diophlab
