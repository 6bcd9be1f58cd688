#pragma once

// Shift-reduced fractions: (a, n) is (gamma, eta)-shift-reduced when
// gcd(q_t a + c_t, n) = 1 for the last convergent c_t/q_t of gamma with
// q_t <= n^eta.

#include "contfrac.hpp"

#include <map>
#include <numeric>

namespace diophlab {

struct ShiftAnchor {
  BigInt n;
  std::size_t t = 0;
  BigInt c_t;
  BigInt q_t;
};

/// eta = p/D in lowest terms, 0 < eta < 1.
struct Eta {
  BigInt p;
  BigInt D;

  explicit Eta(const BigRational& eta) : p(eta.get_num()), D(eta.get_den()) {
    if (eta <= 0 || eta >= 1) throw ParameterError("eta must lie in (0, 1)");
    if (!D.fits_ulong_p() || D > 1000000) throw ParameterError("eta denominator too large");
  }
  BigRational value() const { return make_rational(p, D); }
};

namespace detail {

inline BigInt ipow(const BigInt& b, const BigInt& e) {
  BigInt out;
  mpz_pow_ui(out.get_mpz_t(), b.get_mpz_t(), e.get_ui());
  return out;
}

}  // namespace detail

class ShiftReducer {
 public:
  ShiftReducer(RealSpec gamma, const BigRational& eta) : gamma_(std::move(gamma)), eta_(eta), cf_(cf_of(gamma_)) {
    table_ = convergents(cf_, 0);
  }

  const RealSpec& gamma() const { return gamma_; }
  const Eta& eta() const { return eta_; }

  /// Largest t with q_t^D <= n^p.
  ShiftAnchor anchor(const BigInt& n) const {
    if (n < 1) throw ParameterError("n must be positive");
    BigInt bound = detail::ipow(n, eta_.p);
    std::lock_guard<std::mutex> lock(mutex_);
    std::size_t t = 0;
    for (;;) {
      std::size_t next = t + 1;
      if (next > table_.depth()) {
        if (!cf_.has(next)) {
          if (cf_.finite()) break;
          throw DepthError("continued fraction of gamma exhausted before the anchor was certified (n = " +
                           n.get_str() + ")");
        }
        extend();
      }
      if (detail::ipow(table_.q[next], eta_.D) > bound) break;
      t = next;
    }
    return {n, t, table_.p[t], table_.q[t]};
  }

  bool is_shift_reduced(const BigInt& a, const BigInt& n) const {
    ShiftAnchor an = anchor(n);
    return gcd(BigInt(an.q_t * a + an.c_t), n) == 1;
  }

  /// #{1 <= a <= n : (a, n) shift-reduced}, by enumeration.
  BigInt phi(const BigInt& n) const {
    if (!n.fits_ulong_p() || n > 100000000) throw BudgetExceeded("phi_shift enumeration limited to n <= 10^8");
    ShiftAnchor an = anchor(n);
    return static_cast<unsigned long>(count_reduced(an, n.get_ui()));
  }

  /// n prod_{p | n, p not dividing q_t} (1 - 1/p).
  BigInt phi_closed_form(const BigInt& n) const;

 private:
  static std::uint64_t count_reduced(const ShiftAnchor& an, std::uint64_t n) {
    BigInt qm, cm, nn = static_cast<unsigned long>(n);
    mpz_fdiv_r(qm.get_mpz_t(), an.q_t.get_mpz_t(), nn.get_mpz_t());
    mpz_fdiv_r(cm.get_mpz_t(), an.c_t.get_mpz_t(), nn.get_mpz_t());
    std::uint64_t q = qm.get_ui(), c = cm.get_ui(), count = 0;
    for (std::uint64_t a = 1; a <= n; ++a) {
      std::uint64_t v = static_cast<std::uint64_t>((static_cast<unsigned __int128>(q) * a + c) % n);
      if (std::gcd(v, n) == 1) ++count;
    }
    return count;
  }

  void extend() const {
    std::size_t j = table_.depth() + 1;
    BigInt a = cf_.a(j);
    BigInt pm = j >= 2 ? table_.p[j - 2] : BigInt(1);
    BigInt qm = j >= 2 ? table_.q[j - 2] : BigInt(0);
    table_.p.push_back(a * table_.p.back() + pm);
    table_.q.push_back(a * table_.q.back() + qm);
  }

  RealSpec gamma_;
  Eta eta_;
  ContinuedFraction cf_;
  mutable ConvergentTable table_;
  mutable std::mutex mutex_;
};

/// Prime factorisation by trial division, n <= 10^12.
inline std::map<std::uint64_t, unsigned> factorize(std::uint64_t n) {
  if (n == 0) throw ParameterError("cannot factor 0");
  if (n > 1000000000000ULL) throw BudgetExceeded("trial division limited to n <= 10^12");
  std::map<std::uint64_t, unsigned> f;
  for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    while (n % p == 0) {
      ++f[p];
      n /= p;
    }
  }
  if (n > 1) ++f[n];
  return f;
}

inline std::uint64_t totient(std::uint64_t n) {
  if (n == 0) throw ParameterError("totient needs n >= 1");
  std::uint64_t out = n;
  for (const auto& [p, e] : factorize(n)) out = out / p * (p - 1);
  return out;
}

inline BigInt ShiftReducer::phi_closed_form(const BigInt& n) const {
  if (!n.fits_ulong_p()) throw BudgetExceeded("closed form limited to 64-bit n");
  ShiftAnchor an = anchor(n);
  BigInt out = n;
  for (const auto& [p, e] : factorize(n.get_ui())) {
    BigInt pp = static_cast<unsigned long>(p);
    if (mpz_divisible_p(an.q_t.get_mpz_t(), pp.get_mpz_t())) continue;
    out = out / pp * (pp - 1);
  }
  return out;
}

inline ShiftAnchor anchor_convergent(const RealSpec& gamma, const BigRational& eta, const BigInt& n) {
  return ShiftReducer(gamma, eta).anchor(n);
}

inline bool is_shift_reduced(const BigInt& a, const BigInt& n, const RealSpec& gamma, const BigRational& eta) {
  return ShiftReducer(gamma, eta).is_shift_reduced(a, n);
}

inline BigInt phi_shift(const BigInt& n, const RealSpec& gamma, const BigRational& eta) {
  return ShiftReducer(gamma, eta).phi(n);
}

/// sum_{n <= n_max} psi(n) phi(n) / n, exactly.
inline BigRational ds_series_partial(const std::function<BigRational(std::uint64_t)>& psi, std::uint64_t n_max) {
  BigRational s = 0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    BigRational v = psi(n);
    if (v == 0) continue;
    s += v * make_rational(static_cast<unsigned long>(totient(n)), static_cast<unsigned long>(n));
  }
  return s;
}

struct PhiRow {
  std::uint64_t n;
  std::uint64_t phi;
  BigInt phi_shift;
  BigInt q_t;
  BigInt c_t;
};

inline std::vector<PhiRow> phi_table(const ShiftReducer& r, std::uint64_t n_max) {
  std::vector<PhiRow> rows;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    BigInt nn = static_cast<unsigned long>(n);
    ShiftAnchor an = r.anchor(nn);
    rows.push_back({n, totient(n), r.phi(nn), an.q_t, an.c_t});
  }
  return rows;
}

}  // namespace diophlab
