#pragma once

// Exact measures of the approximation sets E_n as finite unions of closed-open
// rational intervals, their overlaps, and the Borel-Cantelli / density
// diagnostics built from them.

#include "shiftred.hpp"

#include <map>
#include <ostream>

namespace diophlab {

/// [lo, hi)
struct Interval {
  BigRational lo;
  BigRational hi;
  bool operator==(const Interval&) const = default;
};

/// Sorted, disjoint, non-touching intervals inside [0, 1].
class IntervalSet {
 public:
  IntervalSet() = default;

  static IntervalSet from(std::vector<Interval> pieces) {
    IntervalSet s;
    for (auto& p : pieces) {
      if (p.lo < 0) p.lo = 0;
      if (p.hi > 1) p.hi = 1;
    }
    std::erase_if(pieces, [](const Interval& p) { return p.lo >= p.hi; });
    std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (auto& p : pieces) {
      if (!s.iv_.empty() && p.lo <= s.iv_.back().hi) {
        if (p.hi > s.iv_.back().hi) s.iv_.back().hi = p.hi;
      } else {
        s.iv_.push_back(std::move(p));
      }
    }
    return s;
  }
  static IntervalSet unit() { return from({{BigRational(0), BigRational(1)}}); }
  static IntervalSet range(const BigRational& lo, const BigRational& hi) { return from({{lo, hi}}); }

  const std::vector<Interval>& intervals() const { return iv_; }
  bool empty() const { return iv_.empty(); }
  std::size_t size() const { return iv_.size(); }

  BigRational measure() const {
    BigRational m = 0;
    for (const auto& p : iv_) m += p.hi - p.lo;
    return m;
  }

  bool contains(const BigRational& x) const {
    auto it = std::upper_bound(iv_.begin(), iv_.end(), x, [](const BigRational& v, const Interval& p) { return v < p.lo; });
    if (it == iv_.begin()) return false;
    --it;
    return x < it->hi;
  }

  IntervalSet intersect(const IntervalSet& o) const {
    IntervalSet out;
    std::size_t i = 0, j = 0;
    while (i < iv_.size() && j < o.iv_.size()) {
      const BigRational& lo = std::max(iv_[i].lo, o.iv_[j].lo);
      const BigRational& hi = std::min(iv_[i].hi, o.iv_[j].hi);
      if (lo < hi) out.iv_.push_back({lo, hi});
      if (iv_[i].hi < o.iv_[j].hi)
        ++i;
      else
        ++j;
    }
    return out;
  }

  IntervalSet unite(const IntervalSet& o) const {
    std::vector<Interval> all = iv_;
    all.insert(all.end(), o.iv_.begin(), o.iv_.end());
    return from(std::move(all));
  }

  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<Interval> iv_;
};

inline BigRational measure(const IntervalSet& s) { return s.measure(); }
inline IntervalSet intersect(const IntervalSet& s, const IntervalSet& t) { return s.intersect(t); }
inline IntervalSet unite(const IntervalSet& s, const IntervalSet& t) { return s.unite(t); }

// ---------------------------------------------------------------------------
// Approximation sets.

struct ShiftFilter {
  BigRational eta;
};

struct ApproxSetSpec {
  BigInt n;
  BigInt hat_n;  // defaults to n when zero
  RealSpec gamma;
  RealEnclosure psi{BigRational(0), BigRational(0)};  // Psi(n); degenerate when exact
  bool psi_infinite = false;
  BigRational window_lo = 0;
  BigRational window_hi = 1;
  std::optional<ShiftFilter> filter;

  const BigInt& scale() const { return hat_n == 0 ? n : hat_n; }
};

/// Inner and outer rational approximants of E_n; equal when E_n is exact.
struct ApproxSet {
  BigInt n;
  BigInt hat_n;
  IntervalSet inner;
  IntervalSet outer;
  std::size_t admissible = 0;  // number of a passing the window and filter

  bool exact() const { return inner == outer; }
  RealEnclosure measure() const { return {inner.measure(), outer.measure()}; }
};

/// Width used for irrational shift endpoints.
inline BigRational approx_endpoint_width() { return pow2(-100); }

namespace detail {

inline BigInt ceil_linear(const LinearReal& x) {
  LinearReal neg;
  neg.add(x, -1);
  return -floor_of(neg);
}

}  // namespace detail

/// E_n: union over admissible a of ((a + gamma - Psi)/n-hat, (a + gamma + Psi)/n-hat) within [0, 1].
/// `reducer` must match spec.gamma and the filter's eta when a filter is set.
inline ApproxSet build_approx_set(const ApproxSetSpec& s, const ShiftReducer* reducer = nullptr) {
  const BigInt& nh = s.scale();
  if (s.n < 1 || nh < 1) throw ParameterError("approximation set needs n >= 1 and n-hat >= 1");
  if (s.window_lo < 0 || s.window_hi > 1 || s.window_lo > s.window_hi)
    throw ParameterError("window I must be a subinterval of [0, 1]");
  if (!s.psi_infinite && s.psi.lo < 0) throw ParameterError("Psi(n) must be nonnegative");
  ApproxSet out;
  out.n = s.n;
  out.hat_n = nh;
  if (!s.psi_infinite && s.psi.hi == 0) return out;

  std::optional<ShiftReducer> own;
  if (s.filter && !reducer) {
    own.emplace(s.gamma, s.filter->eta);
    reducer = &*own;
  }
  std::optional<ShiftAnchor> anchor;
  if (s.filter) anchor = reducer->anchor(nh);

  BigRational H(nh);
  LinearReal lo_form(BigRational(-1), s.gamma), hi_form(BigRational(-1), s.gamma);
  lo_form.add_constant(H * s.window_lo);
  hi_form.add_constant(H * s.window_hi);
  BigInt a_min = detail::ceil_linear(lo_form), a_max = floor_of(hi_form);

  RealEnclosure g = enclose(s.gamma, approx_endpoint_width());
  std::vector<Interval> inner, outer;
  for (BigInt a = a_min; a <= a_max; ++a) {
    if (anchor && gcd(BigInt(anchor->q_t * a + anchor->c_t), nh) != 1) continue;
    ++out.admissible;
    if (s.psi_infinite) {
      inner.push_back({BigRational(0), BigRational(1)});
      outer.push_back({BigRational(0), BigRational(1)});
      break;
    }
    BigRational c_lo = BigRational(a) + g.lo, c_hi = BigRational(a) + g.hi;
    outer.push_back({(c_lo - s.psi.hi) / H, (c_hi + s.psi.hi) / H});
    BigRational ilo = (c_hi - s.psi.lo) / H, ihi = (c_lo + s.psi.lo) / H;
    if (ilo < ihi) inner.push_back({std::move(ilo), std::move(ihi)});
  }
  out.inner = IntervalSet::from(std::move(inner));
  out.outer = IntervalSet::from(std::move(outer));
  return out;
}

/// n-hat from which mu(E_n) <= 3 mu(I) Psi(n) is guaranteed: n-hat >= 2/mu(I).
inline BigInt measure_bound_threshold(const BigRational& window_lo, const BigRational& window_hi) {
  BigRational m = window_hi - window_lo;
  if (m <= 0) throw ParameterError("window must have positive length");
  return ceil_of(BigRational(2) / m);
}

// ---------------------------------------------------------------------------
// Sums over families of sets.

struct DivergenceReport {
  RealEnclosure sum_measure;  // sum_n mu(E_n)
  RealEnclosure sum_psi;      // mu(I) sum_n psi(n-hat) (log n)^{k-1}
  RealEnclosure ratio;
};

inline DivergenceReport divergence_sum(const std::vector<ApproxSet>& sets, const std::vector<RealEnclosure>& psi_terms,
                                       const BigRational& mu_window) {
  if (sets.size() != psi_terms.size()) throw ParameterError("one psi term per set is required");
  DivergenceReport rep{{0, 0}, {0, 0}, {0, 0}};
  for (std::size_t i = 0; i < sets.size(); ++i) {
    rep.sum_measure = rep.sum_measure + sets[i].measure();
    rep.sum_psi = rep.sum_psi + psi_terms[i];
  }
  rep.sum_psi = mu_window * rep.sum_psi;
  if (rep.sum_psi.lo > 0) rep.ratio = rep.sum_measure * reciprocal(rep.sum_psi);
  return rep;
}

enum class SweepMode { Exact, Grid };

struct OverlapReport {
  RealEnclosure sum_measure;  // sum_n mu(E_n)
  RealEnclosure sum_pairs;    // sum_{m,n} mu(E_n cap E_m), diagonal included
  RealEnclosure bc_ratio;     // (sum_n mu(E_n))^2 / sum_pairs
  SweepMode mode = SweepMode::Exact;
};

namespace detail {

// integral of c and c^2, c(x) = number of sets covering x
template <class Coord>
std::pair<Coord, Coord> coverage_moments(std::vector<std::pair<Coord, int>>& events) {
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Coord first = 0, second = 0;
  long long c = 0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    c += events[i].second;
    Coord len = events[i + 1].first - events[i].first;
    if (c != 0 && len != 0) {
      first += Coord(static_cast<long>(c)) * len;
      second += Coord(static_cast<long>(c * c)) * len;
    }
  }
  return {first, second};
}

constexpr int kGridBits = 96;

inline __int128 to_grid(const BigRational& x, bool up) {
  BigInt scaled;
  BigInt num = x.get_num();
  mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), kGridBits);
  if (up)
    mpz_cdiv_q(scaled.get_mpz_t(), num.get_mpz_t(), x.get_den_mpz_t());
  else
    mpz_fdiv_q(scaled.get_mpz_t(), num.get_mpz_t(), x.get_den_mpz_t());
  // x lies in [0, 1], so scaled fits in 97 bits
  __int128 out = 0;
  std::size_t words = mpz_size(scaled.get_mpz_t());
  for (std::size_t w = words; w-- > 0;) out = (out << 64) | static_cast<__int128>(mpz_getlimbn(scaled.get_mpz_t(), w));
  return out;
}

inline BigRational from_grid(__int128 v) {
  BigInt hi = static_cast<unsigned long>(static_cast<std::uint64_t>(v >> 64));
  BigInt lo = static_cast<unsigned long>(static_cast<std::uint64_t>(v));
  BigInt all = (hi << 64) + lo;
  BigRational r(all);
  mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), kGridBits);
  r.canonicalize();
  return r;
}

}  // namespace detail

/// Sums of mu(E_n) and mu(E_n cap E_m) over all ordered pairs by one coverage
/// sweep. Exact mode uses rational endpoints; grid mode rounds endpoints
/// outward (outer sets) and inward (inner sets) to multiples of 2^-96.
inline OverlapReport overlap_matrix_sum(const std::vector<ApproxSet>& sets, SweepMode mode = SweepMode::Exact) {
  if (sets.size() > 3000) throw BudgetExceeded("overlap matrix limited to X <= 3000 sets");
  OverlapReport rep;
  rep.mode = mode;
  auto run = [&](bool use_outer) -> std::pair<BigRational, BigRational> {
    if (mode == SweepMode::Exact) {
      std::vector<std::pair<BigRational, int>> ev;
      for (const auto& s : sets)
        for (const auto& p : (use_outer ? s.outer : s.inner).intervals()) {
          ev.push_back({p.lo, +1});
          ev.push_back({p.hi, -1});
        }
      return detail::coverage_moments(ev);
    }
    std::vector<std::pair<__int128, int>> ev;
    for (const auto& s : sets)
      for (const auto& p : (use_outer ? s.outer : s.inner).intervals()) {
        ev.push_back({detail::to_grid(p.lo, !use_outer), +1});
        ev.push_back({detail::to_grid(p.hi, use_outer), -1});
      }
    auto [m1, m2] = detail::coverage_moments(ev);
    return {detail::from_grid(m1), detail::from_grid(m2)};
  };
  auto [in1, in2] = run(false);
  bool exact = std::all_of(sets.begin(), sets.end(), [](const ApproxSet& s) { return s.exact(); });
  auto [out1, out2] = exact && mode == SweepMode::Exact ? std::pair{in1, in2} : run(true);
  rep.sum_measure = {in1, out1};
  rep.sum_pairs = {in2, out2};
  if (in2 > 0)
    rep.bc_ratio = {in1 * in1 / out2, out1 * out1 / in2};
  else
    rep.bc_ratio = {BigRational(0), BigRational(0)};
  return rep;
}

/// min over the g cells J of [0, 1] of mu(S cap J) / mu(J).
inline BigRational density_profile(const IntervalSet& s, unsigned long g) {
  if (g < 1) throw ParameterError("grid size must be at least 1");
  BigRational best = 1;
  BigRational cell = make_rational(1, g);
  for (unsigned long i = 0; i < g; ++i) {
    IntervalSet J = IntervalSet::range(cell * i, cell * (i + 1));
    BigRational d = s.intersect(J).measure() / cell;
    if (d < best) best = d;
  }
  return best;
}

inline void write_measure_csv(std::ostream& os, const std::vector<ApproxSet>& sets,
                              const std::vector<RealEnclosure>& psi_terms, unsigned digits = 20) {
  os << "n,n_hat,mu_lo,mu_hi,psi_term_lo,psi_term_hi\n";
  for (std::size_t i = 0; i < sets.size(); ++i) {
    auto m = sets[i].measure();
    os << sets[i].n << ',' << sets[i].hat_n << ',' << to_decimal(m.lo, digits, Rounding::Down) << ','
       << to_decimal(m.hi, digits, Rounding::Up) << ',' << to_decimal(psi_terms[i].lo, digits, Rounding::Down) << ','
       << to_decimal(psi_terms[i].hi, digits, Rounding::Up) << '\n';
  }
}

}  // namespace diophlab
