#pragma once

#include "contfrac.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace diophlab {

/// m = r q_k + q_{k-1} + s with 1 <= r <= a_{k+1}, 0 <= s <= q_k - 1, q_{-1} = 0.
struct GapDecomposition {
  BigInt m;
  std::size_t k = 0;
  BigInt r;
  BigInt s;
};

inline GapDecomposition gap_decomposition(const BigInt& m, const ContinuedFraction& cf) {
  if (m < 1) throw ParameterError("gap decomposition needs m >= 1");
  // q_k + q_{k-1} <= m < q_{k+1} + q_k
  BigInt q_prev = 0, q = 1;
  for (std::size_t k = 0;; ++k) {
    if (!cf.has(k + 1)) throw DepthError("continued fraction too short to decompose m = " + m.get_str());
    BigInt q_next = cf.a(k + 1) * q + q_prev;
    if (m < q_next + q) {
      GapDecomposition g;
      g.m = m;
      g.k = k;
      mpz_fdiv_qr(g.r.get_mpz_t(), g.s.get_mpz_t(), BigInt(m - q_prev).get_mpz_t(), q.get_mpz_t());
      return g;
    }
    q_prev = std::move(q);
    q = std::move(q_next);
  }
}

/// x alpha + y with integer coefficients.
struct LinearForm {
  BigInt x;
  BigInt y;
  bool operator==(const LinearForm&) const = default;
  LinearForm operator-(const LinearForm& o) const { return {x - o.x, y - o.y}; }
  LinearForm operator+(const LinearForm& o) const { return {x + o.x, y + o.y}; }
  LinearReal real(const RealSpec& alpha) const {
    LinearReal v(BigRational(x), alpha);
    v.add_constant(BigRational(y));
    return v;
  }
  RealEnclosure at(const RealEnclosure& alpha) const { return BigRational(x) * alpha + BigRational(y); }
};

struct LargestGap {
  GapDecomposition decomposition;
  LinearForm form;  // gap = form.x alpha + form.y
  RealEnclosure enclosure;
};

/// |D_j| = (-1)^j (q_j alpha - p_j) as a linear form.
inline LinearForm abs_d_form(const ConvergentTable& t, std::size_t j) {
  LinearForm f{t.q[j], -t.p[j]};
  if (j % 2) f = {-f.x, -f.y};
  return f;
}

/// Largest gap between consecutive points of {0, {alpha}, ..., {m alpha}, 1}.
inline LargestGap largest_gap(const BigInt& m, const ContinuedFraction& cf, const BigRational& width) {
  if (cf.finite()) throw ParameterError("largest-gap formula requires irrational alpha");
  LargestGap out;
  out.decomposition = gap_decomposition(m, cf);
  const auto& g = out.decomposition;
  auto t = convergents(cf, g.k + 1);
  LinearForm dk = abs_d_form(t, g.k), dk1 = abs_d_form(t, g.k + 1);
  BigInt a = cf.a(g.k + 1);
  auto times = [](const BigInt& c, const LinearForm& f) { return LinearForm{c * f.x, c * f.y}; };
  if (g.s < t.q[g.k] - 1) {
    out.form = g.r == a ? dk1 + dk : dk1 + times(a - g.r + 1, dk);
  } else {
    out.form = g.r == a ? dk : dk1 + times(a - g.r, dk);
  }
  out.enclosure = out.form.real(cf.value()).enclose(width);
  return out;
}

// ---------------------------------------------------------------------------
// Orbit {i alpha} for 0 <= i <= n_max, each point an exact linear form with a
// certified enclosure.

class Orbit {
 public:
  Orbit(RealSpec alpha, std::size_t n_max, BigRational width = pow2(-96)) : alpha_(std::move(alpha)), n_max_(n_max) {
    build(width);
  }

  const RealSpec& alpha() const { return alpha_; }
  std::size_t size() const { return forms_.size(); }
  const LinearForm& form(std::size_t i) const { return forms_.at(i); }
  const RealEnclosure& point(std::size_t i) const { return points_.at(i); }
  const RealEnclosure& alpha_enclosure() const { return alpha_enc_; }

  /// Indices 0..m ordered by {i alpha}; points with equal value keep the smallest index.
  std::vector<std::size_t> sorted(std::size_t m) const {
    if (m > n_max_) throw ParameterError("orbit prefix exceeds the precomputed range");
    std::vector<std::size_t> idx(m + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return less(i, j); });
    std::vector<std::size_t> out;
    for (std::size_t i : idx)
      if (out.empty() || cmp(out.back(), i) != 0) out.push_back(i);
    return out;
  }

  /// Certified comparison of {i alpha} and {j alpha}.
  int cmp(std::size_t i, std::size_t j) const {
    if (i == j) return 0;
    const RealEnclosure &a = points_[i], &b = points_[j];
    if (a.hi < b.lo) return -1;
    if (b.hi < a.lo) return 1;
    return sign((forms_[i] - forms_[j]).real(alpha_));
  }
  bool less(std::size_t i, std::size_t j) const { return cmp(i, j) < 0; }

 private:
  void build(const BigRational& width) {
    alpha_enc_ = enclose(alpha_, width / BigRational(static_cast<unsigned long>(n_max_ + 1)));
    forms_.clear();
    points_.clear();
    for (std::size_t i = 0; i <= n_max_; ++i) {
      BigRational bi(static_cast<unsigned long>(i));
      RealEnclosure e = bi * alpha_enc_;
      BigInt f = floor_of(e.lo);
      if (floor_of(e.hi) != f) f = floor_of(LinearReal(bi, alpha_));
      forms_.push_back({BigInt(static_cast<unsigned long>(i)), -f});
      points_.push_back(forms_.back().at(alpha_enc_));
    }
  }

  RealSpec alpha_;
  std::size_t n_max_;
  RealEnclosure alpha_enc_;
  std::vector<LinearForm> forms_;
  std::vector<RealEnclosure> points_;
};

struct BruteGaps {
  std::vector<LinearForm> gaps;            // consecutive differences, left to right
  std::vector<RealEnclosure> enclosures;   // of each gap
  std::vector<LinearForm> distinct;        // distinct gap values, ascending
  LinearForm largest;
};

/// Exhaustive gaps of {0, {alpha}, ..., {m alpha}, 1}.
inline BruteGaps brute_gaps(const Orbit& orbit, std::size_t m) {
  BruteGaps out;
  auto order = orbit.sorted(m);
  const RealSpec& alpha = orbit.alpha();
  LinearForm one{0, 1};
  auto enc = [&](const LinearForm& f) { return f.at(orbit.alpha_enclosure()); };
  for (std::size_t i = 0; i < order.size(); ++i) {
    LinearForm right = i + 1 < order.size() ? orbit.form(order[i + 1]) : one;
    LinearForm g = right - orbit.form(order[i]);
    out.gaps.push_back(g);
    out.enclosures.push_back(enc(g));
  }
  auto cmp = [&](const LinearForm& a, const LinearForm& b) {
    if (a == b) return 0;
    RealEnclosure ea = enc(a), eb = enc(b);
    if (ea.hi < eb.lo) return -1;
    if (eb.hi < ea.lo) return 1;
    return sign((a - b).real(alpha));
  };
  for (const auto& g : out.gaps) {
    bool seen = false;
    for (const auto& d : out.distinct)
      if (cmp(d, g) == 0) seen = true;
    if (!seen) out.distinct.push_back(g);
  }
  std::sort(out.distinct.begin(), out.distinct.end(),
            [&](const LinearForm& a, const LinearForm& b) { return cmp(a, b) < 0; });
  out.largest = out.distinct.back();
  return out;
}

inline BruteGaps brute_gaps(std::size_t m, const RealSpec& alpha, const BigRational& width = pow2(-96)) {
  return brute_gaps(Orbit(alpha, m, width), m);
}

/// Certified equality of two gap values.
inline bool same_gap(const LinearForm& a, const LinearForm& b, const RealSpec& alpha) {
  return a == b || sign((a - b).real(alpha)) == 0;
}

// ---------------------------------------------------------------------------
// Small shifts: b in [1, q_t] with ||b alpha - gamma|| <= 2 / q_t.

struct SmallShift {
  BigInt b;
  BigInt q_t;
  bool exact_hit = false;  // {gamma} coincides with an orbit point
};

namespace detail {

inline LinearReal shifted(const LinearForm& f, const RealSpec& alpha, const LinearReal& gamma_frac) {
  LinearReal v = f.real(alpha);
  v.add(gamma_frac, -1);
  return v;
}

}  // namespace detail

/// Locates {gamma} between consecutive orbit points {i alpha}, 0 <= i <= q_t, and
/// returns the nearer endpoint with positive index.
inline SmallShift find_small_shift(std::size_t t, const ContinuedFraction& cf, const RealSpec& gamma) {
  auto tab = convergents(cf, t);
  const BigInt& qt = tab.q[t];
  if (!qt.fits_ulong_p() || qt > 50000000) throw ParameterError("q_t too large for the orbit scan");
  const std::size_t m = qt.get_ui();
  Orbit orbit(cf.value(), m);
  auto order = orbit.sorted(m);
  const RealSpec& alpha = cf.value();
  LinearReal gfrac(1, gamma);
  gfrac.add_constant(-BigRational(floor_of(gfrac)));
  SmallShift out;
  out.q_t = qt;
  auto to_b = [&](std::size_t i) { return i == 0 ? qt : BigInt(static_cast<unsigned long>(i)); };
  // largest position whose point is <= {gamma}
  std::size_t lo = 0, hi = order.size();
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    int c = sign(detail::shifted(orbit.form(order[mid]), alpha, gfrac));
    if (c == 0) {
      out.b = to_b(order[mid]);
      out.exact_hit = true;
      return out;
    }
    if (c < 0) lo = mid; else hi = mid;
  }
  if (sign(detail::shifted(orbit.form(order[lo]), alpha, gfrac)) == 0) {
    out.b = to_b(order[lo]);
    out.exact_hit = true;
    return out;
  }
  std::size_t left = order[lo];
  bool has_right = lo + 1 < order.size();
  std::size_t right = has_right ? order[lo + 1] : 0;  // the point 1 stands for index 0
  LinearForm right_form = has_right ? orbit.form(right) : LinearForm{0, 1};
  // gamma - left vs right - gamma
  LinearReal gap_left = gfrac;
  gap_left.add(orbit.form(left).real(alpha), -1);
  LinearReal gap_right = right_form.real(alpha);
  gap_right.add(gfrac, -1);
  bool left_closer = compare(gap_left, gap_right) <= 0;
  std::size_t pick = left_closer ? left : right;
  if (pick == 0) pick = left_closer ? right : left;
  out.b = to_b(pick);
  return out;
}

/// ||b alpha - gamma|| <= 2 / q_t, certified.
inline bool certify_small_shift(const SmallShift& s, const ContinuedFraction& cf, const RealSpec& gamma) {
  LinearReal v(BigRational(s.b), cf.value());
  v.add(-1, gamma);
  return compare_dist(v, make_rational(2, s.q_t)) <= 0;
}

/// Exhaustive minimiser of ||b alpha - gamma|| over 1 <= b <= q_t.
inline BigInt find_small_shift_brute(std::size_t t, const ContinuedFraction& cf, const RealSpec& gamma) {
  auto tab = convergents(cf, t);
  const std::size_t m = tab.q[t].get_ui();
  BigRational w = pow2(-80);
  std::size_t best = 1;
  RealEnclosure best_d;
  auto dist = [&](std::size_t b) {
    LinearReal v(BigRational(static_cast<unsigned long>(b)), cf.value());
    v.add(-1, gamma);
    return dist_nearest_integer(v.enclose(w));
  };
  best_d = dist(1);
  for (std::size_t b = 2; b <= m; ++b) {
    RealEnclosure d = dist(b);
    if (d.hi < best_d.lo) {
      best = b;
      best_d = d;
    } else if (!(best_d.hi < d.lo) && d.mid() < best_d.mid()) {
      best = b;
      best_d = d;
    }
  }
  return BigInt(static_cast<unsigned long>(best));
}

}  // namespace diophlab
