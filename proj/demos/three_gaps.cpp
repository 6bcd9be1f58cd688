// The gaps of {0, {alpha}, ..., {m alpha}, 1} take at most three values; the
// largest one has a closed form in the convergents of alpha.

#include "diophlab/diophlab.hpp"

#include <iostream>

using namespace diophlab;

int main() {
  RealSpec alpha = RealSpec::sqrt(2);
  ContinuedFraction cf = cf_of(alpha);
  for (unsigned long m : {5UL, 12UL, 40UL, 100UL}) {
    LargestGap lg = largest_gap(m, cf, pow2(-60));
    BruteGaps bg = brute_gaps(m, alpha);
    std::cout << "m=" << m << "  distinct gaps: " << bg.distinct.size() << "  largest = " << lg.form.x << " sqrt2 "
              << (lg.form.y < 0 ? "- " : "+ ") << abs(lg.form.y) << " ~ " << lg.enclosure.mid().get_d()
              << (same_gap(lg.form, bg.largest, alpha) ? "  (matches the sorted orbit)" : "  MISMATCH") << '\n';
  }
}
