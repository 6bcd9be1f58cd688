// Convergents of a few constants, with D_j = q_j alpha - p_j and the
// normalised error |D_j| q_{j+1}, which always lies in [1/2, 1].

#include "diophlab/diophlab.hpp"

#include <iomanip>
#include <iostream>

using namespace diophlab;

int main() {
  for (const char* name : {"golden", "sqrt2", "e"}) {
    ContinuedFraction cf(rules::named(name));
    std::cout << name << '\n';
    for (std::size_t j = 0; j <= 8; ++j) {
      DValue d = d_value(cf, j, pow2(-60));
      auto t = convergents(cf, j);
      std::cout << "  j=" << j << "  " << t.p[j] << "/" << t.q[j] << "  D_j=" << std::setprecision(6)
                << d.enclosure.mid().get_d() << "  |D_j| q_{j+1}=" << d.scaled.mid().get_d() << '\n';
    }
  }
}
