// Quasi-independence diagnostic for the sets E_n with Psi(n) = psi(n) / ||n sqrt 2||
// and psi(n) = 1/(4 n (log n)^2): the overlap ratio (sum mu(E_n))^2 / sum mu(E_m cap E_n).

#include "diophlab/acceptance.hpp"

#include <iostream>

using namespace diophlab;

int main() {
  for (std::uint64_t X : {100, 250, 500, 1000}) {
    auto sets = acceptance::bc_fixture_sets(X);
    OverlapReport rep = overlap_matrix_sum(sets, SweepMode::Grid);
    std::cout << "X=" << X << "  sum mu(E_n)=" << rep.sum_measure.lo.get_d() << "  sum of overlaps="
              << rep.sum_pairs.lo.get_d() << "  ratio=" << rep.bc_ratio.lo.get_d() << '\n';
  }
}
