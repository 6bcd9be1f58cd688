// Growth of S(N) = sum 1/(n ||n a_1|| ||n a_2||) against (log N)^3, and the
// solution counts behind a divergent/convergent comparison.

#include "diophlab/acceptance.hpp"

#include <iostream>

using namespace diophlab;

int main() {
  Figure1Result r = figure1(1000000, acceptance::figure1_alphas());
  for (std::uint64_t N = 10; N <= r.H; N *= 10)
    std::cout << "N=" << N << "  S(N)=" << r.S[N - 1] << "  S(N)/(log N)^3=" << r.S[N - 1] / std::pow(std::log(N), 3)
              << '\n';
  std::cout << "c = " << r.c << " (rounding error on S(H) below " << r.error_bound << ")\n";

  GallagherSpec s;
  s.gammas = {RealSpec(BigRational(0))};
  s.grid = dyadic_grid(12, 8);
  s.N = 10000;
  s.psi = ApproxFunction::reciprocal(4);
  auto div = gallagher_counter(s);
  s.psi = ApproxFunction::inverse_square();
  auto conv = gallagher_counter(s);
  for (std::size_t j = 0; j < s.grid.size(); ++j)
    std::cout << "a=" << s.grid[j] << "  #{||n a|| < 1/(4n)}=" << div.counts[j] << "  #{||n a|| < 1/n^2}=" << conv.counts[j]
              << '\n';
}
