// phi(n) against the shift-sensitive totient phi_{gamma,eta}(n) for gamma = sqrt 2.

#include "diophlab/diophlab.hpp"

#include <iostream>

using namespace diophlab;

int main() {
  ShiftReducer r(RealSpec::sqrt(2), BigRational(1, 2));
  std::cout << "n      phi(n)  phi_shift(n)  anchor c_t/q_t\n";
  for (unsigned long n : {10UL, 12UL, 30UL, 100UL, 144UL, 720UL, 1000UL}) {
    ShiftAnchor an = r.anchor(n);
    std::cout << n << "\t" << totient(n) << "\t" << r.phi(n) << "\t\t" << an.c_t << "/" << an.q_t << '\n';
  }
}
