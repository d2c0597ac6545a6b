#pragma once
#include "floq/lattice.hpp"

#include <random>

namespace floq::test {

// Three barriers of width 0.5 spaced by 2: a 6-long supercell that 48 points resolve.
inline LatticeSpec small_spec() {
  LatticeSpec spec;
  spec.spacing = 2.0;
  return spec;
}

inline ComplexState random_state(Index n, double spacing, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexState s{CVector(n), spacing};
  for (Index j = 0; j < n; ++j) s.amplitudes[j] = {g(rng), g(rng)};
  return normalized(s);
}

inline double max_diff(const ComplexState& a, const ComplexState& b) {
  return (a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff();
}

}  // namespace floq::test
