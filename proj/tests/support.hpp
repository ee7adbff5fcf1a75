#pragma once

#include <random>

#include "tpz/rational_symbol.hpp"

namespace tpz::testing {

/// d = K = 1, m0 = 0, p = 0.5, rho_{1,1} = 1, rho_{0,0} = 0, i.e. h(z) = -(1 - z/2).
RationalSymbolSpec small_arma_spec();
/// h = I_d (K = 0, m0 = 0, rho_{0,0} = -I).
RationalSymbolSpec identity_spec(int d);
/// d = 1 AR(1): h^{-1}(z) = 1 - 0.9 z.
RationalSymbolSpec ar1_spec();

struct RandomSpecShape {
  int d = 1;
  int m0 = 0;
  std::vector<int> mults;  // one entry per pole
};

/// Valid spec with h = U D(z) V and h# = W D(z) U^* for random unitaries U, V, W
/// and a diagonal D whose scalar entries have dominant constant terms.
RationalSymbolSpec random_spec(std::mt19937_64& rng, const RandomSpecShape& shape);

Mat random_matrix(std::mt19937_64& rng, Index rows, Index cols);
Mat random_unitary(std::mt19937_64& rng, int d);

/// Twenty shapes covering d in {1,2,3}, K in {0,1,2}, m in {1,2}, m0 in {0,1,2}.
std::vector<RandomSpecShape> sweep_shapes();

}  // namespace tpz::testing
