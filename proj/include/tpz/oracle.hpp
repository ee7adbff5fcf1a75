#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tpz/coefficients.hpp"
#include "tpz/types.hpp"

namespace tpz {

/// Largest n accepted by the dense oracle: TPZ_DENSE_CAP if set, else 2048.
Index default_dense_cap();

BlockMatrix dense_toeplitz(const CoefficientTables& tables, Index n);

struct DenseSolution {
  BlockVector z;
  double residual = 0.0;  // ||T_n Z - Y||_F
};

/// LU with partial pivoting. cap 0 means default_dense_cap().
DenseSolution dense_solve(const CoefficientTables& tables, const BlockVector& Y, Index cap = 0);
BlockMatrix dense_inverse(const CoefficientTables& tables, Index n, Index cap = 0);

/// Largest n accepted by levinson_solve by default.
inline constexpr Index kLevinsonCap = 16384;

/// Block Levinson recursion, O(n^2) block operations.
BlockVector levinson_solve(const CoefficientTables& tables, const BlockVector& Y,
                           Index cap = kLevinsonCap);

/// Right-hand side y_1, y_2, ... with a bound on its tail.
struct RhsSequence {
  int d = 1;
  std::function<Mat(Index)> y;  // 1-based
  /// Upper bound for sum_{k > N} ||y_k||.
  std::function<double(Index)> tail;
  std::string description;

  BlockVector head(Index n) const;
};

RhsSequence finitely_supported(const std::vector<Mat>& blocks);
/// y_k = ratio^k * base.
RhsSequence geometric_rhs(const Mat& base, double ratio);

/// z_s = sum_t (T_inf^{-1})^{s,t} y_t for s = 1..horizon, with the t-sum cut
/// where the neglected part is below tol.
std::vector<Mat> infinite_solution(const CoefficientTables& tables, const RhsSequence& y,
                                   Index horizon, double tol = 1e-13);

enum class SolveMethod { Fast, Dense, Levinson };

struct ConvergenceReport {
  std::vector<Index> ns;
  std::vector<double> deltas;  // sum_{k<=n} ||z_{n,k} - z_k||_F
  std::string y_description;
};

ConvergenceReport convergence_experiment(const CoefficientTables& tables, const RhsSequence& y,
                                         const std::vector<Index>& ns,
                                         SolveMethod method = SolveMethod::Fast);

}  // namespace tpz
