#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "tpz/closed_form.hpp"
#include "tpz/coefficients.hpp"
#include "tpz/types.hpp"

namespace tpz {

/// Q_{mu,i,n} Y for i = 1..m_mu, where Q_{mu,i,n} is upper triangular block
/// Toeplitz with entries C(k+i-1, i-1) p_mu^k I_d. Y has n*d rows and any
/// number of columns; mu is 0-based. O(n m_mu) block operations.
std::vector<Mat> apply_Q(const RationalSymbol& sym, int mu, const Mat& Y);
/// Q^*_{mu,i,n} Y (lower triangular, conj(p_mu)), computed front to back.
std::vector<Mat> apply_Q_adjoint(const RationalSymbol& sym, int mu, const Mat& Y);

enum class GramVariant { Tilde, Plain };

/// A~_n Y and A~_n^* Y (Tilde), or A_n Y and A_n^* Y (Plain), in O(n (M + m0)) blocks.
Mat apply_A(const RationalSymbol& sym, const Mat& Y, GramVariant variant);
Mat apply_A_adjoint(const RationalSymbol& sym, const Mat& Y, GramVariant variant);
/// A~_n^* A~_n Y or A_n^* A_n Y.
Mat apply_A_gram(const RationalSymbol& sym, const Mat& Y, GramVariant variant);
BlockVector apply_A_gram(const RationalSymbol& sym, const BlockVector& Y, GramVariant variant);

struct FastSolveOptions {
  bool check_overlap = true;
  double overlap_tol = 1e-9;
  double overlap_fraction = 0.05;
  Index overlap_min = 8;
  std::uint64_t seed = 0x7470'7a5eULL;
  bool compute_residual = true;
  /// Solve densely when n < 2 m0 + 1 instead of failing with RegionGap.
  bool dense_fallback = false;
};

struct SolveReport {
  BlockVector z;
  /// ||T_n Z - Y||_F with T_n applied through the truncated gamma band.
  double residual = -1.0;
  double relative_residual = -1.0;
  Index residual_band = 0;
  bool residual_approximate = true;
  /// Largest relative disagreement of the two assembly formulas on the sample.
  double overlap_defect = 0.0;
  Index overlap_checked = 0;
  bool dense_fallback_used = false;
  /// Wall time of the solve proper (residual excluded).
  double seconds = 0.0;
};

/// Linear-time solver of T_n(w) Z = Y for one n. Construction builds the
/// rank-correction vectors once; solve() may then be called repeatedly and
/// concurrently.
class FastSolver {
 public:
  FastSolver(const CoefficientTables& tables, Index n, FastSolveOptions opts = {});

  Index n() const { return n_; }
  SolveReport solve(const BlockVector& Y) const;

 private:
  const CoefficientTables* tables_;
  Index n_;
  FastSolveOptions opts_;
  std::unique_ptr<SolveVectors> sv_;
};

SolveReport fast_solve(const CoefficientTables& tables, const BlockVector& Y,
                       const FastSolveOptions& opts = {});

/// T_n Z through the gamma band |k| < band (band 0 means tables.gamma_band()).
BlockVector apply_toeplitz_banded(const CoefficientTables& tables, const BlockVector& Z,
                                  Index band = 0);

}  // namespace tpz
