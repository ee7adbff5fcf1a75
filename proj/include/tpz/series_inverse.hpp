#pragma once

#include <functional>
#include <vector>

#include "tpz/coefficients.hpp"
#include "tpz/types.hpp"

namespace tpz {

/// Everything the series formulas need about a minimal symbol. Built from a
/// rational symbol, or filled by hand for other symbols.
struct SeriesTables {
  int d = 1;
  std::function<Mat(Index)> a;
  std::function<Mat(Index)> a_tilde;
  std::function<Mat(Index)> beta;  // k >= 1 is all the series use
  /// F(n) >= (sum_j ||c~_j||) sum_{l >= n} ||a_l||, non-increasing in n.
  std::function<double(Index)> F;
  /// sum_k ||a_k|| and sum_k ||a~_k||.
  double a_l1 = 0.0;
  double a_tilde_l1 = 0.0;
};

SeriesTables series_tables(const CoefficientTables& tables);

/// (i): sequences b~ paired with the upper factor A~_n; (ii): b with the lower factor A_n.
enum class SeriesVariant { Tilde, Plain };

/// One u-row of the b (Plain) or b~ (Tilde) recursion, truncated to l < coeffs.size().
struct BRecursionState {
  Index n = 0;
  Index u = 1;
  int depth = 1;
  SeriesVariant variant = SeriesVariant::Plain;
  std::vector<Mat> coeffs;
  /// Bound on sum_{l >= coeffs.size()} ||b_l||.
  double tail_bound = 0.0;
};

BRecursionState b_recursion_start(const SeriesTables& t, SeriesVariant variant, Index n, Index u,
                                  Index length);
BRecursionState b_recursion_step(const BRecursionState& state, const SeriesTables& t);

struct SeriesOptions {
  double tol = 1e-10;
  int max_depth = 64;
  SeriesVariant variant = SeriesVariant::Tilde;
  /// Without contraction (F(n+1) >= 1) iterate until the increments fall below
  /// tol instead of refusing; the result is then not certified.
  bool allow_uncertified = false;
  Index max_length = Index(1) << 14;
};

struct SeriesInverseReport {
  BlockMatrix inverse;
  int depth = 0;
  Index length = 0;  // truncation point of the l-sums
  double contraction = 0.0;  // F(n+1)
  double remainder_bound = 0.0;  // infinite when not certified
  bool certified = false;
};

/// T_n(w)^{-1} from the truncated double series.
SeriesInverseReport series_inverse(const SeriesTables& t, Index n, const SeriesOptions& opts = {});
SeriesInverseReport series_inverse(const CoefficientTables& tables, Index n,
                                   const SeriesOptions& opts = {});

/// A single block; only the u-rows that enter it are iterated.
Mat inverse_block_series(const SeriesTables& t, Index n, Index s, Index t_col,
                         const SeriesOptions& opts = {});

/// Gram sums of the first term: sum_{l=1}^{s^t} a~^*_{s-l} a~_{t-l} (Tilde) or
/// sum_{l=s v t}^{n} a^*_{l-s} a_{l-t} (Plain).
Mat first_term_gram(const SeriesTables& t, Index n, Index s, Index t_col, SeriesVariant variant);

}  // namespace tpz
