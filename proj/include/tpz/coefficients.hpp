#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "tpz/rational_symbol.hpp"

namespace tpz {

class ClosedFormKit;

/// a_n with -h^{-1}(z) = sum_n a_n z^n, from the partial fractions directly.
Mat a_coeff(const RationalSymbol& sym, Index n);
/// a~_n with -h~^{-1}(z) = sum_n a~_n z^n (poles p instead of conj(p), residues (rho#)^*).
Mat a_tilde_coeff(const RationalSymbol& sym, Index n);

struct CoefficientOptions {
  int quadrature_grid = 8192;
  /// Relative size below which series terms are dropped.
  double series_rel_tol = 1e-17;
  Index horizon_cap = Index(1) << 20;
};

/// Memoized coefficient sequences of one symbol. All accessors are safe to call
/// concurrently; tables grow under an internal lock and values are returned by copy.
class CoefficientTables {
 public:
  explicit CoefficientTables(const RationalSymbol& sym, CoefficientOptions opts = {});
  ~CoefficientTables();
  CoefficientTables(const CoefficientTables&) = delete;
  CoefficientTables& operator=(const CoefficientTables&) = delete;

  const RationalSymbol& symbol() const { return sym_; }
  int d() const { return sym_.d(); }
  /// max |p_mu|: the geometric rate of a_n and a~_n.
  double decay_rate() const { return sym_.decay_rate(); }
  /// Geometric rates of c_n and c~_n (reciprocal of the smallest zero modulus of
  /// det h^{-1}, resp. det h~^{-1}).
  double c_decay_rate() const { return c_.rate; }
  double c_tilde_decay_rate() const { return ct_.rate; }

  Mat a(Index n) const { return a_coeff(sym_, n); }
  Mat a_tilde(Index n) const { return a_tilde_coeff(sym_, n); }
  /// h(z) = sum c_n z^n and h~(z) = sum c~_n z^n.
  Mat c(Index n) const;
  Mat c_tilde(Index n) const;

  /// Indices past which the a- and c-series are negligible.
  Index a_horizon() const { return a_horizon_; }
  Index c_horizon() const;
  Index c_tilde_horizon() const;

  /// gamma(k) = sum_j c_{k+j} c_j^*, gamma(-k) = gamma(k)^*.
  Mat gamma(Index k) const;
  /// Smallest L with ||gamma(k)|| negligible for |k| >= L.
  Index gamma_band() const;

  /// beta_k = sum_j a_{j+k} c~_j, dispatched to the closed form for k > m0, the
  /// series for 0 <= k <= m0 and quadrature for k < 0.
  Mat beta(Index k) const;
  Mat beta_series(Index k) const;
  Mat beta_closed(Index k) const;
  Mat beta_quadrature(Index k) const;

  /// Upper bound for sum_{l >= n} ||a_l|| (operator norms).
  double a_tail_l1(Index n) const;
  double a_tilde_tail_l1(Index n) const;
  double c_l1() const;
  double c_tilde_l1() const;
  /// F(n) = (sum_j ||c~_j||) * sum_{l >= n} ||a_l||.
  double F(Index n) const;

  /// Shared closed-form kit (K >= 1 only), built on first use.
  const ClosedFormKit& kit() const;

 private:
  /// Forward recursion h(z) N(z) = -P(z) I with P = prod (1 - q_mu z)^{m_mu} and
  /// N = -h^{-1} P a matrix polynomial.
  struct CSeries {
    std::vector<Mat> N;
    std::vector<cplx> P;
    Mat N0_inv;
    double rate = 0.0;
    mutable std::vector<Mat> values;
    mutable std::vector<double> norms;
    mutable Index horizon = -1;
    mutable double l1 = -1.0;
  };

  void init_c_series(CSeries& cs, bool tilde);
  void extend(const CSeries& cs, Index n) const;
  Index horizon_of(const CSeries& cs) const;
  double l1_of(const CSeries& cs) const;
  double a_bound_tail(Index n, bool tilde) const;
  void ensure_quadrature() const;

  RationalSymbol sym_;
  CoefficientOptions opts_;
  Index a_horizon_ = 0;
  std::vector<double> a_norm_suffix_;
  std::vector<double> at_norm_suffix_;
  CSeries c_;
  CSeries ct_;

  mutable std::recursive_mutex mutex_;
  mutable std::map<Index, Mat> gamma_cache_;
  mutable Index gamma_band_ = -1;
  mutable std::vector<Mat> phase_samples_;
  mutable std::unique_ptr<ClosedFormKit> kit_;
};

}  // namespace tpz
