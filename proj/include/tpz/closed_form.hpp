#pragma once

#include <vector>

#include "tpz/coefficients.hpp"
#include "tpz/types.hpp"

namespace tpz {

struct ThetaOptions {
  int nodes = 512;
  /// Contour radius; 0 picks a quarter of the distance to the nearest other
  /// singularity or the unit circle.
  double radius = 0.0;
  double tol = 1e-9;
};

/// sum_{l>=0} C(n+l, i) C(j+l, j) x^{n+l-i} y^l in closed form.
cplx pascal_sum_closed(Index n, int i, int j, cplx x, cplx y);

/// Finite-dimensional data for symbols with K >= 1 poles. Matrices are dM x dM
/// (or dM x d) and ordered by pole group, then multiplicity index.
class ClosedFormKit {
 public:
  explicit ClosedFormKit(const RationalSymbol& sym, ThetaOptions opts = {});

  const RationalSymbol& symbol() const { return sym_; }
  int d() const { return sym_.d(); }
  int M() const { return sym_.M(); }
  Index dM() const { return Index(sym_.d()) * sym_.M(); }
  /// Scalar index of (mu, i), i 1-based.
  int slot(int mu, int i) const { return offset_[static_cast<std::size_t>(mu)] + i - 1; }

  const Mat& Lambda() const { return lambda_; }
  const Mat& Theta() const { return theta_; }
  const Mat& theta(int mu, int j) const {
    return thetas_[static_cast<std::size_t>(mu)][static_cast<std::size_t>(j - 1)];
  }
  double theta_radius(int mu) const { return radii_[static_cast<std::size_t>(mu)]; }
  const Mat& rho_stack() const { return rho_; }
  const Mat& rho_tilde_stack() const { return rho_tilde_; }

  /// Scalar (M x M or M x 1) versions; the d x d blocks are these times I_d.
  /// Row group mu is multiplied by |p_mu|^scale, so that large negative powers
  /// of p_mu can be formed without overflow.
  Mat pvec_scalar(Index n, double scale = 0.0) const;
  Mat Pi_scalar(Index n, double scale = 0.0) const;
  Mat Xi_scalar(Index n, double scale = 0.0) const;
  Mat Phi_scalar(Index n, double scale = 0.0) const;
  Mat Lambda_scalar() const { return lambda_scalar_; }

  Mat pvec(Index n) const;
  Mat Pi(Index n) const;
  Mat Xi(Index n) const;
  Mat Phi(Index n) const;
  Mat G(Index n) const;
  Mat G_tilde(Index n) const;

  Mat v(Index n, double scale = 0.0) const;
  Mat v_tilde(Index n, double scale = 0.0) const;
  Mat w(Index n, double scale = 0.0) const;
  Mat w_tilde(Index n, double scale = 0.0) const;

  /// beta^*_{n+k+l+1} = p_l^T Pi_n Theta p_k, valid for n + k + l >= m0.
  Mat beta_star(Index n, Index k, Index l) const;
  /// beta_{n+k+l+1} = p_k^* (Pi_n Theta)^* conj(p_l).
  Mat beta(Index n, Index k, Index l) const;

  /// b^{k}_{n,u,l} for n >= u >= m0+1 and b~^{k}_{n,u,l} for 1 <= u <= n-m0.
  Mat b_closed(Index n, Index u, int k, Index l) const;
  Mat b_tilde_closed(Index n, Index u, int k, Index l) const;

  /// s x block-row product of a scalar M x M matrix with a dM x d stack.
  Mat scalar_apply(const Mat& scalar, const Mat& stack) const;

 private:
  void build_lambda();
  void build_theta(const ThetaOptions& opts);

  RationalSymbol sym_;
  std::vector<int> offset_;
  std::vector<int> group_;   // scalar slot -> mu
  std::vector<int> index_;   // scalar slot -> i (1-based)
  Mat lambda_scalar_;
  Mat lambda_;
  std::vector<std::vector<Mat>> thetas_;
  std::vector<double> radii_;
  Mat theta_;
  Mat rho_;
  Mat rho_tilde_;
};

/// Rank corrections of the ARMA inverse formulas for one n. With S the diagonal
/// of |p_mu|^n per pole group and B = S^{-1} Pi_n Theta, the factors are stored
/// rescaled as ell_hat = ell S, r_hat = S^{-1} r (and likewise for the tilde
/// pair), which stay bounded for every n; products ell r are scale free.
class SolveVectors {
 public:
  SolveVectors(const ClosedFormKit& kit, Index n);

  Index n() const { return n_; }
  /// Spectral radius of G~_n G_n.
  double resolvent_spectral_radius() const { return radius_; }

  const Mat& ell_hat(Index s) const { return ell_hat_[static_cast<std::size_t>(s - 1)]; }
  const Mat& ell_tilde_hat(Index s) const {
    return ell_tilde_hat_[static_cast<std::size_t>(s - 1)];
  }
  const Mat& r_hat(Index t) const { return r_hat_[static_cast<std::size_t>(t - 1)]; }
  const Mat& r_tilde_hat(Index t) const { return r_tilde_hat_[static_cast<std::size_t>(t - 1)]; }

  /// Unscaled vectors and resolvents; only meaningful while |p|^{-n} is representable.
  Mat ell(Index s) const;
  Mat ell_tilde(Index s) const;
  Mat r(Index t) const;
  Mat r_tilde(Index t) const;
  Mat resolvent() const;
  Mat resolvent_tilde() const;

 private:
  const ClosedFormKit* kit_;
  Index n_;
  Eigen::VectorXd scale_;  // |p_mu|^n on each of the dM rows
  double radius_ = 0.0;
  std::vector<Mat> ell_hat_, ell_tilde_hat_, r_hat_, r_tilde_hat_;
};

enum class Region { I = 1, II = 2, III = 3, IV = 4 };

/// Regions of the AR/ARMA closed forms containing block (s, t).
std::vector<Region> regions_for(Index n, int m0, Index s, Index t);

/// Lower-triangular Gram sum sum_{l=1}^{s^t} a~^*_{s-l} a~_{t-l} (tilde) or the
/// upper one sum_{l=s v t}^{n} a^*_{l-s} a_{l-t}.
Mat first_term_gram(const RationalSymbol& sym, Index n, Index s, Index t, bool tilde);

struct ClosedInverseOptions {
  double overlap_tol = 1e-11;
  bool check_overlap = true;
};

/// One block of T_n^{-1} via the AR (K = 0) or ARMA (K >= 1) closed forms.
/// When several regions contain (s, t) all are evaluated and compared.
Mat inverse_block_ar(const RationalSymbol& sym, Index n, Index s, Index t,
                     const ClosedInverseOptions& opts = {});
Mat inverse_block_arma(const ClosedFormKit& kit, const SolveVectors& sv, Index n, Index s,
                       Index t, const ClosedInverseOptions& opts = {});
Mat inverse_block_arma(const ClosedFormKit& kit, Index n, Index s, Index t,
                       const ClosedInverseOptions& opts = {});

/// Full T_n^{-1} from the closed forms. Gram sums are accumulated along
/// diagonals; regions (ii)/(iv) are preferred.
BlockMatrix closed_form_inverse(const CoefficientTables& tables, Index n, int threads = 1);

/// Largest disagreement between overlapping region formulas over all blocks.
double region_overlap_defect(const CoefficientTables& tables, Index n);

}  // namespace tpz
