#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tpz/types.hpp"

namespace tpz {

/// Coefficients of one partial-fraction expansion
///   H(z)^{-1} = -rho00 - sum_mu sum_{j=1}^{m_mu} (1 - conj(p_mu) z)^{-j} rho[mu][j-1]
///               - sum_{j=1}^{m0} z^j rho0[j-1].
struct PartialFractions {
  Mat rho00;
  std::vector<Mat> rho0;               // rho_{0,1} .. rho_{0,m0}
  std::vector<std::vector<Mat>> rho;   // rho[mu][j-1] = rho_{mu,j}
};

/// Partial-fraction description of an ARMA symbol w = h h^* = h#^* h#.
/// Both expansions share d, m0, the poles and their multiplicities.
struct RationalSymbolSpec {
  int d = 1;
  int m0 = 0;
  int K = 0;
  std::vector<cplx> poles;
  std::vector<int> mults;
  PartialFractions h;
  std::optional<PartialFractions> sharp;  // required for d >= 2
};

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::optional<ErrorCode> failure;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  /// Throws Error carrying the code of the first failed check.
  void throw_if_failed() const;
};

struct ValidationOptions {
  int winding_grid = 4096;
  int factorization_grid = 512;
  double factorization_tol = 1e-8;
};

/// Checks the pole/residue constraints, that det h^{-1} (and det h#^{-1}) has no
/// zeros on the closed unit disk (boundary winding number plus interior
/// sampling), and that h h^* = h#^* h# on the unit circle.
ValidationReport validate(const RationalSymbolSpec& spec, const ValidationOptions& opts = {});

/// Immutable evaluator for a structurally well-formed spec. For d = 1 a missing
/// sharp expansion is filled in with the unsharped one.
class RationalSymbol {
 public:
  explicit RationalSymbol(RationalSymbolSpec spec);

  const RationalSymbolSpec& spec() const { return spec_; }
  int d() const { return spec_.d; }
  int m0() const { return spec_.m0; }
  int K() const { return spec_.K; }
  /// Sum of multiplicities.
  int M() const { return M_; }
  cplx pole(int mu) const { return spec_.poles[static_cast<std::size_t>(mu)]; }
  int mult(int mu) const { return spec_.mults[static_cast<std::size_t>(mu)]; }
  /// max_mu |p_mu|, zero when K = 0.
  double decay_rate() const { return decay_rate_; }

  /// rho_{0,j} for j = 0..m0 (j = 0 is rho_{0,0}); zero outside that range.
  Mat rho0(int j) const;
  /// rho_{mu,j}, mu 0-based, j = 1..m_mu.
  const Mat& rho(int mu, int j) const;
  Mat sharp_rho0(int j) const;
  const Mat& sharp_rho(int mu, int j) const;
  /// Coefficients of the tilde function: rho~ = (rho#)^*.
  Mat rho_tilde0(int j) const { return sharp_rho0(j).adjoint(); }
  Mat rho_tilde(int mu, int j) const { return sharp_rho(mu, j).adjoint(); }

  Mat h_inv(cplx z) const;
  Mat h(cplx z) const;
  Mat h_sharp_inv(cplx z) const;
  Mat h_sharp(cplx z) const;
  /// (h(1/conj(z))^*)^{-1} = (h^{-1}(1/conj(z)))^*, evaluated without inversion.
  Mat h_dagger_inv(cplx z) const;
  /// w(e^{i theta}) = h h^*, Hermitian positive definite.
  Mat w(double theta) const;

 private:
  Mat eval_pf(const PartialFractions& pf, cplx z) const;

  RationalSymbolSpec spec_;
  int M_ = 0;
  double decay_rate_ = 0.0;
};

/// Structural checks only (list lengths, matrix shapes). Throws MalformedSpec
/// or SharpShapeMismatch.
void check_structure(const RationalSymbolSpec& spec);

}  // namespace tpz
