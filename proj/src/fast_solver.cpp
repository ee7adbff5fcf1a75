#include "tpz/fast_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "tpz/error.hpp"
#include "tpz/oracle.hpp"

namespace tpz {

namespace {

using Clock = std::chrono::steady_clock;

Index blocks_of(const Mat& Y, int d) {
  if (Y.rows() % d != 0) throw Error(ErrorCode::DomainViolation, "row count is not a multiple of d");
  return Y.rows() / d;
}

/// out(n) = x(n), out(s) = p out(s+1) + x(s).
Mat upper_pass(cplx p, const Mat& X, int d) {
  const Index n = blocks_of(X, d);
  Mat out(X.rows(), X.cols());
  out.middleRows((n - 1) * d, d) = X.middleRows((n - 1) * d, d);
  for (Index s = n - 2; s >= 0; --s) {
    out.middleRows(s * d, d) = p * out.middleRows((s + 1) * d, d) + X.middleRows(s * d, d);
  }
  return out;
}

/// out(1) = x(1), out(s) = q out(s-1) + x(s).
Mat lower_pass(cplx q, const Mat& X, int d) {
  const Index n = blocks_of(X, d);
  Mat out(X.rows(), X.cols());
  out.middleRows(0, d) = X.middleRows(0, d);
  for (Index s = 1; s < n; ++s) {
    out.middleRows(s * d, d) = q * out.middleRows((s - 1) * d, d) + X.middleRows(s * d, d);
  }
  return out;
}

/// Every block of X multiplied on the left by c.
Mat left_multiply(const Mat& c, const Mat& X, int d) {
  const Index n = blocks_of(X, d);
  Mat out(X.rows(), X.cols());
  for (Index s = 0; s < n; ++s) out.middleRows(s * d, d).noalias() = c * X.middleRows(s * d, d);
  return out;
}

/// sum_j P^j (coef_j X) with P the pass for one pole, by Horner's rule.
template <class Pass>
Mat pole_sum(const std::vector<Mat>& coef, const Mat& X, int d, Pass pass) {
  const auto m = static_cast<int>(coef.size());
  Mat acc = left_multiply(coef[static_cast<std::size_t>(m - 1)], X, d);
  for (int j = m - 1; j >= 1; --j) {
    acc = pass(acc);
    acc += left_multiply(coef[static_cast<std::size_t>(j - 1)], X, d);
  }
  return pass(acc);
}

/// Banded part: out_s += sum_k c_k x_{s + sign k}.
void add_band(const std::vector<Mat>& c, const Mat& X, int d, int sign, Mat& out) {
  const Index n = blocks_of(X, d);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Index shift = sign * static_cast<Index>(k);
    for (Index s = 0; s < n; ++s) {
      const Index t = s + shift;
      if (t < 0 || t >= n) continue;
      out.middleRows(s * d, d).noalias() += c[k] * X.middleRows(t * d, d);
    }
  }
}

std::vector<Mat> band_coefficients(const RationalSymbol& sym, GramVariant v, bool adjoint) {
  std::vector<Mat> c;
  for (int k = 0; k <= sym.m0(); ++k) {
    Mat m = v == GramVariant::Tilde ? sym.rho_tilde0(k) : sym.rho0(k);
    c.push_back(adjoint ? Mat(m.adjoint()) : m);
  }
  return c;
}

std::vector<Mat> pole_coefficients(const RationalSymbol& sym, int mu, GramVariant v, bool adjoint) {
  std::vector<Mat> c;
  for (int j = 1; j <= sym.mult(mu); ++j) {
    Mat m = v == GramVariant::Tilde ? sym.rho_tilde(mu, j) : sym.rho(mu, j);
    c.push_back(adjoint ? Mat(m.adjoint()) : m);
  }
  return c;
}

}  // namespace

std::vector<Mat> apply_Q(const RationalSymbol& sym, int mu, const Mat& Y) {
  const int d = sym.d();
  const Index n = blocks_of(Y, d);
  const cplx p = sym.pole(mu);
  std::vector<Mat> z;
  for (int i = 1; i <= sym.mult(mu); ++i) {
    const Mat& prev = i == 1 ? Y : z.back();
    Mat zi(Y.rows(), Y.cols());
    zi.middleRows((n - 1) * d, d) = Y.middleRows((n - 1) * d, d);
    for (Index s = n - 2; s >= 0; --s) {
      zi.middleRows(s * d, d) = p * zi.middleRows((s + 1) * d, d);
      zi.middleRows(s * d, d) += prev.middleRows(s * d, d);
    }
    z.push_back(std::move(zi));
  }
  return z;
}

std::vector<Mat> apply_Q_adjoint(const RationalSymbol& sym, int mu, const Mat& Y) {
  const int d = sym.d();
  const Index n = blocks_of(Y, d);
  const cplx q = std::conj(sym.pole(mu));
  std::vector<Mat> w;
  for (int i = 1; i <= sym.mult(mu); ++i) {
    const Mat& prev = i == 1 ? Y : w.back();
    Mat wi(Y.rows(), Y.cols());
    wi.middleRows(0, d) = Y.middleRows(0, d);
    for (Index s = 1; s < n; ++s) {
      wi.middleRows(s * d, d) = q * wi.middleRows((s - 1) * d, d);
      wi.middleRows(s * d, d) += prev.middleRows(s * d, d);
    }
    w.push_back(std::move(wi));
  }
  return w;
}

Mat apply_A(const RationalSymbol& sym, const Mat& Y, GramVariant variant) {
  const int d = sym.d();
  const bool tilde = variant == GramVariant::Tilde;
  Mat out = Mat::Zero(Y.rows(), Y.cols());
  add_band(band_coefficients(sym, variant, false), Y, d, tilde ? 1 : -1, out);
  for (int mu = 0; mu < sym.K(); ++mu) {
    const cplx p = sym.pole(mu);
    const auto coef = pole_coefficients(sym, mu, variant, false);
    if (tilde) {
      out += pole_sum(coef, Y, d, [&](const Mat& x) { return upper_pass(p, x, d); });
    } else {
      out += pole_sum(coef, Y, d, [&](const Mat& x) { return lower_pass(std::conj(p), x, d); });
    }
  }
  return out;
}

Mat apply_A_adjoint(const RationalSymbol& sym, const Mat& Y, GramVariant variant) {
  const int d = sym.d();
  const bool tilde = variant == GramVariant::Tilde;
  Mat out = Mat::Zero(Y.rows(), Y.cols());
  add_band(band_coefficients(sym, variant, true), Y, d, tilde ? -1 : 1, out);
  for (int mu = 0; mu < sym.K(); ++mu) {
    const cplx p = sym.pole(mu);
    const auto coef = pole_coefficients(sym, mu, variant, true);
    if (tilde) {
      out += pole_sum(coef, Y, d, [&](const Mat& x) { return lower_pass(std::conj(p), x, d); });
    } else {
      out += pole_sum(coef, Y, d, [&](const Mat& x) { return upper_pass(p, x, d); });
    }
  }
  return out;
}

Mat apply_A_gram(const RationalSymbol& sym, const Mat& Y, GramVariant variant) {
  return apply_A_adjoint(sym, apply_A(sym, Y, variant), variant);
}

BlockVector apply_A_gram(const RationalSymbol& sym, const BlockVector& Y, GramVariant variant) {
  return BlockVector(apply_A_gram(sym, Y.matrix(), variant), sym.d());
}

BlockVector apply_toeplitz_banded(const CoefficientTables& tables, const BlockVector& Z, Index band) {
  const Index d = Z.d();
  const Index n = Z.n();
  if (band <= 0) band = tables.gamma_band();
  band = std::min(band, n);
  std::vector<Mat> g(static_cast<std::size_t>(band));
  for (Index k = 0; k < band; ++k) g[static_cast<std::size_t>(k)] = tables.gamma(k);
  const Mat& z = Z.matrix();
  Mat out = Mat::Zero(z.rows(), z.cols());
  for (Index s = 0; s < n; ++s) {
    auto row = out.middleRows(s * d, d);
    row.noalias() += g[0] * z.middleRows(s * d, d);
    for (Index k = 1; k < band; ++k) {
      const Mat& gk = g[static_cast<std::size_t>(k)];
      if (s - k >= 0) row.noalias() += gk * z.middleRows((s - k) * d, d);
      if (s + k < n) row.noalias() += gk.adjoint() * z.middleRows((s + k) * d, d);
    }
  }
  return BlockVector(std::move(out), d);
}

FastSolver::FastSolver(const CoefficientTables& tables, Index n, FastSolveOptions opts)
    : tables_(&tables), n_(n), opts_(opts) {
  if (n < 1) throw Error(ErrorCode::DomainViolation, "n must be positive");
  const auto& sym = tables.symbol();
  if (n < 2 * Index(sym.m0()) + 1) {
    if (!opts_.dense_fallback) {
      std::ostringstream os;
      os << "the linear-time assembly needs n >= 2 m0 + 1 = " << 2 * sym.m0() + 1 << ", got " << n;
      throw Error(ErrorCode::RegionGap, os.str());
    }
    return;
  }
  if (sym.K() >= 1) sv_ = std::make_unique<SolveVectors>(tables.kit(), n);
}

SolveReport FastSolver::solve(const BlockVector& Y) const {
  const auto& sym = tables_->symbol();
  const int d = sym.d();
  if (Y.n() != n_ || Y.d() != d) {
    throw Error(ErrorCode::DomainViolation, "right-hand side has the wrong block shape");
  }
  SolveReport rep;
  const auto start = Clock::now();
  if (n_ < 2 * Index(sym.m0()) + 1) {
    rep.z = dense_solve(*tables_, Y).z;
    rep.dense_fallback_used = true;
  } else {
    const Index m0 = sym.m0();
    const Mat& y = Y.matrix();
    const Mat at = apply_A_gram(sym, y, GramVariant::Tilde);
    const Mat a = apply_A_gram(sym, y, GramVariant::Plain);
    Mat R, Rt;
    if (sv_) {
      R = Mat::Zero(sv_->r_hat(1).rows(), y.cols());
      Rt = Mat::Zero(R.rows(), y.cols());
      for (Index t = 1; t <= n_; ++t) {
        const auto yt = y.middleRows((t - 1) * d, d);
        R.noalias() += sv_->r_hat(t) * yt;
        Rt.noalias() += sv_->r_tilde_hat(t) * yt;
      }
    }
    auto tilde_value = [&](Index s) {
      Mat z = at.middleRows((s - 1) * d, d);
      if (sv_) z.noalias() += sv_->ell_tilde_hat(s) * Rt;
      return z;
    };
    auto plain_value = [&](Index s) {
      Mat z = a.middleRows((s - 1) * d, d);
      if (sv_) z.noalias() += sv_->ell_hat(s) * R;
      return z;
    };
    Mat z(y.rows(), y.cols());
    for (Index s = 1; s <= n_; ++s) {
      z.middleRows((s - 1) * d, d) = s <= n_ - m0 ? tilde_value(s) : plain_value(s);
    }
    if (opts_.check_overlap) {
      std::vector<Index> overlap(static_cast<std::size_t>(n_ - 2 * m0));
      std::iota(overlap.begin(), overlap.end(), m0 + 1);
      const auto want = std::min<Index>(
          static_cast<Index>(overlap.size()),
          std::max<Index>(opts_.overlap_min,
                          static_cast<Index>(std::ceil(opts_.overlap_fraction * overlap.size()))));
      std::vector<Index> sample;
      std::mt19937_64 rng(opts_.seed);
      std::sample(overlap.begin(), overlap.end(), std::back_inserter(sample), want, rng);
      for (Index s : sample) {
        const Mat zt = z.middleRows((s - 1) * d, d);
        const Mat zp = plain_value(s);
        const double scale = std::max({1.0, zt.norm(), zp.norm()});
        const double defect = (zt - zp).norm() / scale;
        rep.overlap_defect = std::max(rep.overlap_defect, defect);
        if (defect > opts_.overlap_tol) {
          std::ostringstream os;
          os << "assembly formulas disagree at block " << s << " by " << defect;
          throw Error(ErrorCode::ConsistencyViolation, os.str());
        }
      }
      rep.overlap_checked = static_cast<Index>(sample.size());
    }
    rep.z = BlockVector(std::move(z), d);
  }
  rep.seconds = std::chrono::duration<double>(Clock::now() - start).count();

  if (opts_.compute_residual) {
    rep.residual_band = std::min(tables_->gamma_band(), n_);
    const BlockVector TZ = apply_toeplitz_banded(*tables_, rep.z, rep.residual_band);
    rep.residual = (TZ.matrix() - Y.matrix()).norm();
    rep.relative_residual = rep.residual / std::max(Y.matrix().norm(), 1e-300);
    rep.residual_approximate = rep.residual_band < n_ && tables_->c_decay_rate() > 0.0;
  }
  return rep;
}

SolveReport fast_solve(const CoefficientTables& tables, const BlockVector& Y,
                       const FastSolveOptions& opts) {
  const auto start = Clock::now();
  const FastSolver solver(tables, Y.n(), opts);
  const double setup = std::chrono::duration<double>(Clock::now() - start).count();
  SolveReport rep = solver.solve(Y);
  rep.seconds += setup;
  return rep;
}

}  // namespace tpz
