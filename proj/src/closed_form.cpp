#include "tpz/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "tpz/numeric.hpp"

namespace tpz {

namespace {

cplx pole_power(cplx p, Index k, double scale) {
  return scale == 0.0 ? ipow(p, k) : scaled_pow(p, k, scale);
}

// pole_power(p_mu, n, scale) for every pole; entries then only need small
// exponents on top, which keeps the large powers to one per pole.
std::vector<cplx> pole_bases(const RationalSymbol& sym, Index n, double scale, bool conjugate) {
  std::vector<cplx> out;
  for (int mu = 0; mu < sym.K(); ++mu) {
    const cplx p = conjugate ? std::conj(sym.pole(mu)) : sym.pole(mu);
    out.push_back(pole_power(p, n, scale));
  }
  return out;
}

double rel_gap(const Mat& x, const Mat& y) {
  return (x - y).norm() / std::max(1.0, std::max(x.norm(), y.norm()));
}

}  // namespace

cplx pascal_sum_closed(Index n, int i, int j, cplx x, cplx y) {
  const cplx one_minus = 1.0 - x * y;
  cplx acc(0.0, 0.0);
  for (int q = 0; q <= i; ++q) {
    for (int r = 0; r <= j; ++r) {
      const double c = binom(j, r) * binom(r + q, q) * binom(n + r, i - q);
      if (c == 0.0) continue;
      acc += c * ipow(x, n + r + q - i) * ipow(y, r + q) / ipow(one_minus, r + q + 1);
    }
  }
  return acc;
}

ClosedFormKit::ClosedFormKit(const RationalSymbol& sym, ThetaOptions opts) : sym_(sym) {
  if (sym_.K() == 0) throw Error(ErrorCode::NotApplicable, "closed-form kit needs K >= 1");
  int off = 0;
  for (int mu = 0; mu < sym_.K(); ++mu) {
    offset_.push_back(off);
    for (int i = 1; i <= sym_.mult(mu); ++i) {
      group_.push_back(mu);
      index_.push_back(i);
    }
    off += sym_.mult(mu);
  }
  const int d = sym_.d();
  rho_ = Mat::Zero(dM(), d);
  rho_tilde_ = Mat::Zero(dM(), d);
  for (int mu = 0; mu < sym_.K(); ++mu) {
    for (int j = 1; j <= sym_.mult(mu); ++j) {
      rho_.middleRows(Index(slot(mu, j)) * d, d) = sym_.rho(mu, j);
      rho_tilde_.middleRows(Index(slot(mu, j)) * d, d) = sym_.rho_tilde(mu, j);
    }
  }
  build_lambda();
  build_theta(opts);
}

void ClosedFormKit::build_lambda() {
  const int M = this->M();
  lambda_scalar_ = Mat::Zero(M, M);
  for (int a = 0; a < M; ++a) {
    const cplx pm = sym_.pole(group_[a]);
    const int i = index_[a];
    for (int b = 0; b < M; ++b) {
      const cplx pnb = std::conj(sym_.pole(group_[b]));
      const int j = index_[b];
      const cplx den = 1.0 - pm * pnb;
      cplx acc(0.0, 0.0);
      for (int r = 0; r <= j - 1; ++r) {
        const double c = binom(i - 1, r) * binom(i + j - r - 2, i - 1);
        if (c == 0.0) continue;
        acc += c * ipow(pm, j - r - 1) * ipow(pnb, i - r - 1) / ipow(den, i + j - r - 1);
      }
      lambda_scalar_(a, b) = acc;
    }
  }
  lambda_ = kron_identity(lambda_scalar_, sym_.d());
}

void ClosedFormKit::build_theta(const ThetaOptions& opts) {
  const int d = sym_.d();
  theta_ = Mat::Zero(dM(), dM());
  thetas_.assign(static_cast<std::size_t>(sym_.K()), {});
  radii_.assign(static_cast<std::size_t>(sym_.K()), 0.0);
  auto f = [&](cplx z) -> Mat { return sym_.h_sharp(z) * sym_.h_dagger_inv(z); };

  for (int mu = 0; mu < sym_.K(); ++mu) {
    const cplx p = sym_.pole(mu);
    double r = opts.radius;
    if (r <= 0.0) {
      double gap = 1.0 - std::abs(p);
      if (sym_.m0() >= 1) gap = std::min(gap, std::abs(p));
      for (int nu = 0; nu < sym_.K(); ++nu) {
        if (nu != mu) gap = std::min(gap, std::abs(p - sym_.pole(nu)));
      }
      r = 0.25 * gap;
    }
    if (r < 1e-6) {
      std::ostringstream os;
      os << "contour radius " << r << " around pole " << mu + 1 << " is too small";
      throw Error(ErrorCode::ContourTooTight, os.str());
    }
    radii_[static_cast<std::size_t>(mu)] = r;
    const int m = sym_.mult(mu);

    auto integrate = [&](int nodes) {
      std::vector<Mat> out(static_cast<std::size_t>(m), Mat::Zero(d, d));
      for (int k = 0; k < nodes; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / nodes;
        const Mat fz = f(p + std::polar(r, phi));
        for (int j = 1; j <= m; ++j) {
          out[static_cast<std::size_t>(j - 1)] -= std::polar(std::pow(r, j), j * phi) * fz;
        }
      }
      for (auto& t : out) t /= static_cast<double>(nodes);
      return out;
    };
    const auto coarse = integrate(opts.nodes);
    auto fine = integrate(2 * opts.nodes);
    for (int j = 0; j < m; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const double diff = (fine[jj] - coarse[jj]).norm();
      if (diff > opts.tol * std::max(1.0, fine[jj].norm())) {
        std::ostringstream os;
        os << "theta_{" << mu + 1 << "," << j + 1 << "} changed by " << diff
           << " when doubling the nodes";
        throw Error(ErrorCode::QuadratureNotConverged, os.str());
      }
    }
    for (int a = 1; a <= m; ++a) {
      for (int b = 1; b + a - 1 <= m; ++b) {
        theta_.block(Index(slot(mu, a)) * d, Index(slot(mu, b)) * d, d, d) =
            fine[static_cast<std::size_t>(a + b - 2)];
      }
    }
    thetas_[static_cast<std::size_t>(mu)] = std::move(fine);
  }
}

Mat ClosedFormKit::pvec_scalar(Index n, double scale) const {
  Mat out(M(), 1);
  const auto base = pole_bases(sym_, n, scale, false);
  for (int a = 0; a < M(); ++a) {
    const int i = index_[a];
    const double c = binom(n, i - 1);
    out(a, 0) = c == 0.0 ? cplx(0.0, 0.0)
                         : c * base[group_[a]] * ipow(sym_.pole(group_[a]), 1 - i);
  }
  return out;
}

Mat ClosedFormKit::Pi_scalar(Index n, double scale) const {
  Mat out = Mat::Zero(M(), M());
  const auto base = pole_bases(sym_, n, scale, false);
  for (int mu = 0; mu < sym_.K(); ++mu) {
    const cplx p = sym_.pole(mu);
    const int m = sym_.mult(mu);
    for (int i = 1; i <= m; ++i) {
      const double c = binom(n, i - 1);
      const cplx val = c == 0.0 ? cplx(0.0, 0.0) : c * base[mu] * ipow(p, 1 - i);
      for (int a = 1; a + i - 1 <= m; ++a) out(slot(mu, a), slot(mu, a + i - 1)) = val;
    }
  }
  return out;
}

Mat ClosedFormKit::Xi_scalar(Index n, double scale) const {
  Mat out(M(), M());
  const auto base = pole_bases(sym_, n, 0.0, true);
  for (int a = 0; a < M(); ++a) {
    const cplx pm = sym_.pole(group_[a]);
    const double s = scale == 0.0 ? 1.0 : std::pow(std::abs(pm), scale);
    const int i = index_[a];
    for (int b = 0; b < M(); ++b) {
      const cplx pnb = std::conj(sym_.pole(group_[b]));
      const int j = index_[b];
      const cplx den = 1.0 - pm * pnb;
      cplx acc(0.0, 0.0);
      for (int r = 0; r <= j - 1; ++r) {
        const double c = binom(n + i + j - 2, r) * binom(i + j - r - 2, i - 1);
        if (c == 0.0) continue;
        acc += c * ipow(pm, j - r - 1) * base[group_[b]] * ipow(pnb, i + j - r - 2) /
               ipow(den, i + j - r - 1);
      }
      out(a, b) = s * acc;
    }
  }
  return out;
}

Mat ClosedFormKit::Phi_scalar(Index n, double scale) const {
  Mat out(M(), M());
  const auto base = pole_bases(sym_, -n, scale, false);
  for (int a = 0; a < M(); ++a) {
    const cplx pm = sym_.pole(group_[a]);
    const int i = index_[a];
    for (int b = 0; b < M(); ++b) {
      const cplx pnb = std::conj(sym_.pole(group_[b]));
      const int j = index_[b];
      const cplx den = 1.0 - pm * pnb;
      cplx acc(0.0, 0.0);
      for (int q = 0; q <= i - 1; ++q) {
        for (int r = 0; r <= j - 1; ++r) {
          const double c = binom(j - 1, r) * binom(r + q, q) * binom(r - n, i - q - 1);
          if (c == 0.0) continue;
          acc += c * base[group_[a]] * ipow(pm, r + q + 1 - i) * ipow(pnb, r + q) /
                 ipow(den, r + q + 1);
        }
      }
      out(a, b) = acc;
    }
  }
  return out;
}

Mat ClosedFormKit::pvec(Index n) const { return kron_identity(pvec_scalar(n), d()); }
Mat ClosedFormKit::Pi(Index n) const { return kron_identity(Pi_scalar(n), d()); }
Mat ClosedFormKit::Xi(Index n) const { return kron_identity(Xi_scalar(n), d()); }
Mat ClosedFormKit::Phi(Index n) const { return kron_identity(Phi_scalar(n), d()); }
Mat ClosedFormKit::G(Index n) const { return Pi(n) * theta_ * lambda_; }
Mat ClosedFormKit::G_tilde(Index n) const {
  return (Pi(n) * theta_).adjoint() * lambda_.transpose();
}

Mat ClosedFormKit::scalar_apply(const Mat& scalar, const Mat& stack) const {
  const int dd = d();
  Mat out = Mat::Zero(scalar.rows() * dd, stack.cols());
  for (Index a = 0; a < scalar.rows(); ++a) {
    for (Index b = 0; b < scalar.cols(); ++b) {
      if (scalar(a, b) != cplx(0.0, 0.0)) {
        out.middleRows(a * dd, dd) += scalar(a, b) * stack.middleRows(b * dd, dd);
      }
    }
  }
  return out;
}

Mat ClosedFormKit::v(Index n, double scale) const {
  Mat out = scalar_apply(Xi_scalar(n, scale), rho_);
  for (Index l = 0; l <= sym_.m0() - n; ++l) {
    out += scalar_apply(pvec_scalar(l, scale), sym_.rho0(static_cast<int>(n + l)));
  }
  return out;
}

Mat ClosedFormKit::v_tilde(Index n, double scale) const {
  Mat out = scalar_apply(Xi_scalar(n, scale).conjugate(), rho_tilde_);
  for (Index l = 0; l <= sym_.m0() - n; ++l) {
    out += scalar_apply(pvec_scalar(l, scale).conjugate(),
                        sym_.rho_tilde0(static_cast<int>(n + l)));
  }
  return out;
}

Mat ClosedFormKit::w(Index n, double scale) const {
  Mat out = scalar_apply(Phi_scalar(n, scale), rho_);
  for (int l = 0; l <= sym_.m0(); ++l) {
    out += scalar_apply(pvec_scalar(l - n, scale), sym_.rho0(l));
  }
  return out;
}

Mat ClosedFormKit::w_tilde(Index n, double scale) const {
  Mat out = scalar_apply(Phi_scalar(n, scale).conjugate(), rho_tilde_);
  for (int l = 0; l <= sym_.m0(); ++l) {
    out += scalar_apply(pvec_scalar(l - n, scale).conjugate(), sym_.rho_tilde0(l));
  }
  return out;
}

Mat ClosedFormKit::beta_star(Index n, Index k, Index l) const {
  if (n + k + l < sym_.m0()) {
    throw Error(ErrorCode::DomainViolation, "closed-form beta needs n + k + l >= m0");
  }
  return pvec(l).transpose() * Pi(n) * theta_ * pvec(k);
}

Mat ClosedFormKit::beta(Index n, Index k, Index l) const {
  if (n + k + l < sym_.m0()) {
    throw Error(ErrorCode::DomainViolation, "closed-form beta needs n + k + l >= m0");
  }
  return pvec(k).adjoint() * (Pi(n) * theta_).adjoint() * pvec(l).conjugate();
}

Mat ClosedFormKit::b_closed(Index n, Index u, int k, Index l) const {
  if (!(n >= u && u >= sym_.m0() + 1) || k < 1) {
    throw Error(ErrorCode::DomainViolation, "b closed form needs n >= u >= m0 + 1, k >= 1");
  }
  const Mat X = Pi(n) * theta_;
  const Mat g = X * lambda_;
  const Mat gt = X.adjoint() * lambda_.transpose();
  const Mat step = gt * g;
  Mat left = pvec(u - n - 1).adjoint();
  for (int r = 0; r < (k - 1) / 2; ++r) left = left * step;
  if (k % 2 == 1) return left * X.adjoint() * pvec(l).conjugate();
  return left * gt * X * pvec(l);
}

Mat ClosedFormKit::b_tilde_closed(Index n, Index u, int k, Index l) const {
  if (!(u >= 1 && u <= n - sym_.m0()) || k < 1) {
    throw Error(ErrorCode::DomainViolation, "b~ closed form needs 1 <= u <= n - m0, k >= 1");
  }
  const Mat X = Pi(n) * theta_;
  const Mat g = X * lambda_;
  const Mat gt = X.adjoint() * lambda_.transpose();
  const Mat step = g * gt;
  Mat left = pvec(-u).transpose();
  for (int r = 0; r < (k - 1) / 2; ++r) left = left * step;
  if (k % 2 == 1) return left * X * pvec(l);
  return left * g * X.adjoint() * pvec(l).conjugate();
}

SolveVectors::SolveVectors(const ClosedFormKit& kit, Index n) : kit_(&kit), n_(n) {
  if (n < 1) throw Error(ErrorCode::DomainViolation, "n must be positive");
  const int d = kit.d();
  const Index dm = kit.dM();
  const auto& sym = kit.symbol();
  const double ndbl = static_cast<double>(n);

  scale_.resize(dm);
  for (int mu = 0; mu < sym.K(); ++mu) {
    const double s = std::pow(std::abs(sym.pole(mu)), ndbl);
    for (int i = 1; i <= sym.mult(mu); ++i) {
      scale_.segment(Index(kit.slot(mu, i)) * d, d).setConstant(s);
    }
  }
  const auto S = scale_.asDiagonal();
  const Mat B = kron_identity(kit.Pi_scalar(n, -ndbl), d) * kit.Theta();
  const Mat& L = kit.Lambda();
  const Mat Lt = L.transpose();
  const Mat Bh = B.adjoint();
  const Mat I = Mat::Identity(dm, dm);

  const Mat V = Bh * Lt * (S * B) * L * S;
  const Mat Y = B * L * Bh * S * Lt * S;
  radius_ = spectral_radius(V);
  auto invert = [&](const Mat& m, const char* which) {
    Eigen::PartialPivLU<Mat> lu(m);
    if (!(lu.rcond() > 1e-13)) {
      std::ostringstream os;
      os << which << " is singular (spectral radius of G~G = " << radius_ << ")";
      throw Error(ErrorCode::ResolventSingular, os.str());
    }
    return Mat(lu.inverse());
  };
  const Mat Mhat = invert(I - V, "I - G~_n G_n");
  const Mat Mtil = invert(I - Y, "I - G_n G~_n");

  std::vector<Mat> v(static_cast<std::size_t>(n) + 1), vt(static_cast<std::size_t>(n) + 1);
  for (Index m = 1; m <= n; ++m) {
    v[static_cast<std::size_t>(m)] = kit.v(m);
    vt[static_cast<std::size_t>(m)] = kit.v_tilde(m);
  }
  const Mat R2 = Bh * Lt * S * B;
  const Mat Rt2 = B * L * Bh * S;

  ell_hat_.resize(static_cast<std::size_t>(n));
  ell_tilde_hat_.resize(static_cast<std::size_t>(n));
  r_hat_.resize(static_cast<std::size_t>(n));
  r_tilde_hat_.resize(static_cast<std::size_t>(n));
  for (Index s = 1; s <= n; ++s) {
    const auto i = static_cast<std::size_t>(s - 1);
    const Index m = n + 1 - s;
    const Mat D = kit.w(m, ndbl) - S * v[static_cast<std::size_t>(m)];
    const Mat Dt = kit.w_tilde(s, ndbl) - S * vt[static_cast<std::size_t>(s)];
    ell_hat_[i] = D.adjoint() * Mhat;
    ell_tilde_hat_[i] = Dt.adjoint() * Mtil;
    r_hat_[i] = Bh * vt[static_cast<std::size_t>(s)] + R2 * v[static_cast<std::size_t>(m)];
    r_tilde_hat_[i] = B * v[static_cast<std::size_t>(m)] + Rt2 * vt[static_cast<std::size_t>(s)];
  }
}

Mat SolveVectors::ell(Index s) const { return ell_hat(s) * scale_.cwiseInverse().asDiagonal(); }
Mat SolveVectors::ell_tilde(Index s) const {
  return ell_tilde_hat(s) * scale_.cwiseInverse().asDiagonal();
}
Mat SolveVectors::r(Index t) const { return scale_.asDiagonal() * r_hat(t); }
Mat SolveVectors::r_tilde(Index t) const { return scale_.asDiagonal() * r_tilde_hat(t); }

Mat SolveVectors::resolvent() const {
  const Mat I = Mat::Identity(kit_->dM(), kit_->dM());
  return (I - kit_->G_tilde(n_) * kit_->G(n_)).inverse();
}

Mat SolveVectors::resolvent_tilde() const {
  const Mat I = Mat::Identity(kit_->dM(), kit_->dM());
  return (I - kit_->G(n_) * kit_->G_tilde(n_)).inverse();
}

std::vector<Region> regions_for(Index n, int m0, Index s, Index t) {
  std::vector<Region> out;
  if (t <= n - m0) out.push_back(Region::I);
  if (s <= n - m0) out.push_back(Region::II);
  if (t >= m0 + 1) out.push_back(Region::III);
  if (s >= m0 + 1) out.push_back(Region::IV);
  return out;
}

Mat first_term_gram(const RationalSymbol& sym, Index n, Index s, Index t, bool tilde) {
  Mat acc = Mat::Zero(sym.d(), sym.d());
  if (tilde) {
    for (Index l = 1; l <= std::min(s, t); ++l) {
      acc += a_tilde_coeff(sym, s - l).adjoint() * a_tilde_coeff(sym, t - l);
    }
  } else {
    for (Index l = std::max(s, t); l <= n; ++l) {
      acc += a_coeff(sym, l - s).adjoint() * a_coeff(sym, l - t);
    }
  }
  return acc;
}

namespace {

Region preferred(const std::vector<Region>& regions) {
  for (Region r : {Region::II, Region::IV, Region::I, Region::III}) {
    if (std::find(regions.begin(), regions.end(), r) != regions.end()) return r;
  }
  throw Error(ErrorCode::RegionUncovered, "block lies in no region of the closed-form formulas");
}

void check_domain(const RationalSymbol& sym, Index n, Index s, Index t) {
  if (n < sym.m0() + 1) {
    throw Error(ErrorCode::DomainViolation, "closed-form inverse needs n >= m0 + 1");
  }
  if (s < 1 || s > n || t < 1 || t > n) throw Error(ErrorCode::DomainViolation, "block index out of range");
}

Mat settle(const std::vector<std::pair<Region, Mat>>& values, const ClosedInverseOptions& opts,
           Index s, Index t) {
  std::vector<Region> regions;
  for (const auto& v : values) regions.push_back(v.first);
  const Region pick = preferred(regions);
  const Mat* chosen = nullptr;
  for (const auto& v : values) {
    if (v.first == pick) chosen = &v.second;
  }
  if (opts.check_overlap) {
    for (const auto& v : values) {
      const double gap = rel_gap(v.second, *chosen);
      if (gap > opts.overlap_tol) {
        std::ostringstream os;
        os << "region formulas disagree at block (" << s << "," << t << "): " << gap;
        throw Error(ErrorCode::ConsistencyViolation, os.str());
      }
    }
  }
  return *chosen;
}

}  // namespace

Mat inverse_block_ar(const RationalSymbol& sym, Index n, Index s, Index t,
                     const ClosedInverseOptions& opts) {
  if (sym.K() != 0) throw Error(ErrorCode::NotApplicable, "AR formulas need K = 0");
  check_domain(sym, n, s, t);
  const auto regions = regions_for(n, sym.m0(), s, t);
  if (regions.empty()) throw Error(ErrorCode::RegionUncovered, "block lies in no region");
  std::vector<std::pair<Region, Mat>> values;
  for (Region r : regions) {
    const bool tilde = r == Region::I || r == Region::II;
    values.emplace_back(r, first_term_gram(sym, n, s, t, tilde));
  }
  return settle(values, opts, s, t);
}

Mat inverse_block_arma(const ClosedFormKit& kit, const SolveVectors& sv, Index n, Index s,
                       Index t, const ClosedInverseOptions& opts) {
  const auto& sym = kit.symbol();
  check_domain(sym, n, s, t);
  if (sv.n() != n) throw Error(ErrorCode::DomainViolation, "solve vectors built for another n");
  const auto regions = regions_for(n, sym.m0(), s, t);
  if (regions.empty()) throw Error(ErrorCode::RegionUncovered, "block lies in no region");
  std::vector<std::pair<Region, Mat>> values;
  for (Region r : regions) {
    switch (r) {
      case Region::I:
        values.emplace_back(r, (sv.ell_tilde_hat(t) * sv.r_tilde_hat(s)).adjoint() +
                                   first_term_gram(sym, n, s, t, true));
        break;
      case Region::II:
        values.emplace_back(r, sv.ell_tilde_hat(s) * sv.r_tilde_hat(t) +
                                   first_term_gram(sym, n, s, t, true));
        break;
      case Region::III:
        values.emplace_back(r, (sv.ell_hat(t) * sv.r_hat(s)).adjoint() +
                                   first_term_gram(sym, n, s, t, false));
        break;
      case Region::IV:
        values.emplace_back(r, sv.ell_hat(s) * sv.r_hat(t) + first_term_gram(sym, n, s, t, false));
        break;
    }
  }
  return settle(values, opts, s, t);
}

Mat inverse_block_arma(const ClosedFormKit& kit, Index n, Index s, Index t,
                       const ClosedInverseOptions& opts) {
  const SolveVectors sv(kit, n);
  return inverse_block_arma(kit, sv, n, s, t, opts);
}

namespace {

/// Both Gram matrices of T_n^{-1}: the tilde one along increasing diagonals,
/// the plain one along decreasing diagonals.
struct GramPair {
  Mat tilde;
  Mat plain;
};

GramPair gram_matrices(const CoefficientTables& tables, Index n) {
  const int d = tables.d();
  std::vector<Mat> at(static_cast<std::size_t>(n)), a(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    at[static_cast<std::size_t>(k)] = tables.a_tilde(k);
    a[static_cast<std::size_t>(k)] = tables.a(k);
  }
  GramPair g{Mat::Zero(n * d, n * d), Mat::Zero(n * d, n * d)};
  for (Index s = 1; s <= n; ++s) {
    for (Index t = 1; t <= n; ++t) {
      Mat blk = at[static_cast<std::size_t>(s - 1)].adjoint() * at[static_cast<std::size_t>(t - 1)];
      if (s > 1 && t > 1) blk += g.tilde.block((s - 2) * d, (t - 2) * d, d, d);
      g.tilde.block((s - 1) * d, (t - 1) * d, d, d) = blk;
    }
  }
  for (Index s = n; s >= 1; --s) {
    for (Index t = n; t >= 1; --t) {
      Mat blk = a[static_cast<std::size_t>(n - s)].adjoint() * a[static_cast<std::size_t>(n - t)];
      if (s < n && t < n) blk += g.plain.block(s * d, t * d, d, d);
      g.plain.block((s - 1) * d, (t - 1) * d, d, d) = blk;
    }
  }
  return g;
}

template <class Fn>
void parallel_rows(Index n, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2) {
    for (Index s = 1; s <= n; ++s) fn(s);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (Index s = 1 + w; s <= n; s += threads) fn(s);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

BlockMatrix closed_form_inverse(const CoefficientTables& tables, Index n, int threads) {
  const auto& sym = tables.symbol();
  const int d = sym.d();
  if (n < sym.m0() + 1) throw Error(ErrorCode::DomainViolation, "closed-form inverse needs n >= m0 + 1");
  const GramPair g = gram_matrices(tables, n);
  std::unique_ptr<SolveVectors> sv;
  if (sym.K() > 0) sv = std::make_unique<SolveVectors>(tables.kit(), n);
  BlockMatrix out(n, d);
  out.set_hermitian(true);
  for (Index s = 1; s <= n; ++s) {
    for (Index t = 1; t <= n; ++t) {
      if (regions_for(n, sym.m0(), s, t).empty()) {
        throw Error(ErrorCode::RegionUncovered, "block lies in no region of the closed-form formulas");
      }
    }
  }
  parallel_rows(n, threads, [&](Index s) {
    for (Index t = 1; t <= n; ++t) {
      const Region r = preferred(regions_for(n, sym.m0(), s, t));
      const bool tilde = r == Region::I || r == Region::II;
      Mat blk = (tilde ? g.tilde : g.plain).block((s - 1) * d, (t - 1) * d, d, d);
      if (sv) {
        switch (r) {
          case Region::I: blk += (sv->ell_tilde_hat(t) * sv->r_tilde_hat(s)).adjoint(); break;
          case Region::II: blk += sv->ell_tilde_hat(s) * sv->r_tilde_hat(t); break;
          case Region::III: blk += (sv->ell_hat(t) * sv->r_hat(s)).adjoint(); break;
          case Region::IV: blk += sv->ell_hat(s) * sv->r_hat(t); break;
        }
      }
      out.block(s, t) = blk;
    }
  });
  return out;
}

double region_overlap_defect(const CoefficientTables& tables, Index n) {
  const auto& sym = tables.symbol();
  const int d = sym.d();
  const GramPair g = gram_matrices(tables, n);
  std::unique_ptr<SolveVectors> sv;
  if (sym.K() > 0) sv = std::make_unique<SolveVectors>(tables.kit(), n);
  double worst = 0.0;
  for (Index s = 1; s <= n; ++s) {
    for (Index t = 1; t <= n; ++t) {
      std::vector<Mat> vals;
      for (Region r : regions_for(n, sym.m0(), s, t)) {
        const bool tilde = r == Region::I || r == Region::II;
        Mat blk = (tilde ? g.tilde : g.plain).block((s - 1) * d, (t - 1) * d, d, d);
        if (sv) {
          switch (r) {
            case Region::I: blk += (sv->ell_tilde_hat(t) * sv->r_tilde_hat(s)).adjoint(); break;
            case Region::II: blk += sv->ell_tilde_hat(s) * sv->r_tilde_hat(t); break;
            case Region::III: blk += (sv->ell_hat(t) * sv->r_hat(s)).adjoint(); break;
            case Region::IV: blk += sv->ell_hat(s) * sv->r_hat(t); break;
          }
        }
        vals.push_back(std::move(blk));
      }
      for (std::size_t i = 1; i < vals.size(); ++i) worst = std::max(worst, rel_gap(vals[i], vals[0]));
    }
  }
  return worst;
}

}  // namespace tpz
