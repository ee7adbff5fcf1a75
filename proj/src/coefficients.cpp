#include "tpz/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tpz/closed_form.hpp"
#include "tpz/numeric.hpp"

namespace tpz {

namespace {

using Poly = std::vector<cplx>;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly linear_power(cplx q, int m) {
  Poly out{cplx(1.0, 0.0)};
  for (int k = 0; k < m; ++k) out = poly_mul(out, Poly{cplx(1.0, 0.0), -q});
  return out;
}

Mat pole_sum(const RationalSymbol& sym, Index n, bool tilde) {
  Mat out = Mat::Zero(sym.d(), sym.d());
  for (int mu = 0; mu < sym.K(); ++mu) {
    const cplx base = tilde ? sym.pole(mu) : std::conj(sym.pole(mu));
    const cplx pn = ipow(base, n);
    for (int j = 1; j <= sym.mult(mu); ++j) {
      const double c = binom(n + j - 1, j - 1);
      out += (c * pn) * (tilde ? sym.rho_tilde(mu, j) : sym.rho(mu, j));
    }
  }
  return out;
}

}  // namespace

Mat a_coeff(const RationalSymbol& sym, Index n) {
  if (n < 0) return Mat::Zero(sym.d(), sym.d());
  Mat out = pole_sum(sym, n, false);
  if (n <= sym.m0()) out += sym.rho0(static_cast<int>(n));
  return out;
}

Mat a_tilde_coeff(const RationalSymbol& sym, Index n) {
  if (n < 0) return Mat::Zero(sym.d(), sym.d());
  Mat out = pole_sum(sym, n, true);
  if (n <= sym.m0()) out += sym.rho_tilde0(static_cast<int>(n));
  return out;
}

CoefficientTables::CoefficientTables(const RationalSymbol& sym, CoefficientOptions opts)
    : sym_(sym), opts_(opts) {
  // Horizon of the a-series from the explicit geometric majorant.
  double total = a_bound_tail(0, false);
  for (int j = 0; j <= sym_.m0(); ++j) total += op_norm(sym_.rho0(j));
  Index lo = sym_.m0() + 1;
  if (sym_.K() > 0) {
    Index hi = lo;
    while (hi < opts_.horizon_cap &&
           a_bound_tail(hi, false) > opts_.series_rel_tol * total) {
      hi *= 2;
    }
    while (lo < hi) {
      const Index mid = (lo + hi) / 2;
      if (a_bound_tail(mid, false) > opts_.series_rel_tol * total) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
  }
  a_horizon_ = lo;
  a_norm_suffix_.assign(static_cast<std::size_t>(a_horizon_) + 1, 0.0);
  at_norm_suffix_.assign(static_cast<std::size_t>(a_horizon_) + 1, 0.0);
  for (Index l = a_horizon_ - 1; l >= 0; --l) {
    const auto i = static_cast<std::size_t>(l);
    a_norm_suffix_[i] = a_norm_suffix_[i + 1] + op_norm(a(l));
    at_norm_suffix_[i] = at_norm_suffix_[i + 1] + op_norm(a_tilde(l));
  }
  init_c_series(c_, false);
  init_c_series(ct_, true);
}

CoefficientTables::~CoefficientTables() = default;

double CoefficientTables::a_bound_tail(Index n, bool tilde) const {
  double out = 0.0;
  for (int mu = 0; mu < sym_.K(); ++mu) {
    const double r = std::abs(sym_.pole(mu));
    for (int j = 1; j <= sym_.mult(mu); ++j) {
      const double nr = op_norm(tilde ? sym_.rho_tilde(mu, j) : sym_.rho(mu, j));
      out += nr * geometric_tail(r, j - 1, static_cast<std::size_t>(n));
    }
  }
  return out;
}

void CoefficientTables::init_c_series(CSeries& cs, bool tilde) {
  const int d = sym_.d();
  Poly P{cplx(1.0, 0.0)};
  for (int mu = 0; mu < sym_.K(); ++mu) {
    const cplx q = tilde ? sym_.pole(mu) : std::conj(sym_.pole(mu));
    P = poly_mul(P, linear_power(q, sym_.mult(mu)));
  }
  const std::size_t deg = P.size() - 1 + static_cast<std::size_t>(sym_.m0());
  std::vector<Mat> N(deg + 1, Mat::Zero(d, d));
  for (int j = 0; j <= sym_.m0(); ++j) {
    const Mat r0 = tilde ? sym_.rho_tilde0(j) : sym_.rho0(j);
    for (std::size_t k = 0; k < P.size(); ++k) N[k + static_cast<std::size_t>(j)] += P[k] * r0;
  }
  for (int mu = 0; mu < sym_.K(); ++mu) {
    for (int j = 1; j <= sym_.mult(mu); ++j) {
      Poly part{cplx(1.0, 0.0)};
      for (int nu = 0; nu < sym_.K(); ++nu) {
        const cplx q = tilde ? sym_.pole(nu) : std::conj(sym_.pole(nu));
        part = poly_mul(part, linear_power(q, nu == mu ? sym_.mult(nu) - j : sym_.mult(nu)));
      }
      const Mat rr = tilde ? sym_.rho_tilde(mu, j) : sym_.rho(mu, j);
      for (std::size_t k = 0; k < part.size(); ++k) N[k] += part[k] * rr;
    }
  }
  while (N.size() > 1 && N.back().cwiseAbs().maxCoeff() == 0.0) N.pop_back();

  Eigen::PartialPivLU<Mat> lu(N[0]);
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::SingularLeadingCoefficient,
                tilde ? "a~_0 is numerically singular" : "a_0 is numerically singular");
  }
  cs.N0_inv = lu.inverse();
  cs.P = P;
  cs.N = N;

  const std::size_t q = N.size() - 1;
  if (q == 0) {
    cs.rate = 0.0;
  } else {
    const Index qd = static_cast<Index>(q) * d;
    Mat C = Mat::Zero(qd, qd);
    for (std::size_t i = 1; i <= q; ++i) {
      C.block(static_cast<Index>(i - 1) * d, 0, d, d) = -N[i] * cs.N0_inv;
      if (i < q) C.block(static_cast<Index>(i - 1) * d, static_cast<Index>(i) * d, d, d).setIdentity();
    }
    cs.rate = spectral_radius(C);
    if (!(cs.rate < 1.0)) {
      throw Error(ErrorCode::OuternessCheckFailed,
                  "coefficients of h do not decay (det h^{-1} vanishes in the closed disk)");
    }
  }
}

void CoefficientTables::extend(const CSeries& cs, Index n) const {
  const int d = sym_.d();
  const std::size_t q = cs.N.size() - 1;
  while (static_cast<Index>(cs.values.size()) <= n) {
    const std::size_t k = cs.values.size();
    Mat acc = Mat::Zero(d, d);
    if (k < cs.P.size()) acc.diagonal().setConstant(-cs.P[k]);
    for (std::size_t i = 1; i <= std::min(k, q); ++i) acc -= cs.values[k - i] * cs.N[i];
    cs.values.push_back(acc * cs.N0_inv);
    cs.norms.push_back(op_norm(cs.values.back()));
  }
}

Index CoefficientTables::horizon_of(const CSeries& cs) const {
  std::lock_guard lock(mutex_);
  if (cs.horizon >= 0) return cs.horizon;
  if (cs.rate == 0.0) {
    cs.horizon = static_cast<Index>(cs.P.size());
    extend(cs, cs.horizon);
    return cs.horizon;
  }
  const Index q = static_cast<Index>(cs.N.size()) - 1;
  const Index window = std::max<Index>(8, 2 * q * sym_.d());
  double sum = 0.0;
  Index small_run = 0;
  for (Index k = 0;; ++k) {
    if (k >= opts_.horizon_cap) {
      throw Error(ErrorCode::ToleranceUnreachable, "coefficient series horizon exceeds cap");
    }
    extend(cs, k);
    const double nk = cs.norms[static_cast<std::size_t>(k)];
    sum += nk;
    if (nk <= opts_.series_rel_tol * sum * (1.0 - cs.rate)) {
      ++small_run;
    } else {
      small_run = 0;
    }
    if (small_run >= window && k > q) {
      cs.horizon = k + 1;
      return cs.horizon;
    }
  }
}

double CoefficientTables::l1_of(const CSeries& cs) const {
  const Index L = horizon_of(cs);
  std::lock_guard lock(mutex_);
  if (cs.l1 >= 0.0) return cs.l1;
  double s = 0.0;
  for (Index k = 0; k < L; ++k) s += cs.norms[static_cast<std::size_t>(k)];
  if (cs.rate > 0.0) s += cs.norms[static_cast<std::size_t>(L - 1)] / (1.0 - cs.rate);
  cs.l1 = s;
  return s;
}

Mat CoefficientTables::c(Index n) const {
  if (n < 0) return Mat::Zero(d(), d());
  std::lock_guard lock(mutex_);
  extend(c_, n);
  return c_.values[static_cast<std::size_t>(n)];
}

Mat CoefficientTables::c_tilde(Index n) const {
  if (n < 0) return Mat::Zero(d(), d());
  std::lock_guard lock(mutex_);
  extend(ct_, n);
  return ct_.values[static_cast<std::size_t>(n)];
}

Index CoefficientTables::c_horizon() const { return horizon_of(c_); }
Index CoefficientTables::c_tilde_horizon() const { return horizon_of(ct_); }
double CoefficientTables::c_l1() const { return l1_of(c_); }
double CoefficientTables::c_tilde_l1() const { return l1_of(ct_); }

Index CoefficientTables::gamma_band() const { return c_horizon(); }

Mat CoefficientTables::gamma(Index k) const {
  if (k < 0) return gamma(-k).adjoint();
  const Index L = c_horizon();
  if (k >= L) return Mat::Zero(d(), d());
  std::lock_guard lock(mutex_);
  if (auto it = gamma_cache_.find(k); it != gamma_cache_.end()) return it->second;
  extend(c_, k + L);
  Mat acc = Mat::Zero(d(), d());
  for (Index j = 0; j < L; ++j) {
    acc += c_.values[static_cast<std::size_t>(k + j)] *
           c_.values[static_cast<std::size_t>(j)].adjoint();
  }
  if (k == 0) acc = 0.5 * (acc + acc.adjoint());
  gamma_cache_.emplace(k, acc);
  return acc;
}

Mat CoefficientTables::beta_series(Index k) const {
  const Index L = c_tilde_horizon();
  Mat acc = Mat::Zero(d(), d());
  for (Index j = std::max<Index>(0, -k); j < L; ++j) acc += a(j + k) * c_tilde(j);
  return acc;
}

void CoefficientTables::ensure_quadrature() const {
  std::lock_guard lock(mutex_);
  if (!phase_samples_.empty()) return;
  const int N = opts_.quadrature_grid;
  phase_samples_.reserve(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * j / N);
    phase_samples_.push_back(-sym_.h_inv(z) * sym_.h_sharp(z).adjoint());
  }
}

Mat CoefficientTables::beta_quadrature(Index k) const {
  ensure_quadrature();
  const int N = opts_.quadrature_grid;
  Mat acc = Mat::Zero(d(), d());
  for (int j = 0; j < N; ++j) {
    const double arg = -2.0 * std::numbers::pi * static_cast<double>((k * j) % N) / N;
    acc += std::polar(1.0, arg) * phase_samples_[static_cast<std::size_t>(j)];
  }
  return acc / static_cast<double>(N);
}

Mat CoefficientTables::beta_closed(Index k) const {
  if (k < sym_.m0() + 1) {
    throw Error(ErrorCode::DomainViolation, "closed-form beta_k needs k >= m0 + 1");
  }
  if (sym_.K() == 0) return Mat::Zero(d(), d());
  return kit().beta_star(k - 1, 0, 0).adjoint();
}

Mat CoefficientTables::beta(Index k) const {
  if (k < 0) return beta_quadrature(k);
  if (k <= sym_.m0()) return beta_series(k);
  return beta_closed(k);
}

double CoefficientTables::a_tail_l1(Index n) const {
  n = std::max<Index>(n, 0);
  if (n < a_horizon_) return a_norm_suffix_[static_cast<std::size_t>(n)] + a_bound_tail(a_horizon_, false);
  return a_bound_tail(n, false);
}

double CoefficientTables::a_tilde_tail_l1(Index n) const {
  n = std::max<Index>(n, 0);
  if (n < a_horizon_) return at_norm_suffix_[static_cast<std::size_t>(n)] + a_bound_tail(a_horizon_, true);
  return a_bound_tail(n, true);
}

double CoefficientTables::F(Index n) const { return c_tilde_l1() * a_tail_l1(n); }

const ClosedFormKit& CoefficientTables::kit() const {
  std::lock_guard lock(mutex_);
  if (!kit_) {
    if (sym_.K() == 0) throw Error(ErrorCode::NotApplicable, "closed-form kit needs K >= 1");
    kit_ = std::make_unique<ClosedFormKit>(sym_);
  }
  return *kit_;
}

}  // namespace tpz
