#include "tpz/rational_symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tpz {

namespace {

bool shape_ok(const Mat& m, int d) { return m.rows() == d && m.cols() == d; }

void check_pf(const PartialFractions& pf, const RationalSymbolSpec& spec, ErrorCode code,
              const char* side) {
  auto fail = [&](const std::string& msg) {
    throw Error(code, std::string(side) + ": " + msg);
  };
  if (!shape_ok(pf.rho00, spec.d)) fail("rho00 must be d x d");
  if (static_cast<int>(pf.rho0.size()) != spec.m0) fail("rho0 must hold m0 matrices");
  for (const auto& m : pf.rho0) {
    if (!shape_ok(m, spec.d)) fail("rho0 entries must be d x d");
  }
  if (static_cast<int>(pf.rho.size()) != spec.K) fail("rho must hold K lists");
  for (int mu = 0; mu < spec.K; ++mu) {
    const auto& list = pf.rho[static_cast<std::size_t>(mu)];
    if (static_cast<int>(list.size()) != spec.mults[static_cast<std::size_t>(mu)]) {
      fail("rho[mu] must hold m_mu matrices");
    }
    for (const auto& m : list) {
      if (!shape_ok(m, spec.d)) fail("rho entries must be d x d");
    }
  }
}

bool is_zero(const Mat& m) { return m.cwiseAbs().maxCoeff() == 0.0; }

cplx det(const Mat& m) { return m.determinant(); }

Mat invert_checked(const Mat& m, const char* what) {
  Eigen::PartialPivLU<Mat> lu(m);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    throw Error(ErrorCode::SingularHInverse, std::string(what) + " is numerically singular");
  }
  return lu.inverse();
}

}  // namespace

void check_structure(const RationalSymbolSpec& spec) {
  if (spec.d < 1) throw Error(ErrorCode::MalformedSpec, "d must be positive");
  if (spec.m0 < 0) throw Error(ErrorCode::MalformedSpec, "m0 must be nonnegative");
  if (spec.K < 0) throw Error(ErrorCode::MalformedSpec, "K must be nonnegative");
  if (static_cast<int>(spec.poles.size()) != spec.K ||
      static_cast<int>(spec.mults.size()) != spec.K) {
    throw Error(ErrorCode::MalformedSpec, "poles and mults must hold K entries");
  }
  for (int m : spec.mults) {
    if (m < 1) throw Error(ErrorCode::MalformedSpec, "multiplicities must be positive");
  }
  check_pf(spec.h, spec, ErrorCode::MalformedSpec, "h");
  if (spec.sharp) {
    check_pf(*spec.sharp, spec, ErrorCode::SharpShapeMismatch, "sharp");
  } else if (spec.d >= 2) {
    throw Error(ErrorCode::SharpShapeMismatch, "sharp coefficients are required for d >= 2");
  }
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

void ValidationReport::throw_if_failed() const {
  for (const auto& c : checks) {
    if (!c.passed) {
      throw Error(c.failure.value_or(ErrorCode::MalformedSpec), c.name + ": " + c.detail);
    }
  }
}

RationalSymbol::RationalSymbol(RationalSymbolSpec spec) : spec_(std::move(spec)) {
  check_structure(spec_);
  if (!spec_.sharp) spec_.sharp = spec_.h;
  for (int m : spec_.mults) M_ += m;
  for (const auto& p : spec_.poles) decay_rate_ = std::max(decay_rate_, std::abs(p));
}

Mat RationalSymbol::rho0(int j) const {
  if (j == 0) return spec_.h.rho00;
  if (j < 0 || j > spec_.m0) return Mat::Zero(spec_.d, spec_.d);
  return spec_.h.rho0[static_cast<std::size_t>(j - 1)];
}

const Mat& RationalSymbol::rho(int mu, int j) const {
  return spec_.h.rho[static_cast<std::size_t>(mu)][static_cast<std::size_t>(j - 1)];
}

Mat RationalSymbol::sharp_rho0(int j) const {
  if (j == 0) return spec_.sharp->rho00;
  if (j < 0 || j > spec_.m0) return Mat::Zero(spec_.d, spec_.d);
  return spec_.sharp->rho0[static_cast<std::size_t>(j - 1)];
}

const Mat& RationalSymbol::sharp_rho(int mu, int j) const {
  return spec_.sharp->rho[static_cast<std::size_t>(mu)][static_cast<std::size_t>(j - 1)];
}

Mat RationalSymbol::eval_pf(const PartialFractions& pf, cplx z) const {
  Mat out = -pf.rho00;
  for (int mu = 0; mu < spec_.K; ++mu) {
    const cplx denom = 1.0 - std::conj(pole(mu)) * z;
    if (std::abs(denom) < 1e-14) {
      std::ostringstream os;
      os << "z = " << z << " is a pole of the partial-fraction expansion";
      throw Error(ErrorCode::EvaluationAtPole, os.str());
    }
    cplx f = 1.0;
    for (int j = 1; j <= mult(mu); ++j) {
      f /= denom;
      out -= f * pf.rho[static_cast<std::size_t>(mu)][static_cast<std::size_t>(j - 1)];
    }
  }
  cplx zj = 1.0;
  for (int j = 1; j <= spec_.m0; ++j) {
    zj *= z;
    out -= zj * pf.rho0[static_cast<std::size_t>(j - 1)];
  }
  return out;
}

Mat RationalSymbol::h_inv(cplx z) const { return eval_pf(spec_.h, z); }

Mat RationalSymbol::h(cplx z) const { return invert_checked(h_inv(z), "h^{-1}(z)"); }

Mat RationalSymbol::h_sharp_inv(cplx z) const { return eval_pf(*spec_.sharp, z); }

Mat RationalSymbol::h_sharp(cplx z) const {
  return invert_checked(h_sharp_inv(z), "h#^{-1}(z)");
}

Mat RationalSymbol::h_dagger_inv(cplx z) const {
  if (z == cplx(0.0, 0.0)) {
    // 1/conj(z) -> infinity: the pole terms vanish and the polynomial part blows up.
    if (spec_.m0 >= 1) {
      throw Error(ErrorCode::EvaluationAtPole, "h_dagger^{-1} has a pole at z = 0 when m0 >= 1");
    }
    return (-spec_.h.rho00).adjoint();
  }
  return h_inv(1.0 / std::conj(z)).adjoint();
}

Mat RationalSymbol::w(double theta) const {
  const Mat hv = h(std::polar(1.0, theta));
  Mat out = hv * hv.adjoint();
  return 0.5 * (out + out.adjoint());
}

namespace {

/// Winding number of det f around the unit circle together with min |det f|.
struct Winding {
  long winding = 0;
  double min_abs = 0.0;
  double max_abs = 0.0;
};

template <class F>
Winding winding_of_det(const F& f, int grid) {
  Winding out;
  out.min_abs = std::numeric_limits<double>::infinity();
  double total = 0.0;
  cplx prev = det(f(cplx(1.0, 0.0)));
  cplx first = prev;
  out.min_abs = out.max_abs = std::abs(prev);
  for (int k = 1; k <= grid; ++k) {
    const cplx cur = k == grid ? first
                               : det(f(std::polar(1.0, 2.0 * std::numbers::pi * k / grid)));
    out.min_abs = std::min(out.min_abs, std::abs(cur));
    out.max_abs = std::max(out.max_abs, std::abs(cur));
    if (prev != cplx(0.0, 0.0) && cur != cplx(0.0, 0.0)) total += std::arg(cur / prev);
    prev = cur;
  }
  out.winding = std::lround(total / (2.0 * std::numbers::pi));
  return out;
}

template <class F>
ValidationCheck outerness_check(const std::string& name, const F& f, int grid) {
  ValidationCheck c{name, true, std::nullopt, ""};
  const Winding wd = winding_of_det(f, grid);
  std::ostringstream os;
  // det h = 1 / det h^{-1}: zero winding of det h^{-1} means det h has no zeros or
  // poles inside the disk.
  os << "winding(det h) = " << -wd.winding << ", min|det h^-1| on circle = " << wd.min_abs;
  bool ok = wd.winding == 0 && wd.min_abs > 1e-12 * std::max(1.0, wd.max_abs);
  double min_interior = std::numeric_limits<double>::infinity();
  for (double r : {0.0, 0.3, 0.6, 0.9, 0.99}) {
    for (int k = 0; k < 32; ++k) {
      min_interior = std::min(min_interior,
                              std::abs(det(f(std::polar(r, 2.0 * std::numbers::pi * k / 32)))));
      if (r == 0.0) break;
    }
  }
  os << ", min|det h^-1| interior = " << min_interior;
  if (!(min_interior > 1e-12 * std::max(1.0, wd.max_abs))) ok = false;
  c.passed = ok;
  if (!ok) c.failure = ErrorCode::OuternessCheckFailed;
  c.detail = os.str();
  return c;
}

}  // namespace

ValidationReport validate(const RationalSymbolSpec& spec, const ValidationOptions& opts) {
  ValidationReport report;
  try {
    check_structure(spec);
    report.checks.push_back({"structure", true, std::nullopt, "ok"});
  } catch (const Error& e) {
    report.checks.push_back({"structure", false, e.code(), e.what()});
    return report;
  }

  {
    ValidationCheck c{"poles_in_punctured_disk", true, std::nullopt, "0 < |p| < 1"};
    for (int mu = 0; mu < spec.K; ++mu) {
      const double r = std::abs(spec.poles[static_cast<std::size_t>(mu)]);
      if (!(r > 0.0 && r < 1.0)) {
        c.passed = false;
        c.failure = ErrorCode::PoleOutOfDomain;
        std::ostringstream os;
        os << "|p_" << mu + 1 << "| = " << r;
        c.detail = os.str();
        break;
      }
    }
    report.checks.push_back(c);
  }
  {
    ValidationCheck c{"distinct_poles", true, std::nullopt, "all poles distinct"};
    for (int mu = 0; mu < spec.K && c.passed; ++mu) {
      for (int nu = mu + 1; nu < spec.K; ++nu) {
        if (spec.poles[static_cast<std::size_t>(mu)] == spec.poles[static_cast<std::size_t>(nu)]) {
          c.passed = false;
          c.failure = ErrorCode::DuplicatePoles;
          std::ostringstream os;
          os << "p_" << mu + 1 << " == p_" << nu + 1;
          c.detail = os.str();
          break;
        }
      }
    }
    report.checks.push_back(c);
  }
  {
    ValidationCheck c{"nonzero_leading_residues", true, std::nullopt, "ok"};
    auto check_side = [&](const PartialFractions& pf, const char* side) {
      for (int mu = 0; mu < spec.K; ++mu) {
        if (is_zero(pf.rho[static_cast<std::size_t>(mu)].back())) {
          c.passed = false;
          c.failure = ErrorCode::ZeroLeadingResidue;
          c.detail = std::string(side) + ": rho_{mu,m_mu} = 0 for mu = " + std::to_string(mu + 1);
        }
      }
      if (spec.m0 >= 1 && is_zero(pf.rho0.back())) {
        c.passed = false;
        c.failure = ErrorCode::ZeroLeadingResidue;
        c.detail = std::string(side) + ": rho_{0,m0} = 0";
      }
    };
    check_side(spec.h, "h");
    if (spec.sharp) check_side(*spec.sharp, "sharp");
    report.checks.push_back(c);
  }

  const bool poles_ok = report.checks[1].passed && report.checks[2].passed;
  if (!poles_ok) return report;

  const RationalSymbol sym(spec);
  report.checks.push_back(outerness_check(
      "outer_h", [&](cplx z) { return sym.h_inv(z); }, opts.winding_grid));
  report.checks.push_back(outerness_check(
      "outer_h_sharp", [&](cplx z) { return sym.h_sharp_inv(z); }, opts.winding_grid));

  if (report.ok()) {
    ValidationCheck c{"factorization_consistency", true, std::nullopt, ""};
    double worst = 0.0;
    for (int k = 0; k < opts.factorization_grid; ++k) {
      const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * k / opts.factorization_grid);
      const Mat hv = sym.h(z);
      const Mat hs = sym.h_sharp(z);
      const Mat lhs = hv * hv.adjoint();
      const Mat rhs = hs.adjoint() * hs;
      worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
    }
    std::ostringstream os;
    os << "max ||h h^* - h#^* h#|| = " << worst;
    c.detail = os.str();
    if (!(worst <= opts.factorization_tol)) {
      c.passed = false;
      c.failure = ErrorCode::FactorizationMismatch;
    }
    report.checks.push_back(c);
  }
  return report;
}

}  // namespace tpz
