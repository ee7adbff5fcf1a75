#include "tpz/numeric.hpp"

#include <cmath>
#include <limits>

namespace tpz {

double binom(std::int64_t k, std::int64_t m) {
  if (m < 0) return 0.0;
  double r = 1.0;
  for (std::int64_t i = 0; i < m; ++i) {
    r *= static_cast<double>(k - i) / static_cast<double>(i + 1);
  }
  return r;
}

namespace {

// (br + i bi)^e by squaring in extended precision. Squaring doubles the
// relative error, so double would lose about e ulps; products are written out
// to avoid the library's NaN-safe complex multiply.
void power_ladder(long double br, long double bi, std::uint64_t e, long double& rr,
                  long double& ri) {
  rr = 1.0L;
  ri = 0.0L;
  while (e != 0) {
    if (e & 1U) {
      const long double t = rr * br - ri * bi;
      ri = rr * bi + ri * br;
      rr = t;
    }
    e >>= 1U;
    if (e == 0) break;
    const long double t = br * br - bi * bi;
    bi = 2.0L * br * bi;
    br = t;
  }
}

}  // namespace

cplx ipow(cplx z, std::int64_t k) {
  if (k == 0) return {1.0, 0.0};
  // Results below the double range: skip the ladder, which would otherwise
  // run through extended-precision subnormals (impossible for short ladders).
  if (k > 64 || k < -64) {
    const double r = std::abs(z);
    if (r != 0.0 && static_cast<double>(k) * std::log(r) < -746.0) return {0.0, 0.0};
  }
  long double br = z.real();
  long double bi = z.imag();
  if (k < 0) {
    const long double q = br * br + bi * bi;
    br /= q;
    bi = -bi / q;
  }
  long double rr = 0.0L;
  long double ri = 0.0L;
  power_ladder(br, bi, static_cast<std::uint64_t>(k < 0 ? -k : k), rr, ri);
  return {static_cast<double>(rr), static_cast<double>(ri)};
}

cplx scaled_pow(cplx p, std::int64_t k, double e) {
  const double logr = std::log(std::abs(p));
  const double kk = static_cast<double>(k);
  if (std::abs(kk * logr) < 600.0 && std::abs(e * logr) < 600.0) {
    return ipow(p, k) * std::pow(std::abs(p), e);
  }
  // Modulus from one exponential, phase from the unit-modulus ladder.
  const long double r = std::hypot(static_cast<long double>(p.real()), static_cast<long double>(p.imag()));
  const long double mag = std::exp((static_cast<long double>(k) + e) * std::log(r));
  long double ur = p.real() / r;
  long double ui = p.imag() / r;
  if (k < 0) ui = -ui;
  long double rr = 0.0L;
  long double ri = 0.0L;
  power_ladder(ur, ui, static_cast<std::uint64_t>(k < 0 ? -k : k), rr, ri);
  return {static_cast<double>(mag * rr), static_cast<double>(mag * ri)};
}

double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 || a.cols() == 1) return a.norm();
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double spectral_radius(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<Mat> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

double term(double rate, int q, std::size_t k) {
  return std::pow(static_cast<double>(k + 1), q) * std::pow(rate, static_cast<double>(k));
}

}  // namespace

double geometric_tail(double rate, int q, std::size_t start) {
  if (rate <= 0.0) return start == 0 ? 1.0 : 0.0;
  if (rate >= 1.0) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t k = start;
  // Ratio of consecutive terms is ((k+2)/(k+1))^q * rate; bound the tail by a
  // geometric series once that ratio drops below one.
  for (;;) {
    const double ratio = std::pow(static_cast<double>(k + 2) / static_cast<double>(k + 1), q) * rate;
    const double t = term(rate, q, k);
    if (ratio < 0.999) return sum + t / (1.0 - ratio);
    sum += t;
    ++k;
  }
}

std::size_t geometric_horizon(double rate, int q, double rel_tol, std::size_t cap) {
  if (rate <= 0.0) return std::min<std::size_t>(1, cap);
  if (rate >= 1.0) return cap;
  const double total = geometric_tail(rate, q, 0);
  // Binary search on the monotone tail.
  std::size_t lo = 0;
  std::size_t hi = 1;
  while (hi < cap && geometric_tail(rate, q, hi) > rel_tol * total) hi *= 2;
  if (hi >= cap) return cap;
  while (lo + 1 < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (geometric_tail(rate, q, mid) > rel_tol * total) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

Mat kron_identity(const Mat& s, Index d) {
  Mat out = Mat::Zero(s.rows() * d, s.cols() * d);
  for (Index i = 0; i < s.rows(); ++i) {
    for (Index j = 0; j < s.cols(); ++j) {
      if (s(i, j) != cplx(0.0, 0.0)) {
        out.block(i * d, j * d, d, d).diagonal().setConstant(s(i, j));
      }
    }
  }
  return out;
}

}  // namespace tpz
