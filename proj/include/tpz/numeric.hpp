#pragma once

#include <cstdint>

#include "tpz/types.hpp"

namespace tpz {

/// Binomial coefficient C(k, m) extended to any integer k by the falling
/// factorial k(k-1)...(k-m+1)/m!. Zero for m < 0.
double binom(std::int64_t k, std::int64_t m);

/// z^k for integer k (negative k allowed when z != 0).
cplx ipow(cplx z, std::int64_t k);

/// p^k * |p|^e without forming either factor when it would overflow.
cplx scaled_pow(cplx p, std::int64_t k, double e);

/// Spectral (operator 2-) norm.
double op_norm(const Mat& a);

double spectral_radius(const Mat& a);

/// Smallest L with sum_{k>=L} (k+1)^q r^k <= rel_tol * sum_{k>=0} (k+1)^q r^k,
/// clamped to [0, cap]. A rate of zero gives L = 1.
std::size_t geometric_horizon(double rate, int poly_degree, double rel_tol, std::size_t cap);

/// Upper bound for sum_{k>=L} (k+1)^q r^k, from an explicit partial sum plus a
/// ratio-test tail once consecutive term ratios fall below one.
double geometric_tail(double rate, int poly_degree, std::size_t start);

/// Kronecker product s (x) I_d for a scalar matrix s.
Mat kron_identity(const Mat& s, Index d);

}  // namespace tpz
