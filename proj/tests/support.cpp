#include "support.hpp"

#include <cmath>
#include <numbers>

namespace tpz::testing {

namespace {

Mat scalar(cplx z) {
  Mat m(1, 1);
  m(0, 0) = z;
  return m;
}

cplx random_phase(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  return std::polar(1.0, ang(rng));
}

}  // namespace

RationalSymbolSpec small_arma_spec() {
  RationalSymbolSpec s;
  s.d = 1;
  s.m0 = 0;
  s.K = 1;
  s.poles = {cplx(0.5, 0.0)};
  s.mults = {1};
  s.h.rho00 = scalar(0.0);
  s.h.rho = {{scalar(1.0)}};
  return s;
}

RationalSymbolSpec identity_spec(int d) {
  RationalSymbolSpec s;
  s.d = d;
  s.h.rho00 = -Mat::Identity(d, d);
  s.sharp = s.h;
  return s;
}

RationalSymbolSpec ar1_spec() {
  RationalSymbolSpec s;
  s.d = 1;
  s.m0 = 1;
  s.h.rho00 = scalar(-1.0);
  s.h.rho0 = {scalar(0.9)};
  return s;
}

Mat random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  }
  return m;
}

Mat random_unitary(std::mt19937_64& rng, int d) {
  Eigen::HouseholderQR<Mat> qr(random_matrix(rng, d, d));
  return qr.householderQ() * Mat::Identity(d, d);
}

RationalSymbolSpec random_spec(std::mt19937_64& rng, const RandomSpecShape& shape) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int d = shape.d;
  const int K = static_cast<int>(shape.mults.size());
  RationalSymbolSpec s;
  s.d = d;
  s.m0 = shape.m0;
  s.K = K;
  s.mults = shape.mults;
  while (static_cast<int>(s.poles.size()) < K) {
    const cplx p = std::polar(0.25 + 0.5 * unif(rng), 2.0 * std::numbers::pi * unif(rng));
    bool ok = true;
    for (auto q : s.poles) ok = ok && std::abs(p - q) > 0.2;
    if (ok) s.poles.push_back(p);
  }

  // Scalar partial fractions per diagonal entry.
  std::vector<cplx> r00(static_cast<std::size_t>(d));
  std::vector<std::vector<cplx>> r0(static_cast<std::size_t>(d));
  std::vector<std::vector<std::vector<cplx>>> r(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    double bound = 0.0;
    for (int j = 1; j <= shape.m0; ++j) {
      const cplx c = (0.3 + 0.5 * unif(rng)) * random_phase(rng);
      r0[k].push_back(c);
      bound += std::abs(c);
    }
    r[k].resize(static_cast<std::size_t>(K));
    for (int mu = 0; mu < K; ++mu) {
      for (int j = 1; j <= shape.mults[mu]; ++j) {
        const cplx c = (0.3 + 0.5 * unif(rng)) * random_phase(rng);
        r[k][mu].push_back(c);
        bound += std::abs(c) / std::pow(1.0 - std::abs(s.poles[mu]), j);
      }
    }
    r00[k] = (1.25 * bound + 0.2) * random_phase(rng);
  }

  const Mat U = random_unitary(rng, d);
  const Mat V = random_unitary(rng, d);
  const Mat W = random_unitary(rng, d);
  auto diag = [&](auto pick) {
    Mat m = Mat::Zero(d, d);
    for (int k = 0; k < d; ++k) m(k, k) = pick(k);
    return m;
  };
  // h^{-1} = V^* D^{-1} U^*, h#^{-1} = U D^{-1} W^*.
  auto left = [&](const Mat& D) { return Mat(V.adjoint() * D * U.adjoint()); };
  auto right = [&](const Mat& D) { return Mat(U * D * W.adjoint()); };
  PartialFractions h;
  PartialFractions sh;
  const Mat D00 = diag([&](int k) { return r00[k]; });
  h.rho00 = left(D00);
  sh.rho00 = right(D00);
  for (int j = 1; j <= shape.m0; ++j) {
    const Mat D = diag([&](int k) { return r0[k][j - 1]; });
    h.rho0.push_back(left(D));
    sh.rho0.push_back(right(D));
  }
  h.rho.resize(static_cast<std::size_t>(K));
  sh.rho.resize(static_cast<std::size_t>(K));
  for (int mu = 0; mu < K; ++mu) {
    for (int j = 1; j <= shape.mults[mu]; ++j) {
      const Mat D = diag([&](int k) { return r[k][mu][j - 1]; });
      h.rho[mu].push_back(left(D));
      sh.rho[mu].push_back(right(D));
    }
  }
  s.h = h;
  s.sharp = sh;
  return s;
}

std::vector<RandomSpecShape> sweep_shapes() {
  return {
      {1, 0, {}},     {1, 1, {}},     {1, 0, {1}},    {1, 1, {1}},    {1, 2, {2}},
      {1, 0, {1, 1}}, {1, 1, {2, 1}}, {2, 0, {}},     {2, 2, {}},     {2, 0, {1}},
      {2, 1, {2}},    {2, 0, {1, 2}}, {2, 2, {1, 1}}, {2, 1, {2, 2}}, {3, 0, {}},
      {3, 1, {1}},    {3, 0, {2}},    {3, 2, {1, 1}}, {3, 1, {1, 2}}, {3, 0, {2, 2}},
  };
}

}  // namespace tpz::testing
