#include <doctest.h>

#include <limits>

#include "support.hpp"
#include "tpz/closed_form.hpp"
#include "tpz/numeric.hpp"
#include "tpz/series_inverse.hpp"

using namespace tpz;
using namespace tpz::testing;

namespace {

double gap(const Mat& x, const Mat& y) { return (x - y).norm(); }

Mat dense_T(const CoefficientTables& t, Index n) {
  const int d = t.d();
  Mat T(n * d, n * d);
  for (Index s = 0; s < n; ++s) {
    for (Index u = 0; u < n; ++u) T.block(s * d, u * d, d, d) = t.gamma(s - u);
  }
  return T;
}

/// Hand-derived tables for h(z) = -(1 - conj(p) z) / rho, h# = h.
SeriesTables scalar_tables(cplx p, cplx rho) {
  SeriesTables t;
  const cplx pc = std::conj(p);
  const double q = std::abs(p);
  t.a = [=](Index k) { return Mat::Constant(1, 1, rho * std::pow(pc, static_cast<double>(k))); };
  t.a_tilde = [=](Index k) {
    return Mat::Constant(1, 1, std::conj(rho) * std::pow(p, static_cast<double>(k)));
  };
  t.beta = [=](Index k) {
    return Mat::Constant(1, 1, -(rho / std::conj(rho)) * std::pow(pc, static_cast<double>(k)) * (1.0 - q * q));
  };
  t.F = [=](Index n) { return (1.0 + q) * std::pow(q, static_cast<double>(n)) / (1.0 - q); };
  t.a_l1 = std::abs(rho) / (1.0 - q);
  t.a_tilde_l1 = t.a_l1;
  return t;
}

}  // namespace

TEST_CASE("identity symbol: series inverse is the identity") {
  const RationalSymbol sym(identity_spec(2));
  CoefficientTables t(sym);
  const auto st = series_tables(t);
  for (auto v : {SeriesVariant::Tilde, SeriesVariant::Plain}) {
    SeriesOptions o;
    o.variant = v;
    const auto rep = series_inverse(t, 5, o);
    CHECK(rep.certified);
    CHECK(gap(rep.inverse.matrix(), Mat::Identity(10, 10)) < 1e-15);
    CHECK(gap(first_term_gram(st, 5, 2, 2, v), Mat::Identity(2, 2)) < 1e-15);
    CHECK(first_term_gram(st, 5, 2, 3, v).norm() < 1e-15);
    auto b = b_recursion_start(st, v, 5, 2, 8);
    for (int k = 0; k < 3; ++k) {
      for (const auto& m : b.coeffs) CHECK(m.norm() == 0.0);
      b = b_recursion_step(b, st);
    }
  }
}

TEST_CASE("two by two example via the series") {
  const RationalSymbol sym(small_arma_spec());
  CoefficientTables t(sym);
  Mat expected(2, 2);
  expected << 1.25, 0.5, 0.5, 1.25;
  expected /= 1.3125;
  for (auto v : {SeriesVariant::Tilde, SeriesVariant::Plain}) {
    SeriesOptions o;
    o.variant = v;
    o.tol = 1e-13;
    const auto rep = series_inverse(t, 2, o);
    CHECK(rep.certified);
    CHECK(rep.contraction == doctest::Approx(0.375));
    CHECK(gap(rep.inverse.matrix(), expected) < 1e-12);
    CHECK(gap(rep.inverse.matrix(), dense_T(t, 2).inverse()) < 1e-12);
  }
  Mat At(2, 2);
  At << 1.0, 0.5, 0.0, 1.0;
  const auto st = series_tables(t);
  const Mat gram = At.adjoint() * At;
  for (Index s = 1; s <= 2; ++s) {
    for (Index u = 1; u <= 2; ++u) {
      CHECK(std::abs(first_term_gram(st, 2, s, u, SeriesVariant::Tilde)(0, 0) - gram(s - 1, u - 1)) <
            1e-15);
    }
  }
  const auto b = b_recursion_start(st, SeriesVariant::Plain, 2, 1, 4);
  CHECK(gap(b.coeffs[0], t.kit().beta(0, 0, 0)) < 1e-14);
}

TEST_CASE("hand-built tables reproduce the dense inverse") {
  for (const auto& [p, rho] : std::vector<std::pair<cplx, cplx>>{{cplx(0.3, 0.4), cplx(0.7, -0.2)},
                                                                   {cplx(-0.2, 0.1), cplx(0.0, 1.3)}}) {
    RationalSymbolSpec spec;
    spec.K = 1;
    spec.poles = {p};
    spec.mults = {1};
    spec.h.rho00 = Mat::Zero(1, 1);
    spec.h.rho = {{Mat::Constant(1, 1, rho)}};
    spec.sharp = spec.h;
    const RationalSymbol sym(spec);
    CoefficientTables ct(sym);
    const auto hand = scalar_tables(p, rho);
    for (Index n : {3, 9}) {
      SeriesOptions o;
      o.tol = 1e-12;
      o.allow_uncertified = true;
      const Mat dense = dense_T(ct, n).inverse();
      CHECK(gap(series_inverse(hand, n, o).inverse.matrix(), dense) < 1e-10);
    }
  }
}

TEST_CASE("tail of the first term is the infinite inverse") {
  std::mt19937_64 rng(41);
  const RationalSymbol sym(random_spec(rng, {2, 1, {1, 2}}));
  CoefficientTables t(sym);
  const auto st = series_tables(t);
  const Index s = 4, u = 9;
  Mat direct = Mat::Zero(2, 2);
  for (Index l = 0; l < s; ++l) direct += t.a_tilde(l).adjoint() * t.a_tilde(l + u - s);
  CHECK(gap(first_term_gram(st, 500, s, u, SeriesVariant::Tilde), direct) < 1e-14);
}

TEST_CASE("series inverse agrees with dense inversion on random symbols") {
  std::mt19937_64 rng(42);
  int certified = 0;
  for (const auto& shape : sweep_shapes()) {
    const RationalSymbol sym(random_spec(rng, shape));
    CoefficientTables t(sym);
    for (Index n : {Index(6), Index(17), Index(32)}) {
      const Mat dense = dense_T(t, n).inverse();
      const Mat T = dense_T(t, n);
      SeriesOptions o;
      o.tol = 1e-10;
      o.allow_uncertified = true;
      o.variant = SeriesVariant::Tilde;
      const auto ri = series_inverse(t, n, o);
      o.variant = SeriesVariant::Plain;
      const auto rii = series_inverse(t, n, o);
      certified += ri.certified ? 1 : 0;
      const double scale = std::max(1.0, dense.norm());
      CHECK(gap(ri.inverse.matrix(), dense) <= 1e-8 * scale);
      CHECK(gap(rii.inverse.matrix(), dense) <= 1e-8 * scale);
      CHECK(gap(ri.inverse.matrix(), rii.inverse.matrix()) <= 2e-8 * scale);
      CHECK(ri.inverse.hermitian_defect() <= 1e-8 * scale);
      CHECK((ri.inverse.matrix() * T - Mat::Identity(T.rows(), T.cols())).norm() <= 1e-7);
      if (ri.certified) {
        CHECK(gap(ri.inverse.matrix(), dense) <= ri.remainder_bound + 1e-10 * scale);
      }
    }
  }
  CHECK(certified > 0);
  MESSAGE("certified runs: " << certified << " of " << 3 * sweep_shapes().size());
}

TEST_CASE("single blocks match the full assembly") {
  std::mt19937_64 rng(43);
  const RationalSymbol sym(random_spec(rng, {2, 1, {2}}));
  CoefficientTables t(sym);
  const auto st = series_tables(t);
  const Index n = 7;
  SeriesOptions o;
  o.allow_uncertified = true;
  for (auto v : {SeriesVariant::Tilde, SeriesVariant::Plain}) {
    o.variant = v;
    const auto full = series_inverse(st, n, o);
    for (Index s : {1, 4, 7}) {
      for (Index u : {1, 3, 7}) {
        CHECK(gap(inverse_block_series(st, n, s, u, o), full.inverse.block(s, u)) < 1e-10);
      }
    }
  }
}

TEST_CASE("b recursion matches the closed forms and the contraction bound") {
  std::mt19937_64 rng(44);
  for (const auto& shape : std::vector<RandomSpecShape>{{1, 0, {1}}, {2, 1, {2, 1}}, {3, 0, {1, 1}}}) {
    const RationalSymbol sym(random_spec(rng, shape));
    CoefficientTables t(sym);
    const auto st = series_tables(t);
    Index n = 4;
    while (t.F(n + 1) >= 0.9) ++n;
    const auto& kit = t.kit();
    for (auto v : {SeriesVariant::Plain, SeriesVariant::Tilde}) {
      const Index lo = v == SeriesVariant::Plain ? sym.m0() + 1 : 1;
      const Index hi = v == SeriesVariant::Plain ? n : n - sym.m0();
      for (Index u = lo; u <= hi; ++u) {
        auto b = b_recursion_start(st, v, n, u, 150);
        for (int k = 1; k <= 4; ++k) {
          for (Index l = 0; l <= 3; ++l) {
            const Mat closed = v == SeriesVariant::Plain ? kit.b_closed(n, u, k, l)
                                                         : kit.b_tilde_closed(n, u, k, l);
            CHECK(gap(b.coeffs[static_cast<std::size_t>(l)], closed) < 1e-9);
          }
          double mass = 0.0;
          for (const auto& m : b.coeffs) mass += op_norm(m);
          const double head = v == SeriesVariant::Plain ? t.F(u) : t.F(n + 1 - u);
          CHECK(mass <= std::pow(t.F(n + 1), k - 1) * head * (1.0 + 1e-9));
          b = b_recursion_step(b, st);
        }
      }
    }
  }
}

TEST_CASE("certification refuses without contraction") {
  const auto st = scalar_tables(0.9, 1.0);
  REQUIRE(st.F(6) >= 1.0);
  try {
    series_inverse(st, 5, {});
    FAIL("expected DivergentRecursion");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivergentRecursion);
  }
  const auto b = b_recursion_start(st, SeriesVariant::Plain, 5, 1, 4);
  CHECK_THROWS_AS(b_recursion_step(b, st), Error);
  CHECK_THROWS_AS(series_inverse(st, 0, {}), Error);

  SeriesOptions o;
  o.allow_uncertified = true;
  o.tol = 1e-11;
  const auto rep = series_inverse(st, 5, o);
  CHECK_FALSE(rep.certified);
  CHECK(rep.remainder_bound == std::numeric_limits<double>::infinity());
  RationalSymbolSpec spec;
  spec.K = 1;
  spec.poles = {0.9};
  spec.mults = {1};
  spec.h.rho00 = Mat::Zero(1, 1);
  spec.h.rho = {{Mat::Constant(1, 1, 1.0)}};
  spec.sharp = spec.h;
  const RationalSymbol sym(spec);
  CoefficientTables ct(sym);
  CHECK(gap(rep.inverse.matrix(), dense_T(ct, 5).inverse()) < 1e-8);

  SeriesOptions shallow;
  shallow.max_depth = 1;
  shallow.tol = 1e-15;
  try {
    series_inverse(st, 40, shallow);
    FAIL("expected ToleranceUnreachable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ToleranceUnreachable);
  }
}

TEST_CASE("tightening the tolerance does not increase the error") {
  std::mt19937_64 rng(46);
  const RationalSymbol sym(random_spec(rng, {2, 0, {1, 1}}));
  CoefficientTables t(sym);
  const Index n = 12;
  const Mat dense = dense_T(t, n).inverse();
  double prev = std::numeric_limits<double>::infinity();
  for (double tol : {1e-3, 5e-4, 1e-6, 5e-7, 1e-9, 5e-10}) {
    SeriesOptions o;
    o.tol = tol;
    o.allow_uncertified = true;
    const double err = gap(series_inverse(t, n, o).inverse.matrix(), dense);
    CHECK(err <= prev * (1.0 + 1e-6) + 1e-13);
    prev = err;
  }
}
