#include <doctest.h>

#include "support.hpp"
#include "tpz/rational_symbol.hpp"

using namespace tpz;
using namespace tpz::testing;

namespace {

bool fails_with(const RationalSymbolSpec& spec, ErrorCode code) {
  const auto report = validate(spec);
  for (const auto& c : report.checks) {
    if (!c.passed) return c.failure == code;
  }
  return false;
}

}  // namespace

TEST_CASE("small ARMA symbol validates and evaluates") {
  const auto spec = small_arma_spec();
  CHECK(validate(spec).ok());
  const RationalSymbol sym(spec);
  CHECK(std::abs(sym.h(0.0)(0, 0) - cplx(-1.0, 0.0)) < 1e-15);
  CHECK(std::abs(sym.h(0.5)(0, 0) - cplx(-0.75, 0.0)) < 1e-15);
  CHECK(std::abs(sym.w(0.0)(0, 0) - 0.25) < 1e-15);
  CHECK(sym.M() == 1);
  CHECK(sym.decay_rate() == doctest::Approx(0.5));
}

TEST_CASE("identity symbol") {
  const RationalSymbol sym(identity_spec(2));
  CHECK((sym.h(cplx(0.3, 0.2)) - Mat::Identity(2, 2)).norm() < 1e-15);
  CHECK(validate(identity_spec(3)).ok());
}

TEST_CASE("random specs pass validation") {
  std::mt19937_64 rng(7);
  for (const auto& shape : sweep_shapes()) {
    const auto spec = random_spec(rng, shape);
    const auto report = validate(spec);
    INFO("d=" << shape.d << " m0=" << shape.m0 << " K=" << shape.mults.size());
    CHECK(report.ok());
  }
}

TEST_CASE("validation failures carry their codes") {
  auto spec = small_arma_spec();
  spec.poles[0] = cplx(1.2, 0.0);
  CHECK(fails_with(spec, ErrorCode::PoleOutOfDomain));

  spec = small_arma_spec();
  spec.poles[0] = 0.0;
  CHECK(fails_with(spec, ErrorCode::PoleOutOfDomain));

  spec = small_arma_spec();
  spec.K = 2;
  spec.poles = {cplx(0.5, 0.0), cplx(0.5, 0.0)};
  spec.mults = {1, 1};
  spec.h.rho.push_back(spec.h.rho[0]);
  CHECK(fails_with(spec, ErrorCode::DuplicatePoles));

  spec = small_arma_spec();
  spec.h.rho[0][0](0, 0) = 0.0;
  CHECK(fails_with(spec, ErrorCode::ZeroLeadingResidue));

  spec = small_arma_spec();
  spec.h.rho00(0, 0) = -1.5;  // 1.5 - 1/(1 - z/2) vanishes at z = 2/3, inside
  CHECK(fails_with(spec, ErrorCode::OuternessCheckFailed));

  spec = identity_spec(2);
  spec.sharp.reset();
  CHECK_THROWS_AS(check_structure(spec), Error);
  CHECK(fails_with(spec, ErrorCode::SharpShapeMismatch));

  spec = identity_spec(2);
  spec.sharp->rho00 = -2.0 * Mat::Identity(2, 2);
  CHECK(fails_with(spec, ErrorCode::FactorizationMismatch));

  spec = small_arma_spec();
  spec.mults = {1, 2};
  CHECK(fails_with(spec, ErrorCode::MalformedSpec));
}

TEST_CASE("evaluation at a pole is refused") {
  const RationalSymbol sym(small_arma_spec());
  CHECK_THROWS_AS(sym.h_inv(2.0), Error);
  try {
    sym.h_inv(2.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EvaluationAtPole);
  }
  const RationalSymbol ar(ar1_spec());
  try {
    ar.h_dagger_inv(0.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EvaluationAtPole);
  }
}

TEST_CASE("h_dagger_inv is the adjoint of h_inv at the reflected point") {
  std::mt19937_64 rng(3);
  const RationalSymbol sym(random_spec(rng, {2, 1, {1, 2}}));
  const cplx z(0.3, -0.4);
  const Mat expect = sym.h_inv(1.0 / std::conj(z)).adjoint();
  CHECK((sym.h_dagger_inv(z) - expect).norm() < 1e-13);
}
