// One PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tpz/bench.hpp"
#include "tpz/closed_form.hpp"
#include "tpz/coefficients.hpp"
#include "tpz/error.hpp"
#include "tpz/fast_solver.hpp"
#include "tpz/oracle.hpp"
#include "tpz/series_inverse.hpp"

using namespace tpz;
using namespace tpz::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(const Mat& x, const Mat& y) {
  return (x - y).norm() / std::max({1.0, x.norm(), y.norm()});
}

// Largest block difference, relative to max(1, largest block of y).
double block_gap(const BlockMatrix& x, const BlockMatrix& y) {
  double worst = 0.0;
  double scale = 1.0;
  for (Index s = 1; s <= y.n(); ++s) {
    for (Index t = 1; t <= y.n(); ++t) {
      worst = std::max(worst, (Mat(x.block(s, t)) - Mat(y.block(s, t))).norm());
      scale = std::max(scale, Mat(y.block(s, t)).norm());
    }
  }
  return worst / scale;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

RationalSymbolSpec scalar_arma(cplx p, cplx rho) {
  RationalSymbolSpec s;
  s.K = 1;
  s.poles = {p};
  s.mults = {1};
  s.h.rho00 = Mat::Zero(1, 1);
  s.h.rho = {{Mat::Constant(1, 1, rho)}};
  return s;
}

std::vector<RationalSymbolSpec> sweep_specs(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<RationalSymbolSpec> out;
  for (const auto& shape : sweep_shapes()) out.push_back(random_spec(rng, shape));
  return out;
}

// Generalized binomial k(k-1)...(k-m+1)/m!, zero for m < 0.
double choose(double k, int m) {
  if (m < 0) return 0.0;
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= (k - i) / (i + 1);
  return r;
}

Outcome example_two_by_two() {
  const auto t0 = Clock::now();
  Outcome o;
  double worst = 0.0;
  auto track = [&](double e) { worst = std::max(worst, e); };

  for (const auto& [p, rho] : std::vector<std::pair<cplx, cplx>>{{0.5, 1.0}, {cplx(0.3, 0.4), cplx(0.7, -0.2)}}) {
    const RationalSymbol sym(scalar_arma(p, rho));
    const CoefficientTables t(sym);
    const double q = std::norm(p);
    const cplx pc = std::conj(p);

    Mat T(2, 2);
    T << 1.0 + q, -p, -pc, 1.0 + q;
    T /= std::norm(rho);
    track(rel(dense_toeplitz(t, 2).matrix(), T));

    Mat inv(2, 2);
    inv << 1.0 + q, p, pc, 1.0 + q;
    inv *= std::norm(rho) / (1.0 + q + q * q);

    std::vector<Mat> paths;
    for (auto v : {SeriesVariant::Tilde, SeriesVariant::Plain}) {
      SeriesOptions so;
      so.variant = v;
      so.tol = 1e-13;
      paths.push_back(series_inverse(t, 2, so).inverse.matrix());
    }
    paths.push_back(closed_form_inverse(t, 2).matrix());
    paths.push_back(dense_inverse(t, 2).matrix());
    BlockVector e(2, 1);
    e.block(1)(0, 0) = 1.0;
    const BlockVector z1 = fast_solve(t, e).z;
    e.block(1)(0, 0) = 0.0;
    e.block(2)(0, 0) = 1.0;
    const BlockVector z2 = fast_solve(t, e).z;
    Mat fast(2, 2);
    fast << z1.matrix(), z2.matrix();
    paths.push_back(fast);
    for (const auto& m : paths) track((m - inv).cwiseAbs().maxCoeff());

    const SolveVectors sv(t.kit(), 2);
    const cplx lead = std::conj(rho) / (pc * pc * (1.0 - q * q * q));
    const cplx ell[2] = {lead * (1.0 + q), lead * pc};
    const cplx rlead = -rho * pc * q * (1.0 - q);
    const cplx r[2] = {rlead * pc * (1.0 + q), rlead * q};
    const cplx ell_t[2] = {std::conj(ell[1]), std::conj(ell[0])};
    const cplx r_t[2] = {std::conj(r[1]), std::conj(r[0])};
    for (int s = 0; s < 2; ++s) {
      track(std::abs(sv.ell(s + 1)(0, 0) - ell[s]) / std::max(1.0, std::abs(ell[s])));
      track(std::abs(sv.r(s + 1)(0, 0) - r[s]) / std::max(1.0, std::abs(r[s])));
      track(std::abs(sv.ell_tilde(s + 1)(0, 0) - ell_t[s]) / std::max(1.0, std::abs(ell_t[s])));
      track(std::abs(sv.r_tilde(s + 1)(0, 0) - r_t[s]) / std::max(1.0, std::abs(r_t[s])));
    }

    // A~_2 and A_2 as displayed, checked against the coefficient tables too.
    Mat At(2, 2);
    At << 1.0, p, 0.0, 1.0;
    At *= std::conj(rho);
    Mat A(2, 2);
    A << 1.0, 0.0, pc, 1.0;
    A *= rho;
    track(std::abs(t.a_tilde(0)(0, 0) - At(0, 0)) + std::abs(t.a_tilde(1)(0, 0) - At(0, 1)));
    track(std::abs(t.a(0)(0, 0) - A(0, 0)) + std::abs(t.a(1)(0, 0) - A(1, 0)));
    Mat lt(2, 1), rt(1, 2), l(2, 1), rr(1, 2);
    lt << sv.ell_tilde(1), sv.ell_tilde(2);
    rt << sv.r_tilde(1), sv.r_tilde(2);
    l << sv.ell(1), sv.ell(2);
    rr << sv.r(1), sv.r(2);
    track((At.adjoint() * At + lt * rt - inv).cwiseAbs().maxCoeff());
    track((A.adjoint() * A + l * rr - inv).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  o.pass = worst <= 1e-10 && secs < 1.0;
  o.detail = "max error " + fmt(worst) + " (tol 1e-10), " + fmt(secs) + " s (limit 1 s)";
  return o;
}

Outcome oracle_sweep() {
  const auto t0 = Clock::now();
  double solve_worst = 0.0;
  double inverse_worst = 0.0;
  int uncertified = 0;
  int runs = 0;
  for (const auto& spec : sweep_specs(2401)) {
    const CoefficientTables t{RationalSymbol(spec)};
    for (Index n : {8, 32, 128}) {
      const BlockVector Y = random_rhs(n, spec.d, static_cast<std::uint64_t>(n) * 7 + 1);
      const Mat zf = fast_solve(t, Y).z.matrix();
      const Mat zl = levinson_solve(t, Y).matrix();
      const Mat zd = dense_solve(t, Y).z.matrix();
      solve_worst = std::max({solve_worst, rel(zf, zd), rel(zl, zd), rel(zf, zl)});
      ++runs;
      if (n > 32) continue;
      const BlockMatrix dense = dense_inverse(t, n);
      inverse_worst = std::max(inverse_worst, block_gap(closed_form_inverse(t, n), dense));
      SeriesOptions so;
      so.allow_uncertified = true;
      const SeriesInverseReport sr = series_inverse(t, n, so);
      if (!sr.certified) ++uncertified;
      inverse_worst = std::max(inverse_worst, block_gap(sr.inverse, dense));
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = solve_worst <= 1e-8 && inverse_worst <= 1e-7 && secs < 300.0;
  o.detail = std::to_string(runs) + " solves, fast/levinson/dense max rel diff " + fmt(solve_worst) +
             " (tol 1e-8); closed/series vs dense inverse " + fmt(inverse_worst) + " (tol 1e-7, " +
             std::to_string(uncertified) + " uncertified series runs); " + fmt(secs) + " s";
  return o;
}

Outcome beta_paths() {
  double worst = 0.0;
  int count = 0;
  for (const auto& spec : sweep_specs(2402)) {
    const CoefficientTables t{RationalSymbol(spec)};
    for (Index k = spec.m0 + 1; k <= spec.m0 + 20; ++k) {
      const Mat c = t.beta_closed(k);
      const Mat s = t.beta_series(k);
      const Mat q = t.beta_quadrature(k);
      worst = std::max({worst, rel(c, s), rel(c, q), rel(s, q)});
      ++count;
    }
  }
  return {worst <= 1e-8, std::to_string(count) + " indices, max rel diff " + fmt(worst) + " (tol 1e-8)"};
}

constexpr Index kLength = 120;

// b^1..b^4 (or b~) straight from the Hankel recursion on a beta table.
std::vector<std::vector<Mat>> direct_b(const CoefficientTables& t, SeriesVariant v, Index n, Index u) {
  std::vector<Mat> beta(static_cast<std::size_t>(n + 2 * kLength + 2));
  for (std::size_t k = 1; k < beta.size(); ++k) beta[k] = t.beta_series(static_cast<Index>(k));
  auto at = [&](Index k) { return beta[static_cast<std::size_t>(k)]; };
  std::vector<std::vector<Mat>> out(1);
  for (Index l = 0; l < kLength; ++l) {
    out[0].push_back(v == SeriesVariant::Plain ? at(u + l) : Mat(at(n + 1 - u + l).adjoint()));
  }
  for (int k = 2; k <= 4; ++k) {
    // Plain: b^{2j} uses beta^*, b^{2j+1} uses beta; the tilde sequence the reverse.
    const bool star = (k % 2 == 0) == (v == SeriesVariant::Plain);
    std::vector<Mat> next;
    for (Index l = 0; l < kLength; ++l) {
      Mat acc = Mat::Zero(t.d(), t.d());
      for (Index m = 0; m < kLength; ++m) {
        const Mat b = at(n + 1 + m + l);
        acc += out.back()[static_cast<std::size_t>(m)] * (star ? Mat(b.adjoint()) : b);
      }
      next.push_back(acc);
    }
    out.push_back(next);
  }
  return out;
}

Outcome b_sequences() {
  double worst = 0.0;
  int rows = 0;
  int direct = 0;
  for (const auto& spec : sweep_specs(2403)) {
    if (spec.K == 0) continue;
    const CoefficientTables t{RationalSymbol(spec)};
    const SeriesTables st = series_tables(t);
    const ClosedFormKit& kit = t.kit();
    for (Index n = spec.m0 + 1; n <= 12; ++n) {
      // Without contraction the library declines to iterate; the sequences are
      // still defined, so those rows use the direct recursion below.
      const bool contracting = t.F(n + 1) < 1.0;
      if (!contracting) ++direct;
      for (auto v : {SeriesVariant::Plain, SeriesVariant::Tilde}) {
        const Index lo = v == SeriesVariant::Plain ? spec.m0 + 1 : 1;
        const Index hi = v == SeriesVariant::Plain ? n : n - spec.m0;
        for (Index u = lo; u <= hi; ++u) {
          std::vector<std::vector<Mat>> seq;
          if (contracting) {
            auto b = b_recursion_start(st, v, n, u, kLength);
            for (int k = 1; k <= 4; ++k) {
              seq.push_back(b.coeffs);
              if (k < 4) b = b_recursion_step(b, st);
            }
          } else {
            seq = direct_b(t, v, n, u);
          }
          for (int k = 1; k <= 4; ++k) {
            for (Index l = 0; l <= 3; ++l) {
              const Mat closed = v == SeriesVariant::Plain ? kit.b_closed(n, u, k, l)
                                                           : kit.b_tilde_closed(n, u, k, l);
              worst = std::max(worst, rel(seq[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(l)], closed));
            }
          }
          ++rows;
        }
      }
    }
  }
  std::string detail = std::to_string(rows) + " (n, u) rows to depth 4, max rel diff " + fmt(worst) +
                       " (tol 1e-9)";
  detail += "; " + std::to_string(direct) + " (spec, n) pairs with F(n+1) >= 1 via the direct recursion";
  return {worst <= 1e-9 && rows > 0, detail};
}

Outcome summation_identities() {
  std::mt19937_64 rng(2404);
  std::uniform_int_distribution<int> small(0, 3);
  std::uniform_int_distribution<int> nn(-6, 8);
  std::uniform_real_distribution<double> mod(0.1, 0.9);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::acos(-1.0));
  double sum_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = nn(rng);
    const int i = small(rng);
    const int j = small(rng);
    const cplx x = std::polar(mod(rng), ang(rng));
    const cplx y = std::polar(mod(rng), ang(rng));
    cplx brute(0.0, 0.0);
    cplx xp = std::pow(x, static_cast<double>(n - i));
    cplx yp(1.0, 0.0);
    for (int l = 0; l < 10000; ++l) {
      brute += choose(static_cast<double>(n + l), i) * choose(static_cast<double>(j + l), j) * xp * yp;
      xp *= x;
      yp *= y;
    }
    const cplx closed = pascal_sum_closed(n, i, j, x, y);
    sum_worst = std::max(sum_worst, std::abs(closed - brute) / std::max(1.0, std::abs(brute)));
  }

  double phi_worst = 0.0;
  int entries = 0;
  for (const auto& spec : sweep_specs(2405)) {
    if (spec.K == 0) continue;
    const RationalSymbol sym(spec);
    const ClosedFormKit kit(sym);
    for (Index n = -3; n <= 6; ++n) {
      const Mat phi = kit.Phi_scalar(n);
      for (int mu = 0; mu < sym.K(); ++mu) {
        for (int nu = 0; nu < sym.K(); ++nu) {
          const cplx pm = sym.pole(mu);
          const cplx pn = std::conj(sym.pole(nu));
          for (int i = 1; i <= sym.mult(mu); ++i) {
            for (int j = 1; j <= sym.mult(nu); ++j) {
              cplx brute(0.0, 0.0);
              cplx pw = std::pow(pm, static_cast<double>(1 - i - n));
              for (int l = 0; l < 10000; ++l) {
                brute += choose(static_cast<double>(l - n), i - 1) *
                         choose(static_cast<double>(l + j - 1), j - 1) * pw;
                pw *= pm * pn;
              }
              const cplx closed = phi(kit.slot(mu, i), kit.slot(nu, j));
              phi_worst = std::max(phi_worst, std::abs(closed - brute) / std::max(1.0, std::abs(brute)));
              ++entries;
            }
          }
        }
      }
    }
  }
  return {sum_worst <= 1e-9 && phi_worst <= 1e-9,
          "summation identity on 100 draws " + fmt(sum_worst) + ", " + std::to_string(entries) +
              " Phi entries " + fmt(phi_worst) + " (tol 1e-9)"};
}

Outcome strong_convergence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2406);
  std::vector<RationalSymbolSpec> specs{small_arma_spec(), random_spec(rng, {2, 1, {1, 2}}),
                                        random_spec(rng, {3, 0, {2}})};
  const std::vector<double> ratios{0.5, 0.7, 0.6};
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const CoefficientTables t{RationalSymbol(specs[i])};
    const Mat base = Mat::Identity(specs[i].d, specs[i].d) + 0.3 * random_matrix(rng, specs[i].d, specs[i].d);
    const ConvergenceReport rep = convergence_experiment(t, geometric_rhs(base, ratios[i]), {8, 128});
    const double r = rep.deltas[1] / rep.deltas[0];
    ok = ok && rep.deltas[0] > 0.0 && r <= 1e-3;
    detail << (i ? ", " : "") << "delta(128)/delta(8) = " << fmt(r);
  }
  const double secs = seconds_since(t0);
  detail << " (limit 1e-3); " << fmt(secs) << " s";
  return {ok && secs < 60.0, detail.str()};
}

Outcome linear_scaling() {
  std::mt19937_64 rng(7);
  const CoefficientTables t{RationalSymbol(random_spec(rng, {2, 1, {1, 2}}))};
  std::vector<double> times;
  for (Index n : {Index(1) << 14, Index(1) << 15, Index(1) << 16}) {
    times.push_back(median_solve_seconds(t, SolveMethod::Fast, n, 5, 3));
  }
  const double r1 = times[1] / times[0];
  const double r2 = times[2] / times[1];
  return {r1 <= 2.6 && r2 <= 2.6,
          "d=2 K=2 medians " + fmt(times[0]) + ", " + fmt(times[1]) + ", " + fmt(times[2]) +
              " s; ratios " + fmt(r1) + ", " + fmt(r2) + " (limit 2.6)"};
}

Outcome invariants() {
  double herm = 0.0;
  double overlap = 0.0;
  int cases = 0;
  for (const auto& spec : sweep_specs(2407)) {
    const CoefficientTables t{RationalSymbol(spec)};
    for (Index n : {Index(2 * spec.m0 + 1), Index(2 * spec.m0 + 4), Index(23)}) {
      const BlockMatrix inv = closed_form_inverse(t, n);
      double scale = 1.0;
      for (Index s = 1; s <= n; ++s) {
        for (Index u = 1; u <= n; ++u) scale = std::max(scale, Mat(inv.block(s, u)).norm());
      }
      herm = std::max(herm, inv.hermitian_defect() / scale);
      overlap = std::max(overlap, region_overlap_defect(t, n));
      ++cases;
    }
  }
  return {herm <= 1e-11 && overlap <= 1e-11,
          std::to_string(cases) + " (spec, n) cases, self-adjointness " + fmt(herm) +
              ", region overlap " + fmt(overlap) + " (tol 1e-11)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"two-by-two example: T_2, inverse paths, rank-one factors", example_two_by_two},
      {"oracle equivalence sweep", oracle_sweep},
      {"beta closed/series/quadrature agreement", beta_paths},
      {"b and b~ closed forms vs recursion", b_sequences},
      {"summation identity and Phi series", summation_identities},
      {"strong convergence of finite solutions", strong_convergence},
      {"linear-time scaling of the fast solver", linear_scaling},
      {"self-adjointness and region overlap", invariants},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu: %s -- %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
