#include "tpz/bench.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <random>

#include "tpz/error.hpp"
#include "tpz/fast_solver.hpp"

namespace tpz {

namespace {

using Clock = std::chrono::steady_clock;

BlockVector solve_with(const CoefficientTables& tables, SolveMethod method, const BlockVector& Y,
                       Index dense_cap, Index levinson_cap) {
  switch (method) {
    case SolveMethod::Fast: {
      FastSolveOptions o;
      o.compute_residual = false;
      return fast_solve(tables, Y, o).z;
    }
    case SolveMethod::Dense:
      return dense_solve(tables, Y, dense_cap).z;
    case SolveMethod::Levinson:
      return levinson_solve(tables, Y, levinson_cap);
  }
  return {};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Fast:
      return "fast";
    case SolveMethod::Dense:
      return "dense";
    case SolveMethod::Levinson:
      return "levinson";
  }
  return "?";
}

SolveMethod solve_method_from_string(const std::string& s) {
  if (s == "fast") return SolveMethod::Fast;
  if (s == "dense") return SolveMethod::Dense;
  if (s == "levinson") return SolveMethod::Levinson;
  throw Error(ErrorCode::DomainViolation, "unknown solve method '" + s + "'");
}

BlockVector random_rhs(Index n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat y(n * d, d);
  for (Index j = 0; j < y.cols(); ++j) {
    for (Index i = 0; i < y.rows(); ++i) y(i, j) = cplx(g(rng), g(rng));
  }
  return BlockVector(std::move(y), d);
}

double median_solve_seconds(const CoefficientTables& tables, SolveMethod method, Index n,
                            int repeats, std::uint64_t seed) {
  const BlockVector Y = random_rhs(n, tables.d(), seed);
  std::vector<double> times;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    const auto start = Clock::now();
    const BlockVector Z = solve_with(tables, method, Y, 0, kLevinsonCap);
    times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    if (Z.n() != n) throw Error(ErrorCode::ConsistencyViolation, "solver returned a wrong shape");
  }
  return median(times);
}

std::vector<BenchRow> run_bench(const CoefficientTables& tables, const BenchOptions& opts) {
  const auto& sym = tables.symbol();
  const Index dense_cap = opts.dense_cap > 0 ? opts.dense_cap : default_dense_cap();
  std::vector<BenchRow> rows;
  for (Index n : opts.ns) {
    const BlockVector Y = random_rhs(n, sym.d(), opts.seed + static_cast<std::uint64_t>(n));
    for (SolveMethod m : opts.methods) {
      BenchRow row;
      row.method = m;
      row.n = n;
      row.d = sym.d();
      row.K = sym.K();
      row.m0 = sym.m0();
      const bool too_big = (m == SolveMethod::Dense && n > dense_cap) ||
                           (m == SolveMethod::Levinson && n > opts.levinson_cap);
      if (!too_big) {
        std::vector<double> times;
        BlockVector Z;
        for (int r = 0; r < std::max(1, opts.repeats); ++r) {
          const auto start = Clock::now();
          Z = solve_with(tables, m, Y, dense_cap, opts.levinson_cap);
          times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
        }
        row.median_seconds = median(times);
        const BlockVector TZ = apply_toeplitz_banded(tables, Z);
        row.residual = (TZ.matrix() - Y.matrix()).norm() / Y.matrix().norm();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "method,n,d,K,m0,median_seconds,residual\n";
  const auto old = os.precision(6);
  for (const auto& r : rows) {
    os << to_string(r.method) << ',' << r.n << ',' << r.d << ',' << r.K << ',' << r.m0 << ',';
    if (r.median_seconds) {
      os << *r.median_seconds << ',' << r.residual << '\n';
    } else {
      os << "skipped,skipped\n";
    }
  }
  os.precision(old);
}

std::optional<Index> fast_levinson_crossover(const std::vector<BenchRow>& rows) {
  std::vector<Index> ns;
  for (const auto& r : rows) ns.push_back(r.n);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (Index n : ns) {
    std::optional<double> fast, lev;
    for (const auto& r : rows) {
      if (r.n != n) continue;
      if (r.method == SolveMethod::Fast) fast = r.median_seconds;
      if (r.method == SolveMethod::Levinson) lev = r.median_seconds;
    }
    if (fast && lev && *fast < *lev) return n;
  }
  return std::nullopt;
}

}  // namespace tpz
