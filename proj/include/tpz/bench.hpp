#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tpz/coefficients.hpp"
#include "tpz/oracle.hpp"

namespace tpz {

const char* to_string(SolveMethod m);
SolveMethod solve_method_from_string(const std::string& s);

/// Right-hand side with standard complex Gaussian entries.
BlockVector random_rhs(Index n, int d, std::uint64_t seed);

/// Median wall time of `repeats` solves of one random system (residual excluded).
double median_solve_seconds(const CoefficientTables& tables, SolveMethod method, Index n,
                            int repeats, std::uint64_t seed);

struct BenchOptions {
  std::vector<Index> ns;
  std::vector<SolveMethod> methods{SolveMethod::Fast, SolveMethod::Levinson, SolveMethod::Dense};
  int repeats = 5;
  std::uint64_t seed = 1;
  Index dense_cap = 0;  // 0: default_dense_cap()
  Index levinson_cap = kLevinsonCap;
};

struct BenchRow {
  SolveMethod method = SolveMethod::Fast;
  Index n = 0;
  int d = 0, K = 0, m0 = 0;
  std::optional<double> median_seconds;  // empty when skipped
  double residual = 0.0;                 // relative ||T Z - Y|| / ||Y||
};

std::vector<BenchRow> run_bench(const CoefficientTables& tables, const BenchOptions& opts);
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);
/// Smallest n at which the fast solver beats Levinson, if any.
std::optional<Index> fast_levinson_crossover(const std::vector<BenchRow>& rows);

}  // namespace tpz
