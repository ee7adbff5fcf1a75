#include "tpz/oracle.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>

#include "tpz/error.hpp"
#include "tpz/fast_solver.hpp"
#include "tpz/numeric.hpp"

namespace tpz {

namespace {

void check_cap(Index n, Index cap) {
  if (cap <= 0) cap = default_dense_cap();
  if (n > cap) {
    std::ostringstream os;
    os << "n = " << n << " exceeds the dense cap " << cap;
    throw Error(ErrorCode::DenseCapExceeded, os.str());
  }
}

Eigen::PartialPivLU<Mat> factor(const Mat& T) {
  Eigen::PartialPivLU<Mat> lu(T);
  if (!(lu.rcond() > 1e-15)) {
    std::ostringstream os;
    os << "T_n is numerically singular (rcond " << lu.rcond() << ")";
    throw Error(ErrorCode::NumericallySingular, os.str());
  }
  return lu;
}

std::vector<Mat> gamma_table(const CoefficientTables& tables, Index n) {
  std::vector<Mat> g(static_cast<std::size_t>(n));
  const Index band = tables.gamma_band();
  for (Index k = 0; k < n; ++k) {
    g[static_cast<std::size_t>(k)] = k < band ? tables.gamma(k) : Mat::Zero(tables.d(), tables.d());
  }
  return g;
}

}  // namespace

Index default_dense_cap() {
  if (const char* env = std::getenv("TPZ_DENSE_CAP")) {
    try {
      const long long v = std::stoll(env);
      if (v > 0) return static_cast<Index>(v);
    } catch (const std::exception&) {
    }
  }
  return 2048;
}

BlockMatrix dense_toeplitz(const CoefficientTables& tables, Index n) {
  if (n < 1) throw Error(ErrorCode::DomainViolation, "n must be positive");
  const int d = tables.d();
  const auto g = gamma_table(tables, n);
  BlockMatrix T(n, d);
  for (Index s = 1; s <= n; ++s) {
    for (Index t = 1; t <= n; ++t) {
      T.block(s, t) = s >= t ? g[static_cast<std::size_t>(s - t)]
                             : Mat(g[static_cast<std::size_t>(t - s)].adjoint());
    }
  }
  T.set_hermitian(true);
  return T;
}

DenseSolution dense_solve(const CoefficientTables& tables, const BlockVector& Y, Index cap) {
  check_cap(Y.n(), cap);
  if (Y.d() != tables.d()) throw Error(ErrorCode::DomainViolation, "block size mismatch");
  const Mat T = dense_toeplitz(tables, Y.n()).matrix();
  const auto lu = factor(T);
  DenseSolution out;
  out.z = BlockVector(Mat(lu.solve(Y.matrix())), Y.d());
  out.residual = (T * out.z.matrix() - Y.matrix()).norm();
  return out;
}

BlockMatrix dense_inverse(const CoefficientTables& tables, Index n, Index cap) {
  check_cap(n, cap);
  const Mat T = dense_toeplitz(tables, n).matrix();
  return BlockMatrix(Mat(factor(T).inverse()), tables.d());
}

BlockVector levinson_solve(const CoefficientTables& tables, const BlockVector& Y, Index cap) {
  const Index n = Y.n();
  const int d = tables.d();
  if (Y.d() != d) throw Error(ErrorCode::DomainViolation, "block size mismatch");
  if (n > cap) {
    std::ostringstream os;
    os << "n = " << n << " exceeds the Levinson cap " << cap;
    throw Error(ErrorCode::DenseCapExceeded, os.str());
  }
  const auto g = gamma_table(tables, n);
  auto gam = [&](Index k) -> Mat {
    return k >= 0 ? g[static_cast<std::size_t>(k)] : Mat(g[static_cast<std::size_t>(-k)].adjoint());
  };
  const Mat I = Mat::Identity(d, d);
  auto inverse = [&](const Mat& m) {
    Eigen::PartialPivLU<Mat> lu(m);
    if (!(lu.rcond() > 1e-14)) {
      throw Error(ErrorCode::RecursionBreakdown, "singular leading block minor in the Levinson recursion");
    }
    return Mat(lu.inverse());
  };

  const Mat g0inv = inverse(gam(0));
  std::vector<Mat> F{g0inv}, B{g0inv};
  const Mat& y = Y.matrix();
  std::vector<Mat> X{g0inv * y.middleRows(0, d)};
  for (Index k = 1; k < n; ++k) {
    Mat ef = Mat::Zero(d, d), eb = Mat::Zero(d, d);
    Mat ex = Mat::Zero(d, y.cols());
    for (Index j = 1; j <= k; ++j) {
      const auto jj = static_cast<std::size_t>(j - 1);
      ef.noalias() += gam(k + 1 - j) * F[jj];
      eb.noalias() += gam(-j) * B[jj];
      ex.noalias() += gam(k + 1 - j) * X[jj];
    }
    const Mat alpha = inverse(I - eb * ef);
    const Mat delta = inverse(I - ef * eb);
    const Mat fb = -ef * alpha;
    const Mat bf = -eb * delta;
    std::vector<Mat> Fn(static_cast<std::size_t>(k + 1)), Bn(static_cast<std::size_t>(k + 1));
    for (Index j = 0; j <= k; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      Mat f = Mat::Zero(d, d), b = Mat::Zero(d, d);
      if (j < k) {
        f.noalias() += F[jj] * alpha;
        b.noalias() += F[jj] * bf;
      }
      if (j > 0) {
        f.noalias() += B[jj - 1] * fb;
        b.noalias() += B[jj - 1] * delta;
      }
      Fn[jj] = std::move(f);
      Bn[jj] = std::move(b);
    }
    F = std::move(Fn);
    B = std::move(Bn);
    const Mat rhs = y.middleRows(k * d, d) - ex;
    X.push_back(Mat::Zero(d, y.cols()));
    for (Index j = 0; j <= k; ++j) X[static_cast<std::size_t>(j)].noalias() += B[static_cast<std::size_t>(j)] * rhs;
  }
  Mat z(y.rows(), y.cols());
  for (Index j = 0; j < n; ++j) z.middleRows(j * d, d) = X[static_cast<std::size_t>(j)];
  return BlockVector(std::move(z), d);
}

BlockVector RhsSequence::head(Index n) const {
  std::vector<Mat> blocks;
  for (Index k = 1; k <= n; ++k) blocks.push_back(y(k));
  return BlockVector::from_blocks(blocks);
}

RhsSequence finitely_supported(const std::vector<Mat>& blocks) {
  if (blocks.empty()) throw Error(ErrorCode::DomainViolation, "empty right-hand side");
  RhsSequence r;
  r.d = static_cast<int>(blocks.front().rows());
  std::vector<double> suffix(blocks.size() + 1, 0.0);
  for (std::size_t k = blocks.size(); k-- > 0;) suffix[k] = suffix[k + 1] + blocks[k].norm();
  const Mat zero = Mat::Zero(blocks.front().rows(), blocks.front().cols());
  r.y = [blocks, zero](Index k) {
    return k >= 1 && k <= static_cast<Index>(blocks.size()) ? blocks[static_cast<std::size_t>(k - 1)] : zero;
  };
  r.tail = [suffix](Index N) {
    return N >= static_cast<Index>(suffix.size()) - 1 ? 0.0 : suffix[static_cast<std::size_t>(std::max<Index>(N, 0))];
  };
  std::ostringstream os;
  os << "finitely supported, " << blocks.size() << " blocks";
  r.description = os.str();
  return r;
}

RhsSequence geometric_rhs(const Mat& base, double ratio) {
  RhsSequence r;
  r.d = static_cast<int>(base.rows());
  r.y = [base, ratio](Index k) { return Mat(std::pow(ratio, static_cast<double>(k)) * base); };
  const double norm = base.norm();
  r.tail = [norm, ratio](Index N) {
    if (std::abs(ratio) >= 1.0) return std::numeric_limits<double>::infinity();
    return norm * std::pow(std::abs(ratio), static_cast<double>(N + 1)) / (1.0 - std::abs(ratio));
  };
  std::ostringstream os;
  os << "geometric, ratio " << ratio;
  r.description = os.str();
  return r;
}

std::vector<Mat> infinite_solution(const CoefficientTables& tables, const RhsSequence& y,
                                   Index horizon, double tol) {
  if (horizon < 1) throw Error(ErrorCode::DomainViolation, "horizon must be positive");
  const double al1 = tables.a_tilde_tail_l1(0);
  auto too_big = [&](Index N) {
    const double t = y.tail(N);
    return !std::isfinite(t) || t * al1 * al1 > tol;
  };
  Index N = horizon;
  const Index cap = Index(1) << 22;
  while (too_big(N)) {
    if (N >= cap || !std::isfinite(y.tail(N))) {
      throw Error(ErrorCode::NonSummableRHS, "right-hand side tail does not fall below the tolerance");
    }
    N *= 2;
  }
  double ysup = 0.0;
  std::vector<Mat> ys(static_cast<std::size_t>(N + 1));
  for (Index k = 1; k <= N; ++k) {
    ys[static_cast<std::size_t>(k)] = y.y(k);
    ysup = std::max(ysup, ys[static_cast<std::size_t>(k)].norm());
  }
  // Coefficients a~_k past Ka contribute less than tol.
  Index Ka = 0;
  while (Ka < N && tables.a_tilde_tail_l1(Ka + 1) * ysup * al1 > tol) Ka = std::max<Index>(2 * Ka, 1);
  Ka = std::min(Ka, N);
  std::vector<Mat> at(static_cast<std::size_t>(Ka + 1));
  for (Index k = 0; k <= Ka; ++k) at[static_cast<std::size_t>(k)] = tables.a_tilde(k);

  const int d = tables.d();
  const Index cols = ys[1].cols();
  std::vector<Mat> g(static_cast<std::size_t>(horizon + 1));
  for (Index l = 1; l <= horizon; ++l) {
    Mat acc = Mat::Zero(d, cols);
    for (Index t = l; t <= std::min(N, l + Ka); ++t) {
      acc.noalias() += at[static_cast<std::size_t>(t - l)] * ys[static_cast<std::size_t>(t)];
    }
    g[static_cast<std::size_t>(l)] = std::move(acc);
  }
  std::vector<Mat> z(static_cast<std::size_t>(horizon));
  for (Index s = 1; s <= horizon; ++s) {
    Mat acc = Mat::Zero(d, cols);
    for (Index l = std::max<Index>(1, s - Ka); l <= s; ++l) {
      acc.noalias() += at[static_cast<std::size_t>(s - l)].adjoint() * g[static_cast<std::size_t>(l)];
    }
    z[static_cast<std::size_t>(s - 1)] = std::move(acc);
  }
  return z;
}

ConvergenceReport convergence_experiment(const CoefficientTables& tables, const RhsSequence& y,
                                         const std::vector<Index>& ns, SolveMethod method) {
  ConvergenceReport rep;
  rep.y_description = y.description;
  if (ns.empty()) return rep;
  const Index horizon = *std::max_element(ns.begin(), ns.end());
  const auto zinf = infinite_solution(tables, y, horizon);
  for (Index n : ns) {
    const BlockVector Y = y.head(n);
    BlockVector Z;
    switch (method) {
      case SolveMethod::Fast: {
        FastSolveOptions o;
        o.compute_residual = false;
        o.dense_fallback = true;
        Z = fast_solve(tables, Y, o).z;
        break;
      }
      case SolveMethod::Dense:
        Z = dense_solve(tables, Y).z;
        break;
      case SolveMethod::Levinson:
        Z = levinson_solve(tables, Y);
        break;
    }
    double delta = 0.0;
    for (Index k = 1; k <= n; ++k) delta += (Mat(Z.block(k)) - zinf[static_cast<std::size_t>(k - 1)]).norm();
    rep.ns.push_back(n);
    rep.deltas.push_back(delta);
  }
  return rep;
}

}  // namespace tpz
