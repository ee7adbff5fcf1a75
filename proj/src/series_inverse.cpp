#include "tpz/series_inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tpz/error.hpp"
#include "tpz/numeric.hpp"

namespace tpz {

SeriesTables series_tables(const CoefficientTables& tables) {
  SeriesTables t;
  t.d = tables.d();
  t.a = [&tables](Index k) { return tables.a(k); };
  t.a_tilde = [&tables](Index k) { return tables.a_tilde(k); };
  t.beta = [&tables](Index k) { return tables.beta(k); };
  t.F = [&tables](Index k) { return tables.F(k); };
  t.a_l1 = tables.a_tail_l1(0);
  t.a_tilde_l1 = tables.a_tilde_tail_l1(0);
  return t;
}

namespace {

double l1_norm(const std::vector<Mat>& seq) {
  double s = 0.0;
  for (const auto& m : seq) s += op_norm(m);
  return s;
}

/// Tilde: odd depths multiply by beta, even by beta^*; Plain the other way round.
bool next_uses_adjoint(SeriesVariant v, int depth) {
  const bool odd = depth % 2 == 1;
  return v == SeriesVariant::Plain ? odd : !odd;
}

/// Bound for sum_l ||b^k_{n,u,l}||.
double b_mass_bound(const SeriesTables& t, SeriesVariant v, Index n, Index u, int k) {
  const double head = v == SeriesVariant::Plain ? t.F(u) : t.F(n + 1 - u);
  return std::pow(t.F(n + 1), k - 1) * head;
}

Index choose_length(const SeriesTables& t, double eps, Index cap) {
  if (t.F(1) <= eps) return 1;
  Index hi = 1;
  while (t.F(hi + 1) > eps) {
    if (hi >= cap) {
      std::ostringstream os;
      os << "the l-sums need more than " << cap << " terms";
      throw Error(ErrorCode::ToleranceUnreachable, os.str());
    }
    hi = std::min(cap, 2 * hi);
  }
  Index lo = hi / 2;
  while (lo + 1 < hi) {
    const Index mid = (lo + hi) / 2;
    if (t.F(mid + 1) > eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

struct Plan {
  Index length = 0;
  int depth = 0;  // fixed depth when certified, otherwise the cap
  double contraction = 0.0;
  double bound = std::numeric_limits<double>::infinity();
  bool certified = false;
};

Plan make_plan(const SeriesTables& t, Index n, const SeriesOptions& opts) {
  if (n < 1) throw Error(ErrorCode::DomainViolation, "n must be positive");
  Plan plan;
  const double amax = std::max(t.a_l1, t.a_tilde_l1);
  const double scale = amax * amax;
  plan.contraction = t.F(n + 1);
  plan.length = choose_length(t, 1e-3 * opts.tol / (scale + 1.0), opts.max_length);
  if (plan.contraction < 1.0) {
    const double head = scale * t.F(1) / (1.0 - plan.contraction);
    int k = 1;
    double bound = head * plan.contraction;
    while (bound > 0.5 * opts.tol && k < opts.max_depth) {
      ++k;
      bound *= plan.contraction;
    }
    if (bound > 0.5 * opts.tol) {
      std::ostringstream os;
      os << "remainder bound " << bound << " still exceeds the tolerance at depth "
         << opts.max_depth << " (F(n+1) = " << plan.contraction << ")";
      throw Error(ErrorCode::ToleranceUnreachable, os.str());
    }
    plan.depth = k;
    plan.bound = bound + 0.5 * opts.tol;
    plan.certified = true;
    return plan;
  }
  if (!opts.allow_uncertified) {
    std::ostringstream os;
    os << "F(n+1) = " << plan.contraction << " >= 1, truncation cannot be certified";
    throw Error(ErrorCode::DivergentRecursion, os.str());
  }
  plan.depth = opts.max_depth;
  return plan;
}

/// Sums of the odd and even depths of the b (or b~) rows listed in `rows`,
/// each row a block row of width length * d.
struct Accumulated {
  Mat odd;
  Mat even;
  int depth = 0;
};

Accumulated run_recursion(const SeriesTables& t, Index n, const std::vector<Index>& rows,
                          const Plan& plan, const SeriesOptions& opts,
                          const std::vector<Mat>& beta) {
  const int d = t.d;
  const Index L = plan.length;
  const auto R = static_cast<Index>(rows.size());
  const SeriesVariant v = opts.variant;

  Mat H(L * d, L * d);
  for (Index m = 0; m < L; ++m) {
    for (Index l = 0; l < L; ++l) {
      H.block(m * d, l * d, d, d) = beta[static_cast<std::size_t>(n + 1 + m + l)];
    }
  }
  const Mat Hadj = H.adjoint();

  Mat cur(R * d, L * d);
  for (Index i = 0; i < R; ++i) {
    const Index u = rows[static_cast<std::size_t>(i)];
    for (Index l = 0; l < L; ++l) {
      if (v == SeriesVariant::Plain) {
        cur.block(i * d, l * d, d, d) = beta[static_cast<std::size_t>(u + l)];
      } else {
        cur.block(i * d, l * d, d, d) = beta[static_cast<std::size_t>(n + 1 - u + l)].adjoint();
      }
    }
  }

  Accumulated acc;
  acc.odd = Mat::Zero(R * d, L * d);
  acc.even = Mat::Zero(R * d, L * d);
  const double amax = std::max(t.a_l1, t.a_tilde_l1);
  for (int k = 1; k <= plan.depth; ++k) {
    (k % 2 == 1 ? acc.odd : acc.even) += cur;
    acc.depth = k;

    double worst = 0.0;
    for (Index i = 0; i < R; ++i) {
      const Index u = rows[static_cast<std::size_t>(i)];
      double mass = 0.0;
      for (Index l = 0; l < L; ++l) mass += op_norm(cur.block(i * d, l * d, d, d));
      const double limit = b_mass_bound(t, v, n, u, k);
      if (mass > limit * (1.0 + 1e-8) + 1e-14) {
        std::ostringstream os;
        os << "sum of ||b^" << k << "_{n," << u << ",l}|| = " << mass << " exceeds its bound "
           << limit;
        throw Error(ErrorCode::ConsistencyViolation, os.str());
      }
      worst = std::max(worst, mass);
    }

    if (!plan.certified) {
      if (!std::isfinite(worst) || worst > 1e100) {
        throw Error(ErrorCode::DivergentRecursion, "b recursion diverges");
      }
      if (worst * amax * amax <= 1e-2 * opts.tol) break;
      if (k == plan.depth) {
        std::ostringstream os;
        os << "uncertified series still moving (" << worst << ") at depth " << k;
        throw Error(ErrorCode::ToleranceUnreachable, os.str());
      }
    }
    if (k < plan.depth) cur = cur * (next_uses_adjoint(v, k) ? Hadj : H);
  }
  return acc;
}

std::vector<Mat> beta_table(const SeriesTables& t, Index n, Index L) {
  std::vector<Mat> beta(static_cast<std::size_t>(n + 2 * L + 1));
  for (Index k = 1; k < static_cast<Index>(beta.size()); ++k) beta[static_cast<std::size_t>(k)] = t.beta(k);
  return beta;
}

/// Block (l, s) of the matrices pairing the b sums with a_{n+1-s+l} and a~_{s+l}.
void pairing_matrices(const SeriesTables& t, Index n, Index L, Mat& Ma, Mat& Mat_) {
  const int d = t.d;
  std::vector<Mat> a(static_cast<std::size_t>(n + L + 1));
  std::vector<Mat> at(static_cast<std::size_t>(n + L + 1));
  for (Index k = 0; k <= n + L; ++k) {
    a[static_cast<std::size_t>(k)] = t.a(k);
    at[static_cast<std::size_t>(k)] = t.a_tilde(k);
  }
  Ma.resize(L * d, n * d);
  Mat_.resize(L * d, n * d);
  for (Index l = 0; l < L; ++l) {
    for (Index s = 1; s <= n; ++s) {
      Ma.block(l * d, (s - 1) * d, d, d) = a[static_cast<std::size_t>(n + 1 - s + l)];
      Mat_.block(l * d, (s - 1) * d, d, d) = at[static_cast<std::size_t>(s + l)];
    }
  }
}

/// Upper block Toeplitz A~_n (tilde) or lower block Toeplitz A_n.
Mat triangular_factor(const SeriesTables& t, Index n, SeriesVariant v) {
  const int d = t.d;
  Mat F = Mat::Zero(n * d, n * d);
  for (Index k = 0; k < n; ++k) {
    const Mat c = v == SeriesVariant::Tilde ? t.a_tilde(k) : t.a(k);
    for (Index s = 0; s + k < n; ++s) {
      if (v == SeriesVariant::Tilde) {
        F.block(s * d, (s + k) * d, d, d) = c;
      } else {
        F.block((s + k) * d, s * d, d, d) = c;
      }
    }
  }
  return F;
}

}  // namespace

BRecursionState b_recursion_start(const SeriesTables& t, SeriesVariant variant, Index n, Index u,
                                  Index length) {
  if (u < 1 || u > n) throw Error(ErrorCode::DomainViolation, "u must lie in 1..n");
  BRecursionState st;
  st.n = n;
  st.u = u;
  st.depth = 1;
  st.variant = variant;
  st.coeffs.reserve(static_cast<std::size_t>(length));
  for (Index l = 0; l < length; ++l) {
    st.coeffs.push_back(variant == SeriesVariant::Plain ? t.beta(u + l)
                                                        : Mat(t.beta(n + 1 - u + l).adjoint()));
  }
  st.tail_bound = variant == SeriesVariant::Plain ? t.F(u + length) : t.F(n + 1 - u + length);
  return st;
}

BRecursionState b_recursion_step(const BRecursionState& state, const SeriesTables& t) {
  if (t.F(state.n + 1) >= 1.0) {
    throw Error(ErrorCode::DivergentRecursion, "F(n+1) >= 1: the recursion is not a contraction");
  }
  const auto L = static_cast<Index>(state.coeffs.size());
  const bool adj = next_uses_adjoint(state.variant, state.depth);
  std::vector<Mat> beta(static_cast<std::size_t>(2 * L));
  for (Index k = 0; k < 2 * L; ++k) {
    const Mat b = t.beta(state.n + 1 + k);
    beta[static_cast<std::size_t>(k)] = adj ? Mat(b.adjoint()) : b;
  }
  BRecursionState next = state;
  next.depth = state.depth + 1;
  for (Index l = 0; l < L; ++l) {
    Mat acc = Mat::Zero(t.d, t.d);
    for (Index m = 0; m < L; ++m) {
      acc += state.coeffs[static_cast<std::size_t>(m)] * beta[static_cast<std::size_t>(m + l)];
    }
    next.coeffs[static_cast<std::size_t>(l)] = acc;
  }
  next.tail_bound = (l1_norm(state.coeffs) + state.tail_bound) * t.F(state.n + 1 + L);
  return next;
}

Mat first_term_gram(const SeriesTables& t, Index n, Index s, Index t_col, SeriesVariant variant) {
  Mat acc = Mat::Zero(t.d, t.d);
  if (variant == SeriesVariant::Tilde) {
    for (Index l = 1; l <= std::min(s, t_col); ++l) acc += t.a_tilde(s - l).adjoint() * t.a_tilde(t_col - l);
  } else {
    for (Index l = std::max(s, t_col); l <= n; ++l) acc += t.a(l - s).adjoint() * t.a(l - t_col);
  }
  return acc;
}

SeriesInverseReport series_inverse(const SeriesTables& t, Index n, const SeriesOptions& opts) {
  const Plan plan = make_plan(t, n, opts);
  const int d = t.d;
  const Index L = plan.length;
  const auto beta = beta_table(t, n, L);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (Index u = 1; u <= n; ++u) rows[static_cast<std::size_t>(u - 1)] = u;
  const Accumulated acc = run_recursion(t, n, rows, plan, opts, beta);

  Mat Ma, Mat_;
  pairing_matrices(t, n, L, Ma, Mat_);
  const Mat X = opts.variant == SeriesVariant::Tilde ? Mat(acc.odd * Ma + acc.even * Mat_)
                                                     : Mat(acc.odd * Mat_ + acc.even * Ma);
  const Mat F = triangular_factor(t, n, opts.variant);

  SeriesInverseReport rep;
  rep.inverse = BlockMatrix(Mat((F + X).adjoint() * F), d);
  rep.depth = acc.depth;
  rep.length = L;
  rep.contraction = plan.contraction;
  rep.remainder_bound = plan.bound;
  rep.certified = plan.certified;
  return rep;
}

SeriesInverseReport series_inverse(const CoefficientTables& tables, Index n,
                                   const SeriesOptions& opts) {
  return series_inverse(series_tables(tables), n, opts);
}

Mat inverse_block_series(const SeriesTables& t, Index n, Index s, Index t_col,
                         const SeriesOptions& opts) {
  if (s < 1 || s > n || t_col < 1 || t_col > n) {
    throw Error(ErrorCode::DomainViolation, "block index out of range");
  }
  const Plan plan = make_plan(t, n, opts);
  const int d = t.d;
  const Index L = plan.length;
  const auto beta = beta_table(t, n, L);
  const bool tilde = opts.variant == SeriesVariant::Tilde;
  std::vector<Index> rows;
  if (tilde) {
    for (Index u = 1; u <= t_col; ++u) rows.push_back(u);
  } else {
    for (Index u = t_col; u <= n; ++u) rows.push_back(u);
  }
  const Accumulated acc = run_recursion(t, n, rows, plan, opts, beta);

  // Column s of the pairing matrices only.
  Mat pa(L * d, d), pat(L * d, d);
  for (Index l = 0; l < L; ++l) {
    pa.block(l * d, 0, d, d) = t.a(n + 1 - s + l);
    pat.block(l * d, 0, d, d) = t.a_tilde(s + l);
  }
  const Mat X = tilde ? Mat(acc.odd * pa + acc.even * pat) : Mat(acc.odd * pat + acc.even * pa);

  Mat out = first_term_gram(t, n, s, t_col, opts.variant);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index u = rows[i];
    const Mat coef = tilde ? t.a_tilde(t_col - u) : t.a(u - t_col);
    out += X.block(static_cast<Index>(i) * d, 0, d, d).adjoint() * coef;
  }
  return out;
}

}  // namespace tpz
