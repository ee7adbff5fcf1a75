#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tpz/bench.hpp"
#include "tpz/block_io.hpp"
#include "tpz/closed_form.hpp"
#include "tpz/coefficients.hpp"
#include "tpz/error.hpp"
#include "tpz/fast_solver.hpp"
#include "tpz/numeric.hpp"
#include "tpz/oracle.hpp"
#include "tpz/rational_symbol.hpp"
#include "tpz/series_inverse.hpp"
#include "tpz/symbol_io.hpp"

using nlohmann::json;
using namespace tpz;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

struct Globals {
  std::uint64_t seed = 1;
  int threads = 1;
  double tol = 1e-10;
  std::string verify_against;
  double verify_tol = 1e-7;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Loaded {
  RationalSymbolSpec spec;
  std::unique_ptr<CoefficientTables> tables;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.spec = load_spec(path);
  validate(l.spec).throw_if_failed();
  l.tables = std::make_unique<CoefficientTables>(RationalSymbol(l.spec));
  return l;
}

std::vector<Index> parse_ns(const std::string& s) {
  std::vector<Index> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw UsageError("bad n list entry '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("empty n list");
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Writes to --out (format from --format or the extension) or to stdout.
template <class Block>
void emit(const Block& value, const std::string& out, const std::string& format) {
  BlockFormat f = out.empty() ? BlockFormat::Csv : format_for_path(out);
  if (format == "csv") f = BlockFormat::Csv;
  if (format == "bin") f = BlockFormat::Binary;
  if (out.empty()) {
    if (f == BlockFormat::Csv) {
      write_csv(std::cout, value);
    } else {
      write_binary(std::cout, value);
    }
    std::cout.flush();
    return;
  }
  std::ofstream os(out, f == BlockFormat::Binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + out);
  if (f == BlockFormat::Csv) {
    write_csv(os, value);
  } else {
    write_binary(os, value);
  }
  if (!os) throw Error(ErrorCode::Io, "write failed: " + out);
}

double rel_diff(const Mat& x, const Mat& y) {
  return (x - y).norm() / std::max({1e-300, x.norm(), y.norm()});
}

// Prints the verification report and turns a failure into exit code 4.
void report_verify(json rep, double diff, double tol) {
  rep["verify_against"] = "dense";
  rep["relative_difference"] = diff;
  rep["tol"] = tol;
  rep["passed"] = diff <= tol;
  std::cerr << rep.dump() << '\n';
  if (!(diff <= tol)) {
    throw Error(ErrorCode::ConsistencyViolation, "result disagrees with the dense oracle");
  }
}

// Cross-check used by commands without a solution of their own: a random
// system solved by the fast path and by dense LU.
void verify_solver_pair(const CoefficientTables& t, Index n, const Globals& g) {
  const Index m = std::max<Index>(n, 2 * t.symbol().m0() + 1);
  const BlockVector Y = random_rhs(m, t.d(), g.seed);
  FastSolveOptions fo;
  fo.seed = g.seed;
  fo.compute_residual = false;
  const BlockVector zf = fast_solve(t, Y, fo).z;
  const BlockVector zd = dense_solve(t, Y).z;
  report_verify(json{{"check", "fast_vs_dense_solve"}, {"n", m}}, rel_diff(zf.matrix(), zd.matrix()),
                g.verify_tol);
}

json mat_json(const Mat& m) { return to_json(m); }

int cmd_validate(const std::string& spec_path, const Globals& g) {
  const RationalSymbolSpec spec = load_spec(spec_path);
  const ValidationReport rep = validate(spec);
  std::cout << report_to_json(rep).dump(2) << '\n';
  if (!rep.ok()) return kExitValidation;
  if (!g.verify_against.empty()) {
    const CoefficientTables t{RationalSymbol(spec)};
    verify_solver_pair(t, 16, g);
  }
  return 0;
}

int cmd_coeffs(const std::string& spec_path, Index horizon, const std::string& which,
               const std::string& out, const Globals& g) {
  const Loaded l = load(spec_path);
  const CoefficientTables& t = *l.tables;
  const std::vector<std::string> all{"a", "a_tilde", "c", "c_tilde", "gamma", "beta"};
  const std::vector<std::string> series = which.empty() ? all : split(which);
  for (const auto& s : series) {
    if (std::find(all.begin(), all.end(), s) == all.end()) {
      throw UsageError("unknown series '" + s + "'");
    }
  }
  const bool tagged = series.size() > 1;

  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + out);
  }
  std::ostream& os = out.empty() ? std::cout : file;
  os << std::setprecision(17);
  os << (tagged ? "series,k,row,col,re,im\n" : "k,row,col,re,im\n");
  for (const auto& s : series) {
    for (Index k = 0; k <= horizon; ++k) {
      Mat m;
      if (s == "a") m = t.a(k);
      if (s == "a_tilde") m = t.a_tilde(k);
      if (s == "c") m = t.c(k);
      if (s == "c_tilde") m = t.c_tilde(k);
      if (s == "gamma") m = t.gamma(k);
      if (s == "beta") m = t.beta(k);
      for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
          if (tagged) os << s << ',';
          os << k << ',' << r << ',' << c << ',' << m(r, c).real() << ',' << m(r, c).imag() << '\n';
        }
      }
    }
  }
  if (!os) throw Error(ErrorCode::Io, "write failed");
  if (!g.verify_against.empty()) {
    const Index n = std::min<Index>(horizon + 1, 64);
    verify_solver_pair(t, n, g);
  }
  return 0;
}

struct InvertArgs {
  Index n = 0;
  std::string method = "closed";
  std::string variant = "tilde";
  bool uncertified = false;
  int max_depth = 64;
  bool dense_fallback = false;
  std::string out;
  std::string format;
};

int cmd_invert(const std::string& spec_path, const InvertArgs& a, const Globals& g) {
  const Loaded l = load(spec_path);
  const CoefficientTables& t = *l.tables;
  BlockMatrix inv;
  json rep{{"command", "invert"}, {"method", a.method}, {"n", a.n}};
  const int m0 = t.symbol().m0();
  if (a.method == "series") {
    SeriesOptions so;
    so.tol = g.tol;
    so.max_depth = a.max_depth;
    so.variant = a.variant == "plain" ? SeriesVariant::Plain : SeriesVariant::Tilde;
    so.allow_uncertified = a.uncertified;
    const SeriesInverseReport r = series_inverse(t, a.n, so);
    inv = r.inverse;
    rep["depth"] = r.depth;
    rep["length"] = r.length;
    rep["contraction"] = r.contraction;
    rep["certified"] = r.certified;
    if (r.certified) rep["remainder_bound"] = r.remainder_bound;
  } else if (a.method == "closed") {
    if (a.n < 2 * m0 + 1 && a.dense_fallback) {
      inv = dense_inverse(t, a.n);
      rep["dense_fallback_used"] = true;
    } else {
      inv = closed_form_inverse(t, a.n, g.threads);
    }
  } else {
    inv = dense_inverse(t, a.n);
  }
  std::cerr << rep.dump() << '\n';
  emit(inv, a.out, a.format);
  if (!g.verify_against.empty()) {
    const BlockMatrix ref = dense_inverse(t, a.n);
    report_verify(json{{"check", "inverse"}, {"n", a.n}}, rel_diff(inv.matrix(), ref.matrix()),
                  g.verify_tol);
  }
  return 0;
}

struct SolveArgs {
  std::optional<Index> n;
  std::string y;
  std::string method = "fast";
  bool dense_fallback = false;
  std::string out;
  std::string format;
};

int cmd_solve(const std::string& spec_path, const SolveArgs& a, const Globals& g) {
  const Loaded l = load(spec_path);
  const CoefficientTables& t = *l.tables;
  const BlockVector Y = load_block_vector(a.y);
  if (Y.d() != t.d()) throw UsageError("right-hand side block size does not match the spec");
  if (a.n && *a.n != Y.n()) throw UsageError("--n does not match the number of blocks in --y");
  const SolveMethod method = solve_method_from_string(a.method);

  json rep{{"command", "solve"}, {"method", a.method}, {"n", Y.n()}};
  BlockVector z;
  if (method == SolveMethod::Fast) {
    FastSolveOptions fo;
    fo.seed = g.seed;
    fo.dense_fallback = a.dense_fallback;
    const SolveReport r = fast_solve(t, Y, fo);
    z = r.z;
    rep["relative_residual"] = r.relative_residual;
    rep["overlap_defect"] = r.overlap_defect;
    rep["overlap_checked"] = r.overlap_checked;
    rep["dense_fallback_used"] = r.dense_fallback_used;
    rep["seconds"] = r.seconds;
  } else if (method == SolveMethod::Dense) {
    const DenseSolution r = dense_solve(t, Y);
    z = r.z;
    rep["residual"] = r.residual;
  } else {
    z = levinson_solve(t, Y);
  }
  std::cerr << rep.dump() << '\n';
  emit(z, a.out, a.format);
  if (!g.verify_against.empty()) {
    const BlockVector ref = dense_solve(t, Y).z;
    report_verify(json{{"check", "solution"}, {"n", Y.n()}}, rel_diff(z.matrix(), ref.matrix()),
                  g.verify_tol);
  }
  return 0;
}

int cmd_kit(const std::string& spec_path, Index n, const Globals& g) {
  const Loaded l = load(spec_path);
  const CoefficientTables& t = *l.tables;
  if (t.symbol().K() == 0) throw Error(ErrorCode::NotApplicable, "the kit needs at least one pole");
  const ClosedFormKit& kit = t.kit();
  json radii = json::array();
  for (int mu = 0; mu < t.symbol().K(); ++mu) radii.push_back(kit.theta_radius(mu));
  const Mat G = kit.G(n);
  const Mat Gt = kit.G_tilde(n);
  json out{{"n", n},
           {"d", t.d()},
           {"K", t.symbol().K()},
           {"m0", t.symbol().m0()},
           {"M", kit.M()},
           {"Lambda", mat_json(kit.Lambda())},
           {"Theta", mat_json(kit.Theta())},
           {"G", mat_json(G)},
           {"G_tilde", mat_json(Gt)},
           {"spectral_radius_G_tilde_G", spectral_radius(Gt * G)},
           {"theta_contour_radii", radii},
           {"F_n_plus_1", t.F(n + 1)}};
  std::cout << out.dump(2) << '\n';
  if (!g.verify_against.empty()) verify_solver_pair(t, std::max<Index>(n, 1), g);
  return 0;
}

struct ConvergeArgs {
  std::string ns = "8,16,32,64,128";
  std::optional<double> y_ratio;
  std::string y;
  std::string method = "fast";
  std::string out;
};

int cmd_converge(const std::string& spec_path, const ConvergeArgs& a, const Globals& g) {
  const Loaded l = load(spec_path);
  const CoefficientTables& t = *l.tables;
  const std::vector<Index> ns = parse_ns(a.ns);
  RhsSequence y;
  if (!a.y.empty()) {
    if (a.y_ratio) throw UsageError("--y and --y-ratio are exclusive");
    const BlockVector head = load_block_vector(a.y);
    if (head.d() != t.d()) throw UsageError("right-hand side block size does not match the spec");
    y = finitely_supported(head.blocks());
  } else {
    const double ratio = a.y_ratio.value_or(0.5);
    if (!(std::abs(ratio) < 1.0)) throw UsageError("--y-ratio must lie in (-1, 1)");
    y = geometric_rhs(Mat::Identity(t.d(), t.d()), ratio);
  }
  const ConvergenceReport rep =
      convergence_experiment(t, y, ns, solve_method_from_string(a.method));

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + a.out);
  }
  std::ostream& os = a.out.empty() ? std::cout : file;
  os << std::setprecision(17) << "n,delta\n";
  for (std::size_t i = 0; i < rep.ns.size(); ++i) os << rep.ns[i] << ',' << rep.deltas[i] << '\n';
  std::cerr << json{{"command", "converge"}, {"y", rep.y_description}}.dump() << '\n';
  if (!g.verify_against.empty()) {
    const ConvergenceReport ref = convergence_experiment(t, y, ns, SolveMethod::Dense);
    double worst = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      worst = std::max(worst, std::abs(rep.deltas[i] - ref.deltas[i]));
    }
    report_verify(json{{"check", "deltas"}}, worst, g.verify_tol);
  }
  return 0;
}

struct BenchArgs {
  std::string ns = "256,1024,4096";
  std::string methods = "fast,levinson,dense";
  int repeats = 5;
  Index dense_cap = 0;
  std::string out;
};

int cmd_bench(const std::string& spec_path, const BenchArgs& a, const Globals& g) {
  const Loaded l = load(spec_path);
  const CoefficientTables& t = *l.tables;
  BenchOptions bo;
  bo.ns = parse_ns(a.ns);
  bo.methods.clear();
  for (const auto& m : split(a.methods)) bo.methods.push_back(solve_method_from_string(m));
  bo.repeats = a.repeats;
  bo.seed = g.seed;
  bo.dense_cap = a.dense_cap;
  const std::vector<BenchRow> rows = run_bench(t, bo);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + a.out);
  }
  write_bench_csv(a.out.empty() ? std::cout : file, rows);
  const auto cross = fast_levinson_crossover(rows);
  json c{{"command", "bench"}};
  c["fast_levinson_crossover"] = cross ? json(*cross) : json(nullptr);
  std::cerr << c.dump() << '\n';
  if (!g.verify_against.empty()) verify_solver_pair(t, std::min<Index>(bo.ns.front(), 256), g);
  return 0;
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block Toeplitz solver for ARMA symbols"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for randomized checks");
  app.add_option("--threads", g.threads, "Threads for independent block evaluations")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", g.tol, "Series truncation tolerance")->check(CLI::PositiveNumber);
  app.add_option("--verify-against", g.verify_against, "Cross-check the result")
      ->check(CLI::IsMember({"dense"}));
  app.add_option("--verify-tol", g.verify_tol, "Relative tolerance of --verify-against")
      ->check(CLI::PositiveNumber);

  std::string spec;
  auto spec_opt = [&](CLI::App* sub) {
    sub->add_option("--spec", spec, "Symbol spec (JSON)")->required();
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a symbol spec");
  spec_opt(validate_cmd);

  Index horizon = 16;
  std::string which, coeffs_out;
  auto* coeffs_cmd = app.add_subcommand("coeffs", "Dump coefficient sequences as CSV");
  spec_opt(coeffs_cmd);
  coeffs_cmd->add_option("--n", horizon, "Largest index")->check(CLI::NonNegativeNumber);
  coeffs_cmd->add_option("--series", which, "Comma list of a,a_tilde,c,c_tilde,gamma,beta");
  coeffs_cmd->add_option("--out", coeffs_out);

  InvertArgs inv;
  auto* invert_cmd = app.add_subcommand("invert", "Full inverse of T_n");
  spec_opt(invert_cmd);
  invert_cmd->add_option("--n", inv.n)->required()->check(CLI::PositiveNumber);
  invert_cmd->add_option("--method", inv.method)
      ->check(CLI::IsMember({"series", "closed", "dense"}));
  invert_cmd->add_option("--variant", inv.variant)->check(CLI::IsMember({"tilde", "plain"}));
  invert_cmd->add_flag("--uncertified", inv.uncertified, "Allow series without contraction");
  invert_cmd->add_option("--max-depth", inv.max_depth)->check(CLI::PositiveNumber);
  invert_cmd->add_flag("--dense-fallback", inv.dense_fallback);
  invert_cmd->add_option("--out", inv.out);
  invert_cmd->add_option("--format", inv.format)->check(CLI::IsMember({"csv", "bin"}));

  SolveArgs sa;
  Index solve_n = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve T_n Z = Y");
  spec_opt(solve_cmd);
  auto* solve_n_opt = solve_cmd->add_option("--n", solve_n)->check(CLI::PositiveNumber);
  solve_cmd->add_option("--y", sa.y, "Right-hand side (CSV or .bin)")->required();
  solve_cmd->add_option("--method", sa.method)
      ->check(CLI::IsMember({"fast", "dense", "levinson"}));
  solve_cmd->add_flag("--dense-fallback", sa.dense_fallback);
  solve_cmd->add_option("--out", sa.out);
  solve_cmd->add_option("--format", sa.format)->check(CLI::IsMember({"csv", "bin"}));

  Index kit_n = 1;
  auto* kit_cmd = app.add_subcommand("kit", "Closed-form diagnostics as JSON");
  spec_opt(kit_cmd);
  kit_cmd->add_option("--n", kit_n)->check(CLI::PositiveNumber);

  ConvergeArgs ca;
  auto* converge_cmd = app.add_subcommand("converge", "Finite vs infinite system solutions");
  spec_opt(converge_cmd);
  converge_cmd->add_option("--ns", ca.ns, "Comma list of n");
  converge_cmd->add_option("--y-ratio", ca.y_ratio, "Geometric y_k = ratio^k I");
  converge_cmd->add_option("--y", ca.y, "Finitely supported y (CSV or .bin)");
  converge_cmd->add_option("--method", ca.method)
      ->check(CLI::IsMember({"fast", "dense", "levinson"}));
  converge_cmd->add_option("--out", ca.out);

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Timing table as CSV");
  spec_opt(bench_cmd);
  bench_cmd->add_option("--ns", ba.ns, "Comma list of n");
  bench_cmd->add_option("--methods", ba.methods, "Comma list of fast,levinson,dense");
  bench_cmd->add_option("--repeats", ba.repeats)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--dense-cap", ba.dense_cap)->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--out", ba.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("Usage", e.what());
    return kExitUsage;
  }

  Eigen::setNbThreads(g.threads);
  try {
    if (*validate_cmd) return cmd_validate(spec, g);
    if (*coeffs_cmd) return cmd_coeffs(spec, horizon, which, coeffs_out, g);
    if (*invert_cmd) return cmd_invert(spec, inv, g);
    if (*solve_cmd) {
      if (*solve_n_opt) sa.n = solve_n;
      return cmd_solve(spec, sa, g);
    }
    if (*kit_cmd) return cmd_kit(spec, kit_n, g);
    if (*converge_cmd) return cmd_converge(spec, ca, g);
    if (*bench_cmd) return cmd_bench(spec, ba, g);
  } catch (const UsageError& e) {
    print_error("Usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    if (e.code() == ErrorCode::Io) return kExitUsage;
    return is_validation_error(e.code()) ? kExitValidation : kExitNumerical;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}
