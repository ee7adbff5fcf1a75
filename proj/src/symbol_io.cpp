#include "tpz/symbol_io.hpp"

#include <fstream>
#include <iomanip>

namespace tpz {

using nlohmann::json;

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const Mat& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

cplx cplx_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::MalformedSpec, "complex value must be a number or [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Mat mat_from_json(const json& j, int d) {
  // A bare scalar is accepted for d = 1.
  if (d == 1 && (j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number()))) {
    Mat m(1, 1);
    m(0, 0) = cplx_from_json(j);
    return m;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != d) {
    throw Error(ErrorCode::MalformedSpec, "matrix must have d rows");
  }
  Mat m(d, d);
  for (int r = 0; r < d; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != d) {
      throw Error(ErrorCode::MalformedSpec, "matrix rows must have d entries");
    }
    for (int c = 0; c < d; ++c) m(r, c) = cplx_from_json(j[r][c]);
  }
  return m;
}

namespace {

json pf_to_json(const PartialFractions& pf, bool with_rho00) {
  json out;
  if (with_rho00) out["rho00"] = to_json(pf.rho00);
  json rho0 = json::array();
  for (const auto& m : pf.rho0) rho0.push_back(to_json(m));
  json rho = json::array();
  for (const auto& list : pf.rho) {
    json l = json::array();
    for (const auto& m : list) l.push_back(to_json(m));
    rho.push_back(l);
  }
  out["rho0"] = rho0;
  out["rho"] = rho;
  return out;
}

PartialFractions pf_from_json(const json& j, int d) {
  PartialFractions pf;
  if (!j.contains("rho00")) throw Error(ErrorCode::MalformedSpec, "missing rho00");
  pf.rho00 = mat_from_json(j.at("rho00"), d);
  if (j.contains("rho0")) {
    for (const auto& m : j.at("rho0")) pf.rho0.push_back(mat_from_json(m, d));
  }
  if (j.contains("rho")) {
    for (const auto& list : j.at("rho")) {
      std::vector<Mat> l;
      for (const auto& m : list) l.push_back(mat_from_json(m, d));
      pf.rho.push_back(std::move(l));
    }
  }
  return pf;
}

}  // namespace

json spec_to_json(const RationalSymbolSpec& spec) {
  json out = pf_to_json(spec.h, true);
  out["d"] = spec.d;
  out["m0"] = spec.m0;
  out["K"] = spec.K;
  json poles = json::array();
  for (auto p : spec.poles) poles.push_back(to_json(p));
  out["poles"] = poles;
  out["mults"] = spec.mults;
  if (spec.sharp) out["sharp"] = pf_to_json(*spec.sharp, true);
  return out;
}

RationalSymbolSpec spec_from_json(const json& j) {
  try {
    RationalSymbolSpec spec;
    spec.d = j.value("d", 1);
    spec.m0 = j.value("m0", 0);
    spec.K = j.value("K", 0);
    if (spec.d < 1) throw Error(ErrorCode::MalformedSpec, "d must be positive");
    if (j.contains("poles")) {
      for (const auto& p : j.at("poles")) spec.poles.push_back(cplx_from_json(p));
    }
    if (j.contains("mults")) spec.mults = j.at("mults").get<std::vector<int>>();
    spec.h = pf_from_json(j, spec.d);
    if (j.contains("sharp") && !j.at("sharp").is_null()) {
      spec.sharp = pf_from_json(j.at("sharp"), spec.d);
    }
    check_structure(spec);
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedSpec, e.what());
  }
}

RationalSymbolSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedSpec, path + ": " + e.what());
  }
  return spec_from_json(j);
}

void save_spec(const RationalSymbolSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << std::setprecision(17) << spec_to_json(spec).dump(2) << '\n';
}

json report_to_json(const ValidationReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    json jc{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}};
    if (c.failure) jc["error"] = to_string(*c.failure);
    checks.push_back(jc);
  }
  return json{{"ok", report.ok()}, {"checks", checks}};
}

}  // namespace tpz
