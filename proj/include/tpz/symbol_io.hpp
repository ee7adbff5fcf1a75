#pragma once

#include <string>

#include <json.hpp>

#include "tpz/rational_symbol.hpp"

namespace tpz {

/// Complex numbers are [re, im] pairs; matrices are row-major nested arrays.
nlohmann::json to_json(cplx z);
nlohmann::json to_json(const Mat& m);
cplx cplx_from_json(const nlohmann::json& j);
Mat mat_from_json(const nlohmann::json& j, int d);

nlohmann::json spec_to_json(const RationalSymbolSpec& spec);
RationalSymbolSpec spec_from_json(const nlohmann::json& j);

RationalSymbolSpec load_spec(const std::string& path);
void save_spec(const RationalSymbolSpec& spec, const std::string& path);

nlohmann::json report_to_json(const ValidationReport& report);

}  // namespace tpz
