#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aht/divergence.hpp"
#include "aht/engine.hpp"
#include "aht/model.hpp"

namespace aht {

// Undefined quantities serialize as null.
nlohmann::json to_json(const RunReport& report);
nlohmann::json to_json(const SaddlePoint& saddle, const Model& model);

// Columns: mode,N,selection,inference,seed,count,gamma,gamma_stderr,
// then psi_i,phi_i,jng_i per hypothesis (labels from the model).
std::string csv_header(const Model& model);
std::string csv_row(const RunReport& report);

}  // namespace aht
