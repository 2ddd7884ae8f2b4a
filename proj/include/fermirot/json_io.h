#pragma once

#include <string>

#include <json.hpp>

#include "fermirot/algebra.h"
#include "fermirot/states.h"

namespace fermirot {

/// OperatorSum <-> JSON: a list of {creators, annihilators, re, im} records
/// sorted by canonical key.
nlohmann::json operator_sum_to_json(const OperatorSum& x);
OperatorSum operator_sum_from_json(const nlohmann::json& j);

/// StateVector <-> JSON: a list of {bits, re, im} records sorted by bits.
nlohmann::json state_vector_to_json(const StateVector& v);
StateVector state_vector_from_json(const nlohmann::json& j);

void save_json(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json_file(const std::string& path);

} // namespace fermirot
