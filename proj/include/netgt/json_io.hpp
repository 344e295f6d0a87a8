#pragma once

#include <string>

#include <json.hpp>

#include "netgt/identifiability.hpp"
#include "netgt/model.hpp"
#include "netgt/statistics.hpp"
#include "netgt/theory.hpp"

namespace netgt {

using json = nlohmann::ordered_json;

std::string to_string(StatisticKind kind);
// Accepts "chi2", "osq", "pe". Throws ParameterError otherwise.
StatisticKind parse_statistic(const std::string& name);

std::string to_string(Normalization norm);
// Accepts "finite_sample", "asymptotic". Throws ParameterError otherwise.
Normalization parse_normalization(const std::string& name);

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json to_json(const TestReport& r);
json to_json(const TheoryReport& r);
json to_json(const ExactSnrReport& r);
json to_json(const IncResult& r);

// {"K": 2, "n": 300, "P": [[...]], "membership": {"type": "pure", "h": [...]}}
// Membership types: "balanced", "fixed" (with "pi"), "pure" (with "h"),
// "dirichlet" (with "concentration"). Throws ConfigError on malformed input.
json to_json(const MmsbmParams& p);
MmsbmParams params_from_json(const json& j);

}  // namespace netgt
