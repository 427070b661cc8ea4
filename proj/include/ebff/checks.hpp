#pragma once

#include "ebff/config.hpp"

#include "json.hpp"
#include <string>
#include <vector>

namespace ebff::checks {

struct Report {
    std::string name;
    nlohmann::json params;   // parameter echo
    nlohmann::json details;  // per-part residuals
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
    double wall_ms = 0.0;

    nlohmann::json to_json(bool with_timing = false) const;
};

const std::vector<std::string>& names();
Report run_check(const std::string& name, const RunConfig& cfg);
// Every registered check, sorted by name.
std::vector<Report> run_all(const RunConfig& cfg);

} // namespace ebff::checks
