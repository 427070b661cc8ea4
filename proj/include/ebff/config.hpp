#pragma once

#include "ebff/formfactor.hpp"
#include "ebff/qseries.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace ebff {

struct RunConfig {
    qseries::EllipticParams params{2, 3.0, 0.4};
    qseries::TruncationPolicy policy;
    formfactor::ContourSpec contour;
    std::string bosons; // empty: built-in table
    std::uint64_t seed = 20240601;
    std::string format = "json-lines";
    double Cz = 1.0;
    double Cx = 1.0;
    int workers = 4;
    bool timing = false;
    std::map<std::string, double> thresholds;

    double threshold(const std::string& check) const;
    void set(const std::string& key, const std::string& value);
    void validate() const;

    static RunConfig defaults();
    static RunConfig load(const std::string& path);
    static RunConfig parse(const std::string& text);
};

const std::map<std::string, double>& default_thresholds();

} // namespace ebff
