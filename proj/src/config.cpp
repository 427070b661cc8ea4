#include "ebff/config.hpp"

#include "ebff/errors.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ebff {

const std::map<std::string, double>& default_thresholds()
{
    static const std::map<std::string, double> t{
        {"bracket-parity", 1e-12}, {"chi-partition", 1e-6},   {"contour-stability", 1e-8},
        {"delta-commutator", 1e-12}, {"dual-inversion", 1e-9}, {"face-ybe", 1e-9},
        {"ff-consistency", 1e-6},  {"fock-trace", 1e-10},     {"kernel-unitarity", 1e-12},
        {"ksum", 1e-10},           {"nilpotency", 1e-12},     {"ope", 1e-10},
        {"selection-rules", 1e-8}, {"tail-delta", 1e-6},      {"theta-oracle", 1e-12},
        {"vertex-face", 1e-9},     {"ybe", 1e-9},
    };
    return t;
}

RunConfig RunConfig::defaults()
{
    RunConfig c;
    c.thresholds = default_thresholds();
    return c;
}

double RunConfig::threshold(const std::string& check) const
{
    if (auto it = thresholds.find(check); it != thresholds.end()) return it->second;
    if (auto it = default_thresholds().find(check); it != default_thresholds().end()) return it->second;
    fail(Errc::UnknownCheck, "no threshold for " + check);
}

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(Errc::ConfigError, key + ": not a number: " + v);
    return out;
}

long long to_int(const std::string& key, const std::string& v)
{
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(Errc::ConfigError, key + ": not an integer: " + v);
    return out;
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value)
{
    if (key == "n") params.n = int(to_int(key, value));
    else if (key == "r") params.r = to_double(key, value);
    else if (key == "x") params.x = to_double(key, value);
    else if (key == "tail_tol") policy.tail_tol = to_double(key, value);
    else if (key == "max_terms") policy.max_terms = int(to_int(key, value));
    else if (key == "pole_tol") policy.pole_tol = to_double(key, value);
    else if (key == "contour.N") contour.N = int(to_int(key, value));
    else if (key == "contour.radius") contour.radius = to_double(key, value);
    else if (key == "bosons") bosons = value;
    else if (key == "seed") seed = std::uint64_t(to_int(key, value));
    else if (key == "format") format = value;
    else if (key == "Cz") Cz = to_double(key, value);
    else if (key == "Cx") Cx = to_double(key, value);
    else if (key == "workers") workers = int(to_int(key, value));
    else if (key == "timing") timing = value == "true" || value == "1";
    else if (key.rfind("threshold.", 0) == 0) {
        std::string name = key.substr(10);
        if (!default_thresholds().count(name)) fail(Errc::ConfigError, "threshold for unknown check " + name);
        thresholds[name] = to_double(key, value);
    } else
        fail(Errc::ConfigError, "unknown key " + key);
}

void RunConfig::validate() const
{
    try {
        params.validate();
        policy.validate();
    } catch (const Error& e) {
        fail(Errc::ConfigError, e.detail());
    }
    if (format != "json-lines" && format != "csv") fail(Errc::ConfigError, "format must be json-lines or csv");
    if (workers < 1) fail(Errc::ConfigError, "workers must be >= 1");
    if (contour.N < 4 || contour.N % 2) fail(Errc::ConfigError, "contour.N must be even and >= 4");
    if (!bosons.empty() && !std::filesystem::exists(bosons)) fail(Errc::ConfigError, "missing boson table " + bosons);
}

RunConfig RunConfig::parse(const std::string& text)
{
    RunConfig c = defaults();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(Errc::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
        c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream f(path);
    if (!f) fail(Errc::ConfigError, "cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

} // namespace ebff
