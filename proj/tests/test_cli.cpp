#include "doctest.h"

#include "ebff/formfactor.hpp"
#include "ebff/qseries.hpp"
#include "json.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

using json = nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

std::string bin()
{
    const char* b = std::getenv("EBFF_BIN");
    REQUIRE_MESSAGE(b != nullptr, "EBFF_BIN is not set");
    return b;
}

Run run(const std::string& args)
{
    Run r;
    std::string cmd = bin() + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) out.push_back(l);
    return out;
}

std::string temp_path(const std::string& stem)
{
    return "/tmp/ebff_test_" + std::to_string(getpid()) + "_" + stem;
}

} // namespace

TEST_CASE("check all passes and is reproducible")
{
    auto a = run("check all");
    CHECK(a.code == 0);
    auto ls = lines(a.out);
    CHECK(ls.size() == 17);
    for (const auto& l : ls) {
        auto j = json::parse(l);
        CHECK(j["pass"].get<bool>());
        CHECK(j.contains("residual"));
        CHECK(j.contains("threshold"));
        CHECK(!j.contains("wall_ms"));
    }
    auto b = run("check all");
    CHECK(a.out == b.out);
}

TEST_CASE("single check, seed, timing and output file")
{
    auto a = run("check ksum --seed 99 --timing");
    CHECK(a.code == 0);
    auto j = json::parse(lines(a.out).at(0));
    CHECK(j["check"] == "ksum");
    CHECK(j.contains("wall_ms"));
    auto b = run("check ksum --seed 100");
    CHECK(b.code == 0);
    CHECK(json::parse(lines(b.out).at(0))["residual"] != j["residual"]);

    std::string path = temp_path("out.jsonl");
    CHECK(run("check theta-oracle --out " + path).code == 0);
    std::ifstream f(path);
    std::string first;
    std::getline(f, first);
    CHECK(json::parse(first)["check"] == "theta-oracle");
    std::remove(path.c_str());
}

TEST_CASE("exit codes")
{
    CHECK(run("check no-such-check").code == 2);
    CHECK(run("ff --no-such-option 1").code == 2);
    CHECK(run("").code == 2);
    // radius outside the annulus of the rapidities
    CHECK(run("ff --op sz --m 2 --u-list 0.2 0.5 0.3 0.45 --radius 5").code == 3);
    CHECK(run("ff --op sz --m 2 --u-list 0.0 1.5 0.3 0.45").code == 3);

    std::string cfg = temp_path("bad.cfg");
    std::ofstream(cfg) << "x = 1.5\n";
    CHECK(run("check theta-oracle --config " + cfg).code == 2);
    std::ofstream(cfg) << "threshold.ksum = 1e-40\n";
    CHECK(run("check ksum --config " + cfg).code == 1);
    std::remove(cfg.c_str());
}

TEST_CASE("ff grid and a single sigma_x point")
{
    auto g = run("ff --op sz --grid u1=0.1:0.3:3,u2=0.5:0.7:3");
    CHECK(g.code == 0);
    CHECK(lines(g.out).size() == 9);

    auto s = run("ff --op sx --m 1 --u-list 0.2 0.5 --nu 1 1 --sector 1 --x 0.35 --r 2.8");
    REQUIRE(s.code == 0);
    auto j = json::parse(lines(s.out).at(0));
    ebff::formfactor::FF2Params f;
    f.params = {2, 2.8, 0.35};
    ebff::kernels::KernelContext c{f.params, {}};
    auto want = ebff::formfactor::F2_sigma_x(0.2, 0.5, 1, 1, 1, f, c).value;
    ebff::cplx got(j["value"][0].get<double>(), j["value"][1].get<double>());
    CHECK(std::abs(got - want) < 1e-14 * std::abs(want));
    CHECK(j["provenance"].contains("branch"));
    CHECK(j["provenance"]["normalization"] == "gathered");

    auto raw = run("ff --op sz --m 1 --u-list 0.2 0.5 --norm raw");
    CHECK(raw.code == 0);
    CHECK(json::parse(lines(raw.out).at(0))["provenance"]["normalization"] == "raw");
}

TEST_CASE("csv output through a config file")
{
    std::string cfg = temp_path("csv.cfg");
    std::ofstream(cfg) << "# csv run\nformat = csv\nseed = 5\n";
    auto a = run("check chi-partition --config " + cfg);
    CHECK(a.code == 0);
    auto ls = lines(a.out);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0] == "check,residual,threshold,pass");
    CHECK(ls[1].rfind("chi-partition,", 0) == 0);
    std::remove(cfg.c_str());
}

TEST_CASE("kernel command")
{
    auto a = run("kernel sq --at 0.3:0.1 --level r-1");
    REQUIRE(a.code == 0);
    auto j = json::parse(lines(a.out).at(0));
    ebff::qseries::EllipticParams p{2, 3.0, 0.4};
    auto want = ebff::qseries::sq(ebff::cplx(0.3, 0.1), p, ebff::qseries::Level::r_minus_1);
    ebff::cplx got(j["value"][0].get<double>(), j["value"][1].get<double>());
    CHECK(std::abs(got - want) < 1e-15);
    CHECK(run("kernel nope --at 1").code == 2);
}
