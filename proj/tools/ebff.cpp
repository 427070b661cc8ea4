#include "ebff/checks.hpp"
#include "ebff/config.hpp"
#include "ebff/errors.hpp"
#include "ebff/formfactor.hpp"
#include "ebff/kernels.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace ebff;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kPrecondition = 3 };

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

cplx parse_complex(const std::string& s)
{
    auto colon = s.find(':');
    try {
        if (colon == std::string::npos) return {std::stod(s), 0.0};
        return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    } catch (const std::exception&) {
        fail(Errc::ConfigError, "bad number '" + s + "'");
    }
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path)
    {
        if (path.empty() || path == "-") return;
        file.open(path);
        if (!file) fail(Errc::ConfigError, "cannot write " + path);
        os = &file;
    }
};

int run_checks(const std::string& name, const RunConfig& cfg, const std::string& out_path)
{
    std::vector<checks::Report> reps;
    if (name == "all")
        reps = checks::run_all(cfg);
    else
        reps.push_back(checks::run_check(name, cfg));
    Output out(out_path);
    bool ok = true;
    if (cfg.format == "csv") *out.os << "check,residual,threshold,pass\n";
    for (const auto& r : reps) {
        ok = ok && r.pass;
        if (cfg.format == "csv") {
            std::ostringstream row;
            row.precision(17);
            row << r.name << ',' << r.residual << ',' << r.threshold << ',' << (r.pass ? "true" : "false");
            *out.os << row.str() << '\n';
        } else
            *out.os << r.to_json(cfg.timing).dump() << '\n';
    }
    return ok ? kPass : kFail;
}

// "u1=0.1:0.3:3,u2=0.45:0.65:3": index, lo, hi, count
struct Axis {
    int index = 0;
    double lo = 0, hi = 0;
    int count = 1;
    double at(int k) const { return count == 1 ? lo : lo + (hi - lo) * k / (count - 1); }
};

std::vector<Axis> parse_grid(const std::string& spec, int size)
{
    std::vector<Axis> out;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        Axis a;
        auto eq = part.find('=');
        if (part.size() < 3 || part[0] != 'u' || eq == std::string::npos)
            fail(Errc::ConfigError, "grid axis must look like uK=lo:hi:count");
        try {
            a.index = std::stoi(part.substr(1, eq - 1));
            std::stringstream rs(part.substr(eq + 1));
            std::string t;
            std::vector<std::string> f;
            while (std::getline(rs, t, ':')) f.push_back(t);
            if (f.size() != 3) throw std::invalid_argument("fields");
            a.lo = std::stod(f[0]);
            a.hi = std::stod(f[1]);
            a.count = std::stoi(f[2]);
        } catch (const std::exception&) {
            fail(Errc::ConfigError, "bad grid axis '" + part + "'");
        }
        if (a.index < 1 || a.index > size || a.count < 1) fail(Errc::ConfigError, "grid axis out of range");
        out.push_back(a);
    }
    return out;
}

struct FfArgs {
    std::string op = "sz";
    int m = 1;
    double x = 0.4, r = 3.0, u = 0.3, u0 = 0.1, l = 1.3;
    int sector = 0;
    std::vector<double> ulist;
    std::vector<int> nu;
    std::string grid;
    std::string norm = "gathered";
    int N = 512;
    double radius = 0.0;
};

json provenance(const RunConfig& cfg, const FfArgs& a)
{
    return {{"branch", qseries::branch_description()},
            {"normalization", a.norm},
            {"truncation", {{"tail_tol", cfg.policy.tail_tol}, {"max_terms", cfg.policy.max_terms}}},
            {"path", "l_j = l - j"}};
}

int run_ff(const FfArgs& a, const RunConfig& cfg, const std::string& out_path)
{
    using namespace formfactor;
    if (a.op != "sz" && a.op != "sx") fail(Errc::ConfigError, "--op must be sz or sx");
    if (a.norm != "gathered" && a.norm != "raw") fail(Errc::ConfigError, "--norm must be gathered or raw");
    const Op op = a.op == "sz" ? Op::sz : Op::sx;
    const Normalization norm = a.norm == "raw" ? Normalization::raw : Normalization::gathered;
    FF2Params f;
    f.params = qseries::make_params(2, a.r, a.x);
    f.u = a.u;
    f.u0 = a.u0;
    f.l = a.l;
    f.sector = a.sector;
    f.Cz = cfg.Cz;
    f.Cx = cfg.Cx;
    f.uj = a.ulist;
    if (f.uj.empty()) {
        f.uj = {0.2, 0.5};
        if (a.m == 2) f.uj = {0.2, 0.5, 0.3, 0.45};
    }
    if (int(f.uj.size()) != 2 * a.m) fail(Errc::InvalidParams, "--u-list needs 2m rapidities");
    if (!a.nu.empty() && (a.m != 1 || a.nu.size() != 2)) fail(Errc::InvalidParams, "--nu takes two signs at m = 1");
    f.validate();
    kernels::KernelContext kc{f.params, cfg.policy};
    ContourSpec cs{a.radius, a.N};

    auto axes = parse_grid(a.grid, int(f.uj.size()));
    std::vector<int> idx(axes.size(), 0);
    Output out(out_path);
    if (cfg.format == "csv") *out.os << "u_list,nu,re,im,quad_error,zero\n";
    while (true) {
        FF2Params g = f;
        for (std::size_t k = 0; k < axes.size(); ++k) g.uj[axes[k].index - 1] = axes[k].at(idx[k]);
        json rec{{"op", a.op}, {"m", a.m}, {"x", a.x}, {"r", a.r}, {"u", a.u}, {"u0", a.u0}, {"l", a.l},
                 {"sector", a.sector}, {"u_list", g.uj}, {"provenance", provenance(cfg, a)}};
        std::vector<std::tuple<std::string, cplx, double, bool>> rows;
        std::string ulabel;
        for (std::size_t k = 0; k < g.uj.size(); ++k) {
            std::ostringstream s;
            s.precision(17);
            s << (k ? ";" : "") << g.uj[k];
            ulabel += s.str();
        }
        if (a.m == 1 && !a.nu.empty()) {
            auto v = F2(op, g.uj[0], g.uj[1], a.nu[0], a.nu[1], a.sector, g, kc);
            rec["nu"] = a.nu;
            rec["value"] = cjson(v.value);
            rec["selection_zero"] = v.value == 0.0;
            rows.emplace_back(std::to_string(a.nu[0]) + ";" + std::to_string(a.nu[1]), v.value, 0.0, v.value == 0.0);
        } else {
            auto v = F_face_2m(op, g, cs, kc, norm);
            rec["face"] = {{"value", cjson(v.value)}, {"quad_error", v.quad_error}, {"radius", v.radius}, {"N", v.N}};
            rows.emplace_back("face", v.value, v.quad_error, false);
            if (a.m == 1) {
                json closed = json::array();
                for (auto& nu : all_assignments(2)) {
                    auto c = F2(op, g.uj[0], g.uj[1], nu[0], nu[1], a.sector, g, kc);
                    closed.push_back({{"nu", nu}, {"value", cjson(c.value)}, {"selection_zero", c.value == 0.0}});
                    rows.emplace_back(std::to_string(nu[0]) + ";" + std::to_string(nu[1]), c.value, 0.0,
                                      c.value == 0.0);
                }
                rec["closed"] = closed;
            }
        }
        if (cfg.format == "csv") {
            for (auto& [nu, val, err, zero] : rows) {
                std::ostringstream row;
                row.precision(17);
                row << ulabel << ',' << nu << ',' << val.real() << ',' << val.imag() << ',' << err << ','
                    << (zero ? "true" : "false");
                *out.os << row.str() << '\n';
            }
        } else
            *out.os << rec.dump() << '\n';
        std::size_t k = 0;
        while (k < axes.size() && ++idx[k] == axes[k].count) idx[k++] = 0;
        if (k == axes.size()) break;
    }
    return kPass;
}

int run_kernel(const std::string& fn, const std::vector<std::string>& at, const RunConfig& cfg,
               const std::string& level_name)
{
    using namespace qseries;
    std::vector<cplx> v;
    for (const auto& s : at) v.push_back(parse_complex(s));
    auto need = [&](std::size_t k) {
        if (v.size() != k) fail(Errc::ConfigError, fn + " takes " + std::to_string(k) + " argument(s)");
    };
    auto as_int = [&](cplx z) {
        if (z.imag() != 0.0 || z.real() != std::round(z.real())) fail(Errc::ConfigError, "expected an integer");
        return int(z.real());
    };
    Level level = Level::r;
    if (level_name == "r-1") level = Level::r_minus_1;
    else if (level_name == "1") level = Level::one;
    else if (level_name != "r") fail(Errc::ConfigError, "--level must be r, r-1 or 1");

    const auto& p = cfg.params;
    kernels::KernelContext kc{p, cfg.policy};
    cplx out;
    if (fn == "poch") {
        if (v.empty()) fail(Errc::ConfigError, "poch takes z and any number of nomes");
        out = poch(v[0], std::vector<cplx>(v.begin() + 1, v.end()), cfg.policy);
    } else if (fn == "theta") {
        need(2);
        out = theta_big(v[0], v[1], cfg.policy);
    } else if (fn == "jacobi") {
        need(4);
        out = jacobi_theta(v[0].real(), v[1].real(), v[2], v[3], cfg.policy);
    } else if (fn == "sq" || fn == "br" || fn == "dsq" || fn == "dbr") {
        need(1);
        Family fam = fn == "sq" ? Family::square : fn == "br" ? Family::brace : fn == "dsq" ? Family::dbl_square
                                                                                           : Family::dbl_brace;
        out = bracket(v[0], {fam, level}, p, cfg.policy);
    } else if (fn == "x_number") {
        need(1);
        out = x_number(v[0].real(), p.x);
    } else if (fn == "g" || fn == "gstar" || fn == "rho") {
        need(2);
        int j = as_int(v[0]);
        out = fn == "g" ? kernels::g_j(j, v[1], kc) : fn == "gstar" ? kernels::gstar_j(j, v[1], kc) : kernels::rho_j(j, v[1], kc);
    } else if (fn == "r" || fn == "rstar" || fn == "chi") {
        need(2);
        int j = as_int(v[0]);
        out = fn == "r" ? kernels::g_and_r(j, v[1], kc).r
              : fn == "rstar" ? kernels::gstar_and_rstar(j, v[1], kc).r
                              : kernels::chi_j(j, v[1], kc);
    } else if (fn == "f_prime") {
        need(1);
        out = kernels::f_prime(v[0], kc);
    } else if (fn == "F_psipsi") {
        need(1);
        out = kernels::F_psipsi(v[0], kc);
    } else if (fn == "beta") {
        need(2);
        out = kernels::beta_m(as_int(v[0]), v[1].real(), kc);
    } else {
        fail(Errc::ConfigError, "unknown kernel function " + fn);
    }
    json rec{{"fn", fn}, {"at", at}, {"n", p.n}, {"r", p.r}, {"x", p.x}, {"value", cjson(out)}};
    if (fn == "sq" || fn == "br" || fn == "dsq" || fn == "dbr") rec["level"] = level_name;
    std::cout << rec.dump() << '\n';
    return kPass;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ebff: elliptic form-factor toolkit"};
    app.require_subcommand(1);
    std::string config_path, out_path;
    std::optional<std::uint64_t> seed;
    bool timing = false;

    auto* check = app.add_subcommand("check", "run a registered check, or all of them");
    std::string check_name;
    check->add_option("name", check_name, "check name or 'all'")->required();
    check->add_option("--config", config_path, "key = value config file");
    check->add_option("--seed", seed, "seed for random draws");
    check->add_option("--out", out_path, "output file");
    check->add_flag("--timing", timing, "include wall time");

    auto* ff = app.add_subcommand("ff", "evaluate n = 2 form factors");
    FfArgs fa;
    ff->add_option("--op", fa.op, "sz or sx");
    ff->add_option("--m", fa.m, "half the particle number")->check(CLI::Range(1, 3));
    ff->add_option("--x", fa.x);
    ff->add_option("--r", fa.r);
    ff->add_option("--u", fa.u);
    ff->add_option("--u0", fa.u0);
    ff->add_option("--l", fa.l);
    ff->add_option("--sector", fa.sector);
    ff->add_option("--u-list", fa.ulist, "rapidities u_1 .. u_2m");
    ff->add_option("--nu", fa.nu, "two signs, closed form only (m = 1)");
    ff->add_option("--grid", fa.grid, "uK=lo:hi:count[,...]");
    ff->add_option("--norm", fa.norm, "gathered or raw");
    ff->add_option("--N", fa.N, "quadrature points per circle");
    ff->add_option("--radius", fa.radius, "contour radius (default geometric rule)");
    ff->add_option("--config", config_path);
    ff->add_option("--out", out_path);

    auto* kernel = app.add_subcommand("kernel", "evaluate a single special function");
    std::string fn, level = "r";
    std::vector<std::string> at;
    kernel->add_option("fn", fn)->required();
    kernel->add_option("--at", at, "arguments; complex as re:im")->required();
    kernel->add_option("--level", level, "bracket level: r, r-1 or 1");
    kernel->add_option("--config", config_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig::defaults() : RunConfig::load(config_path);
        if (seed) cfg.seed = *seed;
        if (timing) cfg.timing = true;
        if (*check) return run_checks(check_name, cfg, out_path);
        if (*ff) return run_ff(fa, cfg, out_path);
        if (*kernel) return run_kernel(fn, at, cfg, level);
    } catch (const Error& e) {
        std::cerr << "error: " << errc_name(e.code()) << ": " << e.detail() << '\n';
        return is_precondition(e.code()) ? kPrecondition : kUsage;
    }
    return kUsage;
}
