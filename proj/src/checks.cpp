#include "ebff/checks.hpp"

#include "ebff/ctm.hpp"
#include "ebff/errors.hpp"
#include "ebff/formfactor.hpp"
#include "ebff/freefield.hpp"
#include "ebff/kernels.hpp"
#include "ebff/lattice.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <random>

namespace ebff::checks {

using nlohmann::json;
using namespace qseries;
using std::numbers::pi;

nlohmann::json Report::to_json(bool with_timing) const
{
    json j;
    j["check"] = name;
    j["params"] = params;
    j["details"] = details;
    j["residual"] = residual;
    j["threshold"] = threshold;
    j["pass"] = pass;
    if (with_timing) j["wall_ms"] = wall_ms;
    return j;
}

namespace {

struct Ctx {
    const RunConfig& cfg;
    std::mt19937_64 rng;
    json params;
    json details;

    double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    cplx cuni(double re, double im) { return {uni(-re, re), uni(-im, im)}; }
    kernels::KernelContext kc(const EllipticParams& p) const { return {p, cfg.policy}; }
    freefield::BosonSpec bosons() const
    {
        return cfg.bosons.empty() ? freefield::BosonSpec::default_spec() : freefield::BosonSpec::load(cfg.bosons);
    }
};

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

using Fn = std::function<double(Ctx&)>;

double theta_oracle(Ctx& c)
{
    double worst = 0.0;
    const int draws = 200;
    for (int k = 0; k < draws; ++k) {
        cplx q = std::polar(c.uni(0.05, 0.8), c.uni(-pi, pi));
        cplx z = std::polar(c.uni(0.3, 1.5), c.uni(-pi, pi));
        worst = std::max(worst, rel(theta_big(z, q, c.cfg.policy), theta_big_sum(z, q, 400)));
    }
    c.params = {{"draws", draws}, {"q_abs_max", 0.8}, {"z_abs", {0.3, 1.5}}};
    return worst;
}

double bracket_parity(Ctx& c)
{
    double worst = 0.0;
    for (auto [x, r] : std::vector<std::pair<double, double>>{{0.3, 2.5}, {0.5, 4.0}}) {
        EllipticParams p{2, r, x};
        double w = 0.0;
        for (int k = 0; k < 100; ++k) {
            cplx v(c.uni(-3, 3), c.uni(-0.5, 0.5));
            cplx b = sq(v, p, Level::r, c.cfg.policy);
            w = std::max(w, std::abs(sq(-v, p, Level::r, c.cfg.policy) + b) / std::abs(b));
            w = std::max(w, std::abs(sq(v + r, p, Level::r, c.cfg.policy) + b) / std::abs(b));
        }
        c.details[std::to_string(x) + "," + std::to_string(r)] = w;
        worst = std::max(worst, w);
    }
    c.params = {{"draws", 100}, {"pairs", {{0.3, 2.5}, {0.5, 4.0}}}};
    return worst;
}

double kernel_unitarity(Ctx& c)
{
    double wr = 0.0, ws = 0.0, wc = 0.0, wf = 0.0;
    for (int n : {2, 3}) {
        EllipticParams p{n, c.cfg.params.r, c.cfg.params.x};
        auto kc = c.kc(p);
        for (int k = 0; k < 20; ++k) {
            cplx v = c.cuni(0.9, 0.3);
            for (int j = 1; j <= n; ++j) {
                wr = std::max(wr, std::abs(kernels::g_and_r(j, v, kc).r * kernels::g_and_r(j, -v, kc).r - 1.0));
                ws = std::max(ws, std::abs(kernels::gstar_and_rstar(j, v, kc).r * kernels::gstar_and_rstar(j, -v, kc).r - 1.0));
                wc = std::max(wc, std::abs(kernels::chi_j(j, v, kc) * kernels::chi_j(j, -v, kc) - 1.0));
            }
        }
    }
    EllipticParams p2{2, c.cfg.params.r, c.cfg.params.x};
    auto kc = c.kc(p2);
    const double x4 = std::pow(p2.x, 4);
    for (int k = 0; k < 20; ++k) {
        cplx z = std::polar(c.uni(0.3, 0.9), c.uni(-pi, pi));
        wf = std::max(wf, rel(kernels::F_psipsi(x4 / z, kc), kernels::F_psipsi(z, kc)));
    }
    c.details = {{"r_j", wr}, {"r*_j", ws}, {"chi_j", wc}, {"F_psipsi", wf}};
    c.params = {{"n", {2, 3}}, {"r", p2.r}, {"x", p2.x}, {"draws", 20}};
    return std::max({wr, ws, wc, wf});
}

template <class F>
double per_n(Ctx& c, const char* label, F body)
{
    double worst = 0.0;
    for (int n : {2, 3}) {
        EllipticParams p{n, c.cfg.params.r, c.cfg.params.x};
        double w = 0.0;
        for (int k = 0; k < 10; ++k) w = std::max(w, body(p, k));
        c.details[std::string(label) + "_n" + std::to_string(n)] = w;
        worst = std::max(worst, w);
    }
    c.params = {{"n", {2, 3}}, {"r", c.cfg.params.r}, {"x", c.cfg.params.x}, {"draws", 10}};
    return worst;
}

double ybe(Ctx& c)
{
    return per_n(c, "vertex_ybe", [&](const EllipticParams& p, int) {
        return lattice::vertex_ybe_residual(c.cuni(0.8, 0.2), c.cuni(0.8, 0.2), c.kc(p));
    });
}

double face_ybe(Ctx& c)
{
    return per_n(c, "face_ybe", [&](const EllipticParams& p, int k) {
        auto a = lattice::HeightState::generic(p.n, unsigned(c.rng() % 100000 + k));
        return lattice::face_ybe_residual(c.cuni(0.8, 0.2), c.cuni(0.8, 0.2), c.cuni(0.8, 0.2), a, p);
    });
}

double vertex_face(Ctx& c)
{
    double a = per_n(c, "Rtt_Wtt", [&](const EllipticParams& p, int k) {
        auto h = lattice::HeightState::generic(p.n, unsigned(c.rng() % 100000 + k));
        cplx v1 = c.cuni(0.8, 0.2), v2 = c.cuni(0.8, 0.2);
        auto R = lattice::build_R(v1 - v2, c.kc(p));
        return lattice::vertex_face_residual(v1, v2, h, R, p);
    });
    double b = per_n(c, "primed", [&](const EllipticParams& p, int k) {
        auto h = lattice::HeightState::generic(p.n, unsigned(c.rng() % 100000 + k));
        return lattice::primed_relation_residual(c.cuni(0.8, 0.2), c.cuni(0.8, 0.2), h, c.kc(p));
    });
    return std::max(a, b);
}

double dual_inversion(Ctx& c)
{
    double a = per_n(c, "dual_t", [&](const EllipticParams& p, int k) {
        auto h = lattice::HeightState::generic(p.n, unsigned(c.rng() % 100000 + k));
        cplx v1 = c.cuni(0.8, 0.2), v2 = c.cuni(0.8, 0.2);
        auto R = lattice::build_R(v1 - v2, c.kc(p));
        return std::max(lattice::dual_vertex_face_residual(v1, v2, h, R, p),
                        lattice::dual_inversion_residual(v1, h, p));
    });
    double b = per_n(c, "dual_t_primed", [&](const EllipticParams& p, int k) {
        auto h = lattice::HeightState::generic(p.n, unsigned(c.rng() % 100000 + k));
        return lattice::primed_dual_inversion_residual(c.cuni(0.8, 0.2), h, c.kc(p));
    });
    return std::max(a, b);
}

double tail_delta(Ctx& c)
{
    EllipticParams p{2, c.cfg.params.r, c.cfg.params.x};
    auto kc = c.kc(p);
    const int J = 12;
    double dev = 0.0, step = 0.0, bound_excess = 0.0;
    for (int sector : {0, 1})
        for (int k = 0; k < 3; ++k) {
            auto a0 = lattice::HeightState::generic(2, unsigned(c.rng() % 100000 + k));
            cplx u = c.cuni(0.5, 0.2);
            auto P12 = lattice::ground_face_path(a0, sector, J, 2);
            auto P13 = lattice::ground_face_path(a0, sector, J + 1, 2);
            cplx L12 = lattice::tail_truncated(u, P12, P12, J, kc);
            cplx L13 = lattice::tail_truncated(u, P13, P13, J + 1, kc);
            dev = std::max(dev, std::abs(L12 - 1.0));
            double d = std::abs(L13 - L12);
            step = std::max(step, d);
            bound_excess = std::max(bound_excess, d - 10 * std::pow(p.x, 2 * J));
        }
    c.details = {{"abs_lambda_minus_1", dev}, {"J_step", step}, {"J_step_bound", 10 * std::pow(p.x, 2 * J)}};
    c.params = {{"n", 2}, {"r", p.r}, {"x", p.x}, {"J", J}};
    // the stability bound is a hard requirement
    return bound_excess > 0 ? std::max(dev, 1.0) : dev;
}

double chi_partition(Ctx& c)
{
    EllipticParams p{2, c.cfg.params.r, 0.3};
    const int J = 14;
    double want = ctm::chi_closed_n2(p.x), worst = 0.0;
    for (int s : {0, 1}) {
        auto res = ctm::chi_partition(s, J, p);
        double e = std::abs(res.value - want) / want;
        c.details["sector" + std::to_string(s)] = e;
        worst = std::max(worst, e);
    }
    c.params = {{"n", 2}, {"x", p.x}, {"J", J}};
    return worst;
}

double fock_trace(Ctx& c)
{
    double worst = 0.0;
    for (int n : {2, 3}) {
        EllipticParams p{n, c.cfg.params.r, c.cfg.params.x};
        ctm::FockSpec spec;
        spec.bosons = c.bosons();
        spec.modes_cutoff = int(std::ceil(std::log(1e-14) / (2 * n * std::log(p.x)))) + 1;
        for (int k = 0; k < 3; ++k) {
            std::vector<double> l(n), kk(n);
            for (int mu = 0; mu < n; ++mu) {
                l[mu] = c.uni(-1, 1);
                kk[mu] = c.uni(-1, 1);
            }
            double ml = 0, mk = 0;
            for (int mu = 0; mu < n; ++mu) {
                ml += l[mu] / n;
                mk += kk[mu] / n;
            }
            for (int mu = 0; mu < n; ++mu) {
                l[mu] -= ml;
                kk[mu] -= mk;
            }
            spec.l = l;
            spec.k = kk;
            auto t = ctm::fock_trace(spec, p);
            double e = std::abs(t.value - t.closed) / std::abs(t.closed);
            worst = std::max(worst, e);
        }
        c.details["n" + std::to_string(n)] = worst;
    }
    c.params = {{"n", {2, 3}}, {"r", c.cfg.params.r}, {"x", c.cfg.params.x}, {"bosons", c.bosons().source()}};
    return worst;
}

std::vector<EllipticParams> appendix_points(int n)
{
    return {{n, 2.5, 0.3}, {n, 4.0, 0.5}};
}

double ope(Ctx& c)
{
    auto spec = c.bosons();
    double worst = 0.0;
    int count = 0;
    for (int n : {2, 3})
        for (const auto& p : appendix_points(n)) {
            for (const auto& pr : freefield::registered_pairs(p)) {
                double r = freefield::ope_check(pr, 12, spec, p).residual();
                worst = std::max(worst, r);
                ++count;
                auto& slot = c.details[pr.label];
                slot = std::max(slot.is_null() ? 0.0 : slot.get<double>(), r);
            }
        }
    c.params = {{"order", 12}, {"n", {2, 3}}, {"points", {{0.3, 2.5}, {0.5, 4.0}}}, {"pair_evaluations", count}};
    return worst;
}

double delta_commutator(Ctx& c)
{
    auto spec = c.bosons();
    double worst = 0.0;
    for (int n : {2, 3})
        for (const auto& p : appendix_points(n))
            for (int j = 1; j <= n - 1; ++j) worst = std::max(worst, freefield::delta_commutator_check(j, 12, spec, p));
    c.params = {{"order", 12}, {"n", {2, 3}}, {"points", {{0.3, 2.5}, {0.5, 4.0}}}};
    return worst;
}

double nilpotency(Ctx& c)
{
    double worst = 0.0, generic = 1e300;
    for (const auto& p : appendix_points(2)) {
        auto res = freefield::nilpotency_check(p, c.cfg.policy);
        worst = std::max(worst, res.max_zero());
        generic = std::min(generic, res.generic);
    }
    c.details = {{"max_vanishing", worst}, {"min_generic", generic}};
    c.params = {{"points", {{0.3, 2.5}, {0.5, 4.0}}}};
    // a kernel that vanishes everywhere would be a false pass
    return generic > 1e-6 ? worst : 1.0;
}

double ksum(Ctx& c)
{
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        EllipticParams p{2, c.uni(2.0, 5.0), c.uni(0.2, 0.6)};
        auto kc = c.kc(p);
        int i = int(c.rng() % 2);
        double l = c.uni(0.0, 4.0);
        cplx u(c.uni(-0.5, 0.5), c.uni(-0.2, 0.2));
        double u0 = c.uni(-0.5, 0.5);
        int m = 1 + int(c.rng() % 2);
        std::vector<double> uj(2 * m);
        for (auto& v : uj) v = c.uni(0.0, 1.0);
        std::vector<cplx> va(m - 1);
        // |w_a| < 1, where the contour lives
        for (auto& v : va) v = {c.uni(0.05, 1.0), c.uni(-0.3, 0.3)};
        worst = std::max(worst, formfactor::zero_mode_sum_check(i, l, u, u0, uj, va, 24, kc));
    }
    c.params = {{"draws", 20}, {"K", 24}};
    return worst;
}

formfactor::FF2Params base_ff(const RunConfig& cfg)
{
    formfactor::FF2Params f;
    f.params = {2, cfg.params.r, cfg.params.x};
    f.Cz = cfg.Cz;
    f.Cx = cfg.Cx;
    return f;
}

double ff_consistency(Ctx& c)
{
    auto f = base_ff(c.cfg);
    auto kc = c.kc(f.params);
    std::vector<double> ls{0.3, 1.1, 1.9, 2.7};
    std::vector<std::array<double, 2>> grid;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) grid.push_back({0.1 + 0.05 * a, 0.45 + 0.1 * b});
    double worst = 0.0;
    for (auto op : {formfactor::Op::sz, formfactor::Op::sx})
        for (int i : {0, 1}) {
            f.sector = i;
            auto rep = formfactor::vertex_face_consistency(op, f, ls, grid, c.cfg.contour, kc);
            std::string key = std::string(formfactor::op_name(op)) + "_i" + std::to_string(i);
            c.details[key] = {{"ratio_spread", rep.ratio_spread},
                              {"extraction_vs_closed", rep.extraction_vs_closed},
                              {"l_independence", rep.l_independence},
                              {"phase_modulus_error", rep.phase_modulus_error},
                              {"phase_vs_gathered", rep.phase_vs_claim}};
            worst = std::max({worst, rep.ratio_spread, rep.extraction_vs_closed, rep.l_independence,
                              rep.phase_modulus_error});
        }
    c.params = {{"m", 1}, {"r", f.params.r}, {"x", f.params.x}, {"u", f.u}, {"u0", f.u0}, {"l", ls}, {"grid", "5x5"}};
    return worst;
}

std::vector<double> selection_ls()
{
    std::vector<double> ls;
    for (int k = 0; k < 28; ++k) ls.push_back(0.05 + k * (3.9 - 0.05) / 27);
    return ls;
}

double selection_rules(Ctx& c)
{
    auto f = base_ff(c.cfg);
    auto kc = c.kc(f.params);
    double worst = 0.0;
    for (auto op : {formfactor::Op::sz, formfactor::Op::sx})
        for (int i : {0, 1}) {
            f.sector = i;
            f.uj = {0.2, 0.5};
            auto r1 = formfactor::selection_rule_scan(op, f, {}, c.cfg.contour, kc);
            f.uj = {0.2, 0.5, 0.3, 0.45};
            auto r2 = formfactor::selection_rule_scan(op, f, selection_ls(), c.cfg.contour, kc);
            std::string key = std::string(formfactor::op_name(op)) + "_i" + std::to_string(i);
            c.details[key] = {{"m1_structural_exact", r1.structural_exact}, {"m2_forbidden_ratio", r2.forbidden_ratio}};
            worst = std::max({worst, r1.structural_exact ? 0.0 : 1.0, r2.forbidden_ratio});
        }
    c.params = {{"r", f.params.r}, {"x", f.params.x}, {"u", f.u}, {"u0", f.u0}, {"m2_uj", f.uj}, {"l_samples", 28}};
    return worst;
}

double contour_stability(Ctx& c)
{
    auto f = base_ff(c.cfg);
    auto kc = c.kc(f.params);
    f.uj = {0.2, 0.5, 0.3, 0.45};
    auto an = formfactor::annulus(f);
    double worst = 0.0;
    for (auto op : {formfactor::Op::sz, formfactor::Op::sx}) {
        std::vector<cplx> vals;
        for (double t : {0.3, 0.5, 0.7}) {
            formfactor::ContourSpec cs{std::pow(an.lo, 1 - t) * std::pow(an.hi, t), 512};
            vals.push_back(formfactor::F_face_2m(op, f, cs, kc).value);
        }
        double spread = std::max(rel(vals[0], vals[1]), rel(vals[2], vals[1]));
        cplx a = formfactor::F_face_2m(op, f, {0.0, 256}, kc).value;
        cplx b = formfactor::F_face_2m(op, f, {0.0, 512}, kc).value;
        double conv = rel(a, b);
        c.details[formfactor::op_name(op)] = {{"radius_spread", spread}, {"N256_vs_N512", conv}};
        worst = std::max({worst, spread, conv});
    }
    c.params = {{"m", 2}, {"r", f.params.r}, {"x", f.params.x}, {"uj", f.uj}, {"annulus", {an.lo, an.hi}}};
    return worst;
}

const std::map<std::string, Fn>& registry()
{
    static const std::map<std::string, Fn> r{
        {"theta-oracle", theta_oracle},       {"bracket-parity", bracket_parity},
        {"kernel-unitarity", kernel_unitarity}, {"ybe", ybe},
        {"face-ybe", face_ybe},               {"vertex-face", vertex_face},
        {"dual-inversion", dual_inversion},   {"tail-delta", tail_delta},
        {"chi-partition", chi_partition},     {"fock-trace", fock_trace},
        {"ope", ope},                         {"delta-commutator", delta_commutator},
        {"nilpotency", nilpotency},           {"ksum", ksum},
        {"ff-consistency", ff_consistency},   {"selection-rules", selection_rules},
        {"contour-stability", contour_stability},
    };
    return r;
}

} // namespace

const std::vector<std::string>& names()
{
    static const std::vector<std::string> n = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : registry()) out.push_back(k);
        return out;
    }();
    return n;
}

Report run_check(const std::string& name, const RunConfig& cfg)
{
    auto it = registry().find(name);
    if (it == registry().end()) fail(Errc::UnknownCheck, "unknown check " + name);
    Ctx c{cfg, std::mt19937_64(cfg.seed ^ fnv1a(name)), json::object(), json::object()};
    auto t0 = std::chrono::steady_clock::now();
    Report rep;
    rep.name = name;
    try {
        rep.residual = it->second(c);
    } catch (const Error& e) {
        rep.residual = std::numeric_limits<double>::infinity();
        c.details["error"] = std::string(errc_name(e.code())) + ": " + e.detail();
    }
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rep.threshold = cfg.threshold(name);
    rep.pass = std::isfinite(rep.residual) && rep.residual <= rep.threshold;
    c.params["seed"] = cfg.seed;
    rep.params = c.params;
    rep.details = c.details;
    return rep;
}

std::vector<Report> run_all(const RunConfig& cfg)
{
    const auto& all = names();
    std::vector<Report> out(all.size());
    std::size_t next = 0;
    while (next < all.size()) {
        std::vector<std::future<Report>> batch;
        for (int w = 0; w < cfg.workers && next < all.size(); ++w, ++next)
            batch.push_back(std::async(std::launch::async, run_check, all[next], std::cref(cfg)));
        std::size_t base = next - batch.size();
        for (std::size_t k = 0; k < batch.size(); ++k) out[base + k] = batch[k].get();
    }
    return out;
}

} // namespace ebff::checks
