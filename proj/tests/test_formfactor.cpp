#include "doctest.h"

#include "ebff/errors.hpp"
#include "ebff/formfactor.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ebff;
using namespace ebff::formfactor;
using namespace ebff::qseries;

namespace {

Errc code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::ConfigError;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

KernelContext kc(const FF2Params& f) { return {f.params, {}}; }

FF2Params alt()
{
    FF2Params f;
    f.params = {2, 2.6, 0.3};
    f.u0 = 0.05;
    f.u = 0.35;
    f.l = 0.8;
    return f;
}

} // namespace

TEST_CASE("parameter validation")
{
    FF2Params f;
    f.params.n = 3;
    CHECK(code_of([&] { f.validate(); }) == Errc::InvalidParams);
    f = FF2Params{};
    f.uj = {0.2, 0.5, 0.3};
    CHECK(code_of([&] { f.validate(); }) == Errc::InvalidParams);
    f = FF2Params{};
    f.sector = 2;
    CHECK(code_of([&] { f.validate(); }) == Errc::InvalidParams);
    f = FF2Params{};
    f.uj = {0.0, 1.5};
    CHECK(code_of([&] { f.check_annulus(); }) == Errc::AnnulusEmpty);
}

TEST_CASE("kinematic factors: sector sum and difference")
{
    for (FF2Params f : {FF2Params{}, alt()}) {
        auto c = kc(f);
        const auto& p = f.params;
        std::vector<cplx> va{cplx(0.21, 0.03)};
        std::vector<double> uj{0.2, 0.5, 0.3, 0.45};
        cplx A = f.l - f.u0 - va[0] + 0.5 * (0.2 + 0.5 + 0.3 + 0.45);
        cplx B = va[0] + f.u - 0.5 * (0.2 + 0.5 + 0.3 + 0.45);
        cplx z0 = Z_m(0, f.l, f.u, f.u0, uj, va, c), z1 = Z_m(1, f.l, f.u, f.u0, uj, va, c);
        CHECK(rel(z0 + z1, 2.0 * sq(A, p, Level::r_minus_1) * sq(B, p, Level::one)) < 1e-12);
        CHECK(rel(z1 - z0, 2.0 * br(A, p, Level::r_minus_1) * br(B, p, Level::one)) < 1e-12);
        cplx x0 = X_m(0, f.l, f.u, f.u0, uj, va, c), x1 = X_m(1, f.l, f.u, f.u0, uj, va, c);
        CHECK(rel(x0 + x1, 2.0 * dsq(A, p, Level::r_minus_1) * dbr(B, p, Level::one)) < 1e-12);
        CHECK(rel(x1 - x0, 2.0 * dbr(A, p, Level::r_minus_1) * dsq(B, p, Level::one)) < 1e-12);
        CHECK(kinematic(Op::sz, 1, f.l, f.u, f.u0, uj, va, c) == z1);
        CHECK(kinematic(Op::sx, 0, f.l, f.u, f.u0, uj, va, c) == x0);
        // l -> l + 2(r-1) leaves both factors unchanged
        const double L = 2 * (p.r - 1);
        CHECK(rel(Z_m(0, f.l + L, f.u, f.u0, uj, va, c), z0) < 1e-11);
        CHECK(rel(X_m(1, f.l + L, f.u, f.u0, uj, va, c), x1) < 1e-11);
    }
}

TEST_CASE("zero-mode k-sum closes onto Z (property)")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(0, 1);
    for (FF2Params f : {FF2Params{}, alt()}) {
        auto c = kc(f);
        for (int t = 0; t < 12; ++t) {
            double l = 0.1 + 3 * U(rng);
            std::vector<double> uj{0.1 + 0.4 * U(rng), 0.3 + 0.4 * U(rng)};
            std::vector<cplx> va;
            if (t % 2) {
                uj.push_back(U(rng));
                uj.push_back(U(rng));
                va.push_back(cplx(0.05 + 0.9 * U(rng), 0.4 * (U(rng) - 0.5)));
            }
            for (int i : {0, 1}) {
                CHECK(zero_mode_sum_check(i, l, f.u, f.u0, uj, va, 24, c) < 1e-10);
                cplx d = ksum_direct(i, l, f.u, f.u0, uj, va, 24, c);
                CHECK(rel(d, ksum_closed(i, l, f.u, f.u0, uj, va, c)) < 1e-10);
            }
        }
    }
}

TEST_CASE("m = 1 face form factor has no integral")
{
    FF2Params f;
    auto c = kc(f);
    for (Op op : {Op::sz, Op::sx}) {
        auto v = F_face_2m(op, f, {}, c);
        CHECK(rel(v.value, outer_prefactor(op, f, c) * contour_integrand(op, f, {}, c)) < 1e-15);
        CHECK(v.quad_error == 0.0);
    }
}

TEST_CASE("m = 2 contour integral: radius and node independence")
{
    FF2Params f = alt();
    f.uj = {0.2, 0.5, 0.3, 0.45};
    auto c = kc(f);
    auto an = annulus(f);
    REQUIRE(an.lo < an.hi);
    double R0 = default_radius(f);
    CHECK(R0 > an.lo);
    CHECK(R0 < an.hi);
    for (Op op : {Op::sz, Op::sx}) {
        auto a = F_face_2m(op, f, {std::pow(an.lo, 0.75) * std::pow(an.hi, 0.25), 512}, c);
        auto b = F_face_2m(op, f, {std::pow(an.lo, 0.25) * std::pow(an.hi, 0.75), 512}, c);
        auto d = F_face_2m(op, f, {0.0, 256}, c);
        CHECK(std::abs(a.value) > 0.0);
        CHECK(rel(a.value, b.value) < 1e-8);
        CHECK(rel(d.value, b.value) < 1e-8);
        CHECK(a.quad_error >= 0.0);
        CHECK(a.quad_error < 1e-8 * std::abs(a.value));
        CHECK(d.radius == doctest::Approx(R0));
    }
    CHECK(code_of([&] { F_face_2m(Op::sz, f, {0.0, 255}, c); }) == Errc::InvalidParams);
    CHECK(code_of([&] { F_face_2m(Op::sz, f, {an.hi * 1.01, 64}, c); }) == Errc::AnnulusEmpty);
    CHECK(code_of([&] { F_face_2m(Op::sz, f, {an.lo * 0.99, 64}, c); }) == Errc::AnnulusEmpty);
}

TEST_CASE("closed two-point forms: exact zeros")
{
    FF2Params f;
    auto c = kc(f);
    for (int i : {0, 1}) {
        for (int nu : {1, -1}) {
            CHECK(F2_sigma_z(0.2, 0.5, nu, nu, i, f, c).value == cplx(0.0));
            CHECK(F2_sigma_x(0.2, 0.5, nu, -nu, i, f, c).value == cplx(0.0));
        }
        CHECK(std::abs(F2_sigma_z(0.2, 0.5, 1, -1, i, f, c).value) > 0.0);
        CHECK(std::abs(F2_sigma_x(0.2, 0.5, 1, 1, i, f, c).value) > 0.0);
    }
    CHECK(code_of([&] { F2_sigma_z(0.2, 0.5, 2, -1, 0, f, c); }) == Errc::RangeError);
    CHECK(code_of([&] { F2_sigma_z(0.2, 0.5, 1, -1, 3, f, c); }) == Errc::InvalidParams);
    auto other = kc(alt());
    CHECK(code_of([&] { F2_sigma_z(0.2, 0.5, 1, -1, 0, f, other); }) == Errc::InvalidParams);
}

TEST_CASE("closed two-point forms: bracket ratios")
{
    for (FF2Params f : {FF2Params{}, alt()}) {
        auto c = kc(f);
        const auto& p = f.params;
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> U(0, 1);
        for (int t = 0; t < 10; ++t) {
            double u1 = 0.1 + 0.3 * U(rng), u2 = 0.4 + 0.5 * U(rng);
            cplx s = f.u - 0.5 * (u1 + u2);
            double d = 0.5 * (u2 - u1 - 1);
            for (int i : {0, 1}) {
                double sg = i == 0 ? -1.0 : 1.0; // (-1)^{1-i}
                cplx pm = F2_sigma_z(u1, u2, 1, -1, i, f, c).value, mp = F2_sigma_z(u1, u2, -1, 1, i, f, c).value;
                cplx want = sg * (sq(s, p, Level::one) / sq(d, p, Level::r_minus_1)) /
                            (br(s, p, Level::one) / br(d, p, Level::r_minus_1));
                CHECK(rel((pm - mp) / (pm + mp), want) < 1e-11);

                cplx pp = F2_sigma_x(u1, u2, 1, 1, i, f, c).value, mm = F2_sigma_x(u1, u2, -1, -1, i, f, c).value;
                want = sg * (dbr(s, p, Level::one) / dsq(d, p, Level::r_minus_1)) /
                       (dsq(s, p, Level::one) / dbr(d, p, Level::r_minus_1));
                CHECK(rel((pp - mm) / (pp + mm), want) < 1e-11);
            }
            // flipping the sector swaps the roles of the two terms
            cplx a1 = F2_sigma_z(u1, u2, 1, -1, 1, f, c).value;
            cplx b0 = F2_sigma_z(u1, u2, -1, 1, 0, f, c).value;
            CHECK(rel(a1, -b0) < 1e-12);
        }
    }
}

TEST_CASE("closed forms are linear in their own constant")
{
    FF2Params f;
    auto c = kc(f);
    cplx z1 = F2(Op::sz, 0.2, 0.5, 1, -1, 0, f, c).value, x1 = F2(Op::sx, 0.2, 0.5, 1, 1, 0, f, c).value;
    f.Cz = 2.5;
    CHECK(rel(F2(Op::sz, 0.2, 0.5, 1, -1, 0, f, c).value, 2.5 * z1) < 1e-15);
    CHECK(rel(F2(Op::sx, 0.2, 0.5, 1, 1, 0, f, c).value, x1) < 1e-15);
    f.Cx = -0.5;
    CHECK(rel(F2(Op::sx, 0.2, 0.5, 1, 1, 0, f, c).value, -0.5 * x1) < 1e-15);
}

TEST_CASE("theta basis routing and parity rule")
{
    FF2Params f;
    auto c = kc(f);
    const auto& p = f.params;
    const cplx tau(0.0, std::numbers::pi / (2 * p.eps() * (p.r - 1)));
    double l = 0.9;
    cplx A1 = (f.uj[0] - f.u0 + 0.5 + l) / (2 * (p.r - 1));
    cplx A2 = (f.uj[1] - f.u0 + 0.5 + l - 1) / (2 * (p.r - 1));
    cplx want = jacobi_theta(0.0, 0.0, A1, tau) * jacobi_theta(0.0, 0.5, A2, tau);
    CHECK(rel(theta_basis({1, -1}, l, f, c), want) < 1e-14);
    CHECK(code_of([&] { theta_basis({1}, l, f, c); }) == Errc::InvalidParams);

    auto all = all_assignments(4);
    CHECK(all.size() == 16);
    CHECK(all.front() == std::vector<int>{1, 1, 1, 1});
    CHECK(all.back() == std::vector<int>{-1, -1, -1, -1});
    int nz = 0, nx = 0;
    for (const auto& nu : all) {
        nz += allowed(Op::sz, nu, 2);
        nx += allowed(Op::sx, nu, 2);
        CHECK(allowed(Op::sz, nu, 2) != allowed(Op::sx, nu, 2));
    }
    CHECK(nz == 8);
    CHECK(nx == 8);
    CHECK(allowed(Op::sz, {1, -1}, 1));
    CHECK(!allowed(Op::sz, {1, 1}, 1));
    CHECK(allowed(Op::sx, {-1, -1}, 1));
}

TEST_CASE("vertex-face consistency, m = 1")
{
    FF2Params f = alt();
    auto c = kc(f);
    std::vector<std::array<double, 2>> grid{{0.12, 0.5}, {0.2, 0.7}, {0.28, 0.85}};
    for (Op op : {Op::sz, Op::sx})
        for (int i : {0, 1}) {
            f.sector = i;
            auto rep = vertex_face_consistency(op, f, {0.2, 0.9, 1.6, 2.5}, grid, {}, c);
            CHECK(rep.points == 12); // grid x l samples
            CHECK(rep.ratio_spread < 1e-9);
            CHECK(rep.extraction_vs_closed < 1e-9);
            CHECK(rep.l_independence < 1e-9);
            CHECK(rep.phase_modulus_error < 1e-12);
            CHECK(std::abs(rep.fitted) > 0.0);
        }
}

TEST_CASE("vertex-face consistency and selection rule, m = 2")
{
    FF2Params f;
    f.uj = {0.2, 0.5, 0.3, 0.45};
    auto c = kc(f);
    std::vector<double> ls;
    for (int k = 0; k < 24; ++k) ls.push_back(0.07 + k * 0.16);
    for (Op op : {Op::sz, Op::sx}) {
        auto rep = vertex_face_consistency(op, f, ls, {}, {0.0, 256}, c);
        CHECK(rep.ratio_spread < 1e-8);
        CHECK(rep.l_independence < 1e-8);
        CHECK(rep.phase_vs_claim < 1e-10);
        auto sel = selection_rule_scan(op, f, ls, {0.0, 256}, c);
        CHECK(sel.nus.size() == 16);
        CHECK(sel.forbidden_ratio < 1e-8);
        CHECK(!sel.structural_exact);
    }
    FF2Params g;
    auto s1 = selection_rule_scan(Op::sx, g, {}, {}, kc(g));
    CHECK(s1.structural_exact);
    CHECK(s1.forbidden_ratio == 0.0);
}

TEST_CASE("gathered phase")
{
    for (double r : {2.6, 3.0, 4.5})
        for (int m : {1, 2, 3}) {
            cplx ph = gathered_phase(m, r);
            CHECK(std::abs(std::abs(ph) - 1.0) < 1e-15);
            CHECK(std::abs(ph - std::exp(cplx(0, -std::numbers::pi * 3 * m * r / (2 * (r - 1))))) < 1e-14);
        }
}

TEST_CASE("common rapidity shift acts through the explicit powers only")
{
    for (FF2Params f : {FF2Params{}, alt()}) {
        auto c = kc(f);
        const double x = f.params.x, r = f.params.r;
        for (double delta : {0.07, -0.04, 0.15}) {
            FF2Params g = f;
            g.u += delta;
            g.u0 += delta;
            // z_j^{r/(2(r-1))} once, z_j^{-1/(r-1)} and 1/z twice, x^{(4/r) u} from the tail
            const double e = r / (r - 1) - 4 / (r - 1) - 4 + 4 / r;
            for (int i : {0, 1}) {
                cplx a = F2_sigma_z(0.2, 0.5, 1, -1, i, f, c).value;
                cplx b = F2_sigma_z(0.2 + delta, 0.5 + delta, 1, -1, i, g, c).value;
                CHECK(rel(b, a * std::pow(x, delta * e)) < 1e-10);
                a = F2_sigma_x(0.2, 0.5, -1, -1, i, f, c).value;
                b = F2_sigma_x(0.2 + delta, 0.5 + delta, -1, -1, i, g, c).value;
                CHECK(rel(b, a * std::pow(x, delta * e)) < 1e-10);
            }
        }
    }
}
