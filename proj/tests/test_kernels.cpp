#include "doctest.h"

#include "ebff/errors.hpp"
#include "ebff/kernels.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ebff;
using namespace ebff::kernels;
using namespace ebff::qseries;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Direct nested-loop products, independent of poch's enumeration.
cplx dp2(cplx z, double a, double b, int M = 90)
{
    cplx out = 1.0;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) out *= 1.0 - z * std::pow(a, i) * std::pow(b, j);
    return out;
}

cplx dp3(cplx z, double a, double b, double c, int M = 50)
{
    cplx out = 1.0;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            for (int k = 0; k < M; ++k) out *= 1.0 - z * std::pow(a, i) * std::pow(b, j) * std::pow(c, k);
    return out;
}

cplx dp1(cplx z, double a, int M = 200)
{
    cplx out = 1.0;
    for (int i = 0; i < M; ++i) out *= 1.0 - z * std::pow(a, i);
    return out;
}

KernelContext ctx(int n, double r, double x) { return {EllipticParams{n, r, x}, {}}; }

} // namespace

TEST_CASE("g_1, g*_1 and rho_1 against direct products")
{
    auto c = ctx(2, 3.0, 0.4);
    const double x = 0.4, r = 3.0;
    const int n = 2, j = 1;
    auto P = [&](cplx z) { return dp2(z, std::pow(x, 2 * r), std::pow(x, 2 * n)); };
    auto Pp = [&](cplx z) { return dp2(z, std::pow(x, 2 * r - 2), std::pow(x, 2 * n)); };
    auto Pr = [&](cplx z) { return dp2(z, x * x, std::pow(x, 2 * n)); };

    cplx z = 0.5;
    cplx g = P(std::pow(x, 2 * n + 2 * r - j - 1) * z) * P(std::pow(x, j + 1) * z) /
             (P(std::pow(x, 2 * n - j + 1) * z) * P(std::pow(x, 2 * r + j - 1) * z));
    CHECK(rel(g_j(1, z, c), g) < 1e-13);

    z = 0.3;
    cplx gs = Pp(std::pow(x, 2 * n + 2 * r - j - 1) * z) * Pp(std::pow(x, j - 1) * z) /
              (Pp(std::pow(x, 2 * n - j - 1) * z) * Pp(std::pow(x, 2 * r + j - 1) * z));
    CHECK(rel(gstar_j(1, z, c), gs) < 1e-13);

    z = 0.2;
    cplx rho = Pr(std::pow(x, 2 * j + 1) * z) * Pr(std::pow(x, 2 * n - 2 * j + 1) * z) /
               (Pr(x * z) * Pr(std::pow(x, 2 * n + 1) * z));
    CHECK(rel(rho_j(1, z, c), rho) < 1e-13);
}

TEST_CASE("unitarity of r_j, r*_j and chi_j (random spectral points)")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int n : {2, 3, 4}) {
        auto c = ctx(n, 2.7, 0.35);
        for (int k = 0; k < 15; ++k) {
            cplx v(U(rng), 0.3 * U(rng));
            for (int j = 1; j <= n; ++j) {
                CHECK(std::abs(g_and_r(j, v, c).r * g_and_r(j, -v, c).r - 1.0) < 1e-12);
                CHECK(std::abs(gstar_and_rstar(j, v, c).r * gstar_and_rstar(j, -v, c).r - 1.0) < 1e-12);
                CHECK(std::abs(chi_j(j, v, c) * chi_j(j, -v, c) - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("r_n has no prefactor")
{
    auto c = ctx(3, 3.0, 0.4);
    cplx v(0.31, 0.07);
    cplx z = xpow(0.4, 2.0 * v);
    CHECK(rel(g_and_r(3, v, c).r, g_j(3, 1.0 / z, c) / g_j(3, z, c)) < 1e-14);
}

TEST_CASE("f, h, f*, h* zeros")
{
    auto c = ctx(2, 3.0, 0.4);
    cplx w(0.23, 0.1);
    CHECK(std::abs(h_kernel(1.0, c)) < 1e-14);
    CHECK(std::abs(f_kernel(w - 0.5, w, c)) < 1e-14);
    CHECK(std::abs(fstar_kernel(0.5 - w, w, c)) < 1e-14);
    // at r = 3 the point v = -1 is also a pole of h*, so use a generic r
    CHECK(std::abs(hstar_kernel(-1.0, ctx(2, 3.3, 0.4))) < 1e-14);
    auto all = ff_kernels(0.3, w, c);
    CHECK(std::abs(all.f) > 1e-3);
    CHECK(rel(all.h * hstar_kernel(0.3, c), sq(-0.7, c.params) * sq(1.3, c.params, Level::r_minus_1) /
                                                (sq(1.3, c.params) * sq(-0.7, c.params, Level::r_minus_1))) < 1e-13);
    bool hit = false;
    try {
        ff_kernels(1.0, w, c);
    } catch (const Error& e) {
        hit = e.code() == Errc::PoleHit && e.detail() == "[v-1]'";
    }
    CHECK(hit);
}

TEST_CASE("f' against direct products, and its pole")
{
    for (int n : {2, 3}) {
        const double x = 0.4, r = 3.0;
        auto c = ctx(n, r, x);
        const cplx v = 0.7;
        const cplx z = std::pow(x, 2 * 0.7);
        auto Q = [&](cplx a) { return dp2(a, std::pow(x, 2 * n), std::pow(x, 2 * r - 2)); };
        cplx e = -v * v / (n * (r - 1)) - (r + n - 2) * v / (n * (r - 1)) - (n - 1) * (3 * r + n - 5) / (6.0 * n * (r - 1));
        double q = std::pow(x, 2 * r - 2);
        cplx root = std::pow(dp1(q, q).real(), 1.0 / n) * std::polar(1.0, std::numbers::pi / n);
        cplx want = std::exp(e * std::log(x)) / root * Q(x * x / z) * Q(std::pow(x, 2 * r + 2 * n - 2) * z) /
                    (Q(1.0 / z) * Q(std::pow(x, 2 * r + 2 * n - 4) * z));
        CHECK(rel(f_prime(v, c), want) < 1e-12);
        // root^n = -(q; q)
        CHECK(rel(std::pow(fprime_root(c), double(n)), -dp1(q, q)) < 1e-12);
    }
    auto c = ctx(2, 3.0, 0.4);
    bool hit = false;
    try {
        f_prime(0.0, c);
    } catch (const Error& e) {
        hit = e.code() == Errc::PoleHit;
    }
    CHECK(hit);
}

TEST_CASE("F_psipsi: symmetry, value and zeros")
{
    const double x = 0.4, r = 3.0;
    auto c = ctx(2, r, x);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0, 1);
    for (int k = 0; k < 30; ++k) {
        cplx z = std::polar(0.2 + 0.7 * U(rng), 6.283 * U(rng));
        CHECK(rel(F_psipsi(std::pow(x, 4) / z, c), F_psipsi(z, c)) < 1e-12);
    }
    const double a = std::pow(x, 4), b = std::pow(x, 2 * r - 2);
    auto P = [&](cplx s) { return dp3(s, a, a, b); };
    cplx z = 1.0;
    cplx want = P(z) * P(a / z) * P(std::pow(x, 2 * r + 2) * z) * P(std::pow(x, 2 * r + 6) / z) /
                (P(x * x * z) * P(std::pow(x, 6) / z) * P(std::pow(x, 2 * r) * z) * P(std::pow(x, 2 * r + 4) / z));
    CHECK(std::abs(F_psipsi(1.0, c)) < 1e-14); // (1; ...) vanishes
    CHECK(std::abs(want) < 1e-14);
    z = 0.55;
    want = P(z) * P(a / z) * P(std::pow(x, 2 * r + 2) * z) * P(std::pow(x, 2 * r + 6) / z) /
           (P(x * x * z) * P(std::pow(x, 6) / z) * P(std::pow(x, 2 * r) * z) * P(std::pow(x, 2 * r + 4) / z));
    CHECK(rel(F_psipsi(z, c), want) < 1e-12);
    CHECK(std::abs(F_psipsi(std::pow(x, 4), c)) < 1e-14);
    CHECK(std::abs(F_psipsi(std::pow(x, 4) * b, c)) < 1e-14);
}

TEST_CASE("beta_m: quotient and m check")
{
    const double x = 0.4, r = 3.0;
    auto c = ctx(2, r, x);
    const double a = std::pow(x, 4), b = std::pow(x, 2 * r - 2);
    auto P = [&](double s) { return dp3(s, a, a, b); };
    cplx block = P(std::pow(x, 4)) * P(std::pow(x, 2 * r + 6)) / (P(std::pow(x, 6)) * P(std::pow(x, 2 * r + 4)));
    cplx want = dp1(x * x, x * x) * dp1(std::pow(x, 2 * r), b) * block;
    for (double u : {0.5, 0.2})
        CHECK(rel(beta_m(2, u, c) / beta_m(1, u, c), want) < 1e-12);
    // m -> m+1 adds [m]' / (m [1]') on top of the same quotient
    cplx q32 = beta_m(3, 0.5, c) / beta_m(2, 0.5, c);
    cplx want32 = want * sq(2.0, c.params, Level::r_minus_1) / (2.0 * sq(1.0, c.params, Level::r_minus_1));
    CHECK(rel(q32, want32) < 1e-12);
    bool hit = false;
    try {
        beta_m(0, 0.5, c);
    } catch (const Error& e) {
        hit = e.code() == Errc::NonpositiveM;
    }
    CHECK(hit);
    // sigma_x replaces {0} by [[0]]
    cplx ratio = beta_m(1, 0.5, c, BetaVariant::sigma_x) / beta_m(1, 0.5, c, BetaVariant::sigma_z);
    CHECK(rel(ratio, dsq(0.0, c.params) / br(0.0, c.params)) < 1e-13);
}

TEST_CASE("beta_1 against an assembled product")
{
    const double x = 0.4, r = 3.0, u = 0.5;
    auto c = ctx(2, r, x);
    const auto& p = c.params;
    const double a = std::pow(x, 4), b = std::pow(x, 2 * r - 2);
    auto P = [&](double s) { return dp3(s, a, a, b); };
    cplx z = std::pow(x, 2 * u);
    cplx num = std::pow(x, -(r - 1) / (4 * r)) * br(0.0, p) * std::pow(z / (x * x), (r - 1) / (2 * r)) *
               std::pow(dp1(x * x, std::pow(x, 4)), 2.0) * dp1(x * x, std::pow(x, 2 * r)) *
               dp1(std::pow(x, 2 * r + 1), b);
    cplx den = sq(1.0, p, Level::r_minus_1) * (1 / x - x) * g_j(1, x * x, c) *
               std::pow(dp1(std::pow(x, 2 * r), std::pow(x, 2 * r)), 2.0) * dp1(std::pow(x, 2 * r + 1), std::pow(x, 2 * r));
    cplx block = P(std::pow(x, 4)) * P(std::pow(x, 2 * r + 6)) / (P(std::pow(x, 6)) * P(std::pow(x, 2 * r + 4)));
    CHECK(rel(beta_m(1, u, c), num / den * block) < 1e-12);
}
