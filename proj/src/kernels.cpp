#include "ebff/kernels.hpp"

#include "ebff/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ebff::kernels {

using namespace qseries;

namespace {

void check_j(int j, int n)
{
    if (j < 1 || j > n) fail(Errc::RangeError, "j must lie in 1..n");
}

cplx guarded_div(cplx num, cplx den, const std::string& what, const TruncationPolicy& pol)
{
    if (std::abs(den) < pol.pole_tol) fail(Errc::PoleHit, what);
    return num / den;
}

std::vector<cplx> nomes2(double a, double b) { return {cplx(a), cplx(b)}; }

} // namespace

cplx curly(cplx z, const KernelContext& c)
{
    const auto& p = c.params;
    return poch(z, nomes2(std::pow(p.x, 2 * p.r), std::pow(p.x, 2 * p.n)), c.policy);
}

cplx curly_prime(cplx z, const KernelContext& c)
{
    const auto& p = c.params;
    return poch(z, nomes2(std::pow(p.x, 2 * p.r - 2), std::pow(p.x, 2 * p.n)), c.policy);
}

cplx g_j(int j, cplx z, const KernelContext& c)
{
    const auto& p = c.params;
    check_j(j, p.n);
    const double x = p.x, r = p.r;
    const int n = p.n;
    cplx num = curly(std::pow(x, 2 * n + 2 * r - j - 1) * z, c) * curly(std::pow(x, j + 1) * z, c);
    cplx den = curly(std::pow(x, 2 * n - j + 1) * z, c) * curly(std::pow(x, 2 * r + j - 1) * z, c);
    return guarded_div(num, den, "g_j denominator", c.policy);
}

cplx gstar_j(int j, cplx z, const KernelContext& c)
{
    const auto& p = c.params;
    check_j(j, p.n);
    const double x = p.x, r = p.r;
    const int n = p.n;
    cplx num = curly_prime(std::pow(x, 2 * n + 2 * r - j - 1) * z, c) *
               curly_prime(std::pow(x, j - 1) * z, c);
    cplx den = curly_prime(std::pow(x, 2 * n - j - 1) * z, c) *
               curly_prime(std::pow(x, 2 * r + j - 1) * z, c);
    return guarded_div(num, den, "g*_j denominator", c.policy);
}

cplx rho_j(int j, cplx z, const KernelContext& c)
{
    const auto& p = c.params;
    check_j(j, p.n);
    const double x = p.x;
    const int n = p.n;
    auto P = [&](cplx a) { return poch(a, nomes2(x * x, std::pow(x, 2 * n)), c.policy); };
    cplx num = P(std::pow(x, 2 * j + 1) * z) * P(std::pow(x, 2 * n - 2 * j + 1) * z);
    cplx den = P(x * z) * P(std::pow(x, 2 * n + 1) * z);
    return guarded_div(num, den, "rho_j denominator", c.policy);
}

GR g_and_r(int j, cplx v, const KernelContext& c)
{
    const auto& p = c.params;
    cplx z = xpow(p.x, 2.0 * v);
    cplx g = g_j(j, z, c);
    double e = (p.r - 1) / p.r * double(p.n - j) / p.n;
    cplx rr = xpow(p.x, 2.0 * v * e) * guarded_div(g_j(j, 1.0 / z, c), g, "g_j(z)", c.policy);
    return {g, rr};
}

GR gstar_and_rstar(int j, cplx v, const KernelContext& c)
{
    const auto& p = c.params;
    cplx z = xpow(p.x, 2.0 * v);
    cplx g = gstar_j(j, z, c);
    double e = p.r / (p.r - 1) * double(p.n - j) / p.n;
    cplx rr = xpow(p.x, 2.0 * v * e) * guarded_div(gstar_j(j, 1.0 / z, c), g, "g*_j(z)", c.policy);
    return {g, rr};
}

cplx chi_j(int j, cplx v, const KernelContext& c)
{
    const auto& p = c.params;
    check_j(j, p.n);
    cplx z = xpow(p.x, 2.0 * v);
    double e = -double(j) * (p.n - j) / p.n;
    return neg_pow(z, e) * guarded_div(rho_j(j, 1.0 / z, c), rho_j(j, z, c), "rho_j(z)", c.policy);
}

cplx f_kernel(cplx v, cplx w, const KernelContext& c)
{
    return guarded_div(sq(v + 0.5 - w, c.params, Level::r, c.policy), sq(v - 0.5, c.params, Level::r, c.policy),
                       "[v-1/2]", c.policy);
}

cplx h_kernel(cplx v, const KernelContext& c)
{
    return guarded_div(sq(v - 1.0, c.params, Level::r, c.policy), sq(v + 1.0, c.params, Level::r, c.policy), "[v+1]",
                       c.policy);
}

cplx fstar_kernel(cplx v, cplx w, const KernelContext& c)
{
    return guarded_div(sq(v - 0.5 + w, c.params, Level::r_minus_1, c.policy),
                       sq(v + 0.5, c.params, Level::r_minus_1, c.policy), "[v+1/2]'", c.policy);
}

cplx hstar_kernel(cplx v, const KernelContext& c)
{
    return guarded_div(sq(v + 1.0, c.params, Level::r_minus_1, c.policy),
                       sq(v - 1.0, c.params, Level::r_minus_1, c.policy), "[v-1]'", c.policy);
}

FF ff_kernels(cplx v, cplx w, const KernelContext& c)
{
    return {f_kernel(v, w, c), h_kernel(v, c), fstar_kernel(v, w, c), hstar_kernel(v, c)};
}

cplx fprime_root(const KernelContext& c)
{
    const auto& p = c.params;
    double q = std::pow(p.x, 2 * p.r - 2);
    double P = poch(q, {q}, c.policy).real();
    return std::pow(P, 1.0 / p.n) * neg_one_pow(1.0 / p.n);
}

cplx f_prime(cplx v, const KernelContext& c)
{
    const auto& p = c.params;
    const double x = p.x, r = p.r;
    const int n = p.n;
    cplx z = xpow(x, 2.0 * v);
    cplx e = -v * v / (n * (r - 1)) - (r + n - 2) * v / (n * (r - 1)) -
             (n - 1) * (3 * r + n - 5) / (6.0 * n * (r - 1));
    std::vector<cplx> q = nomes2(std::pow(x, 2 * n), std::pow(x, 2 * r - 2));
    cplx num = poch(x * x / z, q, c.policy) * poch(std::pow(x, 2 * r + 2 * n - 2) * z, q, c.policy);
    cplx den = poch_nonzero(1.0 / z, q, c.policy, "(z^-1; x^2n, x^(2r-2))") *
               poch_nonzero(std::pow(x, 2 * r + 2 * n - 4) * z, q, c.policy, "(x^(2r+2n-4) z; x^2n, x^(2r-2))");
    return xpow(x, e) / fprime_root(c) * num / den;
}

cplx F_psipsi(cplx z, const KernelContext& c)
{
    const auto& p = c.params;
    const double x = p.x, r = p.r;
    std::vector<cplx> q{cplx(std::pow(x, 4)), cplx(std::pow(x, 4)), cplx(std::pow(x, 2 * r - 2))};
    auto P = [&](cplx a) { return poch(a, q, c.policy); };
    auto Pn = [&](cplx a, const char* w) { return poch_nonzero(a, q, c.policy, w); };
    cplx num = P(z) * P(std::pow(x, 4) / z) * P(std::pow(x, 2 * r + 2) * z) * P(std::pow(x, 2 * r + 6) / z);
    cplx den = Pn(x * x * z, "(x^2 z; x^4, x^4, x^(2r-2))") * Pn(std::pow(x, 6) / z, "(x^6/z; x^4, x^4, x^(2r-2))") *
               Pn(std::pow(x, 2 * r) * z, "(x^2r z; x^4, x^4, x^(2r-2))") *
               Pn(std::pow(x, 2 * r + 4) / z, "(x^(2r+4)/z; x^4, x^4, x^(2r-2))");
    return num / den;
}

cplx beta_m(int m, double u, const KernelContext& c, BetaVariant var)
{
    if (m < 1) fail(Errc::NonpositiveM, "beta_m needs m >= 1");
    const auto& p = c.params;
    const auto& pol = c.policy;
    const double x = p.x, r = p.r;
    KernelContext c2 = c;
    c2.params.n = 2;
    const auto& p2 = c2.params;
    cplx z = std::pow(x, 2 * u);
    cplx zero = var == BetaVariant::sigma_z ? br(0.0, p2, Level::r, pol) : dsq(0.0, p2, Level::r, pol);
    double fact = std::tgamma(double(m));
    cplx one_p = sq(1.0, p2, Level::r_minus_1, pol);
    auto P1 = [&](double a, double q) { return poch(a, {q}, pol); };
    std::vector<cplx> q3{cplx(std::pow(x, 4)), cplx(std::pow(x, 4)), cplx(std::pow(x, 2 * r - 2))};
    auto P3 = [&](double a) { return poch(a, q3, pol); };

    cplx num = xpow(x, -(r - 1) / (4 * r)) * zero * bracket_factorial(m - 1, p2, pol) *
               std::pow(z / (x * x), (r - 1) / (2 * r)) * std::pow(P1(x * x, std::pow(x, 4)), 2.0) *
               P1(x * x, std::pow(x, 2 * r)) * P1(std::pow(x, 2 * r + 1), std::pow(x, 2 * r - 2));
    cplx den = fact * std::pow(one_p, double(m)) * (1.0 / x - x) * g_j(1, x * x, c2) *
               std::pow(P1(std::pow(x, 2 * r), std::pow(x, 2 * r)), 2.0) *
               P1(std::pow(x, 2 * r + 1), std::pow(x, 2 * r));
    if (std::abs(den) < pol.pole_tol) fail(Errc::PoleHit, "beta_m denominator");
    cplx tail = std::pow(P1(x * x, x * x), double(m - 1)) *
                std::pow(P1(std::pow(x, 2 * r), std::pow(x, 2 * r - 2)), double(m - 1)) *
                std::pow(P3(std::pow(x, 4)) * P3(std::pow(x, 2 * r + 6)) /
                             (P3(std::pow(x, 6)) * P3(std::pow(x, 2 * r + 4))),
                         double(m));
    return num / den * tail;
}

} // namespace ebff::kernels
