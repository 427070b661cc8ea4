#include "ebff/qseries.hpp"

#include "ebff/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ebff::qseries {

using std::numbers::pi;

double EllipticParams::eps() const { return -std::log(x); }

void EllipticParams::validate() const
{
    if (n < 2)
        fail(Errc::InvalidParams, "n must be at least 2, got " + std::to_string(n));
    if (!(r > 1.0))
        fail(Errc::InvalidParams, "r must exceed 1, got " + std::to_string(r));
    if (!(x > 0.0 && x < 1.0))
        fail(Errc::InvalidParams, "x must lie in (0,1), got " + std::to_string(x));
}

EllipticParams make_params(int n, double r, double x)
{
    EllipticParams p{n, r, x};
    p.validate();
    return p;
}

void TruncationPolicy::validate() const
{
    if (!(tail_tol > 0.0)) fail(Errc::InvalidParams, "tail_tol must be positive");
    if (max_terms < 1) fail(Errc::InvalidParams, "max_terms must be positive");
}

const char* family_name(Family f)
{
    switch (f) {
    case Family::square: return "square";
    case Family::brace: return "brace";
    case Family::dbl_square: return "dbl_square";
    case Family::dbl_brace: return "dbl_brace";
    }
    return "?";
}

const char* level_name(Level l)
{
    switch (l) {
    case Level::r: return "r";
    case Level::r_minus_1: return "r_minus_1";
    case Level::one: return "one";
    }
    return "?";
}

namespace {

struct PochWalker {
    const std::vector<cplx>& nomes;
    const TruncationPolicy& pol;
    cplx acc{1.0, 0.0};
    double min_factor = HUGE_VAL;

    void walk(cplx val, std::size_t idx)
    {
        if (idx == nomes.size()) {
            cplx f = 1.0 - val;
            min_factor = std::min(min_factor, std::abs(f));
            acc *= f;
            return;
        }
        cplx q = nomes[idx];
        cplx v = val;
        for (int t = 0;; ++t) {
            if (std::abs(v) < pol.tail_tol) return;
            if (t >= pol.max_terms)
                fail(Errc::Overflow, "product did not reach tail_tol within max_terms");
            walk(v, idx + 1);
            v *= q;
        }
    }
};

} // namespace

cplx poch_tracked(cplx z, const std::vector<cplx>& nomes, const TruncationPolicy& pol,
                  double& min_factor)
{
    for (const auto& q : nomes)
        if (!(std::abs(q) < 1.0)) fail(Errc::NomeOutOfRange, "nome modulus must be below 1");
    if (nomes.empty()) {
        min_factor = std::abs(1.0 - z);
        return 1.0 - z;
    }
    PochWalker w{nomes, pol};
    w.walk(z, 0);
    min_factor = w.min_factor;
    return w.acc;
}

cplx poch(cplx z, const std::vector<cplx>& nomes, const TruncationPolicy& pol)
{
    double mf = 0;
    return poch_tracked(z, nomes, pol, mf);
}

cplx poch(cplx z, std::initializer_list<double> nomes, const TruncationPolicy& pol)
{
    std::vector<cplx> q(nomes.begin(), nomes.end());
    return poch(z, q, pol);
}

cplx poch_nonzero(cplx z, const std::vector<cplx>& nomes, const TruncationPolicy& pol,
                  const char* what)
{
    double mf = 0;
    cplx v = poch_tracked(z, nomes, pol, mf);
    if (mf < pol.pole_tol) fail(Errc::PoleHit, what);
    return v;
}

cplx theta_big(cplx z, cplx q, const TruncationPolicy& pol)
{
    if (!(std::abs(q) < 1.0) || std::abs(q) == 0.0)
        fail(Errc::NomeOutOfRange, "theta nome must satisfy 0 < |q| < 1");
    if (z == 0.0) fail(Errc::ZeroArgument, "theta argument is zero");
    std::vector<cplx> nq{q};
    return poch(z, nq, pol) * poch(q / z, nq, pol) * poch(q, nq, pol);
}

cplx theta_big_sum(cplx z, cplx q, int terms)
{
    cplx s = 0;
    for (int m = -terms; m <= terms; ++m) {
        double e = 0.5 * m * (m - 1);
        s += std::pow(q, e) * std::pow(-z, m);
    }
    return s;
}

cplx jacobi_theta(double a, double b, cplx v, cplx tau, const TruncationPolicy& pol)
{
    if (!(tau.imag() > 0.0)) fail(Errc::BadModulus, "Im tau must be positive");
    const cplx I(0.0, 1.0);
    auto term = [&](long m) {
        double ma = m + a;
        return std::exp(I * pi * ma * (ma * tau + 2.0 * (v + b)));
    };
    // Start near the peak of the Gaussian envelope and walk outwards.
    long c = std::lround(-a - v.imag() / tau.imag());
    cplx sum = term(c);
    bool up_done = false, dn_done = false;
    for (long k = 1; !(up_done && dn_done); ++k) {
        if (k > pol.max_terms) fail(Errc::Overflow, "theta series did not converge");
        double scale = std::max(std::abs(sum), 1e-300);
        if (!up_done) {
            cplx t = term(c + k);
            sum += t;
            if (std::abs(t) < pol.tail_tol * scale && std::abs(term(c + k + 1)) <= std::abs(t)) up_done = true;
        }
        if (!dn_done) {
            cplx t = term(c - k);
            sum += t;
            if (std::abs(t) < pol.tail_tol * scale && std::abs(term(c - k - 1)) <= std::abs(t)) dn_done = true;
        }
    }
    return sum;
}

double level_value(Level l, double r)
{
    switch (l) {
    case Level::r: return r;
    case Level::r_minus_1: return r - 1.0;
    case Level::one: return 1.0;
    }
    return r;
}

cplx xpow(double x, cplx a) { return std::exp(a * std::log(x)); }

cplx bracket(cplx v, BracketSpec spec, const EllipticParams& p, const TruncationPolicy& pol)
{
    const double rho = level_value(spec.level, p.r);
    const double x = p.x;
    const cplx q = std::pow(x, 2.0 * rho);
    // Shift Re v into [-rho/2, rho/2]: far out the Gaussian prefactor
    // underflows while the product overflows.
    const double k = std::round(v.real() / rho);
    v -= k * rho;
    const bool odd = std::fmod(std::abs(k), 2.0) == 1.0;
    const double sign = odd && (spec.family == Family::square || spec.family == Family::dbl_square) ? -1.0 : 1.0;
    switch (spec.family) {
    case Family::square:
        return sign * xpow(x, v * v / rho - v) * theta_big(xpow(x, 2.0 * v), q, pol);
    case Family::brace:
        return sign * xpow(x, v * v / rho - v) * theta_big(-xpow(x, 2.0 * v), q, pol);
    case Family::dbl_square:
        return sign * xpow(x, v * v / rho) * theta_big(xpow(x, 2.0 * v + rho), q, pol);
    case Family::dbl_brace:
        return sign * xpow(x, v * v / rho) * theta_big(-xpow(x, 2.0 * v + rho), q, pol);
    }
    return 0.0;
}

double x_number(double a, double x)
{
    return (std::pow(x, a) - std::pow(x, -a)) / (x - 1.0 / x);
}

cplx bracket_factorial(int m, const EllipticParams& p, const TruncationPolicy& pol)
{
    if (m < 0) fail(Errc::NegativeInput, "bracket_factorial needs m >= 0");
    cplx acc = 1.0;
    for (int k = 1; k <= m; ++k) acc *= sq(double(k), p, Level::r_minus_1, pol);
    return acc;
}

cplx neg_pow(cplx z, cplx alpha)
{
    if (z == 0.0) fail(Errc::ZeroArgument, "(-z)^a at z = 0");
    const cplx I(0.0, 1.0);
    double s = std::abs(z) <= 1.0 ? 1.0 : -1.0;
    return std::exp(alpha * (std::log(z) + s * I * pi));
}

cplx neg_one_pow(double a) { return std::exp(cplx(0.0, pi * a)); }

const char* branch_description()
{
    return "(-z)^a = exp(a(Log z + i pi)) for |z|<=1, exp(a(Log z - i pi)) for |z|>1; (-1)^a = exp(i pi a)";
}

} // namespace ebff::qseries
