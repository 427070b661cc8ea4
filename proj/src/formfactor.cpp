#include "ebff/formfactor.hpp"

#include "ebff/errors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace ebff::formfactor {

using namespace qseries;
using std::numbers::pi;

const char* op_name(Op op) { return op == Op::sz ? "sigma_z" : "sigma_x"; }

void FF2Params::validate() const
{
    params.validate();
    if (params.n != 2) fail(Errc::InvalidParams, "two-point form factors need n = 2");
    if (uj.empty() || uj.size() % 2 != 0) fail(Errc::InvalidParams, "need an even, nonzero number of rapidities");
    if (sector != 0 && sector != 1) fail(Errc::InvalidParams, "sector must be 0 or 1");
}

Annulus annulus(const FF2Params& f)
{
    const double x = f.params.x;
    Annulus a{0.0, std::numeric_limits<double>::infinity()};
    for (double u : f.uj) {
        double z = std::pow(x, 2 * u);
        a.lo = std::max(a.lo, x * x * x * z);
        a.hi = std::min(a.hi, x * z);
    }
    return a;
}

void FF2Params::check_annulus() const
{
    auto a = annulus(*this);
    if (!(a.lo < a.hi)) fail(Errc::AnnulusEmpty, "max x^3|z_j| >= min x|z_j|");
}

double default_radius(const FF2Params& f)
{
    const double x = f.params.x;
    double logp = 0.0;
    for (double u : f.uj) logp += 2 * u * std::log(x);
    return x * x * std::exp(logp / double(f.uj.size()));
}

namespace {

double ubar(const std::vector<double>& uj) { return 0.5 * std::accumulate(uj.begin(), uj.end(), 0.0); }
cplx vsum(const std::vector<cplx>& va) { return std::accumulate(va.begin(), va.end(), cplx(0.0)); }
double sgn_i(int i) { return (1 - i) % 2 == 0 ? 1.0 : -1.0; }

// (-z)^a in raw form; z^a on the principal branch in gathered form.
cplx zpow(cplx z, double a, Normalization norm)
{
    if (norm == Normalization::raw) return neg_pow(z, a);
    return std::exp(a * std::log(z));
}

cplx integrand_tail(const FF2Params& f, cplx sv, const EllipticParams& p)
{
    const double x = p.x, r = p.r, u = f.u, u0 = f.u0, su = ubar(f.uj);
    return xpow(x, 2 / r * (2 * u - 1)) *
           xpow(x, -(r + 2) / r * (u0 - u) - 1 / r - (u0 + sv - su) * (u0 + sv - su) / (r - 1) -
                       (sv + u - su - 1.0) * (sv + u - su - 1.0));
}

} // namespace

cplx Z_m(int i, double l, cplx u, double u0, const std::vector<double>& uj, const std::vector<cplx>& va,
         const KernelContext& c)
{
    const auto& p = c.params;
    cplx A = l - u0 - vsum(va) + ubar(uj);
    cplx B = vsum(va) + u - ubar(uj);
    return sq(A, p, Level::r_minus_1, c.policy) * sq(B, p, Level::one, c.policy) +
           sgn_i(i) * br(A, p, Level::r_minus_1, c.policy) * br(B, p, Level::one, c.policy);
}

cplx X_m(int i, double l, cplx u, double u0, const std::vector<double>& uj, const std::vector<cplx>& va,
         const KernelContext& c)
{
    const auto& p = c.params;
    cplx A = l - u0 - vsum(va) + ubar(uj);
    cplx B = vsum(va) + u - ubar(uj);
    return dsq(A, p, Level::r_minus_1, c.policy) * dbr(B, p, Level::one, c.policy) +
           sgn_i(i) * dbr(A, p, Level::r_minus_1, c.policy) * dsq(B, p, Level::one, c.policy);
}

cplx kinematic(Op op, int i, double l, cplx u, double u0, const std::vector<double>& uj,
               const std::vector<cplx>& va, const KernelContext& c)
{
    return op == Op::sz ? Z_m(i, l, u, u0, uj, va, c) : X_m(i, l, u, u0, uj, va, c);
}

cplx ksum_direct(int i, double l, cplx u, double u0, const std::vector<double>& uj,
                 const std::vector<cplx>& va, int K, const KernelContext& c)
{
    const auto& p = c.params;
    const double x = p.x, r = p.r, lx = std::log(x);
    cplx tot = 0.0;
    for (int q = -K; q <= K; ++q) {
        double k = l + i + 2.0 * q;
        cplx t = br(u - u0 - 1.0 + k, p, Level::r, c.policy);
        for (double u_j : uj) t *= neg_pow(std::pow(x, 2 * u_j), r * l / (2 * (r - 1)) - k / 2);
        t *= std::exp((-l + (r - 1) * k / r) * (2.0 * u - 1.0) * lx);
        for (cplx v : va) t *= neg_pow(xpow(x, 2.0 * v), -r * l / (r - 1) + k);
        double e = -l / (r - 1) + k / r;
        t *= std::exp(e * (cplx(0, pi * r) + (1 - r) * lx + 2 * u0 * lx));
        t *= std::exp((r * l * l / (r - 1) - 2 * k * l + (r - 1) * k * k / r) * lx);
        tot += t;
    }
    return tot;
}

cplx ksum_closed(int i, double l, cplx u, double u0, const std::vector<double>& uj,
                 const std::vector<cplx>& va, const KernelContext& c)
{
    const auto& p = c.params;
    const double r = p.r;
    cplx sv = vsum(va);
    double su = ubar(uj);
    cplx e = (u - u0 - 1.0) * (u - u0 - 1.0) / r - (u0 + sv - su) * (u0 + sv - su) / (r - 1) -
             (sv + u - su - 1.0) * (sv + u - su - 1.0);
    return sgn_i(i) / 2.0 * xpow(p.x, e) * Z_m(i, l, u, u0, uj, va, c);
}

double zero_mode_sum_check(int i, double l, cplx u, double u0, const std::vector<double>& uj,
                           const std::vector<cplx>& va, int K, const KernelContext& c)
{
    cplx a = ksum_direct(i, l, u, u0, uj, va, K, c);
    cplx b = ksum_closed(i, l, u, u0, uj, va, c);
    return std::abs(a - b) / std::max(1e-300, std::abs(b));
}

cplx contour_integrand(Op op, const FF2Params& f, const std::vector<cplx>& va, const KernelContext& c,
                       Normalization norm)
{
    const auto& p = c.params;
    const auto& pol = c.policy;
    const double x = p.x, r = p.r, u = f.u, u0 = f.u0;
    const int m = f.m();
    const cplx z = std::pow(x, 2 * u);

    cplx val = kinematic(op, f.sector, f.l, u, u0, f.uj, va, c);
    std::vector<cplx> ws;
    for (cplx v : va) ws.push_back(xpow(x, 2.0 * v));

    for (size_t a = 0; a < va.size(); ++a)
        for (size_t b = a + 1; b < va.size(); ++b) {
            cplx d = va[a] - va[b];
            val *= zpow(ws[b], 2 * r / (r - 1), norm) * sq(d, p, Level::r_minus_1, pol) * sq(d, p, Level::one, pol) *
                   xpow(x, -r / (r - 1) * (d - 1.0) * (d - 1.0));
        }

    const std::vector<cplx> q{cplx(std::pow(x, 4)), cplx(std::pow(x, 2 * r - 2))};
    for (size_t a = 0; a < va.size(); ++a) {
        const cplx v = va[a], w = ws[a];
        val *= z * z / (x * x) * xpow(x, -(v - u) * (v - u) + v - u) * sq(v - u, p, Level::one, pol) *
               zpow(w, 2 / (r - 1), norm);
        val *= xpow(x, -(u0 - v) * (u0 - v) / (r - 1) + u0 - v - 1.0) *
               sq(v - u0 + f.l - double(m), p, Level::r_minus_1, pol);
        for (double u_j : f.uj) {
            const double zj = std::pow(x, 2 * u_j);
            val *= zpow(zj, -r / (r - 1), norm) * poch(std::pow(x, 2 * r - 1) * w / zj, q, pol) *
                   poch(std::pow(x, 2 * r + 3) * zj / w, q, pol) /
                   (poch_nonzero(w / (x * zj), q, pol, "(w/(x z_j); x^4, x^(2r-2))") *
                    poch_nonzero(x * x * x * zj / w, q, pol, "(x^3 z_j/w; x^4, x^(2r-2))"));
        }
    }
    return val * integrand_tail(f, vsum(va), p) / 2.0;
}

namespace {

cplx outer_no_beta(const FF2Params& f, const KernelContext& c, Normalization norm)
{
    const auto& p = c.params;
    const auto& pol = c.policy;
    const double x = p.x, r = p.r;
    const cplx z = std::pow(x, 2 * f.u);
    cplx out = 1.0;
    std::vector<double> zs;
    for (double u_j : f.uj) zs.push_back(std::pow(x, 2 * u_j));
    for (size_t j = 0; j < zs.size(); ++j)
        for (size_t k = j + 1; k < zs.size(); ++k)
            out *= zpow(zs[j], r / (2 * (r - 1)), norm) * kernels::F_psipsi(zs[k] / zs[j], c);
    for (size_t j = 0; j < zs.size(); ++j) {
        const double zj = zs[j];
        cplx den = z / x * poch(x * zj / z, {std::pow(x, 4)}, pol) * poch(x * x * x * z / zj, {std::pow(x, 4)}, pol);
        if (std::abs(den) < pol.pole_tol) fail(Errc::PoleHit, "(x z_j/z; x^4)(x^3 z/z_j; x^4)");
        out *= zpow(zj, -1 / (r - 1), norm) / den;
        if (norm == Normalization::raw) {
            double s = f.uj[j] - f.u0 + 0.5;
            out *= std::pow(x, s * s / (4 * (r - 1)) + r * s / (2 * (r - 1)) + 0.25) * kernels::f_prime(s, c);
        }
    }
    return out;
}

} // namespace

cplx outer_prefactor(Op op, const FF2Params& f, const KernelContext& c, Normalization norm)
{
    auto var = op == Op::sz ? kernels::BetaVariant::sigma_z : kernels::BetaVariant::sigma_x;
    cplx out = kernels::beta_m(f.m(), f.u, c, var) * outer_no_beta(f, c, norm);
    return norm == Normalization::raw && f.m() % 2 == 0 ? -out : out;
}

cplx gathered_phase(int m, double r) { return std::polar(1.0, -pi * 3.0 * m * r / (2 * (r - 1))); }

namespace {

struct Quad {
    cplx full, half;
};

Quad trapezoid(Op op, const FF2Params& f, double R, int N, const KernelContext& c, Normalization norm)
{
    const int dim = f.m() - 1;
    const double lx = std::log(f.params.x);
    std::vector<cplx> nodes(N);
    for (int k = 0; k < N; ++k) nodes[k] = std::log(std::polar(R, 2 * pi * k / N)) / (2 * lx);
    std::vector<int> idx(dim, 0);
    std::vector<cplx> va(dim);
    Quad q{0.0, 0.0};
    while (true) {
        bool even = true;
        for (int a = 0; a < dim; ++a) {
            va[a] = nodes[idx[a]];
            even = even && idx[a] % 2 == 0;
        }
        cplx g = contour_integrand(op, f, va, c, norm);
        q.full += g;
        if (even) q.half += g;
        int a = 0;
        while (a < dim && ++idx[a] == N) idx[a++] = 0;
        if (a == dim) break;
    }
    q.full /= std::pow(double(N), dim);
    q.half /= std::pow(double(N / 2), dim);
    return q;
}

} // namespace

FFValue F_face_2m(Op op, const FF2Params& f, const ContourSpec& cs, const KernelContext& c, Normalization norm)
{
    f.validate();
    if (cs.N < 4 || cs.N % 2 != 0) fail(Errc::InvalidParams, "contour needs an even N >= 4");
    const int m = f.m();
    FFValue out;
    cplx pre = outer_prefactor(op, f, c, norm);
    if (m == 1) {
        out.value = pre * contour_integrand(op, f, {}, c, norm);
        return out;
    }
    f.check_annulus();
    const Annulus an = annulus(f);
    double R = cs.radius > 0 ? cs.radius : default_radius(f);
    if (!(R > an.lo && R < an.hi)) fail(Errc::AnnulusEmpty, "contour radius outside the annulus");
    Quad q;
    try {
        q = trapezoid(op, f, R, cs.N, c, norm);
    } catch (const Error& e) {
        if (e.code() != Errc::PoleHit) throw;
        // one retry on a nudged circle
        double R2 = R * (1.0 + 1e-3);
        if (!(R2 < an.hi)) R2 = R * (1.0 - 1e-3);
        try {
            q = trapezoid(op, f, R2, cs.N, c, norm);
            R = R2;
        } catch (const Error& e2) {
            if (e2.code() != Errc::PoleHit) throw;
            fail(Errc::ContourOnPole, std::string("integrand pole on both circles: ") + e2.detail());
        }
    }
    out.value = pre * q.full;
    out.quad_error = std::abs(pre) * std::abs(q.full - q.half);
    out.radius = R;
    out.N = cs.N;
    return out;
}

namespace {

void check_context(const FF2Params& f, const KernelContext& c)
{
    f.validate();
    const auto& a = f.params;
    const auto& b = c.params;
    if (a.n != b.n || a.r != b.r || a.x != b.x) fail(Errc::InvalidParams, "kernel context disagrees with parameters");
}

// Shared m = 1 factor of the closed forms: everything but beta, Z and 1/2.
cplx closed_common(const FF2Params& g, const KernelContext& c)
{
    return outer_no_beta(g, c, Normalization::gathered) * integrand_tail(g, 0.0, c.params);
}

FFValue closed_two_point(Op op, double u1, double u2, int nu1, int nu2, int i, const FF2Params& f,
                         const KernelContext& c)
{
    if (std::abs(nu1) != 1 || std::abs(nu2) != 1) fail(Errc::RangeError, "nu must be +1 or -1");
    if (i != 0 && i != 1) fail(Errc::InvalidParams, "sector must be 0 or 1");
    FF2Params g = f;
    g.uj = {u1, u2};
    check_context(g, c);
    FFValue out;
    if (op == Op::sz ? nu1 + nu2 != 0 : nu1 != nu2) return out;
    const auto& p = c.params;
    const auto& pol = c.policy;
    const double ub = 0.5 * (u1 + u2), d = 0.5 * (u2 - u1 - 1);
    const cplx s = f.u - ub;
    cplx a, b, da, db;
    if (op == Op::sz) {
        a = sq(s, p, Level::one, pol);
        b = br(s, p, Level::one, pol);
        da = sq(d, p, Level::r_minus_1, pol);
        db = br(d, p, Level::r_minus_1, pol);
    } else {
        a = dbr(s, p, Level::one, pol);
        b = dsq(s, p, Level::one, pol);
        da = dsq(d, p, Level::r_minus_1, pol);
        db = dbr(d, p, Level::r_minus_1, pol);
    }
    if (std::abs(da) < pol.pole_tol || std::abs(db) < pol.pole_tol)
        fail(Errc::PoleHit, "bracket of (u2 - u1 - 1)/2 at level r-1");
    const double C = op == Op::sz ? f.Cz : f.Cx;
    out.value = C * closed_common(g, c) / 4.0 * (double(nu1) * a / da + sgn_i(i) * b / db);
    return out;
}

} // namespace

FFValue F2_sigma_z(double u1, double u2, int nu1, int nu2, int i, const FF2Params& f, const KernelContext& c)
{
    return closed_two_point(Op::sz, u1, u2, nu1, nu2, i, f, c);
}

FFValue F2_sigma_x(double u1, double u2, int nu1, int nu2, int i, const FF2Params& f, const KernelContext& c)
{
    return closed_two_point(Op::sx, u1, u2, nu1, nu2, i, f, c);
}

FFValue F2(Op op, double u1, double u2, int nu1, int nu2, int i, const FF2Params& f, const KernelContext& c)
{
    return closed_two_point(op, u1, u2, nu1, nu2, i, f, c);
}

cplx theta_basis(const std::vector<int>& nu, double l, const FF2Params& f, const KernelContext& c)
{
    const auto& p = c.params;
    if (nu.size() != f.uj.size()) fail(Errc::InvalidParams, "one nu per rapidity");
    const cplx tau(0.0, pi / (2 * p.eps() * (p.r - 1)));
    cplx out = 1.0;
    for (size_t j = 1; j <= nu.size(); ++j) {
        double b = nu[j - 1] == 1 ? 0.0 : 0.5;
        double A = (f.uj[j - 1] - f.u0 + 0.5 + l - double(j) + 1) / (2 * (p.r - 1));
        out *= jacobi_theta(0.0, b, A, tau, c.policy);
    }
    return out;
}

std::vector<std::vector<int>> all_assignments(int count)
{
    std::vector<std::vector<int>> out;
    for (int mask = 0; mask < (1 << count); ++mask) {
        std::vector<int> nu(count);
        for (int j = 0; j < count; ++j) nu[j] = (mask >> (count - 1 - j)) & 1 ? -1 : 1;
        out.push_back(nu);
    }
    return out;
}

bool allowed(Op op, const std::vector<int>& nu, int m)
{
    int minus = int(std::count(nu.begin(), nu.end(), -1));
    // sigma_z: sum nu / 2 = m - #minus is even; sigma_x: odd
    int half = m - minus;
    bool even = half % 2 == 0;
    return op == Op::sz ? even : !even;
}

Extraction extract(const FF2Params& f, const std::vector<double>& ls, const std::vector<cplx>& rhs,
                   const KernelContext& c)
{
    if (ls.size() != rhs.size() || ls.empty()) fail(Errc::InvalidParams, "one right-hand side per l sample");
    Extraction ex;
    ex.nus = all_assignments(int(f.uj.size()));
    const int L = int(ls.size()), K = int(ex.nus.size());
    Eigen::MatrixXcd M(L, K);
    Eigen::VectorXcd b(L);
    for (int a = 0; a < L; ++a) {
        b(a) = rhs[a];
        for (int k = 0; k < K; ++k) M(a, k) = theta_basis(ex.nus[k], ls[a], f, c);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(M);
    cod.setThreshold(1e-10);
    Eigen::VectorXcd sol = cod.solve(b);
    ex.rank = int(cod.rank());
    ex.residual = (M * sol - b).norm() / std::max(1e-300, b.norm());
    ex.F.assign(sol.data(), sol.data() + K);
    return ex;
}

namespace {

constexpr double kShift = 0.37;

double max_abs(const std::vector<cplx>& v)
{
    double m = 0.0;
    for (auto z : v) m = std::max(m, std::abs(z));
    return m;
}

} // namespace

ConsistencyReport vertex_face_consistency(Op op, const FF2Params& f, const std::vector<double>& l_samples,
                                          const std::vector<std::array<double, 2>>& grid,
                                          const ContourSpec& cs, const KernelContext& c)
{
    check_context(f, c);
    if (l_samples.size() < 2) fail(Errc::InvalidParams, "need at least two l samples");
    ConsistencyReport rep;
    const int m = f.m();
    std::vector<std::vector<double>> rap_sets;
    if (m == 1)
        for (auto& g : grid) rap_sets.push_back({g[0], g[1]});
    else
        rap_sets.push_back(f.uj);
    if (rap_sets.empty()) fail(Errc::InvalidParams, "empty rapidity grid");

    std::vector<cplx> lhs_all, rhs_all;
    std::vector<Extraction> extracted;
    for (auto& us : rap_sets) {
        FF2Params g = f;
        g.uj = us;
        std::vector<cplx> rhs, rhs_s;
        std::vector<double> shifted; // a disjoint l set of the same size
        for (double l : l_samples) {
            g.l = l;
            rhs.push_back(F_face_2m(op, g, cs, c).value);
            shifted.push_back(l + kShift);
            g.l = l + kShift;
            rhs_s.push_back(F_face_2m(op, g, cs, c).value);
        }
        Extraction full = extract(g, l_samples, rhs, c);
        Extraction other = extract(g, shifted, rhs_s, c);
        double scale = std::max(1e-300, max_abs(full.F));
        for (size_t k = 0; k < full.F.size(); ++k)
            rep.l_independence = std::max(rep.l_independence, std::abs(full.F[k] - other.F[k]) / scale);
        rep.points += int(l_samples.size());

        if (m == 1) {
            for (size_t k = 0; k < l_samples.size(); ++k) {
                cplx lhs = 0.0;
                for (auto& nu : full.nus) {
                    cplx Fv = F2(op, us[0], us[1], nu[0], nu[1], f.sector, g, c).value;
                    if (Fv != 0.0) lhs += Fv * theta_basis(nu, l_samples[k], g, c);
                }
                lhs_all.push_back(lhs);
                rhs_all.push_back(rhs[k]);
            }
        } else {
            rep.ratio_spread = std::max(rep.ratio_spread, full.residual);
        }
        extracted.push_back(std::move(full));
    }

    if (m == 1) {
        cplx num = 0.0;
        double den = 0.0;
        for (size_t k = 0; k < lhs_all.size(); ++k) {
            num += std::conj(rhs_all[k]) * lhs_all[k];
            den += std::norm(rhs_all[k]);
        }
        rep.fitted = num / den;
        for (size_t k = 0; k < lhs_all.size(); ++k)
            rep.ratio_spread = std::max(rep.ratio_spread,
                                        std::abs(lhs_all[k] - rep.fitted * rhs_all[k]) / std::abs(rep.fitted * rhs_all[k]));
        for (size_t s = 0; s < rap_sets.size(); ++s) {
            const auto& us = rap_sets[s];
            const auto& ex = extracted[s];
            FF2Params g = f;
            g.uj = us;
            std::vector<cplx> closed;
            for (auto& nu : ex.nus) closed.push_back(F2(op, us[0], us[1], nu[0], nu[1], f.sector, g, c).value);
            double scale = std::max(1e-300, max_abs(closed));
            for (size_t k = 0; k < closed.size(); ++k)
                rep.extraction_vs_closed =
                    std::max(rep.extraction_vs_closed, std::abs(rep.fitted * ex.F[k] - closed[k]) / scale);
        }
    }

    // phase between the raw and the gathered normalisation, one rapidity set
    FF2Params g = f;
    g.uj = rap_sets.front();
    g.l = l_samples.front();
    cplx raw = F_face_2m(op, g, cs, c, Normalization::raw).value;
    cplx gat = F_face_2m(op, g, cs, c, Normalization::gathered).value;
    cplx extra = m % 2 == 0 ? -1.0 : 1.0;
    for (double u_j : g.uj) {
        const double x = c.params.x, r = c.params.r, s = u_j - g.u0 + 0.5;
        extra *= std::pow(x, s * s / (4 * (r - 1)) + r * s / (2 * (r - 1)) + 0.25) * kernels::f_prime(s, c);
    }
    cplx phase = raw / (gat * extra);
    rep.phase_modulus_error = std::abs(std::abs(phase) - 1.0);
    rep.phase_vs_claim = std::abs(phase - gathered_phase(m, c.params.r));
    return rep;
}

SelectionReport selection_rule_scan(Op op, const FF2Params& f, const std::vector<double>& l_samples,
                                    const ContourSpec& cs, const KernelContext& c)
{
    check_context(f, c);
    SelectionReport rep;
    const int m = f.m();
    rep.nus = all_assignments(int(f.uj.size()));
    std::vector<cplx> F;
    if (m == 1) {
        for (auto& nu : rep.nus) F.push_back(F2(op, f.uj[0], f.uj[1], nu[0], nu[1], f.sector, f, c).value);
    } else {
        FF2Params g = f;
        std::vector<cplx> rhs;
        for (double l : l_samples) {
            g.l = l;
            rhs.push_back(F_face_2m(op, g, cs, c).value);
        }
        F = extract(f, l_samples, rhs, c).F;
    }
    double top = 0.0, forb = 0.0;
    rep.structural_exact = true;
    for (size_t k = 0; k < rep.nus.size(); ++k) {
        bool ok = allowed(op, rep.nus[k], m);
        double mag = std::abs(F[k]);
        rep.magnitude.push_back(mag);
        rep.allowed.push_back(ok);
        top = std::max(top, mag);
        if (!ok) {
            forb = std::max(forb, mag);
            if (mag != 0.0) rep.structural_exact = false;
        }
    }
    rep.forbidden_ratio = top > 0 ? forb / top : 0.0;
    return rep;
}

} // namespace ebff::formfactor
