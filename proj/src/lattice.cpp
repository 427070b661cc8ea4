#include "ebff/lattice.hpp"

#include "ebff/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

namespace ebff::lattice {

using namespace qseries;
using std::numbers::pi;

HeightState::HeightState(std::vector<double> ref) : ref_(std::move(ref)), k_(ref_.size(), 0)
{
    double mean = std::accumulate(ref_.begin(), ref_.end(), 0.0) / ref_.size();
    for (auto& v : ref_) v -= mean;
}

HeightState HeightState::generic(int n, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> ref(n);
    for (auto& v : ref) v = d(gen);
    return HeightState(ref);
}

double HeightState::abar(int mu) const
{
    double mean = std::accumulate(k_.begin(), k_.end(), 0.0) / k_.size();
    return ref_[mu] + k_[mu] - mean;
}

HeightState HeightState::up(int mu) const
{
    HeightState h = *this;
    h.k_[mu] += 1;
    return h;
}

HeightState HeightState::down(int mu) const
{
    HeightState h = *this;
    h.k_[mu] -= 1;
    return h;
}

bool HeightState::same(const HeightState& o) const
{
    if (o.n() != n()) return false;
    for (int mu = 0; mu < n(); ++mu)
        if (std::abs(ref_[mu] - o.ref_[mu]) > 1e-12) return false;
    for (int mu = 1; mu < n(); ++mu)
        if (k_[mu] - k_[0] != o.k_[mu] - o.k_[0]) return false;
    return true;
}

std::optional<int> HeightState::step_to(const HeightState& o) const
{
    for (int mu = 0; mu < n(); ++mu)
        if (up(mu).same(o)) return mu;
    return std::nullopt;
}

cplx face_weight(const HeightState& c, const HeightState& d, const HeightState& b,
                 const HeightState& a, cplx v, const EllipticParams& p, const TruncationPolicy& pol)
{
    auto mb = a.step_to(b), md = a.step_to(d), mcb = b.step_to(c), mcd = d.step_to(c);
    if (!mb || !md || !mcb || !mcd) return 0.0;
    auto S = [&](cplx t) { return sq(t, p, Level::r, pol); };
    auto den = [&](cplx t) {
        cplx s = S(t);
        if (std::abs(s) < pol.pole_tol) fail(Errc::PoleHit, "[a_{mu nu}] in face weight");
        return s;
    };
    if (*mb == *md) {
        int mu = *md, nu = *mcd;
        if (mu == nu) return S(1.0 + v) / den(1.0);
        double amn = a.a(mu, nu);
        return S(amn - v) / den(amn);
    }
    int mu = *md, nu = *mb;
    double amn = a.a(mu, nu);
    return S(v) * S(amn + 1.0) / (den(1.0) * den(amn));
}

CVec intertwiner(cplx v, const HeightState& h, int mu, const EllipticParams& p, const TruncationPolicy& pol)
{
    const int n = p.n;
    const cplx tau(0.0, n * pi / (p.eps() * p.r));
    const cplx zeta = (v - double(n) * h.abar(mu)) / p.r;
    CVec t(n);
    for (int j = 0; j < n; ++j) t(j) = jacobi_theta(0.5 - double(j) / n, 0.5, zeta, tau, pol);
    return t;
}

CMat intertwiner_matrix(cplx v, const HeightState& a, const EllipticParams& p, const TruncationPolicy& pol)
{
    CMat T(p.n, p.n);
    for (int nu = 0; nu < p.n; ++nu) T.col(nu) = intertwiner(v, a, nu, p, pol);
    return T;
}

namespace {

CMat checked_inverse(const CMat& T)
{
    Eigen::FullPivLU<CMat> lu(T);
    if (!lu.isInvertible() || lu.rcond() < 1e-13)
        fail(Errc::SingularHeight, "intertwiner matrix is singular at this height");
    return lu.inverse();
}

CVec kron(const CVec& u, const CVec& w)
{
    CVec out(u.size() * w.size());
    for (int i = 0; i < u.size(); ++i)
        for (int k = 0; k < w.size(); ++k) out(i * w.size() + k) = u(i) * w(k);
    return out;
}

double rel_norm(double diff, double scale) { return diff / std::max(1.0, scale); }

} // namespace

CMat dual_matrix(cplx v, const HeightState& a, const EllipticParams& p, const TruncationPolicy& pol)
{
    return checked_inverse(intertwiner_matrix(v, a, p, pol));
}

CVec dual_intertwiner(cplx v, const HeightState& a, int nu, const EllipticParams& p, const TruncationPolicy& pol)
{
    return dual_matrix(v, a, p, pol).row(nu).transpose();
}

namespace {

using TFn = std::function<CVec(cplx, const HeightState&, int)>;
using WFn = std::function<cplx(const HeightState&, const HeightState&, const HeightState&, const HeightState&, cplx)>;

RTensor build_R_from(cplx v, const HeightState& a, int n, const TFn& t, const WFn& W)
{
    const cplx s(0.1234, 0.0);
    const cplx v1 = v + s, v2 = s;
    CMat M(n * n, n * n), N(n * n, n * n);
    for (int mu = 0; mu < n; ++mu) {
        HeightState d = a.up(mu);
        for (int nu = 0; nu < n; ++nu) {
            HeightState c = d.up(nu);
            int col = mu * n + nu;
            M.col(col) = kron(t(v1, d, mu), t(v2, c, nu));
            CVec acc = CVec::Zero(n * n);
            for (int mb = 0; mb < n; ++mb) {
                HeightState b = a.up(mb);
                auto mc = b.step_to(c);
                if (!mc) continue;
                cplx w = W(c, d, b, a, v1 - v2);
                if (w == 0.0) continue;
                acc += kron(t(v1, c, *mc), t(v2, b, mb)) * w;
            }
            N.col(col) = acc;
        }
    }
    RTensor R;
    R.n = n;
    R.m = N * checked_inverse(M);
    return R;
}

double dual_relation_residual(cplx v1, cplx v2, const HeightState& a, const RTensor& R, int n,
                              const std::function<CMat(cplx, const HeightState&)>& Tstar, const WFn& W)
{
    double worst = 0.0, scale = 0.0;
    for (int nb = 0; nb < n; ++nb) {
        HeightState b = a.up(nb);
        for (int nc = 0; nc < n; ++nc) {
            HeightState c = b.up(nc);
            // t*(v1)^b_c (x) t*(v2)^a_b R
            CVec l1 = Tstar(v1, c).row(nc).transpose();
            CVec l2 = Tstar(v2, b).row(nb).transpose();
            Eigen::RowVectorXcd lhs = kron(l1, l2).transpose() * R.m;
            Eigen::RowVectorXcd rhs = Eigen::RowVectorXcd::Zero(n * n);
            for (int nd = 0; nd < n; ++nd) {
                HeightState d = a.up(nd);
                auto dc = d.step_to(c);
                if (!dc) continue;
                cplx w = W(c, d, b, a, v1 - v2);
                if (w == 0.0) continue;
                CVec r1 = Tstar(v1, d).row(nd).transpose();
                CVec r2 = Tstar(v2, c).row(*dc).transpose();
                rhs += w * kron(r1, r2).transpose();
            }
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
            scale = std::max(scale, rhs.cwiseAbs().maxCoeff());
        }
    }
    return rel_norm(worst, scale);
}

} // namespace

RTensor build_R(cplx v, const KernelContext& c, const HeightState* construct_at)
{
    const auto& p = c.params;
    HeightState a = construct_at ? *construct_at : HeightState::generic(p.n, 7u);
    TFn t = [&](cplx vv, const HeightState& h, int mu) { return intertwiner(vv, h, mu, p, c.policy); };
    WFn W = [&](const HeightState& cc, const HeightState& d, const HeightState& b, const HeightState& aa, cplx vv) {
        return face_weight(cc, d, b, aa, vv, p, c.policy);
    };
    return build_R_from(v, a, p.n, t, W);
}

Primed build_S_and_Wprime(cplx v, const KernelContext& c)
{
    KernelContext lo = c;
    lo.params.r = c.params.r - 1.0;
    Primed out;
    out.lowered = lo.params;
    // t' carries the scalar f'(v); it cancels between N and M, so building
    // from t(v; r-1) directly gives the same tensor.
    RTensor R = build_R(v, lo);
    out.S = R;
    out.S.m = -R.m;
    return out;
}

cplx face_weight_prime(const HeightState& c, const HeightState& d, const HeightState& b,
                       const HeightState& a, cplx v, const KernelContext& ctx)
{
    EllipticParams lo = ctx.params;
    lo.r -= 1.0;
    return -face_weight(c, d, b, a, v, lo, ctx.policy);
}

CVec intertwiner_prime(cplx v, const HeightState& h, int mu, const KernelContext& ctx)
{
    EllipticParams lo = ctx.params;
    lo.r -= 1.0;
    return kernels::f_prime(v, ctx) * intertwiner(v, h, mu, lo, ctx.policy);
}

CMat dual_matrix_prime(cplx v, const HeightState& a, const KernelContext& ctx)
{
    CMat T(ctx.params.n, ctx.params.n);
    for (int nu = 0; nu < ctx.params.n; ++nu) T.col(nu) = intertwiner_prime(v, a, nu, ctx);
    return checked_inverse(T);
}

cplx L_block(cplx u, const HeightState& ap0, const HeightState& ap1, const HeightState& a0,
             const HeightState& a1, const KernelContext& c)
{
    auto nu = a1.step_to(a0);
    auto nup = ap1.step_to(ap0);
    if (!nu || !nup) return 0.0;
    const auto& p = c.params;
    CMat Ts = dual_matrix(-u, a0, p, c.policy);
    CVec t = intertwiner(-u, ap0, *nup, p, c.policy);
    return (Ts.row(*nu) * t)(0);
}

int FacePath::step(int j) const
{
    if (j >= 1 && j <= depth()) return steps[j - 1];
    int n = a0.n();
    return ((sector + 1 - j) % n + n) % n;
}

HeightState FacePath::height(int j) const
{
    HeightState h = a0;
    for (int k = 1; k <= j; ++k) h = h.down(step(k));
    return h;
}

FacePath ground_face_path(const HeightState& a0, int sector, int J, int n)
{
    FacePath p{a0, sector, {}};
    for (int j = 1; j <= J; ++j) p.steps.push_back(((sector + 1 - j) % n + n) % n);
    return p;
}

cplx tail_truncated(cplx u, const FacePath& path, const FacePath& path_p, int J, const KernelContext& c)
{
    if (path.sector != path_p.sector || !path.height(J).same(path_p.height(J)))
        fail(Errc::TailMismatch, "paths differ beyond the truncation depth");
    cplx acc = 1.0;
    HeightState a = path.a0, ap = path_p.a0;
    for (int j = 0; j < J; ++j) {
        HeightState an = a.down(path.step(j + 1));
        HeightState apn = ap.down(path_p.step(j + 1));
        acc *= L_block(u, ap, apn, a, an, c);
        a = an;
        ap = apn;
    }
    return acc;
}

namespace {

CMat embed(const CMat& R, int n, int p, int q)
{
    const int N = n * n * n;
    CMat out = CMat::Zero(N, N);
    int idx[3], jdx[3];
    for (int I = 0; I < N; ++I) {
        idx[0] = I / (n * n);
        idx[1] = (I / n) % n;
        idx[2] = I % n;
        for (int J = 0; J < N; ++J) {
            jdx[0] = J / (n * n);
            jdx[1] = (J / n) % n;
            jdx[2] = J % n;
            int o = 3 - p - q;
            if (idx[o] != jdx[o]) continue;
            out(I, J) = R(idx[p] * n + idx[q], jdx[p] * n + jdx[q]);
        }
    }
    return out;
}

} // namespace

double vertex_ybe_residual(cplx v1, cplx v2, const KernelContext& c)
{
    const int n = c.params.n;
    CMat R12 = build_R(v1 - v2, c).m, R13 = build_R(v1, c).m, R23 = build_R(v2, c).m;
    CMat lhs = embed(R12, n, 0, 1) * embed(R13, n, 0, 2) * embed(R23, n, 1, 2);
    CMat rhs = embed(R23, n, 1, 2) * embed(R13, n, 0, 2) * embed(R12, n, 0, 1);
    return rel_norm((lhs - rhs).cwiseAbs().maxCoeff(), lhs.cwiseAbs().maxCoeff());
}

double face_ybe_residual(cplx v1, cplx v2, cplx v3, const HeightState& a0, const EllipticParams& p)
{
    const int n = p.n;
    double worst = 0.0, scale = 0.0;
    std::vector<std::vector<HeightState>> all;
    for (int s1 = 0; s1 < n; ++s1)
        for (int s2 = 0; s2 < n; ++s2)
            for (int s3 = 0; s3 < n; ++s3) {
                HeightState h1 = a0.up(s1), h2 = h1.up(s2), h3 = h2.up(s3);
                all.push_back({a0, h1, h2, h3});
            }
    std::vector<bool> done(all.size(), false);
    for (std::size_t s = 0; s < all.size(); ++s) {
        if (done[s]) continue;
        std::vector<std::vector<HeightState>> P;
        for (std::size_t t = 0; t < all.size(); ++t)
            if (all[t][3].same(all[s][3])) {
                P.push_back(all[t]);
                done[t] = true;
            }
        const int m = int(P.size());
        auto X = [&](int i, cplx v) {
            CMat M = CMat::Zero(m, m);
            for (int o = 0; o < m; ++o)
                for (int q = 0; q < m; ++q) {
                    bool ok = true;
                    for (int k = 0; k < 4; ++k)
                        if (k != i && !P[o][k].same(P[q][k])) ok = false;
                    if (!ok) continue;
                    M(q, o) = face_weight(P[o][i + 1], P[o][i], P[q][i], P[o][i - 1], v, p);
                }
            return M;
        };
        CMat L = X(1, v2 - v3) * X(2, v1 - v3) * X(1, v1 - v2);
        CMat R = X(2, v1 - v2) * X(1, v1 - v3) * X(2, v2 - v3);
        worst = std::max(worst, (L - R).cwiseAbs().maxCoeff());
        scale = std::max(scale, L.cwiseAbs().maxCoeff());
    }
    return rel_norm(worst, scale);
}

double vertex_face_residual(cplx v1, cplx v2, const HeightState& a, const RTensor& R, const EllipticParams& p)
{
    const int n = p.n;
    double worst = 0.0, scale = 0.0;
    for (int mu = 0; mu < n; ++mu) {
        HeightState d = a.up(mu);
        for (int nu = 0; nu < n; ++nu) {
            HeightState c = d.up(nu);
            CVec lhs = R.m * kron(intertwiner(v1, d, mu, p), intertwiner(v2, c, nu, p));
            CVec rhs = CVec::Zero(n * n);
            for (int mb = 0; mb < n; ++mb) {
                HeightState b = a.up(mb);
                auto mc = b.step_to(c);
                if (!mc) continue;
                rhs += kron(intertwiner(v1, c, *mc, p), intertwiner(v2, b, mb, p)) *
                       face_weight(c, d, b, a, v1 - v2, p);
            }
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
            scale = std::max(scale, rhs.cwiseAbs().maxCoeff());
        }
    }
    return rel_norm(worst, scale);
}

double dual_vertex_face_residual(cplx v1, cplx v2, const HeightState& a, const RTensor& R, const EllipticParams& p)
{
    auto Ts = [&](cplx v, const HeightState& h) { return dual_matrix(v, h, p); };
    WFn W = [&](const HeightState& c, const HeightState& d, const HeightState& b, const HeightState& aa, cplx v) {
        return face_weight(c, d, b, aa, v, p);
    };
    return dual_relation_residual(v1, v2, a, R, p.n, Ts, W);
}

double dual_inversion_residual(cplx v, const HeightState& a, const EllipticParams& p)
{
    CMat T = intertwiner_matrix(v, a, p);
    CMat Ts = dual_matrix(v, a, p);
    CMat I = CMat::Identity(p.n, p.n);
    return std::max((Ts * T - I).cwiseAbs().maxCoeff(), (T * Ts - I).cwiseAbs().maxCoeff());
}

double primed_relation_residual(cplx v1, cplx v2, const HeightState& a, const KernelContext& c)
{
    Primed pr = build_S_and_Wprime(v1 - v2, c);
    auto Ts = [&](cplx v, const HeightState& h) { return dual_matrix_prime(v, h, c); };
    WFn W = [&](const HeightState& cc, const HeightState& d, const HeightState& b, const HeightState& aa, cplx v) {
        return face_weight_prime(cc, d, b, aa, v, c);
    };
    return dual_relation_residual(v1, v2, a, pr.S, c.params.n, Ts, W);
}

double primed_dual_inversion_residual(cplx v, const HeightState& a, const KernelContext& c)
{
    const int n = c.params.n;
    CMat T(n, n);
    for (int nu = 0; nu < n; ++nu) T.col(nu) = intertwiner_prime(v, a, nu, c);
    CMat Ts = dual_matrix_prime(v, a, c);
    CMat I = CMat::Identity(n, n);
    return std::max((Ts * T - I).cwiseAbs().maxCoeff(), (T * Ts - I).cwiseAbs().maxCoeff());
}

} // namespace ebff::lattice
