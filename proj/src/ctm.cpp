#include "ebff/ctm.hpp"

#include "ebff/errors.hpp"

#include <cmath>
#include <functional>

namespace ebff::ctm {

using namespace qseries;

int VertexPath::at(int j) const
{
    if (j >= 1 && j <= depth()) return mu[j - 1];
    return ((sector + 1 - j) % n + n) % n;
}

VertexPath ground_vertex_path(int n, int sector, int J)
{
    VertexPath p{n, sector, {}};
    for (int j = 1; j <= J; ++j) p.mu.push_back(((sector + 1 - j) % n + n) % n);
    return p;
}

int H_v(int mu, int nu, int n)
{
    if (mu < 0 || mu >= n || nu < 0 || nu >= n) fail(Errc::RangeError, "H_v indices must lie in 0..n-1");
    if (nu < mu) return mu - nu - 1;
    return n - 1 + mu - nu;
}

Rational H_ctm_vertex(const VertexPath& path, int J)
{
    for (int j = J + 1; j <= path.depth(); ++j)
        if (path.mu[j - 1] != ((path.sector + 1 - j) % path.n + path.n) % path.n)
            fail(Errc::TailMismatch, "path departs from the ground tail beyond J");
    long s = 0;
    for (int j = 1; j <= J; ++j) s += long(j) * H_v(path.at(j), path.at(j + 1), path.n);
    return {s, path.n};
}

int H_f(const lattice::HeightState& a_pp, const lattice::HeightState& a_p, const lattice::HeightState& a)
{
    auto mu = a.step_to(a_p);
    auto nu = a_p.step_to(a_pp);
    if (!mu || !nu) fail(Errc::RangeError, "non-admissible height triple");
    return H_v(*nu, *mu, a.n());
}

Rational H_ctm_face(const lattice::FacePath& path, int J)
{
    long s = 0;
    for (int j = 1; j <= J; ++j) s += long(j) * H_f(path.height(j - 1), path.height(j), path.height(j + 1));
    return {s, path.a0.n()};
}

PartitionResult chi_partition(int sector, int J, const EllipticParams& p, double tol, long budget)
{
    const int n = p.n;
    // Weight per unit of sum j H_v is x^2.  Walk from depth J back to 1 so
    // every partial energy is a lower bound; prune once x^{2E} < tol.
    const double x2 = p.x * p.x;
    const long emax = long(std::floor(std::log(tol) / std::log(x2)));
    PartitionResult res;
    std::function<void(int, int, long)> walk = [&](int j, int next, long e) {
        if (j == 0) {
            if (++res.paths_kept > budget) fail(Errc::CombinatorialBlowup, "path budget exceeded");
            res.value += std::pow(x2, double(e));
            return;
        }
        for (int mu = 0; mu < n; ++mu) {
            long ee = e + long(j) * H_v(mu, next, n);
            if (ee > emax) continue;
            walk(j - 1, mu, ee);
        }
    };
    int tail = ((sector + 1 - (J + 1)) % n + n) % n;
    walk(J, tail, 0);
    return res;
}

double chi_closed_n2(double x)
{
    return poch(std::pow(x, 4), {std::pow(x, 4)}).real() / poch(x * x, {x * x}).real();
}

double beta1(double r) { return -std::sqrt((r - 1) / r); }
double beta2(double r) { return std::sqrt(r / (r - 1)); }
double beta0(double r) { return 1.0 / std::sqrt(r * (r - 1)); }

Eigen::MatrixXd fock_mode_matrix(int m, const EllipticParams& p, const freefield::BosonSpec& bs)
{
    const int N = bs.mode_count(p.n);
    const int n = p.n;
    const double x = p.x, r = p.r;
    const double c = x_number(r * m, x) / x_number((r - 1) * m, x);
    // H_F contains M[k][j'] B^k_{-m} B^{j'}_m
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    for (int j = 1; j <= n - 1; ++j)
        for (int k = 1; k <= j; ++k) {
            double co = c * std::pow(x, (2 * k - 2 * j - 1) * m);
            if (j >= N) fail(Errc::BadCommutators, "H_F needs B^n but the table has n-1 modes");
            M(k - 1, j - 1) += co;
            M(k - 1, j) -= co;
        }
    // [H_F, B^k_{-m}] = sum_{k'} B^{k'}_{-m} (M m C)[k'][k]
    return M * (double(m) * bs.gram(m, p));
}

FockTrace fock_trace(const FockSpec& spec, const EllipticParams& p, double G)
{
    const int n = p.n;
    FockTrace out;
    double osc = 1.0;
    for (int m = 1; m <= spec.modes_cutoff; ++m) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(fock_mode_matrix(m, p, spec.bosons));
        std::vector<double> nz;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            cplx lam = es.eigenvalues()(i);
            if (std::abs(lam) < 1e-9 * m) continue;
            if (std::abs(lam.imag()) > 1e-9 * m || lam.real() <= 0.0)
                fail(Errc::BadCommutators, "mode spectrum is not positive");
            nz.push_back(lam.real());
            osc /= 1.0 - std::pow(p.x, 2.0 * n * lam.real());
        }
        out.spectra.push_back(nz);
    }
    const double b1 = beta1(p.r), b2 = beta2(p.r);
    Eigen::VectorXd pv(n);
    for (int mu = 0; mu < n; ++mu) pv(mu) = b1 * spec.k[mu] + b2 * spec.l[mu];
    // (1/2) sum_j <omega_j, p><alpha_j, p>
    double h0 = 0.0;
    for (int j = 1; j <= n - 1; ++j) {
        Eigen::VectorXd om = Eigen::VectorXd::Zero(n), al = Eigen::VectorXd::Zero(n);
        for (int mu = 0; mu < j; ++mu) om(mu) = 1.0;
        al(j - 1) = 1.0;
        al(j) = -1.0;
        h0 += 0.5 * freefield::inner(om, pv, n) * freefield::inner(al, pv, n);
    }
    out.oscillator = osc;
    out.zero_mode = std::pow(p.x, 2.0 * n * h0);
    out.value = out.oscillator * out.zero_mode * G;
    double p2 = freefield::inner(pv, pv, n);
    double q = std::pow(p.x, 2 * n);
    out.closed = std::pow(p.x, n * p2) / std::pow(poch(q, {q}).real(), n - 1) * G;
    return out;
}

} // namespace ebff::ctm
