#include "doctest.h"

#include "ebff/ctm.hpp"
#include "ebff/errors.hpp"

#include <cmath>
#include <random>

using namespace ebff;
using namespace ebff::ctm;
using qseries::EllipticParams;

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

int hv_mod(int mu, int nu, int n) { return ((mu - nu - 1) % n + n) % n; }

// Exhaustive sum over all n^J paths with the ground tail beyond J.
double chi_brute(int n, int sector, int J, double x)
{
    long total = 1;
    for (int j = 0; j < J; ++j) total *= n;
    double s = 0.0;
    std::vector<int> mu(J + 2);
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int j = 1; j <= J; ++j) {
            mu[j] = int(c % n);
            c /= n;
        }
        mu[J + 1] = ((sector - J) % n + n) % n;
        long e = 0;
        for (int j = 1; j <= J; ++j) e += long(j) * hv_mod(mu[j], mu[j + 1], n);
        s += std::pow(x, 2.0 * e);
    }
    return s;
}

} // namespace

TEST_CASE("H_v table")
{
    for (int n : {2, 3, 4})
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) CHECK(H_v(mu, nu, n) == hv_mod(mu, nu, n));
    CHECK(H_v(0, 0, 2) == 1);
    CHECK(H_v(1, 0, 2) == 0);
    CHECK(code_of([] { H_v(2, 0, 2); }) == Errc::RangeError);
    CHECK(code_of([] { H_v(0, -1, 3); }) == Errc::RangeError);
}

TEST_CASE("ground paths have zero corner energy")
{
    for (int n : {2, 3})
        for (int s = 0; s < n; ++s) {
            auto g = ground_vertex_path(n, s, 9);
            CHECK(H_ctm_vertex(g, 9).num == 0);
            auto a0 = lattice::HeightState::generic(n, 3u);
            CHECK(H_ctm_face(lattice::ground_face_path(a0, s, 9, n), 9).num == 0);
        }
}

TEST_CASE("corner energy of an excited path")
{
    auto g = ground_vertex_path(2, 0, 6);
    g.mu[1] = 1 - g.mu[1]; // flip mu_2
    // H(mu1, mu2) and H(mu2, mu3) both become 1
    long want = 1 * hv_mod(g.mu[0], g.mu[1], 2) + 2 * hv_mod(g.mu[1], g.mu[2], 2);
    CHECK(want == 3);
    auto h = H_ctm_vertex(g, 6);
    CHECK(h.num == want);
    CHECK(h.den == 2);
    CHECK(h.value() == doctest::Approx(1.5));

    auto bad = ground_vertex_path(2, 0, 6);
    bad.mu[5] = 1 - bad.mu[5];
    CHECK(code_of([&] { H_ctm_vertex(bad, 4); }) == Errc::TailMismatch);
}

TEST_CASE("face energy matches the vertex energy along the same steps")
{
    std::mt19937 rng(4);
    for (int n : {2, 3}) {
        auto a0 = lattice::HeightState::generic(n, 8u);
        for (int t = 0; t < 10; ++t) {
            lattice::FacePath fp{a0, 0, {}};
            for (int j = 0; j < 6; ++j) fp.steps.push_back(int(rng() % n));
            long e = 0;
            for (int j = 1; j <= 6; ++j) e += long(j) * hv_mod(fp.step(j), fp.step(j + 1), n);
            CHECK(H_ctm_face(fp, 6).num == e);
        }
    }
    auto a = lattice::HeightState::generic(2, 1u);
    CHECK(code_of([&] { H_f(a, a, a); }) == Errc::RangeError);
}

TEST_CASE("chi partition: n = 2 closed form")
{
    for (double x : {0.2, 0.3}) {
        EllipticParams p{2, 3.0, x};
        for (int s : {0, 1}) {
            auto res = chi_partition(s, 14, p);
            CHECK(std::abs(res.value / chi_closed_n2(x) - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("chi partition against exhaustive enumeration")
{
    for (int n : {2, 3}) {
        EllipticParams p{n, 3.0, 0.5};
        const int J = n == 2 ? 12 : 8;
        for (int s = 0; s < n; ++s) {
            auto res = chi_partition(s, J, p, 1e-300);
            CHECK(std::abs(res.value / chi_brute(n, s, J, p.x) - 1.0) < 1e-13);
        }
    }
    EllipticParams p{3, 3.0, 0.9};
    CHECK(code_of([&] { chi_partition(0, 20, p, 1e-30, 1000); }) == Errc::CombinatorialBlowup);
}

TEST_CASE("Fock trace: mode spectrum and closed form")
{
    for (int n : {2, 3}) {
        EllipticParams p{n, 2.7, 0.35};
        FockSpec spec;
        spec.modes_cutoff = 30;
        spec.l.assign(n, 0.0);
        spec.k.assign(n, 0.0);
        spec.l[0] = 0.4;
        spec.l[1] = -0.4;
        spec.k[0] = -0.15;
        spec.k[n - 1] += 0.15;
        auto t = fock_trace(spec, p, 2.0);
        for (int m = 1; m <= 30; ++m) {
            const auto& ev = t.spectra[m - 1];
            CHECK(int(ev.size()) == n - 1);
            for (double e : ev) CHECK(std::abs(e - m) < 1e-9 * m);
        }
        CHECK(std::abs(t.value / t.closed - 1.0) < 1e-10);
    }
}

TEST_CASE("Fock trace needs all n oscillator families")
{
    auto bs = freefield::BosonSpec::parse("modes n-1\nzero inner\n* * m\n");
    EllipticParams p{2, 2.7, 0.35};
    FockSpec spec;
    spec.bosons = bs;
    spec.l = {0.1, -0.1};
    spec.k = {0.0, 0.0};
    CHECK(code_of([&] { fock_trace(spec, p); }) == Errc::BadCommutators);
}
