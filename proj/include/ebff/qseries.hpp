#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace ebff {

using cplx = std::complex<double>;

namespace qseries {

struct EllipticParams {
    int n = 2;
    double r = 3.0;
    double x = 0.4;

    double eps() const;
    void validate() const;
};

EllipticParams make_params(int n, double r, double x);

struct TruncationPolicy {
    double tail_tol = 1e-16;
    // Bound on the length of each geometric run inside a product or sum.
    int max_terms = 4096;
    // A factor closer to zero than this counts as a vanishing factor.
    double pole_tol = 1e-13;

    void validate() const;
};

enum class Family { square, brace, dbl_square, dbl_brace };
enum class Level { r, r_minus_1, one };

struct BracketSpec {
    Family family = Family::square;
    Level level = Level::r;
};

const char* family_name(Family f);
const char* level_name(Level l);

// (z; q_1, ..., q_k)_oo, truncated at tail_tol.  Zero nomes gives 1 - z.
cplx poch(cplx z, const std::vector<cplx>& nomes, const TruncationPolicy& pol = {});
cplx poch(cplx z, std::initializer_list<double> nomes, const TruncationPolicy& pol = {});

// Same product, but also reports the smallest |factor| met.
cplx poch_tracked(cplx z, const std::vector<cplx>& nomes, const TruncationPolicy& pol,
                  double& min_factor);

// poch that throws PoleHit naming `what` when a factor vanishes.
cplx poch_nonzero(cplx z, const std::vector<cplx>& nomes, const TruncationPolicy& pol,
                  const char* what);

cplx theta_big(cplx z, cplx q, const TruncationPolicy& pol = {});
cplx theta_big_sum(cplx z, cplx q, int terms);

// sum_m exp(pi i (m+a)((m+a) tau + 2(v+b)))
cplx jacobi_theta(double a, double b, cplx v, cplx tau, const TruncationPolicy& pol = {});

double level_value(Level l, double r);
cplx bracket(cplx v, BracketSpec spec, const EllipticParams& p, const TruncationPolicy& pol = {});

inline cplx sq(cplx v, const EllipticParams& p, Level l = Level::r, const TruncationPolicy& pol = {})
{
    return bracket(v, {Family::square, l}, p, pol);
}
inline cplx br(cplx v, const EllipticParams& p, Level l = Level::r, const TruncationPolicy& pol = {})
{
    return bracket(v, {Family::brace, l}, p, pol);
}
inline cplx dsq(cplx v, const EllipticParams& p, Level l = Level::r, const TruncationPolicy& pol = {})
{
    return bracket(v, {Family::dbl_square, l}, p, pol);
}
inline cplx dbr(cplx v, const EllipticParams& p, Level l = Level::r, const TruncationPolicy& pol = {})
{
    return bracket(v, {Family::dbl_brace, l}, p, pol);
}

double x_number(double a, double x);
cplx bracket_factorial(int m, const EllipticParams& p, const TruncationPolicy& pol = {});

// x^a for complex a.
cplx xpow(double x, cplx a);

// (-z)^alpha on the fixed branch: Log z + i pi inside the closed unit disk,
// Log z - i pi outside.  This makes (-z)^a (-1/z)^a = 1.
cplx neg_pow(cplx z, cplx alpha);

// (-1)^a := exp(i pi a)
cplx neg_one_pow(double a);

const char* branch_description();

} // namespace qseries
} // namespace ebff
