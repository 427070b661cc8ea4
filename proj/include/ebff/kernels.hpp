#pragma once

#include "ebff/qseries.hpp"

namespace ebff::kernels {

using qseries::EllipticParams;
using qseries::TruncationPolicy;

struct KernelContext {
    EllipticParams params;
    TruncationPolicy policy;
};

struct GR {
    cplx g;
    cplx r;
};

// {z} = (z; x^{2r}, x^{2n}),  {z}' = (z; x^{2r-2}, x^{2n})
cplx curly(cplx z, const KernelContext& c);
cplx curly_prime(cplx z, const KernelContext& c);

cplx g_j(int j, cplx z, const KernelContext& c);
cplx gstar_j(int j, cplx z, const KernelContext& c);
cplx rho_j(int j, cplx z, const KernelContext& c);

GR g_and_r(int j, cplx v, const KernelContext& c);
GR gstar_and_rstar(int j, cplx v, const KernelContext& c);
cplx chi_j(int j, cplx v, const KernelContext& c);
inline cplx chi(cplx v, const KernelContext& c) { return chi_j(1, v, c); }

struct FF {
    cplx f, h, fstar, hstar;
};
FF ff_kernels(cplx v, cplx w, const KernelContext& c);
cplx f_kernel(cplx v, cplx w, const KernelContext& c);
cplx h_kernel(cplx v, const KernelContext& c);
cplx fstar_kernel(cplx v, cplx w, const KernelContext& c);
cplx hstar_kernel(cplx v, const KernelContext& c);

// n-th root of -(x^{2r-2}; x^{2r-2}) on the fixed branch
cplx fprime_root(const KernelContext& c);
cplx f_prime(cplx v, const KernelContext& c);

cplx F_psipsi(cplx z, const KernelContext& c);

enum class BetaVariant { sigma_z, sigma_x };
cplx beta_m(int m, double u, const KernelContext& c, BetaVariant var = BetaVariant::sigma_z);

} // namespace ebff::kernels
