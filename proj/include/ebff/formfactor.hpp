#pragma once

#include "ebff/kernels.hpp"

#include <array>
#include <string>
#include <vector>

namespace ebff::formfactor {

using kernels::KernelContext;
using qseries::EllipticParams;

enum class Op { sz, sx };
const char* op_name(Op op);

struct FF2Params {
    EllipticParams params{2, 3.0, 0.4};
    double u0 = 0.1;
    double u = 0.3;
    double l = 1.3;
    int sector = 0;
    std::vector<double> uj{0.2, 0.5};
    double Cz = 1.0;
    double Cx = 1.0;

    int m() const { return int(uj.size()) / 2; }
    void validate() const;
    void check_annulus() const;
};

struct ContourSpec {
    double radius = 0.0; // 0 selects x^2 (prod |z_j|)^{1/2m}
    int N = 512;
};

struct Annulus {
    double lo = 0.0, hi = 0.0;
};
Annulus annulus(const FF2Params& f);
double default_radius(const FF2Params& f);

struct FFValue {
    cplx value;
    double quad_error = 0.0;
    double radius = 0.0;
    int N = 0;
};

// Kinematic factors Z^{(i)}_m and X^{(i)}_m.
cplx Z_m(int i, double l, cplx u, double u0, const std::vector<double>& uj, const std::vector<cplx>& va,
         const KernelContext& c);
cplx X_m(int i, double l, cplx u, double u0, const std::vector<double>& uj, const std::vector<cplx>& va,
         const KernelContext& c);
cplx kinematic(Op op, int i, double l, cplx u, double u0, const std::vector<double>& uj,
               const std::vector<cplx>& va, const KernelContext& c);

// The zero-mode k-sum: direct truncation and its closed form.
cplx ksum_direct(int i, double l, cplx u, double u0, const std::vector<double>& uj,
                 const std::vector<cplx>& va, int K, const KernelContext& c);
cplx ksum_closed(int i, double l, cplx u, double u0, const std::vector<double>& uj,
                 const std::vector<cplx>& va, const KernelContext& c);
double zero_mode_sum_check(int i, double l, cplx u, double u0, const std::vector<double>& uj,
                           const std::vector<cplx>& va, int K, const KernelContext& c);

enum class Normalization {
    gathered, // phases gathered, f' rescaled away
    raw,      // (-z)^a powers, f' factors, (-1)^{m-1}
};

// Integrand of the (m-1)-fold contour integral at spectral points v_a.
cplx contour_integrand(Op op, const FF2Params& f, const std::vector<cplx>& va, const KernelContext& c,
                       Normalization norm = Normalization::gathered);
// Everything outside the integral, including beta_m.
cplx outer_prefactor(Op op, const FF2Params& f, const KernelContext& c, Normalization norm = Normalization::gathered);

FFValue F_face_2m(Op op, const FF2Params& f, const ContourSpec& cs, const KernelContext& c,
                  Normalization norm = Normalization::gathered);

cplx gathered_phase(int m, double r);

// Closed two-point forms; nu = +1 / -1.
FFValue F2_sigma_z(double u1, double u2, int nu1, int nu2, int i, const FF2Params& f, const KernelContext& c);
FFValue F2_sigma_x(double u1, double u2, int nu1, int nu2, int i, const FF2Params& f, const KernelContext& c);
FFValue F2(Op op, double u1, double u2, int nu1, int nu2, int i, const FF2Params& f, const KernelContext& c);

// prod_j theta[0; b_{nu_j}]((u_j - u0 + 1/2 + l - j + 1)/(2(r-1)); pi i/(2 eps (r-1)))
cplx theta_basis(const std::vector<int>& nu, double l, const FF2Params& f, const KernelContext& c);

std::vector<std::vector<int>> all_assignments(int count);
// Whether the assignment is allowed by the parity rule for op.
bool allowed(Op op, const std::vector<int>& nu, int m);

struct Extraction {
    std::vector<std::vector<int>> nus;
    std::vector<cplx> F;   // per assignment
    int rank = 0;
    double residual = 0.0; // relative least-squares residual
};
// Solve sum_nu F_nu basis_nu(l) = rhs(l) in the minimum-norm sense.
Extraction extract(const FF2Params& f, const std::vector<double>& ls, const std::vector<cplx>& rhs,
                   const KernelContext& c);

struct ConsistencyReport {
    cplx fitted;             // one complex scalar rhs -> lhs
    double ratio_spread = 0.0;
    double extraction_vs_closed = 0.0; // m = 1 only
    double l_independence = 0.0;
    double phase_modulus_error = 0.0;  // | |phase| - 1 |
    double phase_vs_claim = 0.0;       // |phase - e^{-i pi 3mr/(2(r-1))}|
    int points = 0;
};

// m = 1: rapidity grid of (u1, u2); m = 2: the rapidities in f.
ConsistencyReport vertex_face_consistency(Op op, const FF2Params& f, const std::vector<double>& l_samples,
                                          const std::vector<std::array<double, 2>>& grid,
                                          const ContourSpec& cs, const KernelContext& c);

struct SelectionReport {
    std::vector<std::vector<int>> nus;
    std::vector<double> magnitude;
    std::vector<bool> allowed;
    double forbidden_ratio = 0.0; // max forbidden / max overall
    bool structural_exact = false;
};
SelectionReport selection_rule_scan(Op op, const FF2Params& f, const std::vector<double>& l_samples,
                                    const ContourSpec& cs, const KernelContext& c);

} // namespace ebff::formfactor
