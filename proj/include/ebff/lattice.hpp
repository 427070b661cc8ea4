#pragma once

#include "ebff/kernels.hpp"

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace ebff::lattice {

using kernels::KernelContext;
using qseries::EllipticParams;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// a-bar_mu = ref_mu + k_mu - mean(k).  ref has zero sum and fixes the
// generic (non-integral) part; k counts the admissible steps taken.
class HeightState {
public:
    HeightState() = default;
    explicit HeightState(std::vector<double> ref);
    static HeightState generic(int n, unsigned seed);

    int n() const { return int(ref_.size()); }
    double abar(int mu) const;
    double a(int mu, int nu) const { return abar(mu) - abar(nu); }
    HeightState up(int mu) const;   // a + eps-bar_mu
    HeightState down(int mu) const; // a - eps-bar_mu
    bool same(const HeightState& o) const;
    // mu with o = this + eps-bar_mu, if any
    std::optional<int> step_to(const HeightState& o) const;

private:
    std::vector<double> ref_;
    std::vector<int> k_;
};

// W[c d; b a | v], states clockwise from the SE corner a.
cplx face_weight(const HeightState& c, const HeightState& d, const HeightState& b,
                 const HeightState& a, cplx v, const EllipticParams& p,
                 const qseries::TruncationPolicy& pol = {});

// Components j of t(v)^h_{h - eps-bar_mu}.
CVec intertwiner(cplx v, const HeightState& h, int mu, const EllipticParams& p,
                 const qseries::TruncationPolicy& pol = {});

// T[mu][nu] = t^mu(v)^a_{a - eps-bar_nu}
CMat intertwiner_matrix(cplx v, const HeightState& a, const EllipticParams& p,
                        const qseries::TruncationPolicy& pol = {});
// Tstar[nu][mu] = t*_mu(v)^{a - eps-bar_nu}_a
CMat dual_matrix(cplx v, const HeightState& a, const EllipticParams& p,
                 const qseries::TruncationPolicy& pol = {});
CVec dual_intertwiner(cplx v, const HeightState& a, int nu, const EllipticParams& p,
                      const qseries::TruncationPolicy& pol = {});

// Index (i,k),(j,l) -> row i*n+k, column j*n+l.
struct RTensor {
    int n = 0;
    CMat m;
    cplx at(int i, int k, int j, int l) const { return m(i * n + k, j * n + l); }
};

RTensor build_R(cplx v, const KernelContext& c, const HeightState* construct_at = nullptr);

struct Primed {
    RTensor S;
    EllipticParams lowered; // r -> r-1
};
Primed build_S_and_Wprime(cplx v, const KernelContext& c);
cplx face_weight_prime(const HeightState& c, const HeightState& d, const HeightState& b,
                       const HeightState& a, cplx v, const KernelContext& ctx);
CVec intertwiner_prime(cplx v, const HeightState& h, int mu, const KernelContext& ctx);
CMat dual_matrix_prime(cplx v, const HeightState& a, const KernelContext& ctx);

cplx L_block(cplx u, const HeightState& ap0, const HeightState& ap1, const HeightState& a0,
             const HeightState& a1, const KernelContext& c);

// Face path a_0, a_1 = a_0 - eps-bar_{s_1}, ..., with ground tail
// s_j = i + 1 - j (mod n) beyond depth J.
struct FacePath {
    HeightState a0;
    int sector = 0;
    std::vector<int> steps; // s_1..s_J

    int depth() const { return int(steps.size()); }
    int step(int j) const; // any j >= 1, tail rule beyond depth
    HeightState height(int j) const;
};

FacePath ground_face_path(const HeightState& a0, int sector, int J, int n);

cplx tail_truncated(cplx u, const FacePath& path, const FacePath& path_p, int J, const KernelContext& c);

// Residual helpers (max-norm).
double vertex_ybe_residual(cplx v1, cplx v2, const KernelContext& c);
double face_ybe_residual(cplx v1, cplx v2, cplx v3, const HeightState& a0, const EllipticParams& p);
double vertex_face_residual(cplx v1, cplx v2, const HeightState& a, const RTensor& R,
                            const EllipticParams& p);
double dual_vertex_face_residual(cplx v1, cplx v2, const HeightState& a, const RTensor& R,
                                 const EllipticParams& p);
double dual_inversion_residual(cplx v, const HeightState& a, const EllipticParams& p);
double primed_relation_residual(cplx v1, cplx v2, const HeightState& a, const KernelContext& c);
double primed_dual_inversion_residual(cplx v, const HeightState& a, const KernelContext& c);

} // namespace ebff::lattice
