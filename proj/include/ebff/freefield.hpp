#pragma once

#include "ebff/expr.hpp"
#include "ebff/laurent.hpp"
#include "ebff/qseries.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ebff::freefield {

using qseries::EllipticParams;
using qseries::TruncationPolicy;

// Table of [B^j_m, B^k_{-m}] (m > 0) as expressions in x, r, n, m, j, k.
class BosonSpec {
public:
    struct Row {
        int j = -1; // -1 is the wildcard '*'
        int k = -1;
        expr::Expr formula;
    };

    static BosonSpec parse(const std::string& text, const std::string& source = "<string>");
    static BosonSpec load(const std::string& path);
    static BosonSpec default_spec();
    static const char* default_text();

    // Number of independent oscillator families B^1..B^N.
    int mode_count(int n) const;
    double commutator(int j, int k, int m, const EllipticParams& p) const;
    // C(m) = [B_m, B_{-m}] / m, indices 0-based.
    Eigen::MatrixXd gram(int m, const EllipticParams& p) const;

    const std::string& source() const { return source_; }
    const std::string& modes_convention() const { return modes_; }
    const std::string& zero_mode_pairing() const { return zero_; }

private:
    std::vector<Row> rows_;
    std::string modes_ = "n";
    std::string zero_ = "inner";
    std::string source_;
};

enum class OpKind { Identity, U_alpha, U_omega, V_alpha, V_omega, W_alpha };

struct VertexOpSymbol {
    OpKind kind = OpKind::Identity;
    int j = 1;
};

std::string op_name(const VertexOpSymbol& s);

// Coefficient vector of B^k_m z^{-m}/m in the exponent (m of either sign).
Eigen::VectorXd mode_coeff(const VertexOpSymbol& s, int m, const EllipticParams& p, int modes);
// Zero-mode charge, as coefficients on eps-bar_0..eps-bar_{n-1}.
Eigen::VectorXd zero_charge(const VertexOpSymbol& s, const EllipticParams& p);
double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int n);

enum class Branch { plain_z, minus_z, minus_one_r_z };
const char* branch_name(Branch b);
cplx branch_pow(Branch b, cplx z, double e, double r);

struct Contraction {
    LaurentSeries kernel; // in w = z'/z
    Branch branch = Branch::plain_z;
    double exponent = 0.0;
    std::vector<cplx> kappa; // kappa_1..kappa_N
};

// kernel is expanded in s = w / scale
Contraction contraction_series(const VertexOpSymbol& A, const VertexOpSymbol& B, int N,
                               const BosonSpec& spec, const EllipticParams& p, double scale = 1.0);

// Factor (c w; nomes)^{power}
struct PochTerm {
    int power = 1;
    double c = 1.0;
    std::vector<double> nomes;
};

LaurentSeries poch_log_series(double c, const std::vector<double>& nomes, int N);
LaurentSeries product_series(const std::vector<PochTerm>& terms, int N, double scale = 1.0);
cplx product_value(const std::vector<PochTerm>& terms, cplx w, const TruncationPolicy& pol = {});

struct OpePair {
    std::string label;
    VertexOpSymbol A, B;
    std::vector<PochTerm> kernel;
    double sign = 1.0;          // displayed sign in front of the prefactor
    Branch shown_branch;        // displayed base, (-z) or z
    double shown_exponent = 0.0;
};

std::vector<OpePair> registered_pairs(const EllipticParams& p);
const OpePair& find_pair(const std::vector<OpePair>& pairs, const VertexOpSymbol& A, const VertexOpSymbol& B);

struct OpeResult {
    double series_residual = 0.0;
    double prefactor_residual = 0.0;
    double residual() const { return std::max(series_residual, prefactor_residual); }
};

OpeResult ope_check(const OpePair& pair, int N, const BosonSpec& spec, const EllipticParams& p);
OpeResult ope_check(const VertexOpSymbol& A, const VertexOpSymbol& B, int N, const BosonSpec& spec,
                    const EllipticParams& p);

// max_k |coefficient of w^k in [V,U] kernel - [k+1]_x| over -N-2 <= k <= N
double delta_commutator_check(int j, int N, const BosonSpec& spec, const EllipticParams& p);

struct NilpotencyResult {
    double w_before_v = 0.0;   // |kernel| for W(v + r/2) V_{-alpha_{j+-1}}(v); none at n = 2
    double v_before_w = 0.0;   // |kernel| for V(v) W(v - r/2)
    double w_before_vw = 0.0;  // same with V_{omega_j}
    double vw_before_w = 0.0;
    double generic = 0.0;      // |kernel| at a generic point
    double max_zero() const;
};
NilpotencyResult nilpotency_check(const EllipticParams& p, const TruncationPolicy& pol = {});

struct ZeroModeState {
    Eigen::MatrixXd K, L, pi;
    cplx G_K, Gp_L;
    double delta_u = 0.0;
};
ZeroModeState zero_modes(const std::vector<double>& kbar, const std::vector<double>& lbar,
                         const EllipticParams& p);

} // namespace ebff::freefield
