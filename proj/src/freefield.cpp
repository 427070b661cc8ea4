#include "ebff/freefield.hpp"

#include "ebff/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ebff::freefield {

using namespace qseries;
using std::numbers::pi;

namespace {

const char* kDefaultSpec =
    "# Oscillator table: one row per (j, k) pair, '*' matches any index.\n"
    "# Each formula gives [B^j_m, B^k_{-m}] for m > 0 in terms of x, r, n, m, j, k.\n"
    "# First matching row wins.\n"
    "modes n\n"
    "zero inner\n"
    "* * m*xn((r-1)*m)/xn(r*m)*(delta(j,k)*xn((n-1)*m)/xn(n*m) - "
    "(1-delta(j,k))*x^(sgn(j-k)*n*m)*xn(m)/xn(n*m))\n";

int parse_index(const std::string& tok, const std::string& src, int line)
{
    if (tok == "*") return -1;
    try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used == tok.size() && v >= 1) return v;
    } catch (const std::exception&) {
    }
    fail(Errc::ConfigError, src + ":" + std::to_string(line) + ": bad index '" + tok + "'");
}

} // namespace

const char* BosonSpec::default_text() { return kDefaultSpec; }

BosonSpec BosonSpec::parse(const std::string& text, const std::string& source)
{
    BosonSpec s;
    s.source_ = source;
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string a, b;
        if (!(ls >> a)) continue;
        if (a == "modes") {
            if (!(ls >> b) || (b != "n" && b != "n-1"))
                fail(Errc::ConfigError, source + ":" + std::to_string(ln) + ": modes must be 'n' or 'n-1'");
            s.modes_ = b;
            continue;
        }
        if (a == "zero") {
            if (!(ls >> b)) fail(Errc::ConfigError, source + ":" + std::to_string(ln) + ": zero needs a value");
            s.zero_ = b;
            continue;
        }
        if (!(ls >> b)) fail(Errc::ConfigError, source + ":" + std::to_string(ln) + ": expected 'j k formula'");
        std::string rest;
        std::getline(ls, rest);
        if (rest.find_first_not_of(" \t") == std::string::npos)
            fail(Errc::ConfigError, source + ":" + std::to_string(ln) + ": missing formula");
        Row r;
        r.j = parse_index(a, source, ln);
        r.k = parse_index(b, source, ln);
        r.formula = expr::Expr::parse(rest);
        s.rows_.push_back(std::move(r));
    }
    if (s.rows_.empty()) fail(Errc::SpecMissing, source + ": no commutator rows");
    return s;
}

BosonSpec BosonSpec::load(const std::string& path)
{
    std::ifstream f(path);
    if (!f) fail(Errc::ConfigError, "cannot open boson spec '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

BosonSpec BosonSpec::default_spec() { return parse(kDefaultSpec, "builtin"); }

int BosonSpec::mode_count(int n) const { return modes_ == "n" ? n : n - 1; }

double BosonSpec::commutator(int j, int k, int m, const EllipticParams& p) const
{
    for (const auto& row : rows_) {
        if ((row.j == -1 || row.j == j) && (row.k == -1 || row.k == k)) {
            std::map<std::string, double> vars{{"x", p.x}, {"r", p.r}, {"n", double(p.n)},
                                               {"m", double(m)}, {"j", double(j)}, {"k", double(k)}};
            return row.formula.eval(vars);
        }
    }
    fail(Errc::SpecMissing, "no commutator row for (" + std::to_string(j) + "," + std::to_string(k) + ")");
}

Eigen::MatrixXd BosonSpec::gram(int m, const EllipticParams& p) const
{
    const int N = mode_count(p.n);
    Eigen::MatrixXd C(N, N);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) C(a, b) = commutator(a + 1, b + 1, m, p) / m;
    return C;
}

std::string op_name(const VertexOpSymbol& s)
{
    std::string j = std::to_string(s.j);
    switch (s.kind) {
    case OpKind::Identity: return "1";
    case OpKind::U_alpha: return "U_{-alpha_" + j + "}";
    case OpKind::U_omega: return "U_{omega_" + j + "}";
    case OpKind::V_alpha: return "V_{-alpha_" + j + "}";
    case OpKind::V_omega: return "V_{omega_" + j + "}";
    case OpKind::W_alpha: return "W_{-alpha_" + j + "}";
    }
    return "?";
}

Eigen::VectorXd mode_coeff(const VertexOpSymbol& s, int m, const EllipticParams& p, int modes)
{
    Eigen::VectorXd a = Eigen::VectorXd::Zero(modes);
    const double x = p.x, r = p.r;
    const int am = std::abs(m);
    const double rhoA = x_number(r * am, x) / x_number((r - 1) * am, x);
    const double rhoO = x_number(am, x) / x_number((r - 1) * am, x);
    const int J = s.j - 1;
    auto root = [&](double scale) {
        if (J + 1 >= modes) fail(Errc::SpecMissing, "mode table too small for " + op_name(s));
        a(J) = scale * std::pow(x, -s.j * m);
        a(J + 1) = -scale * std::pow(x, -s.j * m);
    };
    auto weight = [&](double scale) {
        for (int k = 1; k <= s.j; ++k) a(k - 1) = scale * std::pow(x, (s.j - 2 * k + 1) * m);
    };
    switch (s.kind) {
    case OpKind::Identity: break;
    case OpKind::U_alpha: root(1.0); break;
    case OpKind::V_alpha: root(-rhoA); break;
    case OpKind::W_alpha: root(-rhoO); break;
    case OpKind::U_omega: weight(-1.0); break;
    case OpKind::V_omega: weight(rhoA); break;
    }
    return a;
}

Eigen::VectorXd zero_charge(const VertexOpSymbol& s, const EllipticParams& p)
{
    const int n = p.n;
    const double r = p.r;
    const double b1 = -std::sqrt((r - 1) / r), b2 = std::sqrt(r / (r - 1)), b0 = 1.0 / std::sqrt(r * (r - 1));
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n), omega = Eigen::VectorXd::Zero(n);
    if (s.kind != OpKind::Identity) {
        alpha(s.j - 1) = 1.0;
        alpha(s.j) = -1.0;
        for (int mu = 0; mu < s.j; ++mu) omega(mu) = 1.0;
    }
    switch (s.kind) {
    case OpKind::Identity: return Eigen::VectorXd::Zero(n);
    case OpKind::U_alpha: return -b1 * alpha;
    case OpKind::U_omega: return b1 * omega;
    case OpKind::V_alpha: return -b2 * alpha;
    case OpKind::V_omega: return b2 * omega;
    case OpKind::W_alpha: return -b0 * alpha;
    }
    return Eigen::VectorXd::Zero(n);
}

double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int n)
{
    return a.dot(b) - a.sum() * b.sum() / n;
}

const char* branch_name(Branch b)
{
    switch (b) {
    case Branch::plain_z: return "z";
    case Branch::minus_z: return "(-z)";
    case Branch::minus_one_r_z: return "((-1)^r z)";
    }
    return "?";
}

cplx branch_pow(Branch b, cplx z, double e, double r)
{
    switch (b) {
    case Branch::plain_z: return std::exp(e * std::log(z));
    case Branch::minus_z: return neg_pow(z, e);
    case Branch::minus_one_r_z: return neg_one_pow(r * e) * std::exp(e * std::log(z));
    }
    return 0.0;
}

namespace {

Branch branch_of(OpKind k)
{
    switch (k) {
    case OpKind::V_alpha:
    case OpKind::V_omega: return Branch::minus_z;
    case OpKind::W_alpha: return Branch::minus_one_r_z;
    default: return Branch::plain_z;
    }
}

} // namespace

Contraction contraction_series(const VertexOpSymbol& A, const VertexOpSymbol& B, int N,
                               const BosonSpec& spec, const EllipticParams& p, double scale)
{
    if (N < 1) fail(Errc::RangeError, "series order must be positive");
    const int modes = spec.mode_count(p.n);
    Contraction out;
    LaurentSeries g(0, N);
    for (int m = 1; m <= N; ++m) {
        Eigen::MatrixXd C = spec.gram(m, p);
        double k = -(1.0 / m) * mode_coeff(A, m, p, modes).dot(C * mode_coeff(B, -m, p, modes));
        out.kappa.push_back(k);
        g.set(m, k * std::pow(scale, m));
    }
    out.kernel = g.exp();
    out.branch = branch_of(A.kind);
    out.exponent = inner(zero_charge(A, p), zero_charge(B, p), p.n);
    return out;
}

LaurentSeries poch_log_series(double c, const std::vector<double>& nomes, int N)
{
    LaurentSeries s(0, N);
    for (int m = 1; m <= N; ++m) {
        double den = 1.0;
        for (double q : nomes) den *= 1.0 - std::pow(q, m);
        s.set(m, -std::pow(c, m) / (m * den));
    }
    return s;
}

LaurentSeries product_series(const std::vector<PochTerm>& terms, int N, double scale)
{
    LaurentSeries acc(0, N);
    for (const auto& t : terms) acc = acc + poch_log_series(t.c * scale, t.nomes, N) * cplx(t.power);
    return acc.exp();
}

cplx product_value(const std::vector<PochTerm>& terms, cplx w, const TruncationPolicy& pol)
{
    cplx acc = 1.0;
    for (const auto& t : terms) {
        std::vector<cplx> q(t.nomes.begin(), t.nomes.end());
        acc *= std::pow(poch(t.c * w, q, pol), double(t.power));
    }
    return acc;
}

std::vector<OpePair> registered_pairs(const EllipticParams& p)
{
    const double x = p.x, r = p.r;
    const int n = p.n;
    const double q2 = std::pow(x, 2 * r - 2), qn = std::pow(x, 2 * n);
    std::vector<OpePair> out;
    auto sym = [](OpKind k, int j) { return VertexOpSymbol{k, j}; };
    using K = OpKind;
    for (int j = 1; j <= n - 1; ++j) {
        const double w = j * double(n - j) / n;
        std::vector<PochTerm> gstar{{1, std::pow(x, 2 * n + 2 * r - j - 1), {q2, qn}},
                                    {1, std::pow(x, j - 1), {q2, qn}},
                                    {-1, std::pow(x, 2 * n - j - 1), {q2, qn}},
                                    {-1, std::pow(x, 2 * r + j - 1), {q2, qn}}};
        std::vector<PochTerm> k2{{1, std::pow(x, 2 * r - 1), {q2}}, {-1, 1.0 / x, {q2}}};
        std::vector<PochTerm> vava{{1, 1.0, {}}, {1, std::pow(x, -2), {q2}}, {-1, std::pow(x, 2 * r), {q2}}};
        std::vector<PochTerm> rho{{1, std::pow(x, 2 * j + 1), {x * x, qn}},
                                  {1, std::pow(x, 2 * n - 2 * j + 1), {x * x, qn}},
                                  {-1, x, {x * x, qn}},
                                  {-1, std::pow(x, 2 * n + 1), {x * x, qn}}};
        std::vector<PochTerm> lin{{1, 1.0, {}}};
        std::vector<PochTerm> vu{{-1, x, {}}, {-1, 1.0 / x, {}}};
        std::vector<PochTerm> kw{{1, std::pow(x, r), {q2}}, {-1, std::pow(x, r - 2), {q2}}};
        const double er = r / (r - 1), e1 = 1.0 / (r - 1);

        out.push_back({"V_{omega_1}V_{omega_j}", sym(K::V_omega, 1), sym(K::V_omega, j), gstar, 1, Branch::minus_z, er * (n - j) / n});
        out.push_back({"V_{omega_j}V_{omega_1}", sym(K::V_omega, j), sym(K::V_omega, 1), gstar, 1, Branch::minus_z, er * (n - j) / n});
        out.push_back({"V_{omega_j}V_{-alpha_j}", sym(K::V_omega, j), sym(K::V_alpha, j), k2, 1, Branch::minus_z, -er});
        out.push_back({"V_{-alpha_j}V_{omega_j}", sym(K::V_alpha, j), sym(K::V_omega, j), k2, 1, Branch::minus_z, -er});
        for (int d : {+1, -1})
            if (j + d >= 1 && j + d <= n - 1)
                out.push_back({"V_{-alpha_j}V_{-alpha_{j+-1}}", sym(K::V_alpha, j), sym(K::V_alpha, j + d), k2, 1, Branch::minus_z, -er});
        out.push_back({"V_{-alpha_j}V_{-alpha_j}", sym(K::V_alpha, j), sym(K::V_alpha, j), vava, 1, Branch::minus_z, 2 * er});
        out.push_back({"V_{omega_j}U_{omega_j}", sym(K::V_omega, j), sym(K::U_omega, j), rho, 1, Branch::minus_z, -w});
        out.push_back({"U_{omega_j}V_{omega_j}", sym(K::U_omega, j), sym(K::V_omega, j), rho, 1, Branch::plain_z, -w});
        out.push_back({"V_{omega_j}U_{-alpha_j}", sym(K::V_omega, j), sym(K::U_alpha, j), lin, -1, Branch::plain_z, 1});
        out.push_back({"U_{omega_j}V_{-alpha_j}", sym(K::U_omega, j), sym(K::V_alpha, j), lin, 1, Branch::plain_z, 1});
        for (int d : {+1, -1})
            if (j + d >= 1 && j + d <= n - 1)
                out.push_back({"V_{-alpha_j}U_{-alpha_{j+-1}}", sym(K::V_alpha, j), sym(K::U_alpha, j + d), lin, -1, Branch::plain_z, 1});
        out.push_back({"V_{-alpha_j}U_{-alpha_j}", sym(K::V_alpha, j), sym(K::U_alpha, j), vu, 1, Branch::plain_z, -2});
        out.push_back({"U_{-alpha_j}V_{-alpha_j}", sym(K::U_alpha, j), sym(K::V_alpha, j), vu, 1, Branch::plain_z, -2});
        for (int d : {+1, -1})
            if (j + d >= 1 && j + d <= n - 1) {
                out.push_back({"W_{-alpha_j}V_{-alpha_{j+-1}}", sym(K::W_alpha, j), sym(K::V_alpha, j + d), kw, -1, Branch::minus_z, -e1});
                out.push_back({"V_{-alpha_{j+-1}}W_{-alpha_j}", sym(K::V_alpha, j + d), sym(K::W_alpha, j), kw, 1, Branch::minus_z, -e1});
            }
        out.push_back({"V_{omega_j}W_{-alpha_j}", sym(K::V_omega, j), sym(K::W_alpha, j), kw, 1, Branch::minus_z, -e1});
        out.push_back({"W_{-alpha_j}V_{omega_j}", sym(K::W_alpha, j), sym(K::V_omega, j), kw, -1, Branch::minus_z, -e1});
    }
    return out;
}

const OpePair& find_pair(const std::vector<OpePair>& pairs, const VertexOpSymbol& A, const VertexOpSymbol& B)
{
    for (const auto& pr : pairs)
        if (pr.A.kind == A.kind && pr.A.j == A.j && pr.B.kind == B.kind && pr.B.j == B.j) return pr;
    fail(Errc::UnregisteredPair, op_name(A) + " " + op_name(B));
}

OpeResult ope_check(const OpePair& pair, int N, const BosonSpec& spec, const EllipticParams& p)
{
    // Compare in s = w / scale so the log coefficients stay O(1); exp of a
    // log series with growing coefficients cancels catastrophically.
    Contraction c = contraction_series(pair.A, pair.B, N, spec, p);
    double grow = 1.0;
    for (int m = 1; m <= N; ++m) grow = std::max(grow, std::pow(std::abs(c.kappa[m - 1]), 1.0 / m));
    for (const auto& t : pair.kernel) grow = std::max(grow, std::abs(t.c));
    const double scale = 1.0 / grow;
    c.kernel = contraction_series(pair.A, pair.B, N, spec, p, scale).kernel;
    LaurentSeries target = product_series(pair.kernel, N, scale);
    OpeResult res;
    res.series_residual = c.kernel.max_rel_diff(target, 0, N);
    const cplx z = std::polar(0.37, 0.4);
    cplx got = branch_pow(c.branch, z, c.exponent, p.r);
    cplx shown = pair.sign * branch_pow(pair.shown_branch, z, pair.shown_exponent, p.r);
    res.prefactor_residual = std::max(std::abs(got - shown) / std::abs(shown),
                                      std::abs(c.exponent - pair.shown_exponent));
    return res;
}

OpeResult ope_check(const VertexOpSymbol& A, const VertexOpSymbol& B, int N, const BosonSpec& spec,
                    const EllipticParams& p)
{
    auto pairs = registered_pairs(p);
    return ope_check(find_pair(pairs, A, B), N, spec, p);
}

double delta_commutator_check(int j, int N, const BosonSpec& spec, const EllipticParams& p)
{
    if (N < 2) fail(Errc::RangeError, "delta commutator check needs N >= 2");
    VertexOpSymbol V{OpKind::V_alpha, j}, U{OpKind::U_alpha, j};
    Contraction vu = contraction_series(V, U, N, spec, p);
    Contraction uv = contraction_series(U, V, N, spec, p);
    // V(z)U(z') expands in w = z'/z; U(z')V(z) expands in 1/w with the extra
    // w^{-2} from z'^{-2} = z^{-2} w^{-2}.
    LaurentSeries diff(-N - 2, N);
    for (int k = 0; k <= N; ++k) {
        diff.add_to(k, vu.kernel.coeff(k));
        diff.add_to(-2 - k, -uv.kernel.coeff(k));
    }
    double worst = 0.0;
    for (int k = -N - 2; k <= N; ++k) {
        double want = x_number(k + 1, p.x);
        worst = std::max(worst, std::abs(diff.coeff(k) - want) / std::max(1.0, std::abs(want)));
    }
    return worst;
}

double NilpotencyResult::max_zero() const
{
    return std::max({w_before_v, v_before_w, w_before_vw, vw_before_w});
}

NilpotencyResult nilpotency_check(const EllipticParams& p, const TruncationPolicy& pol)
{
    NilpotencyResult out;
    const auto pairs = registered_pairs(p);
    // W(v + r/2) V(v) and V(v) W(v - r/2) both sit at w = z'/z = x^{-r}.
    const cplx w = std::pow(p.x, -p.r);
    auto at = [&](const VertexOpSymbol& A, const VertexOpSymbol& B, cplx ww) {
        return std::abs(product_value(find_pair(pairs, A, B).kernel, ww, pol));
    };
    using K = OpKind;
    for (int j = 1; j <= p.n - 1; ++j) {
        const VertexOpSymbol W{K::W_alpha, j}, Vw{K::V_omega, j};
        out.w_before_vw = std::max(out.w_before_vw, at(W, Vw, w));
        out.vw_before_w = std::max(out.vw_before_w, at(Vw, W, w));
        out.generic = std::max(out.generic, at(W, Vw, cplx(0.3, 0.1)));
        for (int d : {+1, -1}) {
            if (j + d < 1 || j + d > p.n - 1) continue;
            const VertexOpSymbol Va{K::V_alpha, j + d};
            out.w_before_v = std::max(out.w_before_v, at(W, Va, w));
            out.v_before_w = std::max(out.v_before_w, at(Va, W, w));
        }
    }
    return out;
}

ZeroModeState zero_modes(const std::vector<double>& kbar, const std::vector<double>& lbar, const EllipticParams& p)
{
    const int n = p.n;
    ZeroModeState z;
    z.K = Eigen::MatrixXd(n, n);
    z.L = Eigen::MatrixXd(n, n);
    z.pi = Eigen::MatrixXd(n, n);
    z.G_K = 1.0;
    z.Gp_L = 1.0;
    for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
            z.K(mu, nu) = kbar[mu] - kbar[nu];
            z.L(mu, nu) = lbar[mu] - lbar[nu];
            z.pi(mu, nu) = p.r * z.L(mu, nu) - (p.r - 1) * z.K(mu, nu);
            if (mu < nu) {
                z.G_K *= sq(z.K(mu, nu), p, Level::r);
                z.Gp_L *= sq(z.L(mu, nu), p, Level::r_minus_1);
            }
        }
    z.delta_u = -(n - 1) / 2.0;
    return z;
}

} // namespace ebff::freefield
