#pragma once

#include "ebff/freefield.hpp"
#include "ebff/lattice.hpp"

#include <vector>

namespace ebff::ctm {

using qseries::EllipticParams;

struct VertexPath {
    int n = 2;
    int sector = 0;
    std::vector<int> mu; // mu_1..mu_J

    int depth() const { return int(mu.size()); }
    int at(int j) const; // tail rule mu_j = i + 1 - j beyond depth
};

VertexPath ground_vertex_path(int n, int sector, int J);

int H_v(int mu, int nu, int n);
// (1/n) sum_j j H_v(mu_j, mu_{j+1}); returned as the integer numerator and n.
struct Rational {
    long num = 0;
    long den = 1;
    double value() const { return double(num) / den; }
};
Rational H_ctm_vertex(const VertexPath& path, int J);

int H_f(const lattice::HeightState& a_pp, const lattice::HeightState& a_p, const lattice::HeightState& a);
Rational H_ctm_face(const lattice::FacePath& path, int J);

struct PartitionResult {
    double value = 0.0;
    long paths_kept = 0;
};
// sum over depth-J paths of x^{2n H_CTM}, pruning weights below tol.
PartitionResult chi_partition(int sector, int J, const EllipticParams& p, double tol = 1e-18,
                              long budget = 5'000'000);
double chi_closed_n2(double x);

struct FockSpec {
    std::vector<double> l, k; // eps-bar coordinates, zero sum
    int modes_cutoff = 20;
    freefield::BosonSpec bosons = freefield::BosonSpec::default_spec();
};

struct FockTrace {
    double oscillator = 0.0;
    double zero_mode = 0.0;
    double value = 0.0;  // oscillator * zero_mode * G
    double closed = 0.0; // x^{n|p|^2} / (x^{2n}; x^{2n})^{n-1} * G
    std::vector<std::vector<double>> spectra; // nonzero eigenvalues per mode
};

double beta1(double r);
double beta2(double r);
double beta0(double r);

// Mode-m matrix of H_F against the commutator Gram matrix.
Eigen::MatrixXd fock_mode_matrix(int m, const EllipticParams& p, const freefield::BosonSpec& bs);
FockTrace fock_trace(const FockSpec& spec, const EllipticParams& p, double G = 1.0);

} // namespace ebff::ctm
