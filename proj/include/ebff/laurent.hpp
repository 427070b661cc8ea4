#pragma once

#include <complex>
#include <vector>

namespace ebff {

using cplx = std::complex<double>;

// sum_{k=kmin}^{N} c_k w^k, truncated at order N.
class LaurentSeries {
public:
    LaurentSeries() = default;
    LaurentSeries(int kmin, int order);
    static LaurentSeries constant(cplx c, int order);
    static LaurentSeries from_coeffs(int kmin, int order, const std::vector<cplx>& c);

    int kmin() const { return kmin_; }
    int order() const { return order_; }
    cplx coeff(int k) const;
    void set(int k, cplx v);
    void add_to(int k, cplx v);

    LaurentSeries operator+(const LaurentSeries& o) const;
    LaurentSeries operator-(const LaurentSeries& o) const;
    LaurentSeries operator*(const LaurentSeries& o) const;
    LaurentSeries operator*(cplx s) const;
    LaurentSeries shifted(int s) const; // multiply by w^s

    // exp and log need kmin >= 0; log needs c_0 != 0.
    LaurentSeries exp() const;
    LaurentSeries log() const;

    double max_abs_diff(const LaurentSeries& o, int from, int to) const;
    double max_rel_diff(const LaurentSeries& o, int from, int to) const;

private:
    int kmin_ = 0;
    int order_ = 0;
    std::vector<cplx> c_;
};

} // namespace ebff
