#include "ebff/laurent.hpp"

#include "ebff/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ebff {

LaurentSeries::LaurentSeries(int kmin, int order) : kmin_(kmin), order_(order)
{
    if (order < kmin) fail(Errc::RangeError, "series order below kmin");
    c_.assign(order - kmin + 1, 0.0);
}

LaurentSeries LaurentSeries::constant(cplx c, int order)
{
    LaurentSeries s(0, order);
    s.c_[0] = c;
    return s;
}

LaurentSeries LaurentSeries::from_coeffs(int kmin, int order, const std::vector<cplx>& c)
{
    LaurentSeries s(kmin, order);
    for (std::size_t i = 0; i < c.size() && kmin + int(i) <= order; ++i) s.c_[i] = c[i];
    return s;
}

cplx LaurentSeries::coeff(int k) const
{
    if (k < kmin_ || k > order_) return 0.0;
    return c_[k - kmin_];
}

void LaurentSeries::set(int k, cplx v)
{
    if (k < kmin_ || k > order_) fail(Errc::RangeError, "coefficient index out of range");
    c_[k - kmin_] = v;
}

void LaurentSeries::add_to(int k, cplx v)
{
    if (k < kmin_ || k > order_) return;
    c_[k - kmin_] += v;
}

LaurentSeries LaurentSeries::operator+(const LaurentSeries& o) const
{
    LaurentSeries s(std::min(kmin_, o.kmin_), std::min(order_, o.order_));
    for (int k = s.kmin_; k <= s.order_; ++k) s.set(k, coeff(k) + o.coeff(k));
    return s;
}

LaurentSeries LaurentSeries::operator-(const LaurentSeries& o) const { return *this + o * cplx(-1.0); }

LaurentSeries LaurentSeries::operator*(const LaurentSeries& o) const
{
    // Valid through min(order + o.kmin, o.order + kmin).
    int top = std::min(order_ + o.kmin_, o.order_ + kmin_);
    LaurentSeries s(kmin_ + o.kmin_, top);
    for (int i = kmin_; i <= order_; ++i)
        for (int j = o.kmin_; j <= o.order_ && i + j <= top; ++j) s.add_to(i + j, coeff(i) * o.coeff(j));
    return s;
}

LaurentSeries LaurentSeries::operator*(cplx v) const
{
    LaurentSeries s = *this;
    for (auto& c : s.c_) c *= v;
    return s;
}

LaurentSeries LaurentSeries::shifted(int sh) const
{
    LaurentSeries s(kmin_ + sh, order_ + sh);
    s.c_ = c_;
    return s;
}

LaurentSeries LaurentSeries::exp() const
{
    if (kmin_ < 0) fail(Errc::RangeError, "exp needs a power series");
    const int N = order_;
    // f = exp(g):  k f_k = sum_{j=1}^k j g_j f_{k-j}
    LaurentSeries f(0, N);
    f.c_[0] = std::exp(coeff(0));
    for (int k = 1; k <= N; ++k) {
        cplx acc = 0.0;
        for (int j = 1; j <= k; ++j) acc += double(j) * coeff(j) * f.c_[k - j];
        f.c_[k] = acc / double(k);
    }
    return f;
}

LaurentSeries LaurentSeries::log() const
{
    if (kmin_ < 0) fail(Errc::RangeError, "log needs a power series");
    cplx a0 = coeff(0);
    if (a0 == 0.0) fail(Errc::ZeroArgument, "log of a series with zero constant term");
    const int N = order_;
    // g = log f:  k g_k f_0 = k f_k - sum_{j=1}^{k-1} j g_j f_{k-j}
    LaurentSeries g(0, N);
    g.c_[0] = std::log(a0);
    for (int k = 1; k <= N; ++k) {
        cplx acc = double(k) * coeff(k);
        for (int j = 1; j < k; ++j) acc -= double(j) * g.c_[j] * coeff(k - j);
        g.c_[k] = acc / (double(k) * a0);
    }
    return g;
}

double LaurentSeries::max_abs_diff(const LaurentSeries& o, int from, int to) const
{
    double m = 0.0;
    for (int k = from; k <= to; ++k) m = std::max(m, std::abs(coeff(k) - o.coeff(k)));
    return m;
}

double LaurentSeries::max_rel_diff(const LaurentSeries& o, int from, int to) const
{
    double m = 0.0;
    for (int k = from; k <= to; ++k) {
        double s = std::max(1.0, std::abs(o.coeff(k)));
        m = std::max(m, std::abs(coeff(k) - o.coeff(k)) / s);
    }
    return m;
}

} // namespace ebff
