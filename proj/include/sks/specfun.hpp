#pragma once

#include <memory>
#include <vector>

#include "sks/common.hpp"

namespace sks {

// Raised for arguments outside the supported parameter box.
struct UnsupportedDomain : std::domain_error {
    using std::domain_error::domain_error;
};

cplx complex_gamma(cplx s);
// principal-ish log Gamma: exp(log_gamma(s)) == Gamma(s); imaginary part is not branch-normalized
cplx log_gamma(cplx s);

// K_nu(y), y > 0, |Im nu| <= 100.
cplx kbessel(cplx nu, double y);

// Whittaker W_{kappa,mu}(x), x > 0, |kappa| <= 2, |Im mu| <= 100.
cplx whittaker_w(double kappa, cplx mu, double x);

// Same without the memo cache.
cplx whittaker_w_uncached(double kappa, cplx mu, double x);

void clear_specfun_cache();
std::size_t specfun_cache_size();

// W_{l,mu}(n, y) = y^{-l/4} W_{sgn(n) l/4, mu - 1/2}(4 pi |n| y) and its normalized variant.
struct WhittakerProfile {
    int weight2 = 1;  // l: twice the weight
    cplx mu;

    cplx plain(i64 n, double y) const;
    cplx normalized(i64 n, double y) const;
    // |n|^{mu-1} / Gamma(mu + sgn(n) l/4)
    cplx normalizer(i64 n) const;
};

// K_{iR}(x) on [x_lo, x_hi] by piecewise Chebyshev interpolation in log x; exact kbessel outside.
class KBesselTable {
public:
    KBesselTable(double R, double x_lo = 0.5, double x_hi = 160.0, double panel_width = 0.08, int degree = 20);
    double operator()(double x) const;
    double R() const { return R_; }
    double max_interp_error() const { return max_err_; }

private:
    double R_, lo_, hi_, width_;
    int degree_;
    std::vector<std::vector<double>> coeffs_;  // Chebyshev coefficients of e^x K_{iR}(x) per panel
    double max_err_ = 0.0;
};

}  // namespace sks
