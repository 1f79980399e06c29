#pragma once

#include <functional>
#include <optional>
#include <string>

#include "sks/arith.hpp"
#include "sks/periods.hpp"

namespace sks {

struct Mat2c {
    cplx a, b, c, d;

    cplx det() const { return a * d - b * c; }
    Mat2c inverse() const;
    double max_norm() const;
    friend Mat2c operator*(const Mat2c& x, const Mat2c& y);
    friend Mat2c operator*(cplx s, const Mat2c& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
    friend Mat2c operator-(const Mat2c& x, const Mat2c& y) { return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d}; }
};

// Raised when an argument lies within 1e-6 of a Gamma or trigonometric pole.
struct PoleProximity : std::domain_error {
    using std::domain_error::domain_error;
};

// Kernel of the zeta functional equation:
// [sin pi s, 2^{lambda-1} pi Gamma(1-lambda)/Gamma(1-lambda/2)^2 cos(pi lambda/2);
//  Gamma(1-lambda/2)^2/(2^{lambda-1} pi Gamma(1-lambda)) sin(pi lambda/2), cos pi s]
Mat2c psi_kernel(cplx lambda, cplx s);

// [[e^{pi i s/2}, e^{-pi i s/2}], [e^{-pi i s/2}, e^{pi i s/2}]]
Mat2c gamma_matrix(cplx s);
// [[0, i^l], [1, 0]]
Mat2c sigma_matrix(int l);

struct Twist {
    i64 r;
    DirichletCharacter psi;
    DirichletCharacter chi;  // character mod N of the functional equation
};

// gamma(s) Xi_alpha(s) = prefactor * Sigma(l) * gamma(s') Xi_beta(s'), s' = 2 - 2 mu - s.
struct ConverseKernel {
    Mat2c gamma_s, sigma, gamma_dual;
    cplx dual_s;
    cplx prefactor;  // N^{s'}, or chi(r) C_{l,r} psi*(-N) r^{2mu-2} (N r^2)^{s'} when twisted

    // Xi_alpha(s) = kernel() Xi_beta(s')
    Mat2c kernel() const;
};

ConverseKernel converse_fe_kernel(int l, cplx mu, i64 N, cplx s, const std::optional<Twist>& twist = std::nullopt);

// eps_r chi_N(r) psi*(-4N); the s-dependent part r^{2s-3/2} pi^{1/2-2s} N^{s-3/2}
// Gamma(s + (lambda-1)/2) Gamma(s - lambda/2) is produced by factor().
struct TwistedFEConstant {
    cplx scalar;
    i64 N, r;
    std::string exponents() const;
    cplx factor(cplx lambda, cplx s) const;
};

TwistedFEConstant twisted_fe_constant(i64 N, i64 r, const DirichletCharacter& chi, const DirichletCharacter& psi,
                                      int l = 1);

// Rational symmetric matrix (w1, w2/2; w2/2, w3) / den.
struct RationalSym {
    i64 w1 = 0, w2 = 0, w3 = 0;
    i64 den = 1;
};

// Whether v* lies in (1/(N r)) V_Z, i.e. N r v* is half-integral.
bool in_dual_lattice(const RationalSym& vs, i64 N, i64 r);

struct FourierSatoResult {
    cplx value;
    i64 lattice_scale;  // L = K L_N
    i64 index;          // [V_Z : L]
    int retries;        // periodicity failures before success
};

// (1/[V_Z:L]) sum over L_N/L of weight(d_N(v)) chi(v_1) e[<v, v*>], with
// <v, v*> = tr(v w v* w^{-1}), w = (0, 1; -1, 0). Phases are accumulated exactly
// as integer counts per (d_N mod modulus, root-of-unity exponent).
FourierSatoResult fourier_sato_sum(i64 N, i64 weight_modulus, const std::function<cplx(i64)>& weight,
                                   const DirichletCharacter& chi, const RationalSym& vs, int threads = 1);

// Weight tau_psi(d_N(v)).
FourierSatoResult fourier_sato_transform(i64 N, i64 r, const DirichletCharacter& chi, const DirichletCharacter& psi,
                                         const RationalSym& vs, int threads = 1);

// eps_r / (2 r^{3/2} N^3) chi_N(r) psi*(-4N) tau_chi(w3) tau_{psi*}(disc w*), w* = N r v*.
cplx fourier_sato_closed_form(i64 N, i64 r, const DirichletCharacter& chi, const DirichletCharacter& psi,
                              const HalfIntegralPoint& w);

struct IdentityCheck {
    Mat2c zeta_side;     // zeta FE kernel rewritten through the tilde normalizations
    Mat2c converse_side; // converse-theorem kernel with l = 1, mu = (2 lambda + 1)/4, level 4N
    double residual;           // |zeta_side - e[-1/8] converse_side| / |converse_side| (max norms)
    double verbatim_residual;  // same without the eighth root of unity
};

IdentityCheck kernel_identity_check(cplx lambda, cplx s, i64 N = 1);

enum class ZetaFlavor { plain, starred, twisted, starred_twisted };
std::string to_string(ZetaFlavor f);

struct ZetaValue {
    cplx value;
    cplx last_term;
    bool tail_warning;  // last shell still large against the partial sum
};

struct ZetaRequest {
    ZetaFlavor flavor = ZetaFlavor::plain;
    int side = 1;  // +1 or -1
    cplx s{2.0, 0.0};
    i64 T = 10;
    DirichletCharacter chi = DirichletCharacter::principal(1);
    std::optional<DirichletCharacter> psi;  // twisted flavors, modulus r
    bool compute_missing = false;           // otherwise a cache miss throws
};

// Partial sum over orbits with |invariant| <= T, periods from the cache.
ZetaValue zeta_series_eval(const MaassForm& f, PeriodCache& cache, const ZetaRequest& req,
                           const PeriodOptions& opt = {});

}  // namespace sks
