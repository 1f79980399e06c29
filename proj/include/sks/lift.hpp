#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sks/maass.hpp"
#include "sks/periods.hpp"
#include "sks/quadforms.hpp"
#include "sks/specfun.hpp"

namespace sks {

enum class LiftFlavor { plain, starred };
std::string to_string(LiftFlavor f);

// Constants in front of the orbit sums.
//   displayed: c(n) = 2 pi^{-1/2} n^{-3/4} S,       c(-n) = n^{-3/4} S',
//              c*(n) = 2^lambda pi^{-1/2} n^{-3/4} S*, c*(-n) = 2^{lambda-1} n^{-3/4} S*'
//   matched:   plain as displayed; both starred constants times 2^{5/2-lambda}, i.e.
//              c*(n) = 2^{5/2} pi^{-1/2} n^{-3/4} S*, c*(-n) = 2^{3/2} n^{-3/4} S*'.
//              This is the normalization under which F(-1/(4Nz)) (sqrt(N) z)^{-1/2} = e[-1/8] G(z)
//              holds numerically; with the displayed starred constants the two sides
//              differ by exactly that scalar.
// S sums chi(v1) M(v) over d_N(v) = n; S' sums chi(v1) Phi(z_v)/eps(v) over d_N(v) = -n;
// starred sums use tau_chi(w3) over disc(w) = +-n.
enum class LiftConstants { displayed, matched };
std::string to_string(LiftConstants c);
LiftConstants lift_constants_from_string(const std::string& s);

struct LiftOptions {
    LiftConstants constants = LiftConstants::displayed;
    PeriodOptions period;
    int threads = 1;
};

struct LiftTerm {
    cplx value{0.0, 0.0};
    double error = 0.0;
    std::size_t orbits = 0;
};

// chi is the character mod N with chi^2 the character of Phi.
// 2^{5/2 - lambda}
cplx starred_rescale(cplx lambda);

LiftTerm lift_coefficient(const MaassForm& f, const DirichletCharacter& chi, i64 n, LiftFlavor flavor,
                          const LiftOptions& opt = {}, PeriodCache* cache = nullptr);

struct HalfIntegralForm {
    i64 N = 1;                // level of the source; the lifted form lives on Gamma_0(4N)
    LiftFlavor flavor = LiftFlavor::plain;
    std::string char_label;   // chi_N for F, conj(chi) for G
    cplx mu;                  // (2 lambda + 1)/4
    cplx prefactor = 1.0;     // N^{-3/4} for G
    i64 nmax = 0;
    std::vector<cplx> c;      // c(n) at index n + nmax
    std::vector<double> err;
    std::string source_checksum;
    double tol = 0.0;
    std::string constants = "displayed";

    i64 level() const { return 4 * N; }
    cplx coeff(i64 n) const;
    cplx& coeff_ref(i64 n);
    double growth() const;  // max |c(n)| / sqrt|n|
};

HalfIntegralForm lift_form(const MaassForm& f, const DirichletCharacter& chi, i64 nmax, LiftFlavor flavor,
                           const LiftOptions& opt = {}, PeriodCache* cache = nullptr);

// Export: header lines key=value, then "n c_re c_im err".
std::string export_half_integral(const HalfIntegralForm& F);
HalfIntegralForm parse_half_integral(const std::string& text);

struct FEval {
    cplx value;
    double tail;      // estimate of the omitted terms |n| > M
    double envelope;  // sum of |terms|
};

// prefactor * sum_{0 < |n| <= M} c(n) W_{1,mu}(n, y) e[nx]. The tail uses the observed
// growth max |c(n)|/sqrt|n| and the exact first omitted Whittaker factors, continued
// geometrically; before the Whittaker turning point it is infinite.
FEval eval_half_integral(const HalfIntegralForm& F, cplx z, i64 M = -1);
double half_integral_tail(const HalfIntegralForm& F, cplx z, i64 M = -1);
cplx eval_F(const HalfIntegralForm& F, cplx z, i64 M = -1);
cplx eval_G(const HalfIntegralForm& G, cplx z, i64 M = -1);

cplx theta_series(cplx z);
// eps_d^{-1} (c/d) (cz + d)^{1/2}
cplx theta_multiplier_closed(const Mat2i& g, cplx z);
// Closed form, after asserting agreement with theta(gz)/theta(z) to 1e-10.
cplx theta_multiplier(const Mat2i& g, cplx z);

// Shimura's (c/d): the Kronecker symbol (c/|d|), negated when c < 0 and d < 0.
int shimura_symbol(i64 c, i64 d);

std::vector<Mat2i> gamma0_4N_generators(i64 N);

struct PointResidual {
    cplx z;
    std::string generator;
    double residual;
};

struct VerifyReport {
    double max_residual = 0.0;
    double floor = 0.0;
    std::vector<PointResidual> residuals;
    std::vector<cplx> accepted;
    std::vector<cplx> rejected;
};

struct SampleOptions {
    std::uint64_t seed = 1;
    int points = 10;
    double tol = 1e-3;  // tails must stay below 0.1 tol against the residual scale
    int max_attempts = 2000;
    double floor_fraction = 0.05;  // residual scale is max(|F(z)|, floor_fraction * max |F|)
    int threads = 1;
};

// Seeded points with Im z in [0.4, 1.5], |Re z| <= 0.5.
cplx sample_point(std::mt19937_64& rng);

VerifyReport verify_modularity(const HalfIntegralForm& F, const std::vector<Mat2i>& gens, const SampleOptions& opt);
VerifyReport verify_FG(const HalfIntegralForm& F, const HalfIntegralForm& G, const SampleOptions& opt);

// Eigenvalue of Delta_{1/2} on y^{-1/4} W_{+-1/4, mu-1/2}(4 pi |n| y) e[nx]: (mu - 1/4)(3/4 - mu),
// which is mu(1-mu) - 3/16.
cplx halfint_eigenvalue(cplx mu);

struct HalfIntResidual {
    double residual;        // against halfint_eigenvalue(mu)
    double plain_residual;  // against mu(1-mu)
    bool ill_conditioned;
};

// Five-point residual of Delta_{1/2} F = ev F with
// Delta_{1/2} = -y^2 (d_xx + d_yy) + (i y / 2)(d_x + i d_y), relative to |ev F|.
HalfIntResidual eigen_residual_halfint(const HalfIntegralForm& F, cplx z, double h, i64 M = -1);

// Dirichlet series over a coefficient table.
struct XiValue {
    cplx value;
    bool tail_warning;
};
XiValue xi_series(const std::function<cplx(i64)>& coeff, int side, cplx s, i64 T);
XiValue xi_completed(const std::function<cplx(i64)>& coeff, int side, cplx s, i64 T);
// weights tau_psi(+-n)
XiValue xi_twisted(const std::function<cplx(i64)>& coeff, const DirichletCharacter& psi, int side, cplx s, i64 T);

}  // namespace sks
