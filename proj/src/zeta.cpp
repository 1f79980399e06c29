#include "sks/zeta.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "sks/specfun.hpp"

namespace sks {

Mat2c Mat2c::inverse() const {
    cplx dt = det();
    if (std::abs(dt) == 0.0) throw std::domain_error("singular 2x2 matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
}

double Mat2c::max_norm() const { return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)}); }

Mat2c operator*(const Mat2c& x, const Mat2c& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

namespace {

constexpr double kPoleTol = 1e-6;

// Gamma(z) with rejection near the poles z = 0, -1, -2, ...
cplx gamma_checked(cplx z, const char* what) {
    double k = std::round(z.real());
    if (k <= 0 && std::abs(z - k) < kPoleTol) throw PoleProximity(std::string("Gamma pole near ") + what);
    return complex_gamma(z);
}

// reject s near an integer, where sin(pi s) vanishes
void check_not_integer(cplx s, const char* what) {
    if (std::abs(s - std::round(s.real())) < kPoleTol) throw PoleProximity(std::string("integer argument in ") + what);
}

cplx cpow(double base, cplx ex) { return std::exp(ex * std::log(base)); }

}  // namespace

Mat2c psi_kernel(cplx lambda, cplx s) {
    cplx g1 = gamma_checked(1.0 - lambda, "1 - lambda");
    cplx g2 = gamma_checked(1.0 - lambda / 2.0, "1 - lambda/2");
    cplx p = cpow(2.0, lambda - 1.0) * kPi;
    cplx hl = kPi * lambda / 2.0;
    return {std::sin(kPi * s), p * g1 / (g2 * g2) * std::cos(hl), g2 * g2 / (p * g1) * std::sin(hl),
            std::cos(kPi * s)};
}

Mat2c gamma_matrix(cplx s) {
    cplx p = std::exp(kI * kPi * s / 2.0), m = std::exp(-kI * kPi * s / 2.0);
    return {p, m, m, p};
}

Mat2c sigma_matrix(int l) {
    static const cplx powers[4] = {1.0, kI, -1.0, -kI};
    return {0.0, powers[((l % 4) + 4) % 4], 1.0, 0.0};
}

Mat2c ConverseKernel::kernel() const { return prefactor * (gamma_s.inverse() * sigma * gamma_dual); }

ConverseKernel converse_fe_kernel(int l, cplx mu, i64 N, cplx s, const std::optional<Twist>& twist) {
    if (N < 1) throw std::invalid_argument("level must be positive");
    check_not_integer(s, "gamma(s)");
    ConverseKernel k;
    k.dual_s = 2.0 - 2.0 * mu - s;
    k.gamma_s = gamma_matrix(s);
    k.sigma = sigma_matrix(l);
    k.gamma_dual = gamma_matrix(k.dual_s);
    double Nd = static_cast<double>(N);
    if (!twist) {
        k.prefactor = cpow(Nd, k.dual_s);
        return k;
    }
    i64 r = twist->r;
    if (std::gcd(N, r) != 1) throw std::invalid_argument("twist prime must be coprime to the level");
    if (twist->psi.modulus() != r) throw std::invalid_argument("psi must have modulus r");
    if (twist->chi.modulus() != N) throw std::invalid_argument("chi must have modulus N");
    double rd = static_cast<double>(r);
    k.prefactor = twist->chi(r) * c_lr(l, r) * psi_star(twist->psi, l)(-N) * cpow(rd, 2.0 * mu - 2.0) *
                  cpow(Nd * rd * rd, k.dual_s);
    return k;
}

std::string TwistedFEConstant::exponents() const {
    return "r^(2s-3/2) pi^(1/2-2s) N^(s-3/2) Gamma(s+(lambda-1)/2) Gamma(s-lambda/2)";
}

cplx TwistedFEConstant::factor(cplx lambda, cplx s) const {
    return scalar * cpow(static_cast<double>(r), 2.0 * s - 1.5) * cpow(kPi, 0.5 - 2.0 * s) *
           cpow(static_cast<double>(N), s - 1.5) * gamma_checked(s + (lambda - 1.0) / 2.0, "s + (lambda-1)/2") *
           gamma_checked(s - lambda / 2.0, "s - lambda/2");
}

TwistedFEConstant twisted_fe_constant(i64 N, i64 r, const DirichletCharacter& chi, const DirichletCharacter& psi,
                                      int l) {
    if (std::gcd(N, r) != 1) throw std::invalid_argument("twisted_fe_constant: gcd(N, r) > 1");
    if (!is_prime(r) || r == 2) throw std::invalid_argument("twisted_fe_constant: r must be an odd prime");
    if (psi.modulus() != r || chi.modulus() != N) throw std::invalid_argument("twisted_fe_constant: bad moduli");
    TwistedFEConstant c;
    c.N = N;
    c.r = r;
    c.scalar = eps_d(r) * chi_N(chi, N)(r) * psi_star(psi, l)(-4 * N);
    return c;
}

bool in_dual_lattice(const RationalSym& vs, i64 N, i64 r) {
    i64 m = N * r;
    return (vs.w1 * m) % vs.den == 0 && (vs.w2 * m) % vs.den == 0 && (vs.w3 * m) % vs.den == 0;
}

FourierSatoResult fourier_sato_sum(i64 N, i64 wm, const std::function<cplx(i64)>& weight,
                                   const DirichletCharacter& chi, const RationalSym& v, int threads) {
    if (chi.modulus() != N) throw std::invalid_argument("fourier_sato: chi must have modulus N");
    if (v.den <= 0 || wm <= 0) throw std::invalid_argument("fourier_sato: positive denominators required");
    RationalSym vs = v;
    i64 g = std::gcd(std::gcd(vs.w1, vs.w2), std::gcd(vs.w3, vs.den));
    vs.w1 /= g;
    vs.w2 /= g;
    vs.w3 /= g;
    vs.den /= g;
    const i64 den = vs.den;

    // <v, v*> = (v1 w3 + N v3 w1 - N v2 w2) / den for v = (v1, N v2; N v2, N v3)
    auto pairing = [&](i64 a1, i64 a2, i64 a3) {
        return pos_mod(pos_mod(a1 * vs.w3, den) + pos_mod(N * a3 * vs.w1, den) - pos_mod(N * a2 * vs.w2, den), den);
    };
    auto dn = [&](i64 a1, i64 a2, i64 a3) { return pos_mod(N * a2 * a2 - a1 * a3, wm); };

    i64 g2 = std::gcd(den, std::gcd(vs.w3, std::gcd(N * vs.w1, N * vs.w2)));
    i64 K = std::lcm(std::lcm(N, wm), den / g2);

    // L-periodicity of v -> chi(v1) weight(d_N(v)) e[<v, v*>] on a grid of sample points
    auto periodic = [&](i64 K) {
        for (i64 a1 = 0; a1 < 3; ++a1)
            for (i64 a2 = 0; a2 < 3; ++a2)
                for (i64 a3 = 0; a3 < 3; ++a3) {
                    i64 base[3] = {a1, a2, a3};
                    for (int j = 0; j < 3; ++j) {
                        i64 sh[3] = {a1, a2, a3};
                        sh[j] += K;
                        if (chi.exponent(base[0]) != chi.exponent(sh[0])) return false;
                        if (dn(base[0], base[1], base[2]) != dn(sh[0], sh[1], sh[2])) return false;
                        if (pairing(base[0], base[1], base[2]) != pairing(sh[0], sh[1], sh[2])) return false;
                    }
                }
        return true;
    };
    int retries = 0;
    while (!periodic(K)) {
        if (++retries > 6) throw std::runtime_error("fourier_sato: no periodicity lattice found");
        K *= 2;
    }

    const i64 ochi = chi.order();
    const i64 O = std::lcm(ochi, den);
    const i64 sc = O / ochi, sp = O / den;
    std::vector<i64> chi_exp(static_cast<std::size_t>(K), -1);
    for (i64 a = 0; a < K; ++a)
        if (auto k = chi.exponent(a)) chi_exp[static_cast<std::size_t>(a)] = *k;

    const auto cells = static_cast<std::size_t>(wm * O);
    if (threads < 1) threads = 1;
    threads = static_cast<int>(std::min<i64>(threads, K));
    std::vector<std::vector<i64>> counts(static_cast<std::size_t>(threads), std::vector<i64>(cells, 0));
    auto work = [&](int t) {
        auto& c = counts[static_cast<std::size_t>(t)];
        for (i64 a1 = t; a1 < K; a1 += threads) {
            i64 ce = chi_exp[static_cast<std::size_t>(a1)];
            if (ce < 0) continue;
            i64 e1 = pos_mod(a1 * vs.w3, den);
            for (i64 a2 = 0; a2 < K; ++a2) {
                i64 e2 = pos_mod(e1 - N * a2 * vs.w2, den);
                i64 q2 = N * a2 * a2;
                for (i64 a3 = 0; a3 < K; ++a3) {
                    i64 ph = pos_mod(e2 + N * a3 * vs.w1, den);
                    i64 ex = (ce * sc + ph * sp) % O;
                    i64 d = pos_mod(q2 - a1 * a3, wm);
                    ++c[static_cast<std::size_t>(d * O + ex)];
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& t : pool) t.join();
    std::vector<i64> total(cells, 0);
    for (const auto& c : counts)
        for (std::size_t i = 0; i < cells; ++i) total[i] += c[i];

    // basis of L in the (A, B, C) coordinates of V_Z: K (1, 0, 0), K (0, 2N, 0), K (0, 0, N)
    i64 basis[3][3] = {{K, 0, 0}, {0, 2 * N * K, 0}, {0, 0, N * K}};
    i64 index = basis[0][0] * (basis[1][1] * basis[2][2] - basis[1][2] * basis[2][1]) -
                basis[0][1] * (basis[1][0] * basis[2][2] - basis[1][2] * basis[2][0]) +
                basis[0][2] * (basis[1][0] * basis[2][1] - basis[1][1] * basis[2][0]);

    cplx sum = 0;
    for (i64 d = 0; d < wm; ++d) {
        cplx bucket = 0;
        for (i64 ex = 0; ex < O; ++ex) {
            i64 n = total[static_cast<std::size_t>(d * O + ex)];
            if (n) bucket += static_cast<double>(n) * e_frac(ex, O);
        }
        if (bucket != 0.0) sum += weight(d) * bucket;
    }
    return {sum / static_cast<double>(index), K, index, retries};
}

FourierSatoResult fourier_sato_transform(i64 N, i64 r, const DirichletCharacter& chi, const DirichletCharacter& psi,
                                         const RationalSym& vs, int threads) {
    if (std::gcd(N, r) != 1) throw std::invalid_argument("fourier_sato: gcd(N, r) > 1");
    if (psi.modulus() != r) throw std::invalid_argument("fourier_sato: psi must have modulus r");
    std::vector<cplx> tau(static_cast<std::size_t>(r));
    for (i64 d = 0; d < r; ++d) tau[static_cast<std::size_t>(d)] = gauss_sum(psi, d);
    return fourier_sato_sum(
        N, r, [&](i64 d) { return tau[static_cast<std::size_t>(d)]; }, chi, vs, threads);
}

cplx fourier_sato_closed_form(i64 N, i64 r, const DirichletCharacter& chi, const DirichletCharacter& psi,
                              const HalfIntegralPoint& w) {
    auto ps = psi_star(psi, 1);
    double rd = static_cast<double>(r), Nd = static_cast<double>(N);
    return eps_d(r) / (2.0 * rd * std::sqrt(rd) * Nd * Nd * Nd) * chi_N(chi, N)(r) * ps(-4 * N) *
           gauss_sum(chi, w.w3) * gauss_sum(ps, w.disc());
}

IdentityCheck kernel_identity_check(cplx lambda, cplx s, i64 N) {
    const double Nd = static_cast<double>(N);

    // zeta side: functional equation of the zeta functions at s' = 3/2 - lambda/2 - s,
    // conjugated by the tilde normalizations
    cplx sp = 1.5 - lambda / 2.0 - s;
    cplx P = cpow(kPi, 0.5 - 2.0 * sp) * cpow(Nd, sp - 1.5) * gamma_checked(sp + (lambda - 1.0) / 2.0, "s'+(l-1)/2") *
             gamma_checked(sp - lambda / 2.0, "s'-l/2");
    Mat2c psi = psi_kernel(lambda, sp);
    cplx gl = gamma_checked(lambda, "lambda"), gh = gamma_checked(lambda / 2.0, "lambda/2");
    cplx ratio = gl / (gh * gh);
    Mat2c D{cpow(2.0, 2.0 - lambda) * ratio, 0.0, 0.0, 1.0};
    cplx np = cpow(Nd, -1.5 + lambda / 2.0);
    Mat2c Dstar_inv{1.0 / (std::sqrt(2.0) * np * ratio), 0.0, 0.0, 1.0 / (cpow(2.0, lambda - 1.5) * np)};
    Mat2c zeta_side = D * (P * psi) * Dstar_inv;

    // converse side: l = 1, mu = (2 lambda + 1)/4, level 4N, completed L-functions stripped
    cplx mu = (2.0 * lambda + 1.0) / 4.0;
    auto ck = converse_fe_kernel(1, mu, 4 * N, s);
    cplx complete_s = cpow(2.0 * kPi, -s) * gamma_checked(s, "s");
    cplx complete_dual = cpow(2.0 * kPi, -ck.dual_s) * gamma_checked(ck.dual_s, "2-2mu-s");
    Mat2c converse_side = (complete_dual / complete_s) * ck.kernel();

    IdentityCheck out{zeta_side, converse_side, 0.0, 0.0};
    double scale = converse_side.max_norm();
    out.residual = (zeta_side - e_frac(-1, 8) * converse_side).max_norm() / scale;
    out.verbatim_residual = (zeta_side - converse_side).max_norm() / scale;
    return out;
}

std::string to_string(ZetaFlavor f) {
    switch (f) {
        case ZetaFlavor::plain: return "plain";
        case ZetaFlavor::starred: return "starred";
        case ZetaFlavor::twisted: return "twisted";
        case ZetaFlavor::starred_twisted: return "starred-twisted";
    }
    return "?";
}

ZetaValue zeta_series_eval(const MaassForm& f, PeriodCache& cache, const ZetaRequest& req, const PeriodOptions& opt) {
    if (req.T < 1) throw std::invalid_argument("zeta_series_eval: T must be positive");
    if (req.side != 1 && req.side != -1) throw std::invalid_argument("zeta_series_eval: side must be +1 or -1");
    const i64 N = f.level;
    if (req.chi.modulus() != N) throw std::invalid_argument("zeta_series_eval: chi must have modulus N");
    bool starred = req.flavor == ZetaFlavor::starred || req.flavor == ZetaFlavor::starred_twisted;
    bool twisted = req.flavor == ZetaFlavor::twisted || req.flavor == ZetaFlavor::starred_twisted;
    if (twisted && !req.psi) throw std::invalid_argument("zeta_series_eval: twisted flavor needs psi");
    std::optional<DirichletCharacter> tw;
    if (twisted) tw = starred ? psi_star(*req.psi, 1) : *req.psi;
    std::string sum = f.checksum();

    ZetaValue out{0.0, 0.0, false};
    for (i64 m = 1; m <= req.T; ++m) {
        i64 target = req.side * m;
        Lattice lat = starred ? Lattice::VZ : Lattice::LN;
        cplx shell = 0;
        for (const auto& rep : enumerate_orbits(N, target, lat)) {
            PeriodKey key{sum, N, lat, target, rep.form};
            cplx per;
            if (auto hit = cache.lookup(key)) {
                per = hit->first;
            } else if (req.compute_missing) {
                auto r = period(f, rep, opt);
                cache.insert(key, r.value, r.error_estimate);
                per = r.value;
            } else {
                throw CacheMiss("period of " + to_string(rep.form) + " (" + to_string(lat) + ", target " +
                                std::to_string(target) + ") is not cached");
            }
            cplx w = starred ? gauss_sum(req.chi, rep.coords[2]) : req.chi(rep.coords[0]);
            shell += w * per;
        }
        if (tw) shell *= gauss_sum(*tw, target);
        cplx term = shell * std::exp(-req.s * std::log(static_cast<double>(m)));
        out.value += term;
        out.last_term = term;
    }
    out.tail_warning = std::abs(out.last_term) > 1e-3 * std::abs(out.value);
    return out;
}

}  // namespace sks
