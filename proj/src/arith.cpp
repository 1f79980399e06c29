#include "sks/arith.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace sks {

i64 isqrt(i64 n) {
    if (n < 0) throw std::invalid_argument("isqrt of negative number");
    i64 r = static_cast<i64>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

bool is_square(i64 n, i64* root) {
    if (n < 0) return false;
    i64 r = isqrt(n);
    if (root) *root = r;
    return r * r == n;
}

namespace {

i64 mul_mod(i64 a, i64 b, i64 m) {
    return static_cast<i64>((static_cast<i128>(a) * b) % m);
}

}  // namespace

i64 mod_pow(i64 base, i64 exp, i64 mod) {
    i64 result = 1 % mod;
    base = pos_mod(base, mod);
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, mod);
        base = mul_mod(base, base, mod);
        exp >>= 1;
    }
    return result;
}

bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0) return n == p;
    }
    i64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // these bases are deterministic below 3.3e24
    for (i64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        i64 x = mod_pow(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::vector<std::pair<i64, int>> factorize(i64 n) {
    if (n <= 0) throw std::invalid_argument("factorize expects a positive integer");
    std::vector<std::pair<i64, int>> out;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

i64 euler_phi(i64 n) {
    i64 r = n;
    for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
    return r;
}

i64 lcm(i64 a, i64 b) { return a / std::gcd(a, b) * b; }

int kronecker(i64 a, i64 b) {
    static constexpr int tab2[8] = {0, 1, 0, -1, 0, -1, 0, 1};
    if (b == 0) return (a == 1 || a == -1) ? 1 : 0;
    if ((a & 1) == 0 && (b & 1) == 0) return 0;
    int v = 0;
    while ((b & 1) == 0) {
        ++v;
        b /= 2;
    }
    int k = (v % 2 == 0) ? 1 : tab2[a & 7];
    if (b < 0) {
        b = -b;
        if (a < 0) k = -k;
    }
    while (true) {
        if (a == 0) return b > 1 ? 0 : k;
        v = 0;
        while ((a & 1) == 0) {
            ++v;
            a /= 2;
        }
        if (v % 2 == 1) k *= tab2[b & 7];
        if (a & b & 2) k = -k;
        i64 r = a < 0 ? -a : a;
        a = b % r;
        b = r;
    }
}

CyclotomicSum::CyclotomicSum(i64 order) : order_(order), counts_(static_cast<std::size_t>(order), 0) {
    if (order <= 0) throw std::invalid_argument("CyclotomicSum order must be positive");
}

void CyclotomicSum::add(i64 exponent, i64 multiplicity) {
    counts_[static_cast<std::size_t>(pos_mod(exponent, order_))] += multiplicity;
}

cplx CyclotomicSum::value() const {
    // Neumaier summation; each term is e[k/order] with k reduced exactly
    double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0;
    auto acc = [](double& s, double& c, double x) {
        double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    };
    for (i64 k = 0; k < order_; ++k) {
        i64 n = counts_[static_cast<std::size_t>(k)];
        if (n == 0) continue;
        cplx z = e_frac(k, order_);
        acc(re, cre, static_cast<double>(n) * z.real());
        acc(im, cim, static_cast<double>(n) * z.imag());
    }
    return {re + cre, im + cim};
}

// ---- Dirichlet characters ----

DirichletCharacter::DirichletCharacter(i64 q, i64 order, std::vector<i64> exps)
    : q_(q), order_(order), exps_(std::move(exps)) {
    normalize();
}

void DirichletCharacter::normalize() {
    i64 g = order_;
    for (i64& k : exps_) {
        if (k < 0) continue;
        k = pos_mod(k, order_);
        g = std::gcd(g, k);
    }
    if (g == 0) g = order_;
    for (i64& k : exps_) {
        if (k >= 0) k /= g;
    }
    order_ /= g;
    if (order_ == 0) order_ = 1;
}

namespace {

struct LocalPiece {
    i64 pe;
    i64 denom;
    std::vector<i64> exps;  // indexed by n mod pe
};

i64 least_primitive_root(i64 p, int e) {
    i64 phi = p - 1;
    auto fac = factorize(phi);
    for (i64 g = 2; g < p; ++g) {
        bool ok = true;
        for (auto [f, m] : fac) {
            if (mod_pow(g, phi / f, p) == 1) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        if (e >= 2 && mod_pow(g, p - 1, p * p) == 1) continue;
        return g;
    }
    return 1;  // p = 2
}

LocalPiece local_piece(i64 p, int e, i64 m) {
    i64 pe = 1;
    for (int i = 0; i < e; ++i) pe *= p;
    LocalPiece piece{pe, 1, std::vector<i64>(static_cast<std::size_t>(pe), -1)};
    if (p != 2) {
        i64 phi = pe / p * (p - 1);
        i64 g = least_primitive_root(p, e);
        std::vector<i64> log(static_cast<std::size_t>(pe), -1);
        i64 x = 1;
        for (i64 k = 0; k < phi; ++k) {
            log[static_cast<std::size_t>(x)] = k;
            x = x * g % pe;
        }
        i64 lm = log[static_cast<std::size_t>(pos_mod(m, pe))];
        piece.denom = phi;
        for (i64 n = 0; n < pe; ++n) {
            i64 ln = log[static_cast<std::size_t>(n)];
            if (ln >= 0) piece.exps[static_cast<std::size_t>(n)] = lm * ln % phi;
        }
        return piece;
    }
    if (e == 1) {
        piece.exps[1] = 0;
        return piece;
    }
    // n = (-1)^b 5^a mod 2^e
    i64 amod = e >= 3 ? pe / 4 : 1;
    std::vector<i64> loga(static_cast<std::size_t>(pe), -1), logb(static_cast<std::size_t>(pe), -1);
    i64 x = 1;
    for (i64 a = 0; a < amod; ++a) {
        loga[static_cast<std::size_t>(x)] = a;
        logb[static_cast<std::size_t>(x)] = 0;
        i64 nx = pos_mod(-x, pe);
        loga[static_cast<std::size_t>(nx)] = a;
        logb[static_cast<std::size_t>(nx)] = 1;
        x = x * 5 % pe;
    }
    i64 mr = pos_mod(m, pe);
    i64 am = loga[static_cast<std::size_t>(mr)], bm = logb[static_cast<std::size_t>(mr)];
    piece.denom = e >= 3 ? amod : 2;
    for (i64 n = 1; n < pe; n += 2) {
        i64 an = loga[static_cast<std::size_t>(n)], bn = logb[static_cast<std::size_t>(n)];
        i64 k = (e >= 3) ? (bm * bn * (amod / 2) + am * an) % amod : bm * bn;
        piece.exps[static_cast<std::size_t>(n)] = k;
    }
    return piece;
}

}  // namespace

DirichletCharacter DirichletCharacter::conrey(i64 q, i64 m) {
    if (q < 1) throw std::invalid_argument("character modulus must be positive");
    if (std::gcd(pos_mod(m, q), q) != 1 && q > 1)
        throw std::invalid_argument("Conrey index must be coprime to the modulus");
    std::vector<LocalPiece> pieces;
    i64 L = 1;
    if (q > 1) {
        for (auto [p, e] : factorize(q)) {
            pieces.push_back(local_piece(p, e, m));
            L = lcm(L, pieces.back().denom);
        }
    }
    std::vector<i64> exps(static_cast<std::size_t>(q), -1);
    for (i64 n = 0; n < q; ++n) {
        if (std::gcd(n, q) != 1 && q > 1) continue;
        i64 k = 0;
        for (const auto& pc : pieces) k += pc.exps[static_cast<std::size_t>(n % pc.pe)] * (L / pc.denom);
        exps[static_cast<std::size_t>(n)] = k % L;
    }
    if (q == 1) exps[0] = 0;
    DirichletCharacter chi(q, L, std::move(exps));
    chi.conrey_ = q == 1 ? 1 : pos_mod(m, q);
    return chi;
}

DirichletCharacter DirichletCharacter::principal(i64 q) { return conrey(q, 1); }

DirichletCharacter DirichletCharacter::from_exponents(i64 q, i64 order, std::vector<i64> exps) {
    if (q < 1 || order < 1 || static_cast<i64>(exps.size()) != q)
        throw std::invalid_argument("bad character table");
    for (i64 n = 0; n < q; ++n) {
        bool unit = std::gcd(n, q) == 1 || q == 1;
        if (unit != (exps[static_cast<std::size_t>(n)] >= 0))
            throw std::invalid_argument("character table support must be the units mod q");
    }
    return DirichletCharacter(q, order, std::move(exps));
}

std::optional<i64> DirichletCharacter::exponent(i64 n) const {
    i64 k = exps_[static_cast<std::size_t>(pos_mod(n, q_))];
    if (k < 0) return std::nullopt;
    return k;
}

cplx DirichletCharacter::operator()(i64 n) const {
    auto k = exponent(n);
    if (!k) return 0.0;
    return e_frac(*k, order_);
}

int DirichletCharacter::parity() const {
    return *exponent(-1) == 0 ? 1 : -1;
}

bool DirichletCharacter::is_principal() const { return order_ == 1; }

i64 DirichletCharacter::conductor() const {
    std::vector<i64> divs;
    for (i64 d = 1; d <= q_; ++d)
        if (q_ % d == 0) divs.push_back(d);
    for (i64 d : divs) {
        bool trivial = true;
        for (i64 n = 1; n < q_ && trivial; n += d) {
            if (std::gcd(n, q_) != 1) continue;
            if (exps_[static_cast<std::size_t>(n)] != 0) trivial = false;
        }
        if (trivial) return d;
    }
    return q_;
}

DirichletCharacter DirichletCharacter::conj() const {
    std::vector<i64> ex = exps_;
    for (i64& k : ex)
        if (k >= 0) k = pos_mod(-k, order_);
    return DirichletCharacter(q_, order_, std::move(ex));
}

DirichletCharacter DirichletCharacter::operator*(const DirichletCharacter& o) const {
    if (o.q_ != q_) throw std::invalid_argument("character product needs equal moduli");
    i64 L = lcm(order_, o.order_);
    std::vector<i64> ex(exps_.size(), -1);
    for (std::size_t n = 0; n < ex.size(); ++n) {
        if (exps_[n] < 0) continue;
        ex[n] = (exps_[n] * (L / order_) + o.exps_[n] * (L / o.order_)) % L;
    }
    return DirichletCharacter(q_, L, std::move(ex));
}

DirichletCharacter DirichletCharacter::pow(i64 k) const {
    std::vector<i64> ex = exps_;
    for (i64& x : ex)
        if (x >= 0) x = static_cast<i64>((static_cast<i128>(x) * pos_mod(k, order_)) % order_);
    return DirichletCharacter(q_, order_, std::move(ex));
}

bool DirichletCharacter::operator==(const DirichletCharacter& o) const {
    return q_ == o.q_ && order_ == o.order_ && exps_ == o.exps_;
}

i64 DirichletCharacter::conrey_index() const {
    if (conrey_ != 0) return conrey_;
    for (i64 m = 1; m <= q_; ++m) {
        if (std::gcd(m, q_) != 1) continue;
        if (conrey(q_, m) == *this) {
            conrey_ = m;
            return m;
        }
    }
    throw std::logic_error("character has no Conrey label");
}

std::string DirichletCharacter::label() const {
    return std::to_string(q_) + "." + std::to_string(conrey_index());
}

std::vector<DirichletCharacter> enumerate_characters(i64 q) {
    if (q < 1) throw std::invalid_argument("character modulus must be positive");
    std::vector<DirichletCharacter> out;
    for (i64 m = 1; m <= q; ++m) {
        if (q > 1 && std::gcd(m, q) != 1) continue;
        if (q > 1 && m == q) continue;
        out.push_back(DirichletCharacter::conrey(q, m));
    }
    return out;
}

DirichletCharacter character_from_label(const std::string& label) {
    auto dot = label.find('.');
    if (dot == std::string::npos) throw ConfigError("character label must look like q.m: " + label);
    try {
        i64 q = std::stoll(label.substr(0, dot));
        i64 m = std::stoll(label.substr(dot + 1));
        return DirichletCharacter::conrey(q, m);
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad character label: " + label);
    }
}

cplx gauss_sum(const DirichletCharacter& chi, i64 n) {
    i64 q = chi.modulus();
    i64 L = lcm(chi.order(), q);
    CyclotomicSum sum(L);
    i64 nr = pos_mod(n, q);
    for (i64 m = 0; m < q; ++m) {
        auto k = chi.exponent(m);
        if (!k) continue;
        i64 ex = *k * (L / chi.order()) + (m * nr % q) * (L / q);
        sum.add(ex);
    }
    return sum.value();
}

cplx eps_d(i64 d) {
    if (d % 2 == 0) throw std::invalid_argument("eps_d needs odd d");
    return pos_mod(d, 4) == 1 ? cplx(1.0) : kI;
}

cplx c_lr(int l, i64 r) {
    if (l % 2 == 0) return 1.0;
    return std::pow(eps_d(r), l);
}

EpsC eps_and_c(i64 d, int l, i64 r) {
    if (r < 3 || !is_prime(r)) throw std::invalid_argument("twist modulus must be an odd prime");
    return {eps_d(d), c_lr(l, r)};
}

DirichletCharacter psi_star(const DirichletCharacter& psi, int l) {
    i64 r = psi.modulus();
    if (r < 3 || !is_prime(r)) throw std::invalid_argument("psi_star needs psi mod an odd prime");
    DirichletCharacter out = psi.conj();
    if (l % 2 != 0) {
        std::vector<i64> leg(static_cast<std::size_t>(r), -1);
        for (i64 k = 1; k < r; ++k) leg[static_cast<std::size_t>(k)] = kronecker(k, r) == 1 ? 0 : 1;
        out = out * DirichletCharacter::from_exponents(r, 2, std::move(leg));
    }
    return out;
}

namespace {

DirichletCharacter kronecker_lift(const DirichletCharacter& base, i64 N, int l) {
    i64 q = 4 * N;
    i64 L = lcm(base.order(), 2);
    std::vector<i64> ex(static_cast<std::size_t>(q), -1);
    for (i64 d = 1; d < q; ++d) {
        if (std::gcd(d, q) != 1) continue;
        i64 k = *base.exponent(d) * (L / base.order());
        if (l % 2 != 0 && kronecker(N, d) == -1) k += L / 2;
        ex[static_cast<std::size_t>(d)] = k % L;
    }
    return DirichletCharacter::from_exponents(q, L, std::move(ex));
}

}  // namespace

DirichletCharacter chi_N(const DirichletCharacter& chi, i64 N) {
    if (chi.modulus() != N) throw std::invalid_argument("chi_N expects chi mod N");
    return kronecker_lift(chi, N, 1);
}

DirichletCharacter chi_N_l(const DirichletCharacter& chi, i64 N, int l) {
    if (chi.modulus() != N) throw std::invalid_argument("chi_N_l expects chi mod N");
    return kronecker_lift(chi.conj(), N, l);
}

TwistPrimes::TwistPrimes(i64 N) : N_(N) {
    if (N < 1) throw std::invalid_argument("level must be positive");
}

i64 TwistPrimes::next() {
    do {
        ++cur_;
    } while (!(cur_ > 2 && is_prime(cur_) && N_ % cur_ != 0));
    return cur_;
}

std::vector<i64> twist_primes(i64 N, std::size_t count) {
    TwistPrimes s(N);
    std::vector<i64> out;
    while (out.size() < count) out.push_back(s.next());
    return out;
}

}  // namespace sks
