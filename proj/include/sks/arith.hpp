#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sks/common.hpp"

namespace sks {

i64 isqrt(i64 n);
bool is_square(i64 n, i64* root = nullptr);
bool is_prime(i64 n);
std::vector<std::pair<i64, int>> factorize(i64 n);
i64 euler_phi(i64 n);
i64 mod_pow(i64 base, i64 exp, i64 mod);
i64 lcm(i64 a, i64 b);

// Full Kronecker symbol (a/n), including n <= 0 and even n.
int kronecker(i64 a, i64 n);

// Sum of integer multiples of e[k/order], accumulated exactly by exponent.
class CyclotomicSum {
public:
    explicit CyclotomicSum(i64 order);
    void add(i64 exponent, i64 multiplicity = 1);
    i64 order() const { return order_; }
    cplx value() const;

private:
    i64 order_;
    std::vector<i64> counts_;
};

// A Dirichlet character mod q, stored as exponents k(n) with chi(n) = e[k(n)/order].
//
// Labeling follows Conrey: for a prime power p^e with odd p, chi_{p^e}(m, n) =
// e[log_g(m) log_g(n) / phi(p^e)] where g is the least primitive root mod p^2;
// for 2^e, write n = (-1)^b 5^a and set chi(m, n) = e[b_m b_n / 2 + a_m a_n / 2^(e-2)].
// The character q.m is the CRT product of the local pieces.
class DirichletCharacter {
public:
    static DirichletCharacter conrey(i64 modulus, i64 index);
    static DirichletCharacter principal(i64 modulus);
    // exps[n] for 0 <= n < modulus, -1 where gcd(n, modulus) > 1
    static DirichletCharacter from_exponents(i64 modulus, i64 order, std::vector<i64> exps);

    i64 modulus() const { return q_; }
    i64 order() const { return order_; }
    // exponent k with chi(n) = e[k/order()], or nullopt when gcd(n, q) > 1
    std::optional<i64> exponent(i64 n) const;
    cplx operator()(i64 n) const;

    int parity() const;
    bool is_principal() const;
    bool is_real() const { return order_ <= 2; }
    i64 conductor() const;
    bool is_primitive() const { return conductor() == q_; }

    DirichletCharacter conj() const;
    DirichletCharacter operator*(const DirichletCharacter& other) const;
    DirichletCharacter pow(i64 k) const;
    bool operator==(const DirichletCharacter& other) const;

    // Conrey index m in [1, q] coprime to q.
    i64 conrey_index() const;
    std::string label() const;

private:
    DirichletCharacter(i64 q, i64 order, std::vector<i64> exps);
    void normalize();

    i64 q_ = 1;
    i64 order_ = 1;
    std::vector<i64> exps_;
    mutable i64 conrey_ = 0;
};

// Characters mod q in increasing Conrey index.
std::vector<DirichletCharacter> enumerate_characters(i64 modulus);

// Parse "q.m" (Conrey label).
DirichletCharacter character_from_label(const std::string& label);

cplx gauss_sum(const DirichletCharacter& chi, i64 n);

// eps_d = 1 or i according as d = 1 or 3 mod 4 (residue taken in {1, 3}).
cplx eps_d(i64 d);
// C_{l,r} = 1 for even l, eps_r^l for odd l.
cplx c_lr(int l, i64 r);

struct EpsC {
    cplx eps;
    cplx c;
};
EpsC eps_and_c(i64 d, int l, i64 r);

// psi*(k) = conj(psi(k)) (k/r)^l for psi mod an odd prime r.
DirichletCharacter psi_star(const DirichletCharacter& psi, int l = 1);

// chi_N(d) = chi(d) (N/d), as a character mod 4N.
DirichletCharacter chi_N(const DirichletCharacter& chi, i64 N);
// chi_{N,l}(d) = conj(chi(d)) (N/d)^l, as a character mod 4N.
DirichletCharacter chi_N_l(const DirichletCharacter& chi, i64 N, int l);

// Odd primes r not dividing N, in increasing order.
class TwistPrimes {
public:
    explicit TwistPrimes(i64 N);
    i64 next();

private:
    i64 N_;
    i64 cur_ = 2;
};

std::vector<i64> twist_primes(i64 N, std::size_t count);

}  // namespace sks
