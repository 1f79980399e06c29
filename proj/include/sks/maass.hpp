#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sks/arith.hpp"
#include "sks/common.hpp"

namespace sks {

enum class Parity { even, odd };

std::string to_string(Parity p);

// Weight-0 Maass cusp form Phi = sum_{n != 0} a(n) sqrt(y) K_{iR}(2 pi |n| y) e[n x].
struct MaassForm {
    i64 level = 1;
    double R = 0.0;
    Parity parity = Parity::even;
    std::string char_label = "1.1";  // character of Phi under Gamma_0(N), Conrey label
    i64 nmax = 0;
    std::vector<cplx> coeffs;  // a(n) at index n + nmax (index nmax unused)
    std::string normalization = "hecke";

    // raw text of R and of every coefficient, kept for byte-exact re-serialization
    std::string R_text;
    std::vector<std::string> coeff_text;

    cplx a(i64 n) const;
    cplx lambda() const { return {0.5, R}; }
    double eigenvalue() const { return 0.25 + R * R; }
    DirichletCharacter character() const;
    std::string checksum() const;  // SHA-256 of the serialized form

    // a(n) -> alpha a(n) + beta b(n); R, level and parity must match
    MaassForm combine(cplx alpha, const MaassForm& other, cplx beta) const;
};

std::string sha256_hex(const std::string& bytes);

MaassForm parse_fixture(const std::string& text);
std::string serialize_fixture(const MaassForm& f);
MaassForm load_fixture(const std::string& path);
// Write a new fixture; refuses to touch an existing file.
void save_fixture(const MaassForm& f, const std::string& path);

// Remote fetch: GET <base_url>/<label> must return a maass-v1 document.
struct FetchDescriptor {
    std::string base_url;
    std::string label;
    double timeout_s = 10.0;
    std::string cache_dir;
    int retries = 4;
    double backoff_s = 0.25;  // doubled after every failed attempt
};

// Cached copy (with its recorded checksum) if present, otherwise fetch, validate and cache.
MaassForm fetch_fixture(const FetchDescriptor& desc);

struct PhiEval {
    cplx value;
    double tail_bound;  // bound on the omitted terms |n| > M
    double envelope;    // sum of |terms|, a scale for relative tolerances
};

struct PhiOptions {
    i64 M = -1;           // truncation, -1 for nmax
    double tol = 1e-12;   // relative to the envelope
    bool pullback = true; // map into the SL2(Z) fundamental domain when N = 1
};

// Truncated Fourier-Whittaker sum. The tail bound assumes |a(n)| <= 10 sqrt(n) and uses
// |K_{iR}(x)| <= K_0(x) <= sqrt(pi/2x) e^{-x}, giving 10 e^{-2 pi (M+1) y} / (1 - e^{-2 pi y}).
PhiEval eval_phi_detail(const MaassForm& f, cplx z, const PhiOptions& opt = {});
cplx eval_phi(const MaassForm& f, cplx z, const PhiOptions& opt = {});

double phi_tail_bound(i64 M, double y);

// Point reached by the pullback used in eval_phi.
cplx phi_pullback(const MaassForm& f, cplx z);

struct EigenResidual {
    double residual;       // |Delta_0 Phi - lambda(1-lambda) Phi| / (lambda(1-lambda) |Phi|)
    bool ill_conditioned;  // |Phi| small against its term envelope
};

// Five-point finite-difference residual of the Laplace eigen-equation.
EigenResidual eigen_residual(const MaassForm& f, cplx z, double h, const PhiOptions& opt = {});

// Maximum |a(n)| / sqrt(|n|), for the growth sanity check (should stay below 10).
double coefficient_growth(const MaassForm& f);

}  // namespace sks
