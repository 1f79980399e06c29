#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sks/common.hpp"

namespace sks {

enum class Lattice { LN, VZ };
enum class Signature { positive_definite, negative_definite, indefinite, degenerate };

std::string to_string(Lattice l);
std::string to_string(Signature s);
Lattice lattice_from_string(const std::string& s);

struct Mat2i {
    i64 a = 1, b = 0, c = 0, d = 1;

    i64 det() const;
    Mat2i inverse() const;  // for det 1
    cplx act(cplx z) const;
    bool in_gamma0(i64 N) const { return det() == 1 && c % N == 0; }
    friend Mat2i operator*(const Mat2i& x, const Mat2i& y);
    friend bool operator==(const Mat2i& x, const Mat2i& y) = default;
};

struct Mat2r {
    double a = 1, b = 0, c = 0, d = 1;
    cplx act(cplx z) const { return (a * z + b) / (c * z + d); }
};

// Symmetric matrix (A, B/2; B/2, C) with integral A, B, C.
struct SymForm {
    i64 A = 0, B = 0, C = 0;

    i64 disc() const;  // B^2 - 4AC = -4 det
    Signature signature() const;
    i64 content() const;
    SymForm transform(const Mat2i& g) const;  // g M g^t
    SymForm negate() const { return {-A, -B, -C}; }
    friend bool operator==(const SymForm&, const SymForm&) = default;
    friend auto operator<=>(const SymForm&, const SymForm&) = default;
};

std::string to_string(const SymForm& f);

// v = (v1, N v2; N v2, N v3) in L_N.
struct LatticePoint {
    i64 v1 = 0, v2 = 0, v3 = 0;
    i64 N = 1;

    SymForm form() const { return {v1, 2 * N * v2, N * v3}; }
    i64 d() const { return N * v2 * v2 - v1 * v3; }
    static LatticePoint from_form(const SymForm& f, i64 N);
};

// w* = (w1, w2/2; w2/2, w3) in V_Z.
struct HalfIntegralPoint {
    i64 w1 = 0, w2 = 0, w3 = 0;

    SymForm form() const { return {w1, w2, w3}; }
    i64 disc() const { return w2 * w2 - 4 * w1 * w3; }
    static HalfIntegralPoint from_form(const SymForm& f) { return {f.A, f.B, f.C}; }
};

struct OrbitInvariant {
    i64 value;
    Signature signature;
};

OrbitInvariant orbit_invariant(const LatticePoint& v);
OrbitInvariant orbit_invariant(const HalfIntegralPoint& w);

bool in_lattice(const SymForm& f, i64 N, Lattice lat);
// d_N for L_N, disc for V_Z
i64 lattice_invariant(const SymForm& f, i64 N, Lattice lat);
// lattice coordinates (v1, v2, v3) or (w1, w2, w3)
std::array<i64, 3> lattice_coords(const SymForm& f, i64 N, Lattice lat);
SymForm form_from_coords(i64 x1, i64 x2, i64 x3, i64 N, Lattice lat);

struct OrbitRep {
    i64 N = 1;
    Lattice lattice = Lattice::LN;
    i64 target = 0;  // d_N(v) or disc(w*)
    SymForm form;
    std::array<i64, 3> coords{};
    Signature signature = Signature::degenerate;

    // definite: number of elements of the Gamma_0(N)-stabilizer (includes -I)
    int stabilizer_order = 0;
    // indefinite, non-square discriminant: generator of the stabilizer modulo -I
    std::optional<Mat2i> automorph;
    bool split = false;  // square discriminant

    cplx heegner{0.0, 0.0};
    double root_lo = 0.0, root_hi = 0.0;  // geodesic endpoints; +-inf allowed
    Mat2r g;                              // v = +-t g g^t or t g J g^t
    double t = 0.0;
    double eta = 0.0;  // automorph translates g.iy to g.(eta y)
};

// Fundamental solution of t^2 - D u^2 = 4 (D > 0 non-square, D = 0,1 mod 4).
struct PellSolution {
    i128 t = 0, u = 0;
};
PellSolution pell_fundamental(i64 D);

// The SL2(Z)-stabilizer of f: finite list (definite), {generator} (indefinite
// non-square) or empty (square discriminant; only +-I).
std::vector<Mat2i> sl2_stabilizer(const SymForm& f);

// Canonical SL2(Z) representative: returns M_red and sets *gamma with M = gamma M_red gamma^t.
SymForm sl2_reduce(const SymForm& f, Mat2i* gamma = nullptr);

// Canonical representatives of all SL2(Z) classes with B^2 - 4AC = disc (imprimitive included).
std::vector<SymForm> sl2_classes(i64 disc);

// Gamma_0(N)\SL2(Z) as P^1(Z/N): bottom rows (c:d) up to units.
class P1ModN {
public:
    explicit P1ModN(i64 N);
    std::size_t size() const { return reps_.size(); }
    std::size_t index(i64 c, i64 d) const;
    std::size_t index_of(const Mat2i& g) const { return index(g.c, g.d); }
    std::pair<i64, i64> rep(std::size_t i) const { return reps_[i]; }
    Mat2i lift(std::size_t i) const;
    std::size_t act(std::size_t i, const Mat2i& s) const;  // (c, d) s

private:
    i64 N_;
    std::vector<std::pair<i64, i64>> reps_;
    std::vector<std::size_t> lookup_;  // (c mod N) * N + (d mod N)
};

OrbitRep make_rep(const SymForm& f, i64 N, Lattice lat);

std::vector<OrbitRep> enumerate_orbits(i64 N, i64 target, Lattice lat);

struct Reduction {
    OrbitRep rep;
    Mat2i h;  // h in Gamma_0(N) with h M h^t = rep.form
};

Reduction reduce(const SymForm& f, i64 N, Lattice lat);

cplx heegner_point(const OrbitRep& rep);
// nullopt for the split (square discriminant) case
std::optional<Mat2i> fundamental_automorph(const OrbitRep& rep);

// CSV (N, lattice, target, v1, v2, v3, signature, stabilizer, epsilon)
std::string orbits_csv_header();
std::string orbit_csv_row(const OrbitRep& rep);
std::vector<OrbitRep> parse_orbits_csv(const std::string& text);

}  // namespace sks
