#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sks/periods.hpp"

using namespace sks;
namespace fs = std::filesystem;

namespace {

const MaassForm& level1() {
    static const MaassForm f = load_fixture(SKS_DATA_DIR "/maass_level1_even.txt");
    return f;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// twisted copy of the fixture table, so linearity is tested on two different tables
MaassForm scrambled(const MaassForm& f) {
    MaassForm g = f;
    for (i64 n = 1; n <= g.nmax; ++n) {
        cplx v = f.a(n) * cplx(n % 2 ? 1.0 : -0.5, n % 5 ? 0.0 : 0.3);
        g.coeffs[static_cast<std::size_t>(n + g.nmax)] = v;
        g.coeffs[static_cast<std::size_t>(-n + g.nmax)] = v;
    }
    return g;
}

std::vector<OrbitRep> sample_reps(bool definite, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<OrbitRep> out;
    std::uniform_int_distribution<i64> pickN(1, 3), pickd(2, 40);
    while (static_cast<int>(out.size()) < count) {
        i64 N = pickN(rng), d = pickd(rng);
        if (definite) d = -d;
        auto reps = enumerate_orbits(N, d, Lattice::LN);
        for (const auto& r : reps) {
            if (r.split) continue;
            if (definite != (r.signature != Signature::indefinite)) continue;
            out.push_back(r);
            break;
        }
    }
    return out;
}

// Smallest non-trivial gamma in SL2(Z) fixing M, by search: independent of the Pell machinery.
Mat2i brute_automorph(const SymForm& m, i64 bound) {
    Mat2i best;
    i64 best_tr = 0;
    for (i64 a = -bound; a <= bound; ++a)
        for (i64 b = -bound; b <= bound; ++b)
            for (i64 c = -bound; c <= bound; ++c) {
                if (a == 0) continue;
                if ((1 + b * c) % a != 0) continue;
                i64 d = (1 + b * c) / a;
                Mat2i g{a, b, c, d};
                i64 tr = std::abs(a + d);
                if (tr <= 2 || m.transform(g) != m) continue;
                if (best_tr == 0 || tr < best_tr) {
                    best = g;
                    best_tr = tr;
                }
            }
    return best;
}

// (1/4) int Phi ds over one closed geodesic, with z(s) = c + rho (tanh s + i sech s) and the
// length taken from the automorph's trace; trapezoid rule on the periodic integrand.
cplx arclength_period(const MaassForm& f, const SymForm& m, int nodes) {
    Mat2i g = brute_automorph(m, 40);
    REQUIRE(std::abs(g.a + g.d) > 2);
    // fixed points of g: c z^2 + (d - a) z - b = 0
    double A = static_cast<double>(g.c), B = static_cast<double>(g.d - g.a), C = static_cast<double>(-g.b);
    double disc = std::sqrt(B * B - 4 * A * C);
    double r1 = (-B - disc) / (2 * A), r2 = (-B + disc) / (2 * A);
    double centre = 0.5 * (r1 + r2), rho = 0.5 * std::abs(r2 - r1);
    double len = 2.0 * std::acosh(std::abs(static_cast<double>(g.a + g.d)) / 2.0);
    cplx s = 0;
    double h = len / nodes;
    for (int k = 0; k < nodes; ++k) {
        double t = -0.5 * len + k * h;
        s += eval_phi(f, cplx(centre + rho * std::tanh(t), rho / std::cosh(t)));
    }
    return 0.25 * h * s;
}

fs::path temp_file(const std::string& tag) {
    return fs::temp_directory_path() / ("sks_" + tag + "_" + std::to_string(std::random_device{}()) + ".csv");
}

}  // namespace

TEST_CASE("identity matrix gives pi/4 Phi(i)") {
    const auto& f = level1();
    auto rep = make_rep({1, 0, 1}, 1, Lattice::LN);
    REQUIRE(rep.stabilizer_order == 4);
    auto p = period_definite(f, rep);
    CHECK(p.method == PeriodMethod::closed_form);
    CHECK(rel(p.value, kPi / 4 * eval_phi(f, kI)) < 1e-15);
    CHECK(p.error_estimate >= 0);
    CHECK_THROWS_AS(period_definite(f, make_rep({1, 4, -1}, 1, Lattice::LN)), std::invalid_argument);
    CHECK_THROWS_AS(period_indefinite(f, rep), std::invalid_argument);
}

TEST_CASE("definite closed form agrees with the SO(2) quadrature") {
    const auto& f = level1();
    for (const auto& rep : sample_reps(true, 20, 3)) {
        auto a = period_definite(f, rep);
        auto b = period_definite_quadrature(f, rep);
        CHECK(std::abs(a.value - b.value) <= 1e-10 * std::abs(a.value));
        // g_v -> g_v k_theta leaves the quadrature unchanged
        OrbitRep turned = rep;
        double c = std::cos(0.7), s = std::sin(0.7);
        const Mat2r& g = rep.g;
        turned.g = {g.a * c + g.b * s, -g.a * s + g.b * c, g.c * c + g.d * s, -g.c * s + g.d * c};
        CHECK(std::abs(period_definite_quadrature(f, turned).value - b.value) <= 1e-10 * std::abs(b.value));
    }
}

TEST_CASE("periods do not depend on the representative") {
    const auto& f = level1();
    std::mt19937_64 rng(5);
    for (bool definite : {true, false}) {
        for (const auto& rep : sample_reps(definite, 10, definite ? 17 : 19)) {
            Mat2i h = oracle::random_gamma0(rng, rep.N, 4);
            auto other = make_rep(rep.form.transform(h), rep.N, Lattice::LN);
            auto a = period(f, rep), b = period(f, other);
            CAPTURE(to_string(rep.form));
            CHECK(a.scale > 0);
            CHECK(std::abs(a.value - b.value) <= 1e-10 * a.scale);
            if (!definite) CHECK(std::abs(a.value - b.value) <= 2 * (a.error_estimate + b.error_estimate));
        }
    }
}

TEST_CASE("indefinite periods do not depend on the choice of g_v") {
    const auto& f = level1();
    for (const auto& rep : sample_reps(false, 10, 23)) {
        auto ref = period_indefinite(f, rep);
        double L = std::log(rep.eta);
        // g_v a_y for a different base point on the geodesic
        for (double frac : {-0.25, 0.1, 0.37}) {
            auto p = period_indefinite_from(f, rep, (frac - 0.5) * L);
            CAPTURE(frac);
            CHECK(std::abs(p.value - ref.value) <= 1e-10 * ref.scale);
        }
        // g_v -> g_v a_s with a_s = diag(e^{s/2}, e^{-s/2}), through the rep itself
        const Mat2r& g = rep.g;
        OrbitRep moved = rep;
        double u = std::exp(0.45), w = 1.0 / u;
        moved.g = {g.a * u, g.b * w, g.c * u, g.d * w};
        CHECK(std::abs(moved.g.act(kI) - g.act(kI)) > 1e-3);
        CHECK(std::abs(period_indefinite(f, moved).value - ref.value) <= 1e-10 * ref.scale);
    }
}

TEST_CASE("arclength oracle for the d = 5 class") {
    const auto& f = level1();
    SymForm m = LatticePoint{1, 2, -1, 1}.form();
    REQUIRE(m == SymForm{1, 4, -1});
    auto rep = make_rep(m, 1, Lattice::LN);
    REQUIRE(rep.target == 5);
    auto p = period_indefinite(f, rep);
    cplx oracle = arclength_period(f, m, 400);
    CHECK(std::abs(oracle - arclength_period(f, m, 800)) <= 1e-12 * std::abs(oracle));
    CHECK(rel(p.value, oracle) <= 1e-6);
}

TEST_CASE("doubling the nodes moves the value by at most the estimate") {
    const auto& f = level1();
    for (const auto& rep : sample_reps(false, 5, 29)) {
        PeriodOptions opt;
        auto a = period_indefinite(f, rep, opt);
        opt.panel_width *= 0.5;
        opt.rel_tol *= 0.01;
        auto b = period_indefinite(f, rep, opt);
        CHECK(std::abs(a.value - b.value) <= a.error_estimate);
    }
}

TEST_CASE("split classes converge") {
    const auto& f = level1();
    auto reps = enumerate_orbits(1, 4, Lattice::LN);
    bool any = false;
    for (const auto& rep : reps) {
        if (!rep.split) continue;
        any = true;
        auto p = period(f, rep);
        CHECK(std::isfinite(std::abs(p.value)));
        CHECK(p.error_estimate <= 1e-8 * std::abs(eval_phi(f, kI)));
    }
    CHECK(any);
}

TEST_CASE("periods are linear in the coefficient table") {
    const auto& f = level1();
    auto g = scrambled(f);
    cplx alpha(0.7, 0.2), beta(-1.3, 0.0);
    auto h = f.combine(alpha, g, beta);
    // the scrambled table is not modular, so evaluate the raw expansion (no pullback)
    PeriodOptions opt;
    opt.phi.pullback = false;
    int tested = 0;
    for (i64 d : {-3, -4, -7, -8, -11, 5, 8, 12, 13, 17, 21}) {
        for (const auto& rep : enumerate_orbits(1, d, Lattice::LN)) {
            PeriodResult a, b, c;
            try {
                a = period(f, rep, opt);
            } catch (const PrecisionError&) {
                continue;  // cycle dips below the height the raw expansion resolves
            }
            b = period(g, rep, opt);
            c = period(h, rep, opt);
            double scale = std::abs(alpha) * a.scale + std::abs(beta) * b.scale;
            CHECK(std::abs(c.value - alpha * a.value - beta * b.value) <= 1e-12 * scale);
            ++tested;
        }
    }
    CHECK(tested >= 8);
}

TEST_CASE("parallel periods keep the input order") {
    const auto& f = level1();
    auto reps = enumerate_orbits(1, 13, Lattice::LN);
    auto more = enumerate_orbits(1, -7, Lattice::LN);
    reps.insert(reps.end(), more.begin(), more.end());
    auto par = periods_parallel(f, reps, {}, 4);
    REQUIRE(par.size() == reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) {
        CHECK(par[i].rep.form == reps[i].form);
        CHECK(par[i].value == period(f, reps[i]).value);
    }
}

TEST_CASE("period cache round trip and prune") {
    const auto& f = level1();
    auto path = temp_file("cache");
    auto reps = enumerate_orbits(1, 8, Lattice::LN);
    std::vector<cplx> values;
    {
        PeriodCache cache(path.string());
        for (const auto& rep : reps) values.push_back(cache.get_or_compute(f, rep).value);
        cache.insert({"deadbeef", 1, Lattice::LN, 8, reps[0].form}, {1.0, 2.0}, 0.5);
        CHECK(cache.size() == reps.size() + 1);
        cache.save();
    }
    PeriodCache loaded(path.string());
    CHECK(loaded.size() == reps.size() + 1);
    for (std::size_t i = 0; i < reps.size(); ++i) {
        auto hit = loaded.lookup({f.checksum(), 1, Lattice::LN, 8, reps[i].form});
        REQUIRE(hit.has_value());
        CHECK(hit->first == values[i]);
    }
    CHECK(loaded.prune(f.checksum()) == 1);
    CHECK_FALSE(loaded.lookup({"deadbeef", 1, Lattice::LN, 8, reps[0].form}).has_value());
    loaded.save();
    CHECK(PeriodCache(path.string()).size() == reps.size());
    fs::remove(path);
}
