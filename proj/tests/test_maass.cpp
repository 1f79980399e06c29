#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "sks/maass.hpp"

using namespace sks;
namespace fs = std::filesystem;

namespace {

const std::string kFixture = SKS_DATA_DIR "/maass_level1_even.txt";

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const MaassForm& level1() {
    static const MaassForm f = load_fixture(kFixture);
    return f;
}

std::string small_fixture(int nmax, int skip = 0) {
    std::string s = "format=maass-v1\nlevel=1\nR=13.779751351890738944\nparity=even\nchar=1.1\nnmax=" +
                    std::to_string(nmax) + "\n";
    for (int n = -nmax; n <= nmax; ++n) {
        if (n == 0 || n == skip || n == -skip) continue;
        s += std::to_string(n) + " " + std::to_string(1.0 / (n > 0 ? n : -n)) + " 0\n";
    }
    return s;
}

// a(1) = 1 and nothing else, with room above so the truncation bound is negligible
MaassForm single_term(double R) {
    MaassForm f;
    f.R = R;
    f.nmax = 200;
    f.coeffs.assign(401, 0.0);
    f.coeffs[201] = 1.0;
    return f;
}

fs::path temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("sks_test_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(p);
    return p;
}

struct LocalServer {
    httplib::Server srv;
    std::thread th;
    int port = 0;
    std::atomic<int> flaky_hits{0};

    explicit LocalServer(std::string body) {
        srv.Get("/ok/(.*)", [body](const httplib::Request&, httplib::Response& res) {
            res.set_content(body, "text/plain");
        });
        srv.Get("/flaky/(.*)", [this, body](const httplib::Request&, httplib::Response& res) {
            if (flaky_hits++ < 2) {
                res.status = 503;
                return;
            }
            res.set_content(body, "text/plain");
        });
        srv.Get("/missing/(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
        srv.Get("/garbage/(.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("format=maass-v1\nlevel=1\n", "text/plain");
        });
        port = srv.bind_to_any_port("127.0.0.1");
        th = std::thread([this] { srv.listen_after_bind(); });
        srv.wait_until_ready();
    }
    ~LocalServer() {
        srv.stop();
        th.join();
    }
    std::string url(const std::string& route) const { return "http://127.0.0.1:" + std::to_string(port) + "/" + route; }
};

}  // namespace

TEST_CASE("fixture loads and satisfies the header invariants") {
    const auto& f = level1();
    CHECK(f.level == 1);
    CHECK(f.nmax >= 100);
    CHECK(f.parity == Parity::even);
    CHECK(f.a(1) == cplx(1.0, 0.0));
    CHECK(f.eigenvalue() == doctest::Approx(0.25 + f.R * f.R));
    CHECK(f.lambda() * (1.0 - f.lambda()) == cplx(f.eigenvalue(), 0.0));
    CHECK(coefficient_growth(f) <= 10.0);
    for (i64 n = 1; n <= f.nmax; ++n) CHECK(f.a(-n) == f.a(n));
}

TEST_CASE("fixture round trip is byte exact") {
    std::string text = slurp(kFixture);
    CHECK(serialize_fixture(parse_fixture(text)) == text);
    CHECK(level1().checksum() == sha256_hex(text));
    std::string small = small_fixture(10);
    CHECK(serialize_fixture(parse_fixture(small)) == small);
}

TEST_CASE("fixture validation errors") {
    CHECK_THROWS_WITH_AS(parse_fixture(small_fixture(10, 5)), doctest::Contains("gap"), ConfigError);
    std::string no_r = small_fixture(3);
    no_r.erase(no_r.find("R="), no_r.find("parity=") - no_r.find("R="));
    CHECK_THROWS_WITH_AS(parse_fixture(no_r), doctest::Contains("'R'"), ConfigError);
    std::string odd = small_fixture(3);
    odd.replace(odd.find("parity=even"), 11, "parity=odd");
    CHECK_THROWS_WITH_AS(parse_fixture(odd), doctest::Contains("parity"), ConfigError);
    std::string dup = small_fixture(3) + "2 0.5 0\n";
    CHECK_THROWS_AS(parse_fixture(dup), ConfigError);
    CHECK_THROWS_AS(load_fixture("/nonexistent/fixture.txt"), ConfigError);
}

TEST_CASE("save_fixture never overwrites") {
    auto dir = temp_dir("save");
    auto path = (dir / "f.txt").string();
    auto f = parse_fixture(small_fixture(4));
    save_fixture(f, path);
    std::string before = slurp(path);
    CHECK_THROWS_AS(save_fixture(parse_fixture(small_fixture(5)), path), ConfigError);
    CHECK(slurp(path) == before);
    fs::remove_all(dir);
}

TEST_CASE("fetch retries, caches, and verifies checksums") {
    std::string body = slurp(kFixture);
    LocalServer server(body);
    auto dir = temp_dir("fetch");

    FetchDescriptor d;
    d.base_url = server.url("flaky");
    d.label = "1.0.1.1.1";
    d.cache_dir = dir.string();
    d.backoff_s = 0.01;
    auto f = fetch_fixture(d);
    CHECK(server.flaky_hits == 3);
    CHECK(f.nmax >= 100);
    CHECK(f.checksum() == sha256_hex(body));
    auto cached = dir / "1.0.1.1.1.txt";
    REQUIRE(fs::exists(cached));
    CHECK(slurp(cached.string()) == body);

    // second call is served from the cache without touching the network
    auto t_before = fs::last_write_time(cached);
    d.base_url = server.url("missing");
    auto g = fetch_fixture(d);
    CHECK(g.checksum() == f.checksum());
    CHECK(fs::last_write_time(cached) == t_before);
    CHECK(slurp(cached.string()) == body);

    // a cached file that no longer matches its recorded checksum is rejected, not rewritten
    {
        std::ofstream out(cached, std::ios::binary | std::ios::app);
        out << "\n";
    }
    std::string tampered = slurp(cached.string());
    CHECK_THROWS_WITH_AS(fetch_fixture(d), doctest::Contains("checksum"), ConfigError);
    CHECK(slurp(cached.string()) == tampered);

    FetchDescriptor m = d;
    m.label = "other";
    CHECK_THROWS_WITH_AS(fetch_fixture(m), doctest::Contains("404"), ConfigError);
    m.base_url = server.url("garbage");
    CHECK_THROWS_AS(fetch_fixture(m), ConfigError);
    CHECK_FALSE(fs::exists(dir / "other.txt"));

    FetchDescriptor down = m;
    down.base_url = "http://127.0.0.1:1";
    down.retries = 1;
    down.timeout_s = 0.5;
    CHECK_THROWS_WITH_AS(fetch_fixture(down), doctest::Contains("2 attempts"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("parity and periodicity") {
    const auto& f = level1();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(0.6, 1.6);
    for (int i = 0; i < 20; ++i) {
        cplx z(ux(rng), uy(rng));
        cplx v = eval_phi(f, z);
        CHECK(std::abs(eval_phi(f, -std::conj(z)) - v) <= 1e-10 * std::abs(v) + 1e-22);
        PhiOptions raw;
        raw.pullback = false;
        CHECK(std::abs(eval_phi(f, z + 1.0, raw) - eval_phi(f, z, raw)) <= 1e-12 * eval_phi_detail(f, z, raw).envelope);
    }
}

TEST_CASE("S-invariance without pullback") {
    const auto& f = level1();
    PhiOptions raw;
    raw.pullback = false;
    cplx z(0.2, 0.9);
    cplx v = eval_phi(f, z, raw);
    cplx w = eval_phi(f, -1.0 / z, raw);
    CHECK(std::abs(w - v) / std::abs(v) <= 1e-6);
}

TEST_CASE("eigen residual of the fixture") {
    const auto& f = level1();
    auto r = eigen_residual(f, {0.1, 1.3}, 1e-3);
    CHECK_FALSE(r.ill_conditioned);
    CHECK(r.residual <= 1e-4);
    // order 2: doubling h quadruples the residual, within a factor 1.5
    auto r2 = eigen_residual(f, {0.1, 1.3}, 2e-3);
    double ratio = r2.residual / r.residual;
    CHECK(ratio >= 4.0 / 1.5);
    CHECK(ratio <= 4.0 * 1.5);
}

TEST_CASE("single K-Bessel term is an eigenfunction") {
    auto f = single_term(level1().R);
    auto r = eigen_residual(f, {0.1, 1.3}, 2e-4);
    CHECK(r.residual <= 1e-6);
    CHECK(eigen_residual(f, {0.1, 1.3}, 1e-3).residual / r.residual == doctest::Approx(25.0).epsilon(0.1));
}

TEST_CASE("evaluation is linear in the coefficient table") {
    const auto& f = level1();
    MaassForm g = f;
    for (i64 n = 1; n <= g.nmax; ++n) {
        cplx v = f.a(n) * (n % 3 == 0 ? -0.5 : 1.5);
        g.coeffs[static_cast<std::size_t>(n + g.nmax)] = v;
        g.coeffs[static_cast<std::size_t>(-n + g.nmax)] = v;
    }
    cplx alpha(0.3, -1.1), beta(2.0, 0.25);
    auto h = f.combine(alpha, g, beta);
    for (cplx z : {cplx(0.1, 0.9), cplx(-0.37, 1.2), cplx(0.45, 0.7)}) {
        auto a = eval_phi_detail(f, z), b = eval_phi_detail(g, z);
        cplx lhs = eval_phi(h, z), rhs = alpha * a.value + beta * b.value;
        CHECK(std::abs(lhs - rhs) <= 1e-13 * (std::abs(alpha) * a.envelope + std::abs(beta) * b.envelope));
    }
}

TEST_CASE("truncation changes stay within the tail bound") {
    const auto& f = level1();
    PhiOptions opt;
    opt.tol = 1.0;
    cplx z(0.13, 0.8);
    cplx full = eval_phi(f, z);
    for (i64 M : {10, 15, 20, 30}) {
        opt.M = M;
        auto t = eval_phi_detail(f, z, opt);
        CHECK(std::abs(t.value - full) <= t.tail_bound);
        CHECK(t.tail_bound == doctest::Approx(phi_tail_bound(M, z.imag())));
    }
    CHECK(phi_tail_bound(20, 0.8) < phi_tail_bound(10, 0.8));
}

TEST_CASE("evaluation errors") {
    const auto& f = level1();
    PhiOptions opt;
    opt.M = f.nmax + 1;
    CHECK_THROWS_AS(eval_phi(f, {0.0, 1.0}, opt), std::invalid_argument);
    CHECK_THROWS_AS(eval_phi(f, {0.0, -1.0}), std::invalid_argument);
    PhiOptions raw;
    raw.pullback = false;
    CHECK_THROWS_AS(eval_phi(f, {0.0, 0.01}, raw), PrecisionError);
    // with the pullback the same point is fine
    CHECK(std::isfinite(std::abs(eval_phi(f, {0.0, 0.01}))));
}

TEST_CASE("pullback lands in the fundamental domain") {
    const auto& f = level1();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-3, 3), uy(0.01, 0.3);
    for (int i = 0; i < 50; ++i) {
        cplx w = phi_pullback(f, {ux(rng), uy(rng)});
        CHECK(std::abs(w.real()) <= 0.5 + 1e-12);
        CHECK(std::abs(w) >= 1.0 - 1e-12);
    }
}
