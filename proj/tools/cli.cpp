#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "sks/arith.hpp"
#include "sks/lift.hpp"
#include "sks/maass.hpp"
#include "sks/periods.hpp"
#include "sks/quadforms.hpp"
#include "sks/specfun.hpp"
#include "sks/zeta.hpp"

namespace sks::cli {

namespace fs = std::filesystem;

// ---- configuration -------------------------------------------------------------------

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{"level", "fixture", "fetch",   "fetch_url", "nmax",   "zeta_t",   "tol",
                                               "seed",  "threads", "cache_dir", "out",     "points", "constants"};
    return keys;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value, const std::string& origin) {
    std::istringstream in(value);
    T v{};
    in >> v;
    if (in.fail() || !in.eof()) throw ConfigError(origin + ": " + key + " expects a number, got '" + value + "'");
    return v;
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& value, const std::string& origin) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "level") cfg.level = parse_number<i64>(key, value, origin);
    else if (key == "fixture") cfg.fixture = value;
    else if (key == "fetch") cfg.fetch = value;
    else if (key == "fetch_url") cfg.fetch_url = value;
    else if (key == "nmax") cfg.nmax = parse_number<i64>(key, value, origin);
    else if (key == "zeta_t") cfg.zeta_t = parse_number<i64>(key, value, origin);
    else if (key == "tol") cfg.tol = parse_number<double>(key, value, origin);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value, origin);
    else if (key == "threads") cfg.threads = parse_number<int>(key, value, origin);
    else if (key == "cache_dir") cfg.cache_dir = value;
    else if (key == "out") cfg.out = value;
    else if (key == "points") cfg.points = parse_number<int>(key, value, origin);
    else if (key == "constants") cfg.constants = value;
    else throw ConfigError(origin + ": unknown setting '" + raw_key + "'");

    if (cfg.level < 1) throw ConfigError(origin + ": level must be positive");
    if (cfg.nmax < 1) throw ConfigError(origin + ": nmax must be positive");
    if (cfg.zeta_t < 1) throw ConfigError(origin + ": zeta_t must be positive");
    if (!(cfg.tol > 0)) throw ConfigError(origin + ": tol must be positive");
    if (cfg.threads < 0) throw ConfigError(origin + ": threads must be >= 0");
    if (cfg.points < 1) throw ConfigError(origin + ": points must be positive");
    if (cfg.out != "json" && cfg.out != "csv") throw ConfigError(origin + ": out must be json or csv");
    if (key == "constants") lift_constants_from_string(cfg.constants);
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }
}

void apply_environment(RunConfig& cfg) {
    for (const auto& key : config_keys()) {
        std::string name = "SKS_" + key;
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = std::getenv(name.c_str())) apply_setting(cfg, key, v, name);
    }
}

json RunConfig::to_json() const {
    return {{"level", level},     {"fixture", fixture}, {"fetch", fetch},     {"fetch_url", fetch_url},
            {"nmax", nmax},       {"zeta_t", zeta_t},   {"tol", tol},         {"seed", seed},
            {"threads", threads}, {"cache_dir", cache_dir}, {"out", out},     {"points", points},
            {"constants", constants}};
}

int RunConfig::worker_count() const {
    if (threads > 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---- reports -------------------------------------------------------------------------

json to_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

bool Report::pass() const {
    return std::all_of(records.begin(), records.end(), [](const Record& r) { return r.pass; });
}

json Report::to_json() const {
    json recs = json::array();
    double worst = 0;
    int failed = 0;
    for (const auto& r : records) {
        recs.push_back({{"name", r.name},
                        {"inputs", r.inputs},
                        {"value", r.value},
                        {"residual", r.residual},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass}});
        worst = std::max(worst, r.residual);
        failed += r.pass ? 0 : 1;
    }
    return {{"format", "sks-report"},
            {"version", kReportVersion},
            {"command", command},
            {"arguments", arguments},
            {"config", config.to_json()},
            {"fixture_checksum", checksum},
            {"records", recs},
            {"summary", {{"records", records.size()}, {"failed", failed}, {"max_residual", worst}}},
            {"pass", pass()}};
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string flat(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (!j.is_object()) return j.dump();
    std::string s;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!s.empty()) s += ";";
        s += it.key() + "=" + flat(it.value());
    }
    return s;
}

}  // namespace

std::string Report::to_csv() const {
    std::ostringstream o;
    o << "# format=sks-report version=" << kReportVersion << " command=" << command << "\n";
    o << "# arguments " << flat(arguments) << "\n";
    o << "# config " << flat(config.to_json()) << "\n";
    o << "# fixture_checksum=" << checksum << "\n";
    o << "name,inputs,value_re,value_im,residual,tolerance,pass\n";
    for (const auto& r : records) {
        std::string re, im;
        if (r.value.is_object() && r.value.size() == 2 && r.value.contains("re") && r.value.contains("im")) {
            re = r.value["re"].dump();
            im = r.value["im"].dump();
        } else {
            re = r.value.dump();
        }
        o << csv_field(r.name) << "," << csv_field(flat(r.inputs)) << "," << csv_field(re) << "," << im << ","
          << json(r.residual).dump() << "," << json(r.tolerance).dump() << "," << (r.pass ? "true" : "false") << "\n";
    }
    return o.str();
}

// ---- commands ------------------------------------------------------------------------

namespace {

json form_json(const SymForm& f) { return json::array({f.A, f.B, f.C}); }
json mat_json(const Mat2i& g) { return json::array({g.a, g.b, g.c, g.d}); }

struct Context {
    RunConfig cfg;
    std::ostream& err;
    std::optional<MaassForm> form;

    const MaassForm& fixture() {
        if (form) return *form;
        if (!cfg.fixture.empty()) {
            if (!fs::exists(cfg.fixture))
                throw ConfigError("fixture " + cfg.fixture + " not found; pass --fixture PATH or --fetch LABEL");
            form = load_fixture(cfg.fixture);
        } else if (!cfg.fetch.empty()) {
            if (cfg.fetch_url.empty())
                throw ConfigError("--fetch needs a base URL: set fetch_url in the config, SKS_FETCH_URL or --fetch-url");
            FetchDescriptor d;
            d.base_url = cfg.fetch_url;
            d.label = cfg.fetch;
            d.cache_dir = (fs::path(cfg.cache_dir) / "fixtures").string();
            form = fetch_fixture(d);
        } else if (cfg.level == 1) {
            form = load_fixture(SKS_DATA_DIR "/maass_level1_even.txt");
        } else {
            throw ConfigError("no fixture for level " + std::to_string(cfg.level) +
                              "; pass --fixture PATH or --fetch LABEL");
        }
        if (form->level != cfg.level)
            throw ConfigError("fixture has level " + std::to_string(form->level) + " but --level is " +
                              std::to_string(cfg.level));
        return *form;
    }

    std::string cache_path() const { return (fs::path(cfg.cache_dir) / "periods.csv").string(); }

    PeriodCache open_cache() const {
        std::error_code ec;
        fs::create_directories(cfg.cache_dir, ec);
        if (ec) throw ConfigError("cannot create cache directory " + cfg.cache_dir + ": " + ec.message());
        return PeriodCache(cache_path());
    }

    PeriodOptions period_options() const {
        PeriodOptions p;
        p.rel_tol = cfg.tol;
        return p;
    }

    LiftOptions lift_options() const {
        LiftOptions o;
        o.constants = lift_constants_from_string(cfg.constants);
        o.period = period_options();
        o.threads = cfg.worker_count();
        return o;
    }
};

struct Args {
    i64 target = 0;
    std::string lattice = "LN";
    std::string flavor = "plain";
    i64 character = 0;
    i64 chi = 1;
    i64 prime = 3;
    int count = 0;
    int off = 100;
    double check_tol = -1;
    int side = 1;
    double s_re = 2.0, s_im = 0.0;
    bool cached_only = false;
    i64 psi = 1;
    std::string function = "kbessel";
    double x_min = 0.5, x_max = 20.0;
    int steps = 20;
    std::optional<double> order_re, order_im;
    double kappa = 0.25, mu_re = 0.0, mu_im = 0.0;
    double im = 0.0;
    std::string export_path;
};

DirichletCharacter chi_of(const Context& c, const Args& a) {
    auto chi = DirichletCharacter::conrey(c.cfg.level, a.chi);
    return chi;
}

double pick_tol(const Args& a, double fallback) { return a.check_tol > 0 ? a.check_tol : fallback; }

Report cmd_orbits(Context& c, const Args& a) {
    Report r;
    auto lat = lattice_from_string(a.lattice);
    r.arguments = {{"target", a.target}, {"lattice", to_string(lat)}};
    for (const auto& rep : enumerate_orbits(c.cfg.level, a.target, lat)) {
        json v = {{"form", form_json(rep.form)},
                  {"coords", json::array({rep.coords[0], rep.coords[1], rep.coords[2]})},
                  {"signature", to_string(rep.signature)},
                  {"stabilizer_order", rep.stabilizer_order},
                  {"split", rep.split}};
        if (rep.signature != Signature::indefinite && rep.signature != Signature::degenerate)
            v["heegner"] = to_json(rep.heegner);
        if (rep.automorph) v["automorph"] = mat_json(*rep.automorph);
        double dev = std::abs(static_cast<double>(lattice_invariant(rep.form, rep.N, lat) - a.target));
        r.records.push_back({"orbit", {{"N", rep.N}, {"target", rep.target}, {"lattice", to_string(lat)}}, v, dev, 0.0,
                             dev == 0.0});
    }
    return r;
}

Report cmd_gauss(Context& c, const Args& a) {
    Report r;
    i64 q = c.cfg.level;
    r.arguments = {{"modulus", q}, {"character", a.character}};
    std::vector<DirichletCharacter> chars;
    if (a.character > 0) chars.push_back(DirichletCharacter::conrey(q, a.character));
    else chars = enumerate_characters(q);
    double tol = pick_tol(a, 1e-12);
    for (const auto& chi : chars) {
        cplx t1 = gauss_sum(chi, 1);
        double res = 0;
        for (i64 n = 0; n < q; ++n) {
            // direct sum over residues
            cplx direct = 0;
            for (i64 m = 0; m < q; ++m) direct += chi(m) * e_frac(m * n, q);
            res = std::max(res, std::abs(gauss_sum(chi, n) - direct));
            if (chi.is_primitive() && std::gcd(n, q) == 1)
                res = std::max(res, std::abs(gauss_sum(chi, n) - std::conj(chi(n)) * t1));
        }
        if (chi.is_primitive()) res = std::max(res, std::abs(std::norm(t1) - static_cast<double>(q)));
        json v = {{"tau_1", to_json(t1)}, {"primitive", chi.is_primitive()}};
        if (a.target != 0) v["tau_n"] = to_json(gauss_sum(chi, a.target));
        r.records.push_back({"gauss-sum", {{"character", chi.label()}, {"n", a.target}}, v, res, tol, res <= tol});
    }
    return r;
}

Report cmd_periods(Context& c, const Args& a) {
    Report r;
    const auto& f = c.fixture();
    r.checksum = f.checksum();
    r.arguments = {{"target", a.target}};
    auto cache = c.open_cache();
    auto reps = enumerate_orbits(c.cfg.level, a.target, Lattice::LN);
    auto results = periods_parallel(f, reps, c.period_options(), c.cfg.worker_count());
    double tol = pick_tol(a, 1e-10);
    for (const auto& p : results) {
        cache.insert({f.checksum(), p.rep.N, p.rep.lattice, p.rep.target, p.rep.form}, p.value, p.error_estimate);
        double rel = p.scale > 0 ? p.error_estimate / p.scale : p.error_estimate;
        r.records.push_back({"period",
                             {{"form", form_json(p.rep.form)}, {"target", p.rep.target}},
                             {{"period", to_json(p.value)},
                              {"method", to_string(p.method)},
                              {"error_estimate", p.error_estimate},
                              {"scale", p.scale}},
                             rel,
                             tol,
                             rel <= tol});
    }
    cache.save();
    return r;
}

HalfIntegralForm lift_cached(Context& c, const Args& a, LiftFlavor flavor) {
    const auto& f = c.fixture();
    auto cache = c.open_cache();
    auto F = lift_form(f, chi_of(c, a), c.cfg.nmax, flavor, c.lift_options(), &cache);
    cache.save();
    return F;
}

Report cmd_lift(Context& c, const Args& a) {
    Report r;
    LiftFlavor flavor = a.flavor == "starred" ? LiftFlavor::starred : LiftFlavor::plain;
    if (a.flavor != "plain" && a.flavor != "starred") throw ConfigError("--flavor must be plain or starred");
    auto F = lift_cached(c, a, flavor);
    r.checksum = F.source_checksum;
    r.arguments = {{"flavor", a.flavor}, {"chi", a.chi}, {"export", a.export_path}};
    double cmax = 0;
    for (const auto& v : F.c) cmax = std::max(cmax, std::abs(v));
    double tol = pick_tol(a, 1e-10);
    for (i64 m = 1; m <= F.nmax; ++m)
        for (i64 n : {m, -m}) {
            double err = F.err[static_cast<std::size_t>(n + F.nmax)];
            double rel = cmax > 0 ? err / cmax : err;
            r.records.push_back({"coefficient", {{"n", n}}, to_json(F.coeff(n)), rel, tol, rel <= tol});
        }
    if (!a.export_path.empty()) {
        if (fs::exists(a.export_path)) throw ConfigError("refusing to overwrite " + a.export_path);
        std::ofstream out(a.export_path, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + a.export_path);
        out << export_half_integral(F);
    }
    return r;
}

SampleOptions sample_options(const Context& c, double tol) {
    SampleOptions s;
    s.seed = c.cfg.seed;
    s.points = c.cfg.points;
    s.tol = tol;
    s.threads = c.cfg.worker_count();
    return s;
}

json points_json(const std::vector<cplx>& zs) {
    json a = json::array();
    for (auto z : zs) a.push_back(to_json(z));
    return a;
}

Report cmd_verify_modularity(Context& c, const Args& a) {
    Report r;
    auto F = lift_cached(c, a, LiftFlavor::plain);
    r.checksum = F.source_checksum;
    r.arguments = {{"chi", a.chi}};
    double tol = pick_tol(a, 1e-3);
    auto gens = gamma0_4N_generators(c.cfg.level);
    auto rep = verify_modularity(F, gens, sample_options(c, tol));
    json g = json::array();
    for (const auto& m : gens) g.push_back(mat_json(m));
    r.records.push_back({"modularity",
                         {{"generators", g}, {"points", c.cfg.points}, {"nmax", F.nmax}},
                         {{"accepted", points_json(rep.accepted)}, {"rejected", rep.rejected.size()}, {"floor", rep.floor}},
                         rep.max_residual,
                         tol,
                         rep.max_residual <= tol});
    return r;
}

Report cmd_verify_fg(Context& c, const Args& a) {
    Report r;
    auto F = lift_cached(c, a, LiftFlavor::plain);
    auto G = lift_cached(c, a, LiftFlavor::starred);
    r.checksum = F.source_checksum;
    r.arguments = {{"chi", a.chi}};
    double tol = pick_tol(a, 1e-3);
    auto rep = verify_FG(F, G, sample_options(c, tol));
    r.records.push_back({"F-G",
                         {{"constants", c.cfg.constants}, {"points", c.cfg.points}, {"nmax", F.nmax}},
                         {{"accepted", points_json(rep.accepted)}, {"rejected", rep.rejected.size()}, {"floor", rep.floor}},
                         rep.max_residual,
                         tol,
                         rep.max_residual <= tol});
    return r;
}

Report cmd_verify_fourier_sato(Context& c, const Args& a) {
    Report r;
    i64 N = c.cfg.level, p = a.prime;
    if (!is_prime(p) || std::gcd(N, p) != 1)
        throw ConfigError("--prime must be a prime not dividing the level, got " + std::to_string(p));
    int count = a.count > 0 ? a.count : 25;
    r.arguments = {{"prime", p}, {"count", count}, {"off_lattice", a.off}};
    double tol = pick_tol(a, 1e-9);
    std::mt19937_64 rng(c.cfg.seed);
    std::uniform_int_distribution<i64> uw(-12, 12), uv(-30, 30);
    int workers = c.cfg.worker_count();
    auto chis = enumerate_characters(N), psis = enumerate_characters(p);
    for (const auto& chi : chis)
        for (const auto& psi : psis) {
            double res = 0;
            for (int i = 0; i < count; ++i) {
                HalfIntegralPoint w{uw(rng), uw(rng), uw(rng)};
                auto fsr = fourier_sato_transform(N, p, chi, psi, {w.w1, w.w2, w.w3, N * p}, workers);
                res = std::max(res, std::abs(fsr.value - fourier_sato_closed_form(N, p, chi, psi, w)));
            }
            r.records.push_back({"closed-form",
                                 {{"N", N}, {"r", p}, {"chi", chi.label()}, {"psi", psi.label()}, {"samples", count}},
                                 json(nullptr), res, tol, res <= tol});
        }
    double zres = 0;
    for (int i = 0; i < a.off;) {
        RationalSym vs{uv(rng), uv(rng), uv(rng), N * p * (2 + i % 2)};
        if (in_dual_lattice(vs, N, p)) continue;
        const auto& chi = chis[static_cast<std::size_t>(i) % chis.size()];
        const auto& psi = psis[static_cast<std::size_t>(i) % psis.size()];
        zres = std::max(zres, std::abs(fourier_sato_transform(N, p, chi, psi, vs, workers).value));
        ++i;
    }
    r.records.push_back({"support", {{"N", N}, {"r", p}, {"samples", a.off}}, json(nullptr), zres, 1e-12, zres <= 1e-12});
    return r;
}

Report cmd_verify_matrix_identity(Context& c, const Args& a) {
    Report r;
    int count = a.count > 0 ? a.count : 20;
    r.arguments = {{"count", count}};
    double tol = pick_tol(a, 1e-10);
    std::mt19937_64 rng(c.cfg.seed);
    std::uniform_real_distribution<double> re(0.05, 0.95), im(-15, 15), sre(-1.0, 2.5), sim(-3, 3);
    int done = 0, attempts = 0;
    while (done < count) {
        if (++attempts > 100 * count) throw PrecisionError("matrix identity: too many pole-adjacent samples", done);
        cplx lambda(re(rng), im(rng)), s(sre(rng), sim(rng));
        IdentityCheck chk;
        try {
            chk = kernel_identity_check(lambda, s, c.cfg.level);
        } catch (const PoleProximity&) {
            continue;
        }
        r.records.push_back({"identity",
                             {{"lambda", to_json(lambda)}, {"s", to_json(s)}, {"N", c.cfg.level}},
                             {{"verbatim_residual", chk.verbatim_residual}},
                             chk.residual,
                             tol,
                             chk.residual <= tol});
        ++done;
    }
    return r;
}

ZetaFlavor zeta_flavor(const std::string& s) {
    if (s == "plain") return ZetaFlavor::plain;
    if (s == "starred") return ZetaFlavor::starred;
    if (s == "twisted") return ZetaFlavor::twisted;
    if (s == "starred_twisted" || s == "starred-twisted") return ZetaFlavor::starred_twisted;
    throw ConfigError("--flavor must be plain, starred, twisted or starred-twisted");
}

Report cmd_zeta_eval(Context& c, const Args& a) {
    Report r;
    const auto& f = c.fixture();
    r.checksum = f.checksum();
    ZetaRequest req;
    req.flavor = zeta_flavor(a.flavor);
    if (a.side != 1 && a.side != -1) throw ConfigError("--side must be 1 or -1");
    req.side = a.side;
    req.s = {a.s_re, a.s_im};
    req.T = c.cfg.zeta_t;
    req.chi = chi_of(c, a);
    if (req.flavor == ZetaFlavor::twisted || req.flavor == ZetaFlavor::starred_twisted) {
        if (!is_prime(a.prime) || std::gcd(a.prime, c.cfg.level) != 1)
            throw ConfigError("--prime must be a prime not dividing the level");
        req.psi = DirichletCharacter::conrey(a.prime, a.psi);
    }
    req.compute_missing = !a.cached_only;
    r.arguments = {{"flavor", to_string(req.flavor)}, {"side", a.side}, {"s", to_json(req.s)},
                   {"chi", a.chi},                    {"prime", a.prime}, {"psi", a.psi}, {"cached_only", a.cached_only}};
    auto cache = c.open_cache();
    ZetaValue z;
    try {
        z = zeta_series_eval(f, cache, req, c.period_options());
    } catch (const CacheMiss& e) {
        throw ConfigError(std::string(e.what()) + "; run without --cached-only to compute it");
    }
    cache.save();
    double res = std::abs(z.value) > 0 ? std::abs(z.last_term) / std::abs(z.value) : std::abs(z.last_term);
    double tol = pick_tol(a, 1e-3);
    r.records.push_back({"zeta",
                         {{"T", req.T}},
                         {{"value", to_json(z.value)}, {"last_term", to_json(z.last_term)}, {"tail_warning", z.tail_warning}},
                         res,
                         tol,
                         res <= tol});
    return r;
}

Report cmd_specfun_table(Context& c, const Args& a) {
    Report r;
    if (a.steps < 2) throw ConfigError("--steps must be at least 2");
    std::vector<double> xs;
    for (int i = 0; i < a.steps; ++i) xs.push_back(a.x_min + (a.x_max - a.x_min) * i / (a.steps - 1));
    if (a.function == "kbessel") {
        cplx nu(a.order_re.value_or(0.0), a.order_im ? *a.order_im : c.fixture().R);
        if (!a.order_im) r.checksum = c.fixture().checksum();
        r.arguments = {{"function", a.function}, {"order", to_json(nu)}};
        std::vector<cplx> vals;
        double big = 0;
        for (double x : xs) {
            vals.push_back(kbessel(nu, x));
            big = std::max(big, std::abs(vals.back()));
        }
        // K_nu(x) is real for real x when nu is real or purely imaginary
        bool real_case = nu.real() == 0.0 || nu.imag() == 0.0;
        double tol = pick_tol(a, 1e-13);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double res = real_case && big > 0 ? std::abs(vals[i].imag()) / big : 0.0;
            r.records.push_back({"K", {{"x", xs[i]}}, to_json(vals[i]), res, tol, res <= tol});
        }
    } else if (a.function == "whittaker") {
        cplx mu(a.mu_re, a.mu_im);
        r.arguments = {{"function", a.function}, {"kappa", a.kappa}, {"mu", to_json(mu)}};
        double tol = pick_tol(a, 1e-5);
        for (double x : xs) {
            if (!(x > 0)) throw ConfigError("whittaker table needs x > 0");
            cplx w = whittaker_w(a.kappa, mu, x);
            // W'' + (-1/4 + kappa/x + (1/4 - mu^2)/x^2) W = 0; W'' by Richardson on steps h, h/2
            auto second = [&](double h) {
                return (whittaker_w(a.kappa, mu, x + h) - 2.0 * w + whittaker_w(a.kappa, mu, x - h)) / (h * h);
            };
            double h = 1e-3 * x;
            cplx w2 = (4.0 * second(0.5 * h) - second(h)) / 3.0;
            cplx q = -0.25 + a.kappa / x + (0.25 - mu * mu) / (x * x);
            double scale = std::abs(w2) + std::abs(q * w);
            double res = scale > 0 ? std::abs(w2 + q * w) / scale : 0.0;
            r.records.push_back({"W", {{"x", x}}, to_json(w), res, tol, res <= tol});
        }
    } else if (a.function == "gamma") {
        r.arguments = {{"function", a.function}, {"im", a.im}};
        double tol = pick_tol(a, 1e-11);
        for (double x : xs) {
            cplx s(x, a.im);
            cplx g = complex_gamma(s);
            // reflection: Gamma(s) Gamma(1 - s) sin(pi s) = pi
            double res = std::abs(g * complex_gamma(1.0 - s) * std::sin(kPi * s) - kPi) / kPi;
            r.records.push_back({"Gamma", {{"s", to_json(s)}}, to_json(g), res, tol, res <= tol});
        }
    } else {
        throw ConfigError("--function must be kbessel, whittaker or gamma");
    }
    return r;
}

Report cmd_cache_gc(Context& c, const Args&) {
    Report r;
    if (!fs::is_directory(c.cfg.cache_dir)) throw ConfigError("cache directory " + c.cfg.cache_dir + " does not exist");
    std::set<std::string> keep{c.fixture().checksum()};
    r.checksum = c.fixture().checksum();
    fs::path fetched = fs::path(c.cfg.cache_dir) / "fixtures";
    if (fs::is_directory(fetched))
        for (const auto& ent : fs::directory_iterator(fetched)) {
            if (ent.path().extension() != ".txt") continue;
            try {
                keep.insert(load_fixture(ent.path().string()).checksum());
            } catch (const ConfigError& e) {
                c.err << "sks: cache-gc: ignoring unreadable fixture " << ent.path().string() << ": " << e.what() << "\n";
            }
        }
    PeriodCache cache(c.cache_path());
    std::size_t before = cache.size();
    auto removed = cache.prune_except(keep);
    for (const auto& k : removed)
        c.err << "sks: cache-gc: removed period entry checksum=" << k.checksum << " N=" << k.N
              << " lattice=" << to_string(k.lattice) << " target=" << k.target << " form=" << to_string(k.form) << "\n";
    if (!removed.empty()) cache.save();
    r.arguments = {{"cache", c.cache_path()}};
    r.records.push_back({"cache-gc",
                         {{"known_checksums", keep.size()}},
                         {{"removed", removed.size()}, {"kept", before - removed.size()}},
                         0.0,
                         0.0,
                         true});
    return r;
}

using Command = std::function<Report(Context&, const Args&)>;

}  // namespace

// ---- entry point ---------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shintani-type lift toolkit: orbits, periods, lifted half-integral weight forms and their checks", "sks"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", "sks report format " + std::to_string(kReportVersion));

    std::string config_file, output;
    app.add_option("--config", config_file, "key = value file (overridden by SKS_* variables and flags)");
    app.add_option("--output", output, "write the report here instead of stdout");
    std::map<std::string, std::string> flag_values;
    std::map<std::string, CLI::Option*> flag_opts;
    const std::map<std::string, std::string> help{
        {"level", "level N of the Maass form"},
        {"fixture", "Maass form coefficient file"},
        {"fetch", "label of a form to download"},
        {"fetch_url", "base URL for --fetch"},
        {"nmax", "largest |n| of the lifted coefficients"},
        {"zeta_t", "truncation of zeta series"},
        {"tol", "quadrature tolerance"},
        {"seed", "seed for sample points"},
        {"threads", "worker threads, 0 for all cores"},
        {"cache_dir", "directory for period cache and fetched fixtures"},
        {"out", "json or csv"},
        {"points", "sample points per verification"},
        {"constants", "starred lift constants: displayed or matched"}};
    for (const auto& key : config_keys()) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        flag_opts[key] = app.add_option("--" + flag, flag_values[key], help.at(key));
    }

    Args a;
    std::map<std::string, Command> commands;
    auto add = [&](const std::string& name, const std::string& desc, Command fn) {
        commands[name] = std::move(fn);
        return app.add_subcommand(name, desc);
    };
    auto target_opt = [&](CLI::App* s, bool required) {
        auto* o = s->add_option("--target", a.target, "orbit invariant d_N(v), or n for gauss");
        if (required) o->required();
    };
    auto tol_opt = [&](CLI::App* s) { s->add_option("--check-tol", a.check_tol, "pass threshold for the residual"); };
    auto chi_opt = [&](CLI::App* s) { s->add_option("--chi", a.chi, "Conrey index of the character mod N")->capture_default_str(); };

    auto* s = add("orbits", "Gamma_0(N) orbit representatives with given invariant", cmd_orbits);
    target_opt(s, true);
    s->add_option("--lattice", a.lattice, "LN or VZ")->capture_default_str();

    s = add("gauss", "Gauss sums of the characters mod --level, with consistency checks", cmd_gauss);
    target_opt(s, false);
    s->add_option("--character", a.character, "Conrey index (all characters if omitted)");
    tol_opt(s);

    s = add("periods", "periods of the Maass form over the orbits with given invariant", cmd_periods);
    target_opt(s, true);
    tol_opt(s);

    s = add("lift", "coefficients of the lifted weight 1/2 form", cmd_lift);
    s->add_option("--flavor", a.flavor, "plain or starred")->capture_default_str();
    s->add_option("--export", a.export_path, "write the lifted form in the export format");
    chi_opt(s);
    tol_opt(s);

    s = add("verify-modularity", "weight 1/2 modularity of the lift over Gamma_0(4N) generators", cmd_verify_modularity);
    chi_opt(s);
    tol_opt(s);

    s = add("verify-fg", "F(-1/(4Nz)) (sqrt(N) z)^(-1/2) = e[-1/8] G(z)", cmd_verify_fg);
    chi_opt(s);
    tol_opt(s);

    s = add("verify-fourier-sato", "finite Fourier transform against its closed form", cmd_verify_fourier_sato);
    s->add_option("--prime", a.prime, "twisting prime r")->capture_default_str();
    s->add_option("--count", a.count, "random points per character pair (default 25)");
    s->add_option("--off-lattice", a.off, "random points off the dual lattice")->capture_default_str();
    tol_opt(s);

    s = add("verify-matrix-identity", "zeta and converse-theorem functional equation kernels agree", cmd_verify_matrix_identity);
    s->add_option("--count", a.count, "random (lambda, s) samples (default 20)");
    tol_opt(s);

    s = add("zeta-eval", "partial sum of a zeta series over the orbits", cmd_zeta_eval);
    s->add_option("--flavor", a.flavor, "plain, starred, twisted or starred-twisted")->capture_default_str();
    s->add_option("--side", a.side, "1 or -1")->capture_default_str();
    s->add_option("--s-re", a.s_re, "Re s")->capture_default_str();
    s->add_option("--s-im", a.s_im, "Im s")->capture_default_str();
    s->add_option("--prime", a.prime, "twisting prime r")->capture_default_str();
    s->add_option("--psi", a.psi, "Conrey index of psi mod r")->capture_default_str();
    s->add_flag("--cached-only", a.cached_only, "fail instead of computing missing periods");
    chi_opt(s);
    tol_opt(s);

    s = add("specfun-table", "tables of K_nu, W_{kappa,mu} or Gamma with self-checks", cmd_specfun_table);
    s->add_option("--function", a.function, "kbessel, whittaker or gamma")->capture_default_str();
    s->add_option("--x-min", a.x_min)->capture_default_str();
    s->add_option("--x-max", a.x_max)->capture_default_str();
    s->add_option("--steps", a.steps)->capture_default_str();
    s->add_option("--order-re", a.order_re, "Re nu for kbessel");
    s->add_option("--order-im", a.order_im, "Im nu for kbessel (default: R of the fixture)");
    s->add_option("--kappa", a.kappa)->capture_default_str();
    s->add_option("--mu-re", a.mu_re)->capture_default_str();
    s->add_option("--mu-im", a.mu_im)->capture_default_str();
    s->add_option("--im", a.im, "Im s for gamma")->capture_default_str();
    tol_opt(s);

    add("cache-gc", "drop cached periods whose fixture checksum is no longer known", cmd_cache_gc);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? ExitCode::ok : ExitCode::config_error;
    }

    try {
        Context ctx{RunConfig{}, err, std::nullopt};
        if (config_file.empty())
            if (const char* p = std::getenv("SKS_CONFIG")) config_file = p;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw ConfigError("cannot open config file " + config_file);
            std::stringstream ss;
            ss << in.rdbuf();
            apply_config_text(ctx.cfg, ss.str(), config_file);
        }
        apply_environment(ctx.cfg);
        for (const auto& key : config_keys())
            if (flag_opts[key]->count() > 0) apply_setting(ctx.cfg, key, flag_values[key], "--" + key);

        std::string name = app.get_subcommands().front()->get_name();
        Report report = commands.at(name)(ctx, a);
        report.command = name;
        report.config = ctx.cfg;
        std::string text = ctx.cfg.out == "csv" ? report.to_csv() : report.to_json().dump(2) + "\n";
        if (output.empty()) {
            out << text;
        } else {
            std::ofstream f(output, std::ios::binary);
            if (!f) throw ConfigError("cannot write " + output);
            f << text;
        }
        if (!report.pass()) {
            err << "sks: " << name << ": check failed\n";
            return ExitCode::check_failed;
        }
        return ExitCode::ok;
    } catch (const ConfigError& e) {
        err << "sks: configuration error: " << e.what() << "\n";
        return ExitCode::config_error;
    } catch (const PrecisionError& e) {
        err << "sks: precision unreachable: " << e.what() << " (achieved " << e.achieved << ")\n";
        return ExitCode::precision_error;
    } catch (const std::invalid_argument& e) {
        err << "sks: invalid input: " << e.what() << "\n";
        return ExitCode::config_error;
    } catch (const std::exception& e) {
        err << "sks: " << e.what() << "\n";
        return ExitCode::check_failed;
    }
}

}  // namespace sks::cli
