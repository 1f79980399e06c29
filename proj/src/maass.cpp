#include "sks/maass.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "sks/specfun.hpp"

namespace sks {

namespace fs = std::filesystem;

std::string to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

cplx MaassForm::a(i64 n) const {
    if (n == 0 || n > nmax || n < -nmax) return 0.0;
    return coeffs[static_cast<std::size_t>(n + nmax)];
}

DirichletCharacter MaassForm::character() const { return character_from_label(char_label); }

std::string MaassForm::checksum() const { return sha256_hex(serialize_fixture(*this)); }

MaassForm MaassForm::combine(cplx alpha, const MaassForm& other, cplx beta) const {
    if (other.level != level || other.R != R || other.parity != parity)
        throw std::invalid_argument("combine: forms differ in level, R or parity");
    MaassForm out = *this;
    out.nmax = std::min(nmax, other.nmax);
    out.coeffs.assign(static_cast<std::size_t>(2 * out.nmax + 1), 0.0);
    out.coeff_text.clear();
    for (i64 n = -out.nmax; n <= out.nmax; ++n)
        if (n != 0) out.coeffs[static_cast<std::size_t>(n + out.nmax)] = alpha * a(n) + beta * other.a(n);
    out.normalization = "combination";
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("fixture: bad number '" + s + "' in " + what);
    }
    if (pos != s.size()) throw ConfigError("fixture: bad number '" + s + "' in " + what);
    return v;
}

i64 parse_int(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    long long v;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("fixture: bad integer '" + s + "' in " + what);
    }
    if (pos != s.size()) throw ConfigError("fixture: bad integer '" + s + "' in " + what);
    return v;
}

}  // namespace

MaassForm parse_fixture(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::map<std::string, std::string> header;
    const std::vector<std::string> keys{"format", "level", "R", "parity", "char", "nmax"};
    MaassForm f;
    std::map<i64, std::pair<cplx, std::string>> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq != std::string::npos) {
            if (!rows.empty()) throw ConfigError("fixture: header line after data at line " + std::to_string(lineno));
            header[line.substr(0, eq)] = line.substr(eq + 1);
            continue;
        }
        std::istringstream ls(line);
        std::string sn, sre, sim, extra;
        if (!(ls >> sn >> sre >> sim) || (ls >> extra))
            throw ConfigError("fixture: malformed data line " + std::to_string(lineno));
        i64 n = parse_int(sn, "line " + std::to_string(lineno));
        if (n == 0) throw ConfigError("fixture: a(0) is not allowed");
        if (rows.count(n)) throw ConfigError("fixture: duplicate coefficient n=" + sn);
        cplx v{parse_double(sre, "a(" + sn + ")"), parse_double(sim, "a(" + sn + ")")};
        rows[n] = {v, sre + " " + sim};
    }
    for (const auto& k : keys)
        if (!header.count(k)) throw ConfigError("fixture: missing header field '" + k + "'");
    if (header.size() != keys.size()) throw ConfigError("fixture: unknown header field");
    if (header["format"] != "maass-v1") throw ConfigError("fixture: unsupported format " + header["format"]);
    f.level = parse_int(header["level"], "level");
    if (f.level < 1) throw ConfigError("fixture: level must be positive");
    f.R_text = header["R"];
    f.R = parse_double(f.R_text, "R");
    if (header["parity"] == "even") f.parity = Parity::even;
    else if (header["parity"] == "odd") f.parity = Parity::odd;
    else throw ConfigError("fixture: parity must be even or odd");
    f.char_label = header["char"];
    auto chi = character_from_label(f.char_label);
    if (chi.modulus() != f.level) throw ConfigError("fixture: character modulus differs from level");
    f.nmax = parse_int(header["nmax"], "nmax");
    if (f.nmax < 1) throw ConfigError("fixture: nmax must be positive");

    f.coeffs.assign(static_cast<std::size_t>(2 * f.nmax + 1), 0.0);
    f.coeff_text.assign(f.coeffs.size(), "");
    for (i64 n = -f.nmax; n <= f.nmax; ++n) {
        if (n == 0) continue;
        auto it = rows.find(n);
        if (it == rows.end()) throw ConfigError("fixture: gap, a(" + std::to_string(n) + ") missing below nmax");
        f.coeffs[static_cast<std::size_t>(n + f.nmax)] = it->second.first;
        f.coeff_text[static_cast<std::size_t>(n + f.nmax)] = it->second.second;
    }
    if (rows.size() != static_cast<std::size_t>(2 * f.nmax))
        throw ConfigError("fixture: coefficients beyond nmax");

    double sign = f.parity == Parity::even ? 1.0 : -1.0;
    for (i64 n = 1; n <= f.nmax; ++n) {
        cplx p = f.a(n), m = f.a(-n);
        if (std::abs(m - sign * p) > 1e-10 * std::max(1.0, std::abs(p)))
            throw ConfigError("fixture: a(-" + std::to_string(n) + ") inconsistent with parity");
    }
    if (coefficient_growth(f) > 10.0) throw ConfigError("fixture: coefficients exceed 10 sqrt(n)");
    return f;
}

std::string serialize_fixture(const MaassForm& f) {
    std::string out;
    out += "format=maass-v1\n";
    out += "level=" + std::to_string(f.level) + "\n";
    out += "R=" + (f.R_text.empty() ? format_double(f.R) : f.R_text) + "\n";
    out += "parity=" + to_string(f.parity) + "\n";
    out += "char=" + f.char_label + "\n";
    out += "nmax=" + std::to_string(f.nmax) + "\n";
    bool raw = f.coeff_text.size() == f.coeffs.size();
    for (i64 n = -f.nmax; n <= f.nmax; ++n) {
        if (n == 0) continue;
        auto i = static_cast<std::size_t>(n + f.nmax);
        out += std::to_string(n) + " ";
        if (raw && !f.coeff_text[i].empty()) out += f.coeff_text[i];
        else out += format_double(f.coeffs[i].real()) + " " + format_double(f.coeffs[i].imag());
        out += "\n";
    }
    return out;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::mutex& fixture_write_mutex() {
    static std::mutex m;
    return m;
}

void write_new_file(const fs::path& path, const std::string& bytes) {
    if (fs::exists(path)) throw ConfigError("refusing to overwrite existing file " + path.string());
    fs::path tmp = path;
    tmp += ".part";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << bytes;
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace

MaassForm load_fixture(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("fixture not found: " + path + " (pass --fixture or a fetch descriptor)");
    return parse_fixture(read_file(path));
}

void save_fixture(const MaassForm& f, const std::string& path) {
    std::lock_guard lock(fixture_write_mutex());
    write_new_file(path, serialize_fixture(f));
}

MaassForm fetch_fixture(const FetchDescriptor& desc) {
    if (desc.label.empty()) throw ConfigError("fetch: empty form label");
    if (desc.cache_dir.empty()) throw ConfigError("fetch: cache directory required");
    std::string safe = desc.label;
    for (char& c : safe)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_') c = '_';
    fs::path dir(desc.cache_dir);
    fs::path file = dir / (safe + ".txt");
    fs::path sumfile = dir / (safe + ".sha256");

    std::lock_guard lock(fixture_write_mutex());
    if (fs::exists(file)) {
        std::string bytes = read_file(file.string());
        std::string sum = sha256_hex(bytes);
        if (fs::exists(sumfile)) {
            std::string recorded = read_file(sumfile.string());
            while (!recorded.empty() && std::isspace(static_cast<unsigned char>(recorded.back()))) recorded.pop_back();
            if (recorded != sum) throw ConfigError("fetch: checksum mismatch on cached fixture " + file.string());
        }
        return parse_fixture(bytes);
    }

    auto scheme_end = desc.base_url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("fetch: base URL needs a scheme: " + desc.base_url);
    auto path_start = desc.base_url.find('/', scheme_end + 3);
    std::string host = desc.base_url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "" : desc.base_url.substr(path_start);
    if (path.empty() || path.back() != '/') path += '/';
    path += desc.label;

    httplib::Client cli(host);
    auto secs = std::chrono::duration<double>(desc.timeout_s);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    cli.set_follow_location(true);

    std::string last_error = "no attempt";
    double wait = desc.backoff_s;
    for (int attempt = 0; attempt <= desc.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(wait));
            wait *= 2;
        }
        auto res = cli.Get(path);
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw ConfigError("fetch: HTTP " + std::to_string(res->status) + " for " + host + path);
        MaassForm f = parse_fixture(res->body);
        fs::create_directories(dir);
        write_new_file(file, res->body);
        write_new_file(sumfile, sha256_hex(res->body) + "\n");
        return f;
    }
    throw ConfigError("fetch: giving up on " + host + path + " after " + std::to_string(desc.retries + 1) +
                      " attempts: " + last_error);
}

double coefficient_growth(const MaassForm& f) {
    double g = 0.0;
    for (i64 n = 1; n <= f.nmax; ++n) {
        double s = std::sqrt(static_cast<double>(n));
        g = std::max({g, std::abs(f.a(n)) / s, std::abs(f.a(-n)) / s});
    }
    return g;
}

namespace {

std::shared_ptr<const KBesselTable> table_for(double R) {
    static std::mutex m;
    static std::map<double, std::shared_ptr<const KBesselTable>> tables;
    std::lock_guard lock(m);
    auto& t = tables[R];
    if (!t) t = std::make_shared<const KBesselTable>(R);
    return t;
}

}  // namespace

double phi_tail_bound(i64 M, double y) {
    double q = std::exp(-2.0 * kPi * y);
    return 10.0 * std::exp(-2.0 * kPi * static_cast<double>(M + 1) * y) / (1.0 - q);
}

cplx phi_pullback(const MaassForm& f, cplx z) {
    double x = z.real(), y = z.imag();
    for (int it = 0; it < 10000; ++it) {
        x -= std::round(x);
        if (f.level != 1) break;
        double r2 = x * x + y * y;
        if (r2 >= 1.0 - 1e-15) break;
        x = -x / r2;
        y = y / r2;
    }
    return {x, y};
}

PhiEval eval_phi_detail(const MaassForm& f, cplx z, const PhiOptions& opt) {
    if (!(z.imag() > 0)) throw std::invalid_argument("eval_phi: Im z must be positive");
    i64 M = opt.M < 0 ? f.nmax : opt.M;
    if (M > f.nmax) throw std::invalid_argument("eval_phi: truncation M exceeds nmax");
    cplx w = opt.pullback ? phi_pullback(f, z) : cplx{std::fmod(z.real(), 1.0), z.imag()};
    double x = w.real(), y = w.imag();
    auto table = table_for(f.R);
    double sy = std::sqrt(y);
    double q = 1.0 / (1.0 - std::exp(-2.0 * kPi * y));
    cplx sum = 0.0;
    double env = 0.0;
    i64 last = M;
    cplx step = e(x), ph = 1.0;
    for (i64 n = 1; n <= M; ++n) {
        double arg = 2.0 * kPi * static_cast<double>(n) * y;
        ph *= step;
        if (n % 64 == 0) ph = e(static_cast<double>(n) * x);
        double k = (*table)(arg);
        cplx term = sy * k * (f.a(n) * ph + f.a(-n) * std::conj(ph));
        sum += term;
        env += sy * std::abs(k) * (std::abs(f.a(n)) + std::abs(f.a(-n)));
        // the a priori bound of everything beyond n is negligible against the envelope
        if (arg > f.R + 10.0 && env > 0 && 10.0 * std::exp(-arg) * q < 1e-18 * env) {
            last = n;
            break;
        }
    }
    double tail = last == M ? phi_tail_bound(M, y) : 10.0 * std::exp(-2.0 * kPi * static_cast<double>(last) * y) * q;
    if (tail > opt.tol * std::max(env, 1e-300))
        throw PrecisionError("eval_phi: truncation bound " + std::to_string(tail) + " exceeds tolerance at y=" +
                                 std::to_string(y),
                             tail / std::max(env, 1e-300));
    return {sum, tail, env};
}

cplx eval_phi(const MaassForm& f, cplx z, const PhiOptions& opt) { return eval_phi_detail(f, z, opt).value; }

EigenResidual eigen_residual(const MaassForm& f, cplx z, double h, const PhiOptions& opt) {
    auto c = eval_phi_detail(f, z, opt);
    cplx xp = eval_phi(f, z + h, opt), xm = eval_phi(f, z - h, opt);
    cplx yp = eval_phi(f, z + kI * h, opt), ym = eval_phi(f, z - kI * h, opt);
    double y = z.imag();
    cplx lap = -y * y * (xp + xm + yp + ym - 4.0 * c.value) / (h * h);
    double ev = f.eigenvalue();
    double res = std::abs(lap - ev * c.value) / (ev * std::abs(c.value));
    return {res, std::abs(c.value) < 1e-8 * c.envelope};
}

}  // namespace sks
