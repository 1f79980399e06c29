#include "sks/specfun.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "sks/quadrature.hpp"

namespace sks {

namespace {

constexpr double kMaxImagOrder = 100.0;

// Lanczos g = 7, n = 9
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

cplx log_gamma_right(cplx s) {
    // Re s >= 1/2
    s -= 1.0;
    cplx x = kLanczos[0];
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (s + static_cast<double>(i));
    cplx t = s + 7.5;
    return 0.5 * std::log(2 * kPi) + (s + 0.5) * std::log(t) - t + std::log(x);
}

bool is_pole(cplx s) {
    return s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real());
}

}  // namespace

cplx log_gamma(cplx s) {
    if (is_pole(s)) throw std::invalid_argument("Gamma has a pole at a nonpositive integer");
    if (s.real() >= 0.5) return log_gamma_right(s);
    // reflection; log sin computed stably for large |Im s|
    cplx ps = kPi * s;
    cplx log_sin;
    if (ps.imag() > 30.0) {
        // keep the dominant exponential of sin z = (e^{iz} - e^{-iz}) / 2i
        log_sin = -kI * ps + std::log(1.0 - std::exp(2.0 * kI * ps)) + std::log(0.5 * kI);
    } else if (ps.imag() < -30.0) {
        log_sin = kI * ps + std::log(1.0 - std::exp(-2.0 * kI * ps)) + std::log(-0.5 * kI);
    } else {
        log_sin = std::log(std::sin(ps));
    }
    return std::log(kPi) - log_sin - log_gamma_right(1.0 - s);
}

cplx complex_gamma(cplx s) {
    if (is_pole(s)) throw std::invalid_argument("Gamma has a pole at a nonpositive integer");
    if (s.real() >= 0.5) return std::exp(log_gamma_right(s));
    if (std::abs(s.imag()) < 30.0) return kPi / (std::sin(kPi * s) * std::exp(log_gamma_right(1.0 - s)));
    return std::exp(log_gamma(s));
}

// ---- K-Bessel ----

cplx kbessel(cplx nu, double y) {
    if (!(y > 0.0) || !std::isfinite(y)) throw std::invalid_argument("kbessel needs y > 0");
    if (std::abs(nu.imag()) > kMaxImagOrder) throw UnsupportedDomain("kbessel: |Im nu| > 100 is unsupported");
    if (std::abs(nu.real()) > 50.0) throw UnsupportedDomain("kbessel: |Re nu| > 50 is unsupported");
    if (nu.real() < 0) nu = -nu;
    if (nu.imag() < 0) return std::conj(kbessel(std::conj(nu), y));
    const double R = nu.imag(), nr = nu.real();

    // steepest-descent shift of the line t -> t + i alpha
    double delta = R > 0 ? std::min(0.5, 3.0 / R) : 0.5;
    double alpha = std::clamp(std::asinh(nu / y).imag(), 0.0, kPi / 2 - delta);
    const double ca = std::cos(alpha);

    auto log_mag = [&](double t) { return -y * std::cosh(t) * ca + nr * t - R * alpha; };
    double t_peak = nr > 0 ? std::asinh(nr / (y * ca)) : 0.0;
    double shift = log_mag(t_peak);
    auto edge = [&](double dir) {
        double step = 0.5, t = t_peak;
        while (log_mag(t + dir * step) - shift > -48.0) {
            t += dir * step;
            step *= 1.5;
        }
        return t + dir * step;
    };
    double lo = edge(-1.0), hi = edge(1.0);

    auto f = [&](double t) {
        cplx w(t, alpha);
        return 0.5 * std::exp(-y * std::cosh(w) + nu * w - shift);
    };
    std::vector<double> breaks;
    for (double b = std::ceil(lo); b < hi; b += 1.0) breaks.push_back(b);
    QuadOptions opt;
    opt.rel_tol = 1e-14;
    opt.l1_tol = 1e-16;
    opt.max_intervals = 20000;
    auto r = integrate(f, lo, hi, opt, breaks);
    if (!r.converged) throw PrecisionError("kbessel quadrature did not converge", r.error / std::abs(r.value));
    cplx v = r.value * std::exp(shift);
    if (nr == 0.0 || R == 0.0) v = v.real();
    return v;
}

// ---- Whittaker W ----

namespace {

// W_{kappa,mu}(x) from
//   Gamma(mu - kappa + 1/2) W = x^{mu+1/2} e^{-x/2} int_0^inf exp(-x sinh^2(w/2)) (sinh(w)/2)^{2mu} tanh(w/2)^{-2kappa} dw
// on a path through the saddle; requires Re mu >= 0, Im mu >= 0, Re(mu) - kappa + 1/2 > 0.
cplx whittaker_integral(double kappa, cplx mu, double x) {
    const double T = mu.imag();
    auto log_f = [&](cplx w) {
        cplx sh = std::sinh(0.5 * w);
        return -x * sh * sh + 2.0 * mu * std::log(std::sinh(w) * 0.5) - 2.0 * kappa * std::log(std::tanh(0.5 * w));
    };

    // path: 0 -> corner (a ray), then horizontally to +infinity at the saddle height
    cplx C = (2.0 * mu + std::sqrt(4.0 * mu * mu + x * x)) / x;
    cplx ws = std::acosh(C);
    double delta = T > 0 ? std::min(0.5, 1.5 / T) : 0.5;
    double height = std::clamp(ws.imag(), 0.0, kPi / 2 - delta);
    const cplx w_end = height > 0 ? cplx(0.0, height) : cplx(std::max(std::abs(ws), std::min(1.0, 6.0 / std::sqrt(x))), 0.0);
    const double r = std::abs(w_end);
    const double theta = std::arg(w_end);
    const double eps = 1e-5 * std::min(1.0, r);
    const double S = std::log(r / eps);

    // scale from samples along both legs
    double shift = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 64; ++i) {
        cplx w = w_end * std::exp(-S * i / 64.0);
        shift = std::max(shift, (log_f(w) + std::log(w)).real());
    }
    double u_hi = 1.0;
    for (;;) {
        double lm = log_f(w_end + u_hi).real();
        shift = std::max(shift, lm);
        if (lm - shift < -50.0) break;
        u_hi *= 1.5;
        if (u_hi > 200.0) throw PrecisionError("whittaker_w: integrand does not decay", 1.0);
    }
    for (int i = 0; i <= 64; ++i) shift = std::max(shift, log_f(w_end + u_hi * i / 64.0).real());

    QuadOptions opt;
    opt.rel_tol = 1e-14;
    opt.l1_tol = 1e-16;
    opt.max_intervals = 20000;

    auto leg1 = [&](double s) {
        cplx w = w_end * std::exp(-s);
        return std::exp(log_f(w) + std::log(w) - shift);
    };
    std::vector<double> b1;
    for (double b = 1.0; b < S; b += 1.0) b1.push_back(b);
    auto r1 = integrate(leg1, 0.0, S, opt, b1);

    auto leg2 = [&](double u) { return std::exp(log_f(w_end + u) - shift); };
    std::vector<double> b2;
    for (double b = 0.5; b < u_hi; b += 0.5) b2.push_back(b);
    auto r2 = integrate(leg2, 0.0, u_hi, opt, b2);
    if (!r1.converged || !r2.converged)
        throw PrecisionError("whittaker_w quadrature did not converge",
                             (r1.error + r2.error) / std::abs(r1.value + r2.value));

    // near zero: f ~ (w/2)^c (1 + k2 w^2)
    cplx c = 2.0 * mu - 2.0 * kappa;
    cplx k2 = mu / 3.0 + kappa / 6.0 - x / 4.0;
    cplx h = std::polar(eps, theta) * 0.5;
    cplx lh = std::log(h);
    cplx head = 2.0 * std::exp((c + 1.0) * lh - shift) / (c + 1.0) +
                8.0 * k2 * std::exp((c + 3.0) * lh - shift) / (c + 3.0);

    cplx integral = head + r1.value + r2.value;
    cplx logpre = (mu + 0.5) * std::log(x) - 0.5 * x - log_gamma(mu - kappa + 0.5) + shift;
    return std::exp(logpre) * integral;
}

}  // namespace

cplx whittaker_w_uncached(double kappa, cplx mu, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("whittaker_w needs x > 0");
    if (std::abs(kappa) > 2.0 || std::abs(mu.imag()) > kMaxImagOrder || std::abs(mu.real()) > 4.0)
        throw UnsupportedDomain("whittaker_w: parameters outside |kappa| <= 2, |Im mu| <= 100, |Re mu| <= 4");
    if (mu.real() < 0.0 || (mu.real() == 0.0 && mu.imag() < 0.0)) mu = -mu;
    if (mu.imag() < 0.0) return std::conj(whittaker_w_uncached(kappa, std::conj(mu), x));

    // real kappa, x with real or imaginary mu give a real value
    const bool real_valued = mu.real() == 0.0 || mu.imag() == 0.0;
    const double margin = 0.25;
    if (mu.real() - kappa + 0.5 >= margin) {
        cplx v = whittaker_integral(kappa, mu, x);
        return real_valued ? v.real() : v;
    }

    // W_{k+1} = (x - 2k) W_k + (mu^2 - (k - 1/2)^2) W_{k-1}, started where the integral converges
    int m = static_cast<int>(std::ceil(kappa - mu.real() - 0.5 + margin));
    double k0 = kappa - m;
    cplx prev = whittaker_integral(k0 - 1.0, mu, x);
    cplx cur = whittaker_integral(k0, mu, x);
    for (double k = k0; k < kappa - 0.5; k += 1.0) {
        cplx next = (x - 2.0 * k) * cur + (mu * mu - (k - 0.5) * (k - 0.5)) * prev;
        prev = cur;
        cur = next;
    }
    return real_valued ? cur.real() : cur;
}

namespace {

struct Key {
    std::array<double, 4> v;
    bool operator==(const Key&) const = default;
};

struct KeyHash {
    std::size_t operator()(const Key& k) const {
        std::size_t h = 1469598103934665603ULL;
        for (double d : k.v) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, sizeof bits);
            h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

// round to about 1e-14 relative
double quantize(double v) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    int e;
    double m = std::frexp(v, &e);
    return std::ldexp(std::nearbyint(std::ldexp(m, 46)), e - 46);
}

constexpr std::size_t kCacheCap = 1u << 20;

struct Cache {
    std::shared_mutex mu;
    std::unordered_map<Key, cplx, KeyHash> map;
};

Cache& cache() {
    static Cache c;
    return c;
}

}  // namespace

cplx whittaker_w(double kappa, cplx mu, double x) {
    Key key{{quantize(kappa), quantize(mu.real()), quantize(mu.imag()), quantize(x)}};
    auto& c = cache();
    {
        std::shared_lock lock(c.mu);
        auto it = c.map.find(key);
        if (it != c.map.end()) return it->second;
    }
    cplx v = whittaker_w_uncached(kappa, mu, x);
    std::unique_lock lock(c.mu);
    if (c.map.size() >= kCacheCap) c.map.clear();
    c.map[key] = v;
    return v;
}

void clear_specfun_cache() {
    std::unique_lock lock(cache().mu);
    cache().map.clear();
}

std::size_t specfun_cache_size() {
    std::shared_lock lock(cache().mu);
    return cache().map.size();
}

// ---- profiles ----

cplx WhittakerProfile::plain(i64 n, double y) const {
    if (n == 0) throw std::invalid_argument("Whittaker profile needs n != 0");
    if (!(y > 0)) throw std::invalid_argument("Whittaker profile needs y > 0");
    double sgn = n > 0 ? 1.0 : -1.0;
    double an = static_cast<double>(n > 0 ? n : -n);
    return std::pow(y, -weight2 / 4.0) * whittaker_w(sgn * weight2 / 4.0, mu - 0.5, 4 * kPi * an * y);
}

cplx WhittakerProfile::normalizer(i64 n) const {
    if (n == 0) throw std::invalid_argument("Whittaker profile needs n != 0");
    double sgn = n > 0 ? 1.0 : -1.0;
    double an = static_cast<double>(n > 0 ? n : -n);
    return std::exp((mu - 1.0) * std::log(an) - log_gamma(mu + sgn * weight2 / 4.0));
}

cplx WhittakerProfile::normalized(i64 n, double y) const { return normalizer(n) * plain(n, y); }

// ---- tabulated K_{iR} ----

KBesselTable::KBesselTable(double R, double x_lo, double x_hi, double panel_width, int degree)
    : R_(R), lo_(std::log(x_lo)), hi_(std::log(x_hi)), width_(panel_width), degree_(degree) {
    if (!(x_lo > 0) || !(x_hi > x_lo)) throw std::invalid_argument("bad table range");
    int panels = static_cast<int>(std::ceil((hi_ - lo_) / width_));
    width_ = (hi_ - lo_) / panels;
    const int n = degree_ + 1;
    coeffs_.assign(static_cast<std::size_t>(panels), std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<double> g(static_cast<std::size_t>(n));
    const cplx nu(0.0, R);
    for (int p = 0; p < panels; ++p) {
        double a = lo_ + p * width_;
        for (int j = 0; j < n; ++j) {
            double node = std::cos(kPi * (j + 0.5) / n);
            double x = std::exp(a + 0.5 * width_ * (node + 1.0));
            g[static_cast<std::size_t>(j)] = std::exp(x) * kbessel(nu, x).real();
        }
        auto& c = coeffs_[static_cast<std::size_t>(p)];
        for (int k = 0; k < n; ++k) {
            double s = 0;
            for (int j = 0; j < n; ++j) s += g[static_cast<std::size_t>(j)] * std::cos(kPi * k * (j + 0.5) / n);
            c[static_cast<std::size_t>(k)] = 2.0 * s / n;
        }
        c[0] *= 0.5;
        // the tail coefficients bound the interpolation error
        double amp = 0;
        for (double v : g) amp = std::max(amp, std::abs(v));
        double tail = std::abs(c[static_cast<std::size_t>(n - 1)]) + std::abs(c[static_cast<std::size_t>(n - 2)]);
        if (amp > 0) max_err_ = std::max(max_err_, tail / amp);
    }
}

double KBesselTable::operator()(double x) const {
    double t = std::log(x);
    if (!(t >= lo_) || !(t <= hi_)) return kbessel(cplx(0.0, R_), x).real();
    int p = std::min(static_cast<int>((t - lo_) / width_), static_cast<int>(coeffs_.size()) - 1);
    double u = 2.0 * (t - lo_ - p * width_) / width_ - 1.0;
    const auto& c = coeffs_[static_cast<std::size_t>(p)];
    double b1 = 0, b2 = 0;
    for (int k = degree_; k >= 1; --k) {
        double b0 = 2.0 * u * b1 - b2 + c[static_cast<std::size_t>(k)];
        b2 = b1;
        b1 = b0;
    }
    double g = u * b1 - b2 + c[0];
    return g * std::exp(-x);
}

}  // namespace sks
