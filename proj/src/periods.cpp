#include "sks/periods.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace sks {

std::string to_string(PeriodMethod m) { return m == PeriodMethod::closed_form ? "closed-form" : "quadrature"; }

namespace {

struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
};

// 20-point Gauss-Legendre rule by Newton iteration on P_20
const GaussRule& gauss_legendre20() {
    static const GaussRule rule = [] {
        const int n = 20;
        GaussRule r;
        r.x.resize(static_cast<std::size_t>(n));
        r.w.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double dp = 0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            r.x[static_cast<std::size_t>(i)] = x;
            r.w[static_cast<std::size_t>(i)] = 2.0 / ((1 - x * x) * dp * dp);
        }
        return r;
    }();
    return rule;
}

struct PanelSum {
    cplx value;
    double l1;
};

template <class F>
PanelSum composite(F& f, double a, double b, int panels) {
    const auto& g = gauss_legendre20();
    double h = (b - a) / panels;
    cplx s = 0;
    double l1 = 0;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            cplx v = f(c + 0.5 * h * g.x[i]);
            s += g.w[i] * v;
            l1 += g.w[i] * std::abs(v);
        }
    }
    return {0.5 * h * s, 0.5 * h * l1};
}

struct Quadrature {
    cplx value;
    double error;
    double l1;
    int panels;
};

// noise: relative rounding level of the integrand; doubling stops once successive
// estimates agree to within it, since more panels cannot do better
template <class F>
Quadrature doubling_quadrature(F& f, double a, double b, const PeriodOptions& opt, double noise = 0.0) {
    int panels = std::max(1, static_cast<int>(std::ceil((b - a) / opt.panel_width)));
    auto coarse = composite(f, a, b, panels);
    for (;;) {
        panels *= 2;
        auto fine = composite(f, a, b, panels);
        double err = std::abs(fine.value - coarse.value);
        if (err <= std::max(opt.rel_tol, noise) * fine.l1) return {fine.value, err, fine.l1, panels};
        if (panels * 2 > opt.max_panels)
            throw PrecisionError("period quadrature stalled at " + std::to_string(panels) + " panels",
                                 err / std::max(fine.l1, 1e-300));
        coarse = fine;
    }
}

}  // namespace

PeriodResult period_definite(const MaassForm& f, const OrbitRep& rep, const PhiOptions& opt) {
    if (rep.signature != Signature::positive_definite && rep.signature != Signature::negative_definite)
        throw std::invalid_argument("period_definite: rep " + to_string(rep.form) + " is not definite");
    PeriodResult r;
    r.rep = rep;
    r.method = PeriodMethod::closed_form;
    auto ev = eval_phi_detail(f, rep.heegner, opt);
    r.value = kPi / rep.stabilizer_order * ev.value;
    r.error_estimate = kPi / rep.stabilizer_order * ev.tail_bound;
    r.scale = kPi / rep.stabilizer_order * ev.envelope;
    return r;
}

PeriodResult period_definite_quadrature(const MaassForm& f, const OrbitRep& rep, const PhiOptions& opt) {
    if (rep.signature != Signature::positive_definite && rep.signature != Signature::negative_definite)
        throw std::invalid_argument("period_definite_quadrature: rep is not definite");
    // phi(k_theta g^{-1}) = Phi(g k_theta^{-1} i)
    auto integrand = [&](double th) {
        double c = std::cos(th), s = std::sin(th);
        Mat2r kinv{c, s, -s, c};
        cplx w = kinv.act(kI);
        return 0.5 * eval_phi(f, rep.g.act(w), opt);
    };
    PeriodOptions po;
    po.panel_width = 2 * kPi;
    po.rel_tol = 1e-13;
    auto q = doubling_quadrature(integrand, 0.0, 2 * kPi, po);
    PeriodResult r;
    r.rep = rep;
    r.method = PeriodMethod::quadrature;
    r.value = q.value / static_cast<double>(rep.stabilizer_order);
    r.error_estimate = q.error / rep.stabilizer_order;
    r.scale = q.l1 / rep.stabilizer_order;
    return r;
}

PeriodResult period_indefinite_from(const MaassForm& f, const OrbitRep& rep, double log_y0,
                                    const PeriodOptions& opt) {
    if (rep.signature != Signature::indefinite)
        throw std::invalid_argument("period_indefinite: rep " + to_string(rep.form) + " is not indefinite");
    auto integrand = [&](double t) { return eval_phi(f, rep.g.act(cplx{0.0, std::exp(t)}), opt.phi); };
    PeriodResult r;
    r.rep = rep;
    r.method = PeriodMethod::quadrature;
    if (!rep.split) {
        double L = std::log(rep.eta);
        const double noise = 4.0 * std::numeric_limits<double>::epsilon() * std::sqrt(rep.eta);
        auto q = doubling_quadrature(integrand, log_y0, log_y0 + L, opt, noise);
        // The integrand is periodic, so the same rule on a window shifted by half a panel
        // must agree; the spread picks up rounding noise in the pulled-back points. The
        // window ends sit at height ~eta^{-1/2}, where rounding in g itself is amplified
        // by ~eta^{1/2}; that part is systematic and enters as a floor.
        double shift = 0.5 * L / q.panels;
        auto moved = composite(integrand, log_y0 + shift, log_y0 + shift + L, q.panels);
        r.value = opt.indefinite_scale * q.value;
        r.error_estimate = opt.indefinite_scale * (std::max(q.error, std::abs(moved.value - q.value)) + noise * q.l1);
        r.scale = opt.indefinite_scale * q.l1;
        return r;
    }

    // Split class: both ends of the geodesic run into cusps. Cut where the pulled-back
    // height makes the cusp bound 10 e^{-2 pi Y} / (1 - e^{-2 pi Y}) negligible.
    double scale = 0.0;
    for (double t = -4.0; t <= 4.0; t += 0.25) scale = std::max(scale, std::abs(integrand(t)));
    double target = 1e-3 * opt.rel_tol * std::max(scale, 1e-300);
    auto bound = [](double Y) {
        double q = std::exp(-2 * kPi * Y);
        return 10.0 * q / (1.0 - q);
    };
    auto height = [&](double t) { return phi_pullback(f, rep.g.act(cplx{0.0, std::exp(t)})).imag(); };
    auto cut = [&](double dir) {
        for (double t = 0.0; std::abs(t) <= 80.0; t += dir * 0.25) {
            if (bound(height(t)) < target && bound(height(t + dir * 0.25)) < target &&
                bound(height(t + dir * 0.5)) < target)
                return t;
        }
        throw PrecisionError("split period: geodesic never leaves the cusp neighbourhood bound", 1.0);
    };
    double lo = cut(-1.0), hi = cut(1.0);
    auto q = doubling_quadrature(integrand, lo, hi, opt);
    r.value = opt.indefinite_scale * q.value;
    r.error_estimate = opt.indefinite_scale * (q.error + 2.0 * target);
    r.scale = opt.indefinite_scale * q.l1;
    return r;
}

PeriodResult period_indefinite(const MaassForm& f, const OrbitRep& rep, const PeriodOptions& opt) {
    // window centred on the top of the geodesic (y = 1): the ends then stay at height
    // ~eta^{-1/2}, where the pullback amplifies rounding in g iy the least
    double base = rep.split ? 0.0 : -0.5 * std::log(rep.eta);
    return period_indefinite_from(f, rep, base, opt);
}

PeriodResult period(const MaassForm& f, const OrbitRep& rep, const PeriodOptions& opt) {
    if (rep.signature == Signature::indefinite) return period_indefinite(f, rep, opt);
    return period_definite(f, rep, opt.phi);
}

std::vector<PeriodResult> periods_parallel(const MaassForm& f, const std::vector<OrbitRep>& reps,
                                           const PeriodOptions& opt, int threads) {
    std::vector<PeriodResult> out(reps.size());
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min<int>(threads, static_cast<int>(std::max<std::size_t>(1, reps.size())));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex fm;
    auto work = [&] {
        for (;;) {
            std::size_t i = next++;
            if (i >= reps.size()) return;
            try {
                out[i] = period(f, reps[i], opt);
            } catch (...) {
                std::lock_guard lock(fm);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

PeriodCache::PeriodCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    std::getline(in, line);
    if (line != header()) throw ConfigError("period cache " + path_ + ": unexpected header");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (cols.size() != 10) throw ConfigError("period cache " + path_ + ": bad row " + std::to_string(lineno));
        try {
            PeriodKey k{cols[0], std::stoll(cols[1]), lattice_from_string(cols[2]), std::stoll(cols[3]),
                        SymForm{std::stoll(cols[4]), std::stoll(cols[5]), std::stoll(cols[6])}};
            entries_[k] = {cplx{std::stod(cols[7]), std::stod(cols[8])}, std::stod(cols[9])};
        } catch (const std::exception& e) {
            throw ConfigError("period cache " + path_ + ": bad row " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::string PeriodCache::header() { return "checksum,N,lattice,target,A,B,C,re,im,err"; }

std::optional<std::pair<cplx, double>> PeriodCache::lookup(const PeriodKey& k) const {
    std::lock_guard lock(m_);
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void PeriodCache::insert(const PeriodKey& k, cplx value, double error) {
    std::lock_guard lock(m_);
    entries_[k] = {value, error};
}

std::size_t PeriodCache::size() const {
    std::lock_guard lock(m_);
    return entries_.size();
}

std::vector<PeriodKey> PeriodCache::prune_except(const std::set<std::string>& keep) {
    std::lock_guard lock(m_);
    std::vector<PeriodKey> removed;
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (!keep.count(it->first.checksum)) {
            removed.push_back(it->first);
            it = entries_.erase(it);
        } else {
            ++it;
        }
    }
    return removed;
}

std::size_t PeriodCache::prune(const std::string& keep_checksum) { return prune_except({keep_checksum}).size(); }

void PeriodCache::save() const {
    if (path_.empty()) return;
    std::lock_guard lock(m_);
    std::string tmp = path_ + ".part";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ConfigError("cannot write period cache " + tmp);
        out << header() << "\n";
        char buf[96];
        for (const auto& [k, v] : entries_) {
            out << k.checksum << ',' << k.N << ',' << to_string(k.lattice) << ',' << k.target << ',' << k.form.A
                << ',' << k.form.B << ',' << k.form.C;
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.6g\n", v.first.real(), v.first.imag(), v.second);
            out << buf;
        }
    }
    if (std::rename(tmp.c_str(), path_.c_str()) != 0) throw ConfigError("cannot replace period cache " + path_);
}

PeriodResult PeriodCache::get_or_compute(const MaassForm& f, const OrbitRep& rep, const PeriodOptions& opt) {
    PeriodKey k{f.checksum(), rep.N, rep.lattice, rep.target, rep.form};
    if (auto hit = lookup(k)) {
        PeriodResult r;
        r.rep = rep;
        r.value = hit->first;
        r.error_estimate = hit->second;
        r.method = rep.signature == Signature::indefinite ? PeriodMethod::quadrature : PeriodMethod::closed_form;
        return r;
    }
    auto r = period(f, rep, opt);
    insert(k, r.value, r.error_estimate);
    return r;
}

}  // namespace sks
