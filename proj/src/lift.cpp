#include "sks/lift.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "sks/arith.hpp"

namespace sks {

std::string to_string(LiftFlavor f) { return f == LiftFlavor::plain ? "plain" : "starred"; }

std::string to_string(LiftConstants c) { return c == LiftConstants::displayed ? "displayed" : "matched"; }

LiftConstants lift_constants_from_string(const std::string& s) {
    if (s == "displayed") return LiftConstants::displayed;
    if (s == "matched") return LiftConstants::matched;
    throw ConfigError("unknown lift constants '" + s + "' (displayed or matched)");
}

namespace {

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex fm;
    auto work = [&] {
        for (;;) {
            std::size_t i = next++;
            if (i >= count) return;
            try {
                body(i);
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
}

cplx cpow(double base, cplx ex) { return std::exp(ex * std::log(base)); }

}  // namespace

cplx starred_rescale(cplx lambda) { return cpow(2.0, 2.5 - lambda); }

LiftTerm lift_coefficient(const MaassForm& f, const DirichletCharacter& chi, i64 n, LiftFlavor flavor,
                          const LiftOptions& opt, PeriodCache* cache) {
    if (n == 0) throw std::invalid_argument("lift_coefficient: n must be nonzero");
    const i64 N = f.level;
    if (chi.modulus() != N) throw std::invalid_argument("lift_coefficient: chi must have modulus N");
    const bool plain = flavor == LiftFlavor::plain;
    const Lattice lat = plain ? Lattice::LN : Lattice::VZ;
    const double m = static_cast<double>(n > 0 ? n : -n);
    const cplx lambda = f.lambda();

    cplx constant;
    if (plain) constant = n > 0 ? 2.0 / std::sqrt(kPi) : 1.0;
    else constant = n > 0 ? cpow(2.0, lambda) / std::sqrt(kPi) : cpow(2.0, lambda - 1.0);
    if (!plain && opt.constants == LiftConstants::matched) constant *= starred_rescale(lambda);
    constant *= std::pow(m, -0.75);

    LiftTerm out;
    auto reps = enumerate_orbits(N, n, lat);
    out.orbits = reps.size();
    cplx sum = 0;
    double err = 0;
    for (const auto& rep : reps) {
        PeriodResult pr;
        try {
            pr = cache ? cache->get_or_compute(f, rep, opt.period) : period(f, rep, opt.period);
        } catch (const PrecisionError& e) {
            throw PrecisionError(std::string(e.what()) + " [orbit " + to_string(rep.form) + ", target " +
                                     std::to_string(n) + "]",
                                 e.achieved);
        }
        cplx w = plain ? chi(rep.coords[0]) : gauss_sum(chi, rep.coords[2]);
        // the negative-index sums use Phi(z_v)/eps(v) = M(v)/pi
        double scale = n > 0 ? 1.0 : 1.0 / kPi;
        sum += w * pr.value * scale;
        err += std::abs(w) * pr.error_estimate * scale;
    }
    out.value = constant * sum;
    out.error = std::abs(constant) * err;
    return out;
}

cplx HalfIntegralForm::coeff(i64 n) const {
    if (n == 0 || n > nmax || n < -nmax) return 0.0;
    return c[static_cast<std::size_t>(n + nmax)];
}

cplx& HalfIntegralForm::coeff_ref(i64 n) {
    if (n == 0 || n > nmax || n < -nmax) throw std::out_of_range("coefficient index");
    return c[static_cast<std::size_t>(n + nmax)];
}

double HalfIntegralForm::growth() const {
    double g = 0;
    for (i64 n = 1; n <= nmax; ++n) {
        double s = std::sqrt(static_cast<double>(n));
        g = std::max({g, std::abs(coeff(n)) / s, std::abs(coeff(-n)) / s});
    }
    return g;
}

HalfIntegralForm lift_form(const MaassForm& f, const DirichletCharacter& chi, i64 nmax, LiftFlavor flavor,
                           const LiftOptions& opt, PeriodCache* cache) {
    if (nmax < 1) throw std::invalid_argument("lift_form: nmax must be positive");
    HalfIntegralForm F;
    F.N = f.level;
    F.flavor = flavor;
    F.mu = (2.0 * f.lambda() + 1.0) / 4.0;
    F.nmax = nmax;
    F.c.assign(static_cast<std::size_t>(2 * nmax + 1), 0.0);
    F.err.assign(F.c.size(), 0.0);
    F.source_checksum = f.checksum();
    F.tol = opt.period.rel_tol;
    F.constants = to_string(opt.constants);
    if (flavor == LiftFlavor::plain) {
        F.char_label = chi_N(chi, f.level).label();
    } else {
        F.char_label = chi.conj().label();
        F.prefactor = std::pow(static_cast<double>(f.level), -0.75);
    }
    // ordered by |n| then sign
    std::vector<i64> order;
    for (i64 m = 1; m <= nmax; ++m) {
        order.push_back(m);
        order.push_back(-m);
    }
    std::vector<LiftTerm> terms(order.size());
    parallel_for(order.size(), opt.threads,
                 [&](std::size_t i) { terms[i] = lift_coefficient(f, chi, order[i], flavor, opt, cache); });
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto k = static_cast<std::size_t>(order[i] + nmax);
        F.c[k] = terms[i].value;
        F.err[k] = terms[i].error;
    }
    return F;
}

std::string export_half_integral(const HalfIntegralForm& F) {
    std::ostringstream out;
    char buf[128];
    out << "format=halfint-v1\n";
    out << "source_checksum=" << F.source_checksum << "\n";
    out << "N=" << F.N << "\n";
    out << "flavor=" << to_string(F.flavor) << "\n";
    std::snprintf(buf, sizeof buf, "mu=%.17g %.17g\n", F.mu.real(), F.mu.imag());
    out << buf;
    out << "char=" << F.char_label << "\n";
    out << "nmax=" << F.nmax << "\n";
    std::snprintf(buf, sizeof buf, "period_tol=%.6g\n", F.tol);
    out << buf;
    out << "constants=" << F.constants << "\n";
    std::snprintf(buf, sizeof buf, "prefactor=%.17g %.17g\n", F.prefactor.real(), F.prefactor.imag());
    out << buf;
    for (i64 n = -F.nmax; n <= F.nmax; ++n) {
        if (n == 0) continue;
        auto k = static_cast<std::size_t>(n + F.nmax);
        std::snprintf(buf, sizeof buf, "%lld %.17g %.17g %.3g\n", static_cast<long long>(n), F.c[k].real(),
                      F.c[k].imag(), F.err[k]);
        out << buf;
    }
    return out.str();
}

HalfIntegralForm parse_half_integral(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::map<std::string, std::string> h;
    HalfIntegralForm F;
    std::vector<std::tuple<i64, cplx, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq != std::string::npos) {
            h[line.substr(0, eq)] = line.substr(eq + 1);
            continue;
        }
        std::istringstream ls(line);
        long long n;
        double re, im, er;
        if (!(ls >> n >> re >> im >> er)) throw ConfigError("lifted form: malformed line '" + line + "'");
        rows.emplace_back(n, cplx{re, im}, er);
    }
    for (const char* k : {"format", "source_checksum", "N", "flavor", "mu", "char", "nmax", "period_tol", "constants",
                          "prefactor"})
        if (!h.count(k)) throw ConfigError(std::string("lifted form: missing header field ") + k);
    if (h["format"] != "halfint-v1") throw ConfigError("lifted form: unsupported format");
    auto pair = [](const std::string& s) {
        std::istringstream ss(s);
        double a, b;
        if (!(ss >> a >> b)) throw ConfigError("lifted form: bad complex '" + s + "'");
        return cplx{a, b};
    };
    F.source_checksum = h["source_checksum"];
    F.N = std::stoll(h["N"]);
    F.flavor = h["flavor"] == "plain" ? LiftFlavor::plain : LiftFlavor::starred;
    F.mu = pair(h["mu"]);
    F.char_label = h["char"];
    F.nmax = std::stoll(h["nmax"]);
    F.tol = std::stod(h["period_tol"]);
    F.constants = h["constants"];
    F.prefactor = pair(h["prefactor"]);
    F.c.assign(static_cast<std::size_t>(2 * F.nmax + 1), 0.0);
    F.err.assign(F.c.size(), 0.0);
    for (auto& [n, v, er] : rows) {
        F.coeff_ref(n) = v;
        F.err[static_cast<std::size_t>(n + F.nmax)] = er;
    }
    return F;
}

double half_integral_tail(const HalfIntegralForm& F, cplx z, i64 M) {
    if (M < 0) M = F.nmax;
    const double y = z.imag();
    WhittakerProfile prof{1, F.mu};
    // past the turning point x_t = 2 kappa + sqrt(4 kappa^2 + 1 - 4 nu^2) the Whittaker
    // factor decays like x^kappa e^{-x/2}
    cplx nu = F.mu - 0.5;
    double turn = 0.5 + std::sqrt(std::abs(1.25 - 4.0 * nu * nu));
    double x1 = 4 * kPi * static_cast<double>(M + 1) * y;
    if (x1 <= turn + 1.0) return std::numeric_limits<double>::infinity();
    double C = F.growth();
    double w = std::abs(prof.plain(M + 1, y)) + std::abs(prof.plain(-(M + 1), y));
    double step = std::exp(-2 * kPi * y) * std::pow(1.0 + 4 * kPi * y / x1, 0.25);
    double t = 0, term = w;
    for (i64 k = 0; k < 100000; ++k) {
        double add = C * std::sqrt(static_cast<double>(M + 1 + k)) * term;
        t += add;
        if (add <= 1e-18 * t) break;
        term *= step;
    }
    return std::abs(F.prefactor) * t;
}

FEval eval_half_integral(const HalfIntegralForm& F, cplx z, i64 M) {
    if (!(z.imag() > 0)) throw std::invalid_argument("eval_F: Im z must be positive");
    if (M < 0) M = F.nmax;
    if (M > F.nmax) throw std::invalid_argument("eval_F: truncation exceeds nmax");
    const double x = z.real() - std::floor(z.real()), y = z.imag();
    WhittakerProfile prof{1, F.mu};
    cplx sum = 0;
    double env = 0;
    for (i64 n = 1; n <= M; ++n) {
        cplx ph = e(static_cast<double>(n) * x);
        cplx tp = F.coeff(n) * prof.plain(n, y) * ph;
        cplx tm = F.coeff(-n) * prof.plain(-n, y) * std::conj(ph);
        sum += tp + tm;
        env += std::abs(tp) + std::abs(tm);
    }
    double pa = std::abs(F.prefactor);
    return {F.prefactor * sum, half_integral_tail(F, z, M), pa * env};
}

cplx eval_F(const HalfIntegralForm& F, cplx z, i64 M) { return eval_half_integral(F, z, M).value; }
cplx eval_G(const HalfIntegralForm& G, cplx z, i64 M) { return eval_half_integral(G, z, M).value; }

namespace {

struct ThetaEval {
    cplx value;
    double abs_sum;
};

ThetaEval theta_detail(cplx z) {
    if (!(z.imag() > 0)) throw std::invalid_argument("theta: Im z must be positive");
    double x = z.real() - std::floor(z.real()), y = z.imag();
    cplx s = 1.0;
    double a = 1.0;
    for (i64 n = 1;; ++n) {
        double n2 = static_cast<double>(n * n);
        double mag = std::exp(-2 * kPi * n2 * y);
        if (mag < 1e-18) break;
        cplx t = 2.0 * mag * e(std::fmod(n2 * x, 1.0));
        s += t;
        a += 2.0 * mag;
    }
    return {s, a};
}

}  // namespace

cplx theta_series(cplx z) { return theta_detail(z).value; }

int shimura_symbol(i64 c, i64 d) {
    if (d == 0) throw std::invalid_argument("shimura_symbol: d = 0");
    if (c == 0) return (d == 1 || d == -1) ? 1 : 0;
    int k = kronecker(c, d < 0 ? -d : d);
    return (c < 0 && d < 0) ? -k : k;
}

cplx theta_multiplier_closed(const Mat2i& g, cplx z) {
    if (g.det() != 1 || g.c % 4 != 0) throw std::invalid_argument("theta multiplier needs gamma in Gamma_0(4)");
    cplx eps = eps_d(g.d);
    return std::conj(eps) * static_cast<double>(shimura_symbol(g.c, g.d)) *
           std::sqrt(static_cast<double>(g.c) * z + static_cast<double>(g.d));
}

cplx theta_multiplier(const Mat2i& g, cplx z) {
    cplx closed = theta_multiplier_closed(g, z);
    auto num = theta_detail(g.act(z)), den = theta_detail(z);
    cplx ratio = num.value / den.value;
    double rounding = 1e-15 * std::abs(ratio) * (num.abs_sum / std::abs(num.value) + den.abs_sum / std::abs(den.value));
    if (std::abs(ratio - closed) > 1e-10 * std::abs(closed) + 10.0 * rounding)
        throw std::logic_error("theta multiplier: closed form and theta ratio disagree");
    return closed;
}

std::vector<Mat2i> gamma0_4N_generators(i64 N) {
    // Gamma_0(4) / {+-I} is free on T and (1, 0; 4, 1); -I acts trivially (J(-I, z) = 1).
    // For N > 1 these two only generate a subgroup; extra elements with c = 4N are added.
    i64 c = 4 * N;
    std::vector<Mat2i> gens{{1, 1, 0, 1}, {1, 0, c, 1}};
    if (N > 1)
        for (i64 d = 3; gens.size() < 4 && d < c * c; d += 2) {
            if (std::gcd(d, c) != 1) continue;
            i64 a = 0;
            while ((a * d - 1) % c != 0) ++a;  // a d = 1 mod c
            gens.push_back({a, (a * d - 1) / c, c, d});
        }
    return gens;
}

cplx sample_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(0.4, 1.5);
    double x = ux(rng);
    double y = uy(rng);
    return {x, y};
}

namespace {

std::string mat_name(const Mat2i& g) {
    return "(" + std::to_string(g.a) + "," + std::to_string(g.b) + ";" + std::to_string(g.c) + "," +
           std::to_string(g.d) + ")";
}

DirichletCharacter character_of(const HalfIntegralForm& F) { return character_from_label(F.char_label); }

// Candidates are drawn in fixed-size batches and scanned in order, so the accepted set
// depends only on the seed. A candidate is kept when the tail estimate at every image
// point is below 0.1 tol of the residual scale max(|base value|, floor).
using ImageList = std::vector<std::pair<const HalfIntegralForm*, cplx>>;

template <class Images>
std::vector<std::pair<cplx, std::vector<FEval>>> accept_points(const SampleOptions& opt, Images&& images,
                                                               VerifyReport& rep) {
    constexpr int kBatch = 32;
    std::mt19937_64 rng(opt.seed);
    std::vector<std::pair<cplx, std::vector<FEval>>> acc;
    double fmax = 0;
    int attempts = 0;
    while (static_cast<int>(acc.size()) < opt.points && attempts < opt.max_attempts) {
        std::vector<cplx> cand;
        for (int i = 0; i < kBatch; ++i) cand.push_back(sample_point(rng));
        std::vector<FEval> base(cand.size());
        std::vector<std::vector<double>> tails(cand.size());
        parallel_for(cand.size(), opt.threads, [&](std::size_t i) {
            auto im = images(cand[i]);
            base[i] = eval_half_integral(*im[0].first, im[0].second);
            for (std::size_t j = 1; j < im.size(); ++j) tails[i].push_back(half_integral_tail(*im[j].first, im[j].second));
        });
        std::vector<std::size_t> take;
        for (std::size_t i = 0; i < cand.size() && static_cast<int>(acc.size() + take.size()) < opt.points; ++i) {
            ++attempts;
            double scale = std::max(std::abs(base[i].value), opt.floor_fraction * std::max(fmax, std::abs(base[i].value)));
            bool ok = base[i].tail <= 0.1 * opt.tol * scale;
            for (double t : tails[i]) ok = ok && t <= 0.1 * opt.tol * scale;
            if (ok) {
                take.push_back(i);
                fmax = std::max(fmax, std::abs(base[i].value));
            } else {
                rep.rejected.push_back(cand[i]);
            }
            if (attempts >= opt.max_attempts) break;
        }
        std::vector<std::vector<FEval>> evals(take.size());
        parallel_for(take.size(), opt.threads, [&](std::size_t k) {
            auto im = images(cand[take[k]]);
            evals[k].push_back(base[take[k]]);
            for (std::size_t j = 1; j < im.size(); ++j) evals[k].push_back(eval_half_integral(*im[j].first, im[j].second));
        });
        for (std::size_t k = 0; k < take.size(); ++k) acc.emplace_back(cand[take[k]], std::move(evals[k]));
    }
    if (static_cast<int>(acc.size()) < opt.points)
        throw PrecisionError("verification: only " + std::to_string(acc.size()) + " of " +
                                 std::to_string(opt.points) + " sample points satisfy the tail bound",
                             static_cast<double>(acc.size()));
    rep.floor = opt.floor_fraction * fmax;
    for (const auto& a : acc) rep.accepted.push_back(a.first);
    return acc;
}

}  // namespace

VerifyReport verify_modularity(const HalfIntegralForm& F, const std::vector<Mat2i>& gens, const SampleOptions& opt) {
    for (const auto& g : gens)
        if (!g.in_gamma0(F.level())) throw std::invalid_argument("verify_modularity: " + mat_name(g) + " not in Gamma_0(4N)");
    auto chi = character_of(F);
    VerifyReport rep;
    auto images = [&](cplx z) {
        ImageList out{{&F, z}};
        for (const auto& g : gens) out.emplace_back(&F, g.act(z));
        return out;
    };
    auto acc = accept_points(opt, images, rep);
    for (const auto& [z, ev] : acc) {
        double scale = std::max(std::abs(ev[0].value), rep.floor);
        for (std::size_t j = 0; j < gens.size(); ++j) {
            const auto& g = gens[j];
            cplx rhs = chi(g.d) * theta_multiplier(g, z) * ev[0].value;
            double r = std::abs(ev[j + 1].value - rhs) / scale;
            rep.residuals.push_back({z, mat_name(g), r});
            rep.max_residual = std::max(rep.max_residual, r);
        }
    }
    return rep;
}

VerifyReport verify_FG(const HalfIntegralForm& F, const HalfIntegralForm& G, const SampleOptions& opt) {
    if (F.N != G.N) throw std::invalid_argument("verify_FG: level mismatch");
    const double Nd = static_cast<double>(F.N);
    VerifyReport rep;
    auto images = [&](cplx z) { return ImageList{{&G, z}, {&F, -1.0 / (4.0 * Nd * z)}}; };
    auto acc = accept_points(opt, images, rep);
    const cplx phase = e_frac(-1, 8);
    for (const auto& [z, ev] : acc) {
        double scale = std::max(std::abs(ev[0].value), rep.floor);
        cplx lhs = ev[1].value / std::sqrt(std::sqrt(Nd) * z);
        double r = std::abs(lhs - phase * ev[0].value) / scale;
        rep.residuals.push_back({z, "F-G", r});
        rep.max_residual = std::max(rep.max_residual, r);
    }
    return rep;
}

cplx halfint_eigenvalue(cplx mu) { return (mu - 0.25) * (0.75 - mu); }

HalfIntResidual eigen_residual_halfint(const HalfIntegralForm& F, cplx z, double h, i64 M) {
    auto c = eval_half_integral(F, z, M);
    cplx xp = eval_F(F, z + h, M), xm = eval_F(F, z - h, M);
    cplx yp = eval_F(F, z + kI * h, M), ym = eval_F(F, z - kI * h, M);
    double y = z.imag();
    cplx fxx = (xp - 2.0 * c.value + xm) / (h * h), fyy = (yp - 2.0 * c.value + ym) / (h * h);
    cplx fx = (xp - xm) / (2 * h), fy = (yp - ym) / (2 * h);
    cplx lap = -y * y * (fxx + fyy) + (kI * y / 2.0) * (fx + kI * fy);
    cplx ev = halfint_eigenvalue(F.mu), ev_plain = F.mu * (1.0 - F.mu);
    return {std::abs(lap - ev * c.value) / std::abs(ev * c.value),
            std::abs(lap - ev_plain * c.value) / std::abs(ev_plain * c.value), std::abs(c.value) < 1e-8 * c.envelope};
}

XiValue xi_series(const std::function<cplx(i64)>& coeff, int side, cplx s, i64 T) {
    if (side != 1 && side != -1) throw std::invalid_argument("xi_series: side must be +1 or -1");
    if (T < 1) throw std::invalid_argument("xi_series: T must be positive");
    cplx sum = 0, last = 0;
    for (i64 n = 1; n <= T; ++n) {
        last = coeff(side * n) * std::exp(-s * std::log(static_cast<double>(n)));
        sum += last;
    }
    return {sum, std::abs(last) > 1e-3 * std::abs(sum)};
}

XiValue xi_completed(const std::function<cplx(i64)>& coeff, int side, cplx s, i64 T) {
    auto v = xi_series(coeff, side, s, T);
    v.value *= std::exp(-s * std::log(2 * kPi)) * complex_gamma(s);
    return v;
}

XiValue xi_twisted(const std::function<cplx(i64)>& coeff, const DirichletCharacter& psi, int side, cplx s, i64 T) {
    return xi_series([&](i64 n) { return coeff(n) * gauss_sum(psi, n); }, side, s, T);
}

}  // namespace sks
