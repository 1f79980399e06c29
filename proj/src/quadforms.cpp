#include "sks/quadforms.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "sks/arith.hpp"

namespace sks {

namespace {

i64 narrow(i128 x) {
    if (x > std::numeric_limits<i64>::max() || x < std::numeric_limits<i64>::min())
        throw std::overflow_error("integer overflow in quadratic form arithmetic");
    return static_cast<i64>(x);
}

// returns g = gcd(a, b) >= 0 and sets x, y with a x + b y = g
i64 ext_gcd(i64 a, i64 b, i64& x, i64& y) {
    i64 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        i64 q = floor_div(a, b);
        i64 r = a - q * b;
        a = b;
        b = r;
        i64 t = x0 - q * x1;
        x0 = x1;
        x1 = t;
        t = y0 - q * y1;
        y0 = y1;
        y1 = t;
    }
    if (a < 0) {
        a = -a;
        x0 = -x0;
        y0 = -y0;
    }
    x = x0;
    y = y0;
    return a;
}

Mat2i transpose(const Mat2i& g) { return {g.a, g.c, g.b, g.d}; }

// Binary form f = (a, b, c) = a x^2 + b xy + c y^2 attached to M by f_M = (C, -B, A);
// f_{g M g^t} = f_M o g^{-1}.
struct BinForm {
    i64 a, b, c;
    // f o s
    BinForm compose(const Mat2i& s) const {
        SymForm t = SymForm{a, b, c}.transform(transpose(s));
        return {t.A, t.B, t.C};
    }
    BinForm neg() const { return {-a, -b, -c}; }
    auto key() const { return std::tuple(a, b, c); }
};

BinForm assoc(const SymForm& m) { return {m.C, -m.B, m.A}; }
SymForm from_assoc(const BinForm& f) { return {f.c, -f.b, f.a}; }

// x < sqrt(D) for non-square D > 0, with s = floor(sqrt(D))
bool below_root(i64 x, i64 s) { return x <= s; }

bool gauss_reduced(const BinForm& f, i64 s) {
    i64 aa = f.a < 0 ? -f.a : f.a;
    return f.b > 0 && below_root(f.b, s) && below_root(2 * aa - f.b, s) && !below_root(2 * aa + f.b, s);
}

// one Gauss rho step; returns the transform sigma with f o sigma = rho(f)
BinForm rho(const BinForm& f, i64 D, i64 s, Mat2i& sigma) {
    i64 c = f.c;
    i64 aa = c < 0 ? -c : c;
    i64 r;
    if (aa > s) {
        r = aa - pos_mod(aa + f.b, 2 * aa);
    } else {
        r = s - pos_mod(s + f.b, 2 * aa);
    }
    i64 t = (r + f.b) / (2 * c);
    sigma = {0, -1, 1, t};
    return {c, r, narrow((static_cast<i128>(r) * r - D) / (4 * static_cast<i128>(c)))};
}

BinForm reduce_definite(BinForm f, Mat2i& sigma) {
    while (true) {
        i64 k = floor_div(f.a - f.b, 2 * f.a);
        if (k != 0) {
            Mat2i T{1, k, 0, 1};
            f = f.compose(T);
            sigma = sigma * T;
        }
        if (f.a > f.c) {
            Mat2i S{0, -1, 1, 0};
            f = f.compose(S);
            sigma = sigma * S;
            continue;
        }
        break;
    }
    if (f.a == f.c && f.b < 0) {
        Mat2i S{0, -1, 1, 0};
        f = f.compose(S);
        sigma = sigma * S;
    }
    return f;
}

BinForm reduce_indefinite(BinForm f, i64 D, Mat2i& sigma) {
    i64 s = isqrt(D);
    Mat2i step;
    while (!gauss_reduced(f, s)) {
        f = rho(f, D, s, step);
        sigma = sigma * step;
    }
    // walk the cycle, keep the lexicographic minimum
    BinForm best = f;
    Mat2i best_sigma = sigma;
    BinForm cur = f;
    Mat2i cur_sigma = sigma;
    while (true) {
        cur = rho(cur, D, s, step);
        cur_sigma = cur_sigma * step;
        if (cur.key() == f.key()) break;
        if (cur.key() < best.key()) {
            best = cur;
            best_sigma = cur_sigma;
        }
    }
    sigma = best_sigma;
    return best;
}

std::pair<i64, i64> primitive_vec(i64 p, i64 q) {
    i64 g = std::gcd(p, q);
    p /= g;
    q /= g;
    if (q < 0 || (q == 0 && p < 0)) {
        p = -p;
        q = -q;
    }
    return {p, q};
}

BinForm reduce_square(const BinForm& f, i64 root, Mat2i& sigma) {
    std::vector<std::pair<i64, i64>> roots;
    if (f.a == 0) {
        roots.push_back({1, 0});
        roots.push_back(primitive_vec(-f.c, f.b));
    } else {
        roots.push_back(primitive_vec(-f.b + root, 2 * f.a));
        roots.push_back(primitive_vec(-f.b - root, 2 * f.a));
    }
    for (auto [p, q] : roots) {
        i64 x, y;
        ext_gcd(p, q, x, y);  // p x + q y = 1
        Mat2i s{p, -y, q, x};
        BinForm g = f.compose(s);
        if (g.a != 0 || g.b != root) continue;
        i64 k = floor_div(g.c, root);
        Mat2i T{1, -k, 0, 1};
        g = g.compose(T);
        sigma = sigma * s * T;
        return g;
    }
    throw std::logic_error("split form reduction failed");
}

Mat2i mat_pow(const Mat2i& A, i64 k) {
    Mat2i r;
    for (i64 i = 0; i < k; ++i) r = r * A;
    return r;
}

}  // namespace

std::string to_string(Lattice l) { return l == Lattice::LN ? "L_N" : "V_Z"; }

Lattice lattice_from_string(const std::string& s) {
    if (s == "L_N" || s == "L" || s == "LN") return Lattice::LN;
    if (s == "V_Z" || s == "V" || s == "VZ") return Lattice::VZ;
    throw ConfigError("unknown lattice '" + s + "' (expected L_N or V_Z)");
}

std::string to_string(Signature s) {
    switch (s) {
        case Signature::positive_definite: return "positive-definite";
        case Signature::negative_definite: return "negative-definite";
        case Signature::indefinite: return "indefinite";
        default: return "degenerate";
    }
}

i64 Mat2i::det() const { return narrow(static_cast<i128>(a) * d - static_cast<i128>(b) * c); }

Mat2i Mat2i::inverse() const {
    if (det() != 1) throw std::invalid_argument("inverse expects determinant 1");
    return {d, -b, -c, a};
}

cplx Mat2i::act(cplx z) const {
    return (static_cast<double>(a) * z + static_cast<double>(b)) /
           (static_cast<double>(c) * z + static_cast<double>(d));
}

Mat2i operator*(const Mat2i& x, const Mat2i& y) {
    auto m = [](i64 p, i64 q, i64 r, i64 s) {
        return narrow(static_cast<i128>(p) * q + static_cast<i128>(r) * s);
    };
    return {m(x.a, y.a, x.b, y.c), m(x.a, y.b, x.b, y.d), m(x.c, y.a, x.d, y.c), m(x.c, y.b, x.d, y.d)};
}

i64 SymForm::disc() const { return narrow(static_cast<i128>(B) * B - 4 * static_cast<i128>(A) * C); }

Signature SymForm::signature() const {
    i64 D = disc();
    if (D == 0) return Signature::degenerate;
    if (D > 0) return Signature::indefinite;
    return A > 0 ? Signature::positive_definite : Signature::negative_definite;
}

i64 SymForm::content() const { return std::gcd(std::gcd(A, B), C); }

SymForm SymForm::transform(const Mat2i& g) const {
    i128 p = g.a, q = g.b, r = g.c, s = g.d;
    return {narrow(p * p * A + p * q * B + q * q * C), narrow(2 * p * r * A + (p * s + q * r) * B + 2 * q * s * C),
            narrow(r * r * A + r * s * B + s * s * C)};
}

std::string to_string(const SymForm& f) {
    std::ostringstream os;
    os << "(" << f.A << ", " << f.B << ", " << f.C << ")";
    return os.str();
}

LatticePoint LatticePoint::from_form(const SymForm& f, i64 N) {
    if (!in_lattice(f, N, Lattice::LN)) throw std::invalid_argument("matrix " + to_string(f) + " is not in L_N");
    return {f.A, f.B / (2 * N), f.C / N, N};
}

OrbitInvariant orbit_invariant(const LatticePoint& v) { return {v.d(), v.form().signature()}; }
OrbitInvariant orbit_invariant(const HalfIntegralPoint& w) { return {w.disc(), w.form().signature()}; }

bool in_lattice(const SymForm& f, i64 N, Lattice lat) {
    if (lat == Lattice::VZ) return true;
    return f.B % (2 * N) == 0 && f.C % N == 0;
}

i64 lattice_invariant(const SymForm& f, i64 N, Lattice lat) {
    return lat == Lattice::VZ ? f.disc() : f.disc() / (4 * N);
}

std::array<i64, 3> lattice_coords(const SymForm& f, i64 N, Lattice lat) {
    if (lat == Lattice::VZ) return {f.A, f.B, f.C};
    return {f.A, f.B / (2 * N), f.C / N};
}

SymForm form_from_coords(i64 x1, i64 x2, i64 x3, i64 N, Lattice lat) {
    if (lat == Lattice::VZ) return {x1, x2, x3};
    return {x1, 2 * N * x2, N * x3};
}

PellSolution pell_fundamental(i64 D) {
    i64 s;
    if (D <= 0 || is_square(D, &s)) throw std::invalid_argument("Pell equation needs a positive non-square D");
    if (pos_mod(D, 4) > 1) throw std::invalid_argument("Pell discriminant must be 0 or 1 mod 4");
    // continued fraction of (b + sqrt D)/2, b = D mod 2, b < sqrt D < b + 2
    i64 b = (s % 2 == D % 2) ? s : s - 1;
    i64 P = b, Q = 2;
    i128 qm2 = 1, qm1 = 0;  // convergent denominators q_{k-2}, q_{k-1}
    int len = 0;
    while (true) {
        i64 a = (P + s) / Q;  // Q > 0 along a purely periodic expansion
        i128 qn = static_cast<i128>(a) * qm1 + qm2;
        qm2 = qm1;
        qm1 = qn;
        ++len;
        i64 P1 = a * Q - P;
        i64 Q1 = narrow((static_cast<i128>(D) - static_cast<i128>(P1) * P1) / Q);
        P = P1;
        Q = Q1;
        if (P == b && Q == 2) break;
        if (len > 1000000) throw std::overflow_error("Pell period too long");
    }
    // unit q_{l-1} * (b + sqrt D)/2 + q_{l-2} = (t + u sqrt D)/2
    i128 t = qm1 * b + 2 * qm2;
    i128 u = qm1;
    if (len % 2 == 1) {
        i128 t2 = (t * t + static_cast<i128>(D) * u * u) / 2;
        i128 u2 = t * u;
        t = t2;
        u = u2;
    }
    if (t * t - static_cast<i128>(D) * u * u != 4) throw std::logic_error("Pell solution check failed");
    return {t, u};
}

std::vector<Mat2i> sl2_stabilizer(const SymForm& f) {
    i64 D = f.disc();
    if (D == 0) throw std::invalid_argument("degenerate form has no finite stabilizer description");
    i64 g = f.content();
    i64 a = f.A / g, b = f.B / g, c = f.C / g;
    i64 D0 = D / (g * g);
    auto from_tu = [&](i128 t, i128 u) {
        return Mat2i{narrow((t - b * u) / 2), narrow(a * u), narrow(-c * u), narrow((t + b * u) / 2)};
    };
    std::vector<Mat2i> out;
    if (D0 < 0) {
        for (i64 u = -2; u <= 2; ++u) {
            i64 t2 = 4 + D0 * u * u;
            i64 t;
            if (t2 < 0 || !is_square(t2, &t)) continue;
            out.push_back(from_tu(t, u));
            if (t != 0) out.push_back(from_tu(-t, u));
        }
        std::sort(out.begin(), out.end(), [](const Mat2i& x, const Mat2i& y) {
            return std::tie(x.a, x.b, x.c, x.d) < std::tie(y.a, y.b, y.c, y.d);
        });
        return out;
    }
    if (is_square(D0)) return out;
    PellSolution p = pell_fundamental(D0);
    out.push_back(from_tu(p.t, p.u));
    return out;
}

SymForm sl2_reduce(const SymForm& m, Mat2i* gamma) {
    i64 D = m.disc();
    if (D == 0) throw std::invalid_argument("degenerate point " + to_string(m));
    BinForm f = assoc(m);
    Mat2i sigma;
    i64 root;
    if (D < 0) {
        bool neg = f.a < 0;
        if (neg) f = f.neg();
        f = reduce_definite(f, sigma);
        if (neg) f = f.neg();
    } else if (is_square(D, &root)) {
        f = reduce_square(f, root, sigma);
    } else {
        f = reduce_indefinite(f, D, sigma);
    }
    // report S M_red S^t, whose entries are those of the reduced binary form
    if (gamma) *gamma = sigma * Mat2i{0, 1, -1, 0};
    return {f.a, f.b, f.c};
}

std::vector<SymForm> sl2_classes(i64 D) {
    if (D == 0) throw std::invalid_argument("discriminant 0 is degenerate");
    std::vector<SymForm> out;
    if (pos_mod(D, 4) > 1) return out;
    i64 root;
    if (D < 0) {
        i64 amax = isqrt(-D / 3);
        for (i64 a = 1; a <= amax; ++a) {
            for (i64 b = -a + 1; b <= a; ++b) {
                i64 num = b * b - D;
                if (num % (4 * a) != 0) continue;
                i64 c = num / (4 * a);
                if (c < a || (a == c && b < 0)) continue;
                out.push_back({a, b, c});
                out.push_back({-a, -b, -c});
            }
        }
    } else if (is_square(D, &root)) {
        for (i64 c = 0; c < root; ++c) out.push_back({0, root, c});
    } else {
        i64 s = isqrt(D);
        std::set<SymForm> seen;
        for (i64 b = 1; b <= s; ++b) {
            i64 num = b * b - D;  // = 4ac < 0
            if (num % 4 != 0) continue;
            for (i64 aa = 1; 2 * aa <= s + b; ++aa) {
                if ((num / 4) % aa != 0) continue;
                for (i64 a : {aa, -aa}) {
                    BinForm f{a, b, num / 4 / a};
                    if (!gauss_reduced(f, s)) continue;
                    seen.insert(sl2_reduce(from_assoc(f)));
                }
            }
        }
        out.assign(seen.begin(), seen.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- P^1(Z/N) ----

P1ModN::P1ModN(i64 N) : N_(N) {
    if (N < 1) throw std::invalid_argument("level must be positive");
    if (N == 1) {
        reps_.push_back({0, 1});
        lookup_.assign(1, 0);
        return;
    }
    std::vector<i64> units;
    for (i64 u = 1; u < N; ++u)
        if (std::gcd(u, N) == 1) units.push_back(u);
    std::map<std::pair<i64, i64>, std::size_t> canon;
    lookup_.assign(static_cast<std::size_t>(N * N), static_cast<std::size_t>(-1));
    std::vector<std::pair<i64, i64>> keys(static_cast<std::size_t>(N * N));
    for (i64 c = 0; c < N; ++c) {
        for (i64 d = 0; d < N; ++d) {
            if (std::gcd(std::gcd(c, d), N) != 1) continue;
            std::pair<i64, i64> best{N, N};
            for (i64 u : units) best = std::min(best, std::pair<i64, i64>{u * c % N, u * d % N});
            keys[static_cast<std::size_t>(c * N + d)] = best;
            canon.emplace(best, 0);
        }
    }
    for (auto& [k, idx] : canon) {
        idx = reps_.size();
        reps_.push_back(k);
    }
    for (i64 c = 0; c < N; ++c)
        for (i64 d = 0; d < N; ++d)
            if (std::gcd(std::gcd(c, d), N) == 1)
                lookup_[static_cast<std::size_t>(c * N + d)] = canon.at(keys[static_cast<std::size_t>(c * N + d)]);
}

std::size_t P1ModN::index(i64 c, i64 d) const {
    if (N_ == 1) return 0;
    std::size_t i = lookup_[static_cast<std::size_t>(pos_mod(c, N_) * N_ + pos_mod(d, N_))];
    if (i == static_cast<std::size_t>(-1)) throw std::invalid_argument("not a point of P^1(Z/N)");
    return i;
}

Mat2i P1ModN::lift(std::size_t i) const {
    auto [c, d] = reps_[i];
    if (c == 0 && d == 1) return {};
    i64 cc = c == 0 ? N_ : c;
    i64 dd = d;
    while (std::gcd(cc, dd) != 1) dd += N_;
    i64 x, y;
    ext_gcd(dd, cc, x, y);  // x dd + y cc = 1
    return {x, -y, cc, dd};
}

std::size_t P1ModN::act(std::size_t i, const Mat2i& s) const {
    auto [c, d] = reps_[i];
    i64 nc = pos_mod(narrow(static_cast<i128>(c) * s.a + static_cast<i128>(d) * s.c), N_);
    i64 nd = pos_mod(narrow(static_cast<i128>(c) * s.b + static_cast<i128>(d) * s.d), N_);
    return index(nc, nd);
}

// ---- orbit representatives ----

OrbitRep make_rep(const SymForm& f, i64 N, Lattice lat) {
    if (!in_lattice(f, N, lat)) throw std::invalid_argument("point " + to_string(f) + " is not in the lattice");
    i64 D = f.disc();
    if (D == 0) throw std::invalid_argument("degenerate point " + to_string(f));
    OrbitRep rep;
    rep.N = N;
    rep.lattice = lat;
    rep.form = f;
    rep.coords = lattice_coords(f, N, lat);
    rep.target = lattice_invariant(f, N, lat);
    rep.signature = f.signature();
    auto S = sl2_stabilizer(f);
    double A = static_cast<double>(f.A), B = static_cast<double>(f.B), C = static_cast<double>(f.C);
    if (D < 0) {
        int count = 0;
        for (const auto& s : S)
            if (s.in_gamma0(N)) ++count;
        rep.stabilizer_order = count;
        double sq = std::sqrt(static_cast<double>(-D));
        double x = B / (2.0 * C), y = sq / (2.0 * std::abs(C));
        rep.heegner = {x, y};
        double ry = std::sqrt(y);
        rep.g = {ry, x / ry, 0.0, 1.0 / ry};
        rep.t = sq / 2.0;
        return rep;
    }
    double sq = std::sqrt(static_cast<double>(D));
    i64 root;
    rep.split = is_square(D, &root);
    if (f.C != 0) {
        double r1 = (B - sq) / (2.0 * C), r2 = (B + sq) / (2.0 * C);
        if (r1 > r2) std::swap(r1, r2);
        if (rep.split) {
            // exact rational endpoints
            r1 = static_cast<double>(f.B - root) / static_cast<double>(2 * f.C);
            r2 = static_cast<double>(f.B + root) / static_cast<double>(2 * f.C);
            if (r1 > r2) std::swap(r1, r2);
        }
        rep.root_lo = r1;
        rep.root_hi = r2;
        double alpha = C > 0 ? r2 : r1, beta = C > 0 ? r1 : r2;
        double k = 1.0 / std::sqrt(std::abs(alpha - beta));
        double k2 = (alpha > beta ? 1.0 : -1.0) * k;
        rep.g = {alpha * k, beta * k2, k, k2};
        rep.t = C * (alpha - beta) / 2.0;
    } else {
        rep.root_lo = A / B;
        rep.root_hi = std::numeric_limits<double>::infinity();
        if (f.B > 0) {
            rep.g = {1.0, A / B, 0.0, 1.0};
            rep.t = B / 2.0;
        } else {
            rep.g = {A / B, -1.0, 1.0, 0.0};
            rep.t = -B / 2.0;
        }
    }
    if (!rep.split) {
        const Mat2i& gen = S.front();
        // least power of the SL2(Z) automorph lying in Gamma_0(N); -I is always in Gamma_0(N)
        i64 k = 1;
        i64 c = pos_mod(gen.c, N), dd = pos_mod(gen.d, N), a0 = pos_mod(gen.a, N), b0 = pos_mod(gen.b, N);
        i64 pc = c, pd = dd;  // bottom row of gen^k mod N
        while (pc % N != 0) {
            i64 nc = (pc * a0 + pd * c) % N, nd = (pc * b0 + pd * dd) % N;
            pc = nc;
            pd = nd;
            ++k;
        }
        Mat2i P = mat_pow(gen, k);
        if (!P.in_gamma0(N) || f.transform(P) != f) throw std::logic_error("automorph check failed");
        rep.automorph = P;
        double tr = std::abs(static_cast<double>(P.a + P.d));
        double e0 = (tr + std::sqrt(tr * tr - 4.0)) / 2.0;
        rep.eta = e0 * e0;
    }
    return rep;
}

std::vector<OrbitRep> enumerate_orbits(i64 N, i64 target, Lattice lat) {
    if (target == 0) throw std::invalid_argument("target 0 is the degenerate locus");
    if (N < 1) throw std::invalid_argument("level must be positive");
    i64 D = lat == Lattice::LN ? narrow(static_cast<i128>(4) * N * target) : target;
    std::vector<OrbitRep> out;
    P1ModN p1(N);
    for (const SymForm& red : sl2_classes(D)) {
        auto S = sl2_stabilizer(red);
        std::vector<Mat2i> lifts(p1.size());
        std::vector<bool> kept(p1.size(), false);
        for (std::size_t i = 0; i < p1.size(); ++i) {
            lifts[i] = p1.lift(i);
            kept[i] = in_lattice(red.transform(lifts[i]), N, lat);
        }
        std::vector<bool> done(p1.size(), false);
        for (std::size_t i = 0; i < p1.size(); ++i) {
            if (!kept[i] || done[i]) continue;
            std::vector<std::size_t> stack{i};
            done[i] = true;
            std::size_t best = i;
            while (!stack.empty()) {
                std::size_t x = stack.back();
                stack.pop_back();
                best = std::min(best, x);
                for (const auto& s : S) {
                    std::size_t y = p1.act(x, s);
                    if (!done[y]) {
                        done[y] = true;
                        stack.push_back(y);
                    }
                }
            }
            OrbitRep rep = make_rep(red.transform(lifts[best]), N, lat);
            if (D < 0) {
                int fix = 0;
                for (const auto& s : S)
                    if (p1.act(best, s) == best) ++fix;
                if (fix != rep.stabilizer_order) throw std::logic_error("stabilizer bookkeeping mismatch");
            }
            out.push_back(std::move(rep));
        }
    }
    return out;
}

Reduction reduce(const SymForm& f, i64 N, Lattice lat) {
    if (!in_lattice(f, N, lat)) throw std::invalid_argument("point " + to_string(f) + " is not in the lattice");
    Mat2i gamma;
    SymForm red = sl2_reduce(f, &gamma);
    P1ModN p1(N);
    auto S = sl2_stabilizer(red);
    std::size_t x0 = p1.index_of(gamma);
    // explore the stabilizer orbit of the coset, tracking the group element reaching each coset
    std::map<std::size_t, Mat2i> reached{{x0, Mat2i{}}};
    std::vector<std::size_t> stack{x0};
    while (!stack.empty()) {
        std::size_t x = stack.back();
        stack.pop_back();
        Mat2i sx = reached.at(x);
        for (const auto& s : S) {
            std::size_t y = p1.act(x, s);
            if (!reached.count(y)) {
                reached.emplace(y, sx * s);
                stack.push_back(y);
            }
        }
    }
    auto [best, s] = *reached.begin();
    Mat2i tau = p1.lift(best);
    Mat2i h = tau * s.inverse() * gamma.inverse();
    Reduction r{make_rep(red.transform(tau), N, lat), h};
    if (!h.in_gamma0(N) || f.transform(h) != r.rep.form) throw std::logic_error("reduction certificate failed");
    return r;
}

cplx heegner_point(const OrbitRep& rep) {
    if (rep.signature != Signature::positive_definite && rep.signature != Signature::negative_definite)
        throw std::invalid_argument("Heegner point needs a definite representative");
    return rep.heegner;
}

std::optional<Mat2i> fundamental_automorph(const OrbitRep& rep) {
    if (rep.signature != Signature::indefinite) throw std::invalid_argument("automorph needs an indefinite representative");
    return rep.automorph;
}

std::string orbits_csv_header() { return "N,lattice,target,v1,v2,v3,signature,stabilizer,epsilon"; }

std::string orbit_csv_row(const OrbitRep& r) {
    std::ostringstream os;
    os << r.N << ',' << to_string(r.lattice) << ',' << r.target << ',' << r.coords[0] << ',' << r.coords[1] << ','
       << r.coords[2] << ',' << to_string(r.signature) << ',';
    if (r.signature != Signature::indefinite) {
        os << "finite," << r.stabilizer_order;
    } else if (r.split) {
        os << "split,inf";
    } else {
        const Mat2i& A = *r.automorph;
        os << "cyclic " << A.a << ' ' << A.b << ' ' << A.c << ' ' << A.d << ",inf";
    }
    return os.str();
}

std::vector<OrbitRep> parse_orbits_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<OrbitRep> out;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            if (line != orbits_csv_header()) throw std::invalid_argument("unexpected orbit CSV header");
            header = false;
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (cols.size() != 9) throw std::invalid_argument("orbit CSV row needs 9 columns: " + line);
        i64 N = std::stoll(cols[0]);
        Lattice lat = lattice_from_string(cols[1]);
        SymForm f = form_from_coords(std::stoll(cols[3]), std::stoll(cols[4]), std::stoll(cols[5]), N, lat);
        OrbitRep rep = make_rep(f, N, lat);
        if (orbit_csv_row(rep) != line) throw std::invalid_argument("orbit CSV row inconsistent with recomputation: " + line);
        out.push_back(std::move(rep));
    }
    return out;
}

}  // namespace sks
