#pragma once
// Globally adaptive Gauss-Kronrod (7/15) quadrature for complex-valued integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "sks/common.hpp"

namespace sks {

struct QuadResult {
    cplx value{0.0, 0.0};
    double error = 0.0;
    double l1 = 0.0;  // integral of |f|, a scale for absolute tolerances
    int evals = 0;
    bool converged = true;
};

struct QuadOptions {
    double rel_tol = 1e-13;
    double l1_tol = 1e-15;  // absolute tolerance as a fraction of the integral of |f|
    int max_intervals = 4000;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    cplx value;
    double error, l1;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx fc = f(c);
    cplx rk = fc * kWgk[7];
    cplx rg = fc * kWg[3];
    double l1 = std::abs(fc) * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        double dx = h * kXgk[j];
        cplx f1 = f(c - dx), f2 = f(c + dx);
        rk += (f1 + f2) * kWgk[j];
        l1 += (std::abs(f1) + std::abs(f2)) * kWgk[j];
        if (j % 2 == 1) rg += (f1 + f2) * kWg[j / 2];
    }
    double err = std::abs((rk - rg) * h);
    // QUADPACK-style sharpening of the raw Kronrod-Gauss difference
    double scale = std::abs(h) * l1;
    if (scale > 0 && err > 0) err = std::min(err, scale * std::pow(200.0 * err / scale, 1.5));
    return {a, b, rk * h, err, std::abs(h) * l1};
}

}  // namespace detail

// Integrate f over [a, b], initially split at the given interior breakpoints.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opt = {},
                     const std::vector<double>& breaks = {}) {
    std::vector<double> pts{a};
    for (double x : breaks)
        if (x > std::min(a, b) && x < std::max(a, b)) pts.push_back(x);
    pts.push_back(b);
    if (a < b) std::sort(pts.begin() + 1, pts.end() - 1);
    else std::sort(pts.begin() + 1, pts.end() - 1, std::greater<>());

    std::priority_queue<detail::Panel> heap;
    QuadResult r;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto p = detail::gk15(f, pts[i], pts[i + 1]);
        r.evals += 15;
        heap.push(p);
    }
    auto totals = [&]() {
        cplx v = 0;
        double e = 0, l = 0;
        auto copy = heap;
        while (!copy.empty()) {
            v += copy.top().value;
            e += copy.top().error;
            l += copy.top().l1;
            copy.pop();
        }
        r.value = v;
        r.error = e;
        r.l1 = l;
    };
    totals();
    int n = static_cast<int>(heap.size());
    while (r.error > std::max(opt.rel_tol * std::abs(r.value), opt.l1_tol * r.l1)) {
        if (n >= opt.max_intervals) {
            r.converged = false;
            break;
        }
        auto worst = heap.top();
        heap.pop();
        double m = 0.5 * (worst.a + worst.b);
        auto left = detail::gk15(f, worst.a, m);
        auto right = detail::gk15(f, m, worst.b);
        r.evals += 30;
        heap.push(left);
        heap.push(right);
        ++n;
        r.value += left.value + right.value - worst.value;
        r.error += left.error + right.error - worst.error;
        r.l1 += left.l1 + right.l1 - worst.l1;
        if (n % 64 == 0) totals();  // limit drift of the running sums
    }
    totals();
    return r;
}

}  // namespace sks
