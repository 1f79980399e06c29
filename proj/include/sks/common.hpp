#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sks {

using i64 = std::int64_t;
using i128 = __int128;
using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Exit-code classes used by the CLI: config -> 2, precision -> 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PrecisionError : std::runtime_error {
    double achieved;
    PrecisionError(const std::string& what, double achieved_estimate)
        : std::runtime_error(what), achieved(achieved_estimate) {}
};

struct CacheMiss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// e[x] = exp(2 pi i x)
inline cplx e(double x) {
    x -= std::floor(x);
    return std::polar(1.0, 2.0 * kPi * x);
}

// e[num/den] with exact reduction of the rational argument
inline cplx e_frac(i64 num, i64 den) {
    i64 r = num % den;
    if (r < 0) r += den;
    if (r == 0) return 1.0;
    if (2 * r == den) return -1.0;
    if (4 * r == den) return kI;
    if (4 * r == 3 * den) return -kI;
    return std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(den));
}

inline i64 floor_div(i64 a, i64 b) {
    i64 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline i64 pos_mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace sks
