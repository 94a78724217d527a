#include "thermosense/special.hpp"

#include <cmath>
#include <numbers>

namespace thermosense {

namespace {

constexpr double kSeriesLimit = 3.0;
constexpr double kSaturation = 6.0;  // erfc(6) ~ 2e-17

double erf_series(double z) {
    // erf(z) = 2/sqrt(pi) * sum_n (-1)^n z^(2n+1) / (n! (2n+1))
    const double z2 = z * z;
    double term = z;  // (-1)^n z^(2n+1) / n!
    double sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= -z2 / n;
        const double contrib = term / (2 * n + 1);
        sum += contrib;
        if (std::abs(contrib) < 1e-17 * std::abs(sum)) break;
    }
    return sum * 2.0 / std::sqrt(std::numbers::pi);
}

// erfc(z) for z >= kSeriesLimit:
// erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
double erfc_continued_fraction(double z) {
    constexpr double tiny = 1e-300;
    double f = z;
    double c = z;
    double d = 0.0;
    for (int k = 1; k < 500; ++k) {
        const double a = 0.5 * k;
        d = z + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = z + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-z * z) / (std::sqrt(std::numbers::pi) * f);
}

}  // namespace

double erf(double z) {
    if (std::isnan(z)) return z;
    const double a = std::abs(z);
    double value;
    if (a < kSeriesLimit) {
        value = erf_series(a);
    } else if (a < kSaturation) {
        value = 1.0 - erfc_continued_fraction(a);
    } else {
        value = 1.0;
    }
    return z < 0 ? -value : value;
}

double erfc(double z) {
    if (std::isnan(z)) return z;
    if (z < kSeriesLimit) return 1.0 - erf(z);
    if (z > 27.0) return 0.0;
    return erfc_continued_fraction(z);
}

}  // namespace thermosense
