#include "tae/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tae {

namespace {

constexpr double two_over_sqrt_pi = 2.0 * std::numbers::inv_sqrtpi;

// erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)); every term positive.
double erf_series(double x)
{
    const double ax = std::abs(x);
    const double x2 = x * x;
    double term = ax;
    double total = ax;
    for (int n = 1; n < 200; ++n) {
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        total += term;
        if (term < total * 1e-17) break;
    }
    return std::copysign(two_over_sqrt_pi * std::exp(-x2) * total, x);
}

// erfc(x) for x >= 2 via the Laplace continued fraction, evaluated with modified Lentz.
// erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
double erfc_continued_fraction(double x)
{
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int n = 1; n < 500; ++n) {
        const double a = 0.5 * n;
        d = x + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x * x) * std::numbers::inv_sqrtpi / f;
}

// Giles' single-precision erfinv approximation, written in terms of w = -log((1-x)(1+x)) so
// that tail callers can supply w without cancellation.
double erfinv_guess(double w, double x)
{
    double p;
    if (w < 5.0) {
        w -= 2.5;
        p = 2.81022636e-08;
        p = 3.43273939e-07 + p * w;
        p = -3.5233877e-06 + p * w;
        p = -4.39150654e-06 + p * w;
        p = 0.00021858087 + p * w;
        p = -0.00125372503 + p * w;
        p = -0.00417768164 + p * w;
        p = 0.246640727 + p * w;
        p = 1.50140941 + p * w;
    } else {
        w = std::sqrt(w) - 3.0;
        p = -0.000200214257;
        p = 0.000100950558 + p * w;
        p = 0.00134934322 + p * w;
        p = -0.00367342844 + p * w;
        p = 0.00573950773 + p * w;
        p = -0.0076224613 + p * w;
        p = 0.00943887047 + p * w;
        p = 1.00167406 + p * w;
        p = 2.83297682 + p * w;
    }
    return p * x;
}

}  // namespace

double erf(double x)
{
    if (std::isnan(x)) return x;
    const double ax = std::abs(x);
    if (ax < 2.0) return erf_series(x);
    return std::copysign(1.0 - erfc_continued_fraction(ax), x);
}

double erfc(double x)
{
    if (std::isnan(x)) return x;
    if (x >= 2.0) return erfc_continued_fraction(x);
    if (x <= -2.0) return 2.0 - erfc_continued_fraction(-x);
    return 1.0 - erf_series(x);
}

double erf_inv(double y)
{
    if (!(y > -1.0 && y < 1.0)) throw std::domain_error("erf_inv: argument " + std::to_string(y) + " outside (-1, 1)");
    if (y == 0.0) return 0.0;
    const double w = -std::log((1.0 - y) * (1.0 + y));
    double x = erfinv_guess(w, y);
    for (int step = 0; step < 2; ++step) x -= (erf(x) - y) / (two_over_sqrt_pi * std::exp(-x * x));
    return x;
}

double erfc_inv(double y)
{
    if (!(y > 0.0 && y < 2.0)) throw std::domain_error("erfc_inv: argument " + std::to_string(y) + " outside (0, 2)");
    if (y == 1.0) return 0.0;
    // erfc_inv(y) = erf_inv(1 - y); (1 - x)(1 + x) with x = 1 - y is y(2 - y).
    const double w = -std::log(y * (2.0 - y));
    double x = erfinv_guess(w, 1.0 - y);
    for (int step = 0; step < 2; ++step) x += (erfc(x) - y) / (two_over_sqrt_pi * std::exp(-x * x));
    return x;
}

double inverse_normal_cdf(double p, double mu, double sigma)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("inverse_normal_cdf: probability " + std::to_string(p) + " outside (0, 1)");
    if (p == 0.5) return mu;
    // erf_inv(2p - 1) == -erfc_inv(2p); the erfc form keeps precision for small p.
    const double z = p < 0.5 ? -erfc_inv(2.0 * p) : erfc_inv(2.0 * (1.0 - p));
    return mu + std::numbers::sqrt2 * sigma * z;
}

}  // namespace tae
