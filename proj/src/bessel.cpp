#include "zk/bessel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zk {

namespace {

constexpr double kAsymptoticFrom = 25.0;

double j1_hankel(double x) {
    // P, Q series of the Hankel expansion for nu = 1 (mu = 4)
    const double mu = 4.0;
    double P = 1.0, Q = 0.0;
    double t = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        t *= (mu - odd * odd) / (k * 8.0 * x);
        const double term = ((k / 2) % 2 == 0) ? t : -t;
        if (k % 2 == 1)
            Q += term;
        else
            P += term;
        if (std::abs(t) < 1e-18) break;
    }
    const double s = std::sin(x), c = std::cos(x);
    const double cos_chi = (s - c) * std::numbers::sqrt2 / 2.0;
    const double sin_chi = -(s + c) * std::numbers::sqrt2 / 2.0;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (P * cos_chi - Q * sin_chi);
}

}  // namespace

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::abs(x)); }

double bessel_j1(double x) {
    if (x < 0) return -bessel_j1(-x);
    if (x < kAsymptoticFrom) return std::cyl_bessel_j(1.0, x);
    return j1_hankel(x);
}

std::vector<double> bessel_j1_zeros(int count) {
    if (count < 0) throw std::invalid_argument("bessel_j1_zeros: negative count");
    std::vector<double> z(static_cast<std::size_t>(count));
    for (int k = 1; k <= count; ++k) {
        const double b = (k + 0.25) * std::numbers::pi;
        double x = b - 3.0 / (8.0 * b) + 36.0 / (1536.0 * b * b * b);
        for (int it = 0; it < 12; ++it) {
            const double f = bessel_j1(x);
            const double fp = bessel_j0(x) - f / x;
            const double dx = f / fp;
            x -= dx;
            if (std::abs(dx) < 1e-15 * x) break;
        }
        z[static_cast<std::size_t>(k - 1)] = x;
    }
    return z;
}

}  // namespace zk
