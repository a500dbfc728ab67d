#pragma once
// Independent reference values for the tests. Nothing here calls into the library.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;
inline constexpr double area_s3 = 2 * pi * pi;

inline double W(double r) { return 1.0 / (1.0 + r * r / 8.0); }

inline double j1_zero(int k) { return boost::math::cyl_bessel_j_zero(1.0, k); }
inline double j1(double x) { return boost::math::cyl_bessel_j(1, x); }

// int_0^inf f(r) r^3 dr * |S^3|
template <class F>
double radial_integral(F f) {
    boost::math::quadrature::exp_sinh<double> q;
    return area_s3 * q.integrate([&](double r) { return f(r) * r * r * r; });
}

template <class F>
double radial_integral(F f, double a, double b) {
    boost::math::quadrature::tanh_sinh<double> q;
    return area_s3 * q.integrate([&](double r) { return f(r) * r * r * r; }, a, b);
}

// hat f(rho) = (2pi)^2 rho^-1 int_0^inf f(r) J_1(r rho) r^2 dr, by adaptive Gauss-Kronrod on
// [0, cutoff]; f must be negligible beyond cutoff
template <class F>
double hankel4(F f, double rho, double cutoff) {
    auto integrand = [&](double r) { return f(r) * j1(r * rho) * r * r; };
    double total = 0;
    const double h = 1.0;
    for (double a = 0; a < cutoff; a += h)
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, a + h, 8, 1e-14);
    return 4 * pi * pi * total / rho;
}

// closed forms
inline double W4_4() { return 32 * pi * pi / 3; }
inline double ES_W() { return 8 * pi * pi / 3; }
inline double gaussian_hat(double rho) { return 4 * pi * pi * std::exp(-rho * rho / 2); }
// int_{R^4} e^{-r^2} dx = pi^2
inline double gaussian_mass(double amp, double width) {
    // |a e^{-r^2/(2w^2)}|^2 = a^2 e^{-r^2/w^2}
    return amp * amp * pi * pi * std::pow(width, 4);
}

}  // namespace oracle
