#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "zk/bessel.hpp"
#include "zk/kernels.hpp"
#include "zk/radial.hpp"

using namespace zk;

namespace {

RadialField gaussian(const GridPtr& g, double w = 1.0) {
    return sample(g, [w](double r) { return cplx(std::exp(-r * r / (2 * w * w)), 0); });
}

RadialField W_field(const GridPtr& g) {
    return sample(g, [](double r) { return cplx(oracle::W(r), 0); });
}

// smooth truncation used only by these tests
RadialField W_trunc(const GridPtr& g) {
    const double a = 0.6 * g->r_max, b = 0.9 * g->r_max;
    return sample(g, [a, b](double r) {
        double c = 1;
        if (r >= b)
            c = 0;
        else if (r > a) {
            const double s = (r - a) / (b - a);
            c = std::pow(std::cos(oracle::pi * s / 2), 2);
        }
        return cplx(c * oracle::W(r), 0);
    });
}

}  // namespace

TEST_CASE("J1 against boost") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(0.0, 20000.0);
    double worst = 0;
    for (int i = 0; i < 4000; ++i) {
        const double x = i < 200 ? 0.01 + 0.25 * i : d(rng);
        worst = std::max(worst, std::abs(bessel_j1(x) - oracle::j1(x)));
    }
    CHECK(worst < 2e-15);
}

TEST_CASE("J1 zeros against boost") {
    const auto z = bessel_j1_zeros(4097);
    for (int k : {1, 2, 3, 10, 100, 1000, 4096, 4097}) CHECK(std::abs(z[k - 1] - oracle::j1_zero(k)) < 1e-12);
    CHECK(std::abs(z[0] - 3.8317059702) < 1e-10);
}

TEST_CASE("make_grid small") {
    auto g = make_grid(8, 10.0);
    CHECK(g->r[0] == doctest::Approx(10.0 * oracle::j1_zero(1) / oracle::j1_zero(9)).epsilon(1e-13));
    CHECK(g->rho[0] == doctest::Approx(0.38317059702).epsilon(1e-10));
    for (int k = 1; k < 8; ++k) {
        CHECK(g->r[k] > g->r[k - 1]);
        CHECK(g->rho[k] > g->rho[k - 1]);
    }
    CHECK(g->r.back() < 10.0);
    CHECK_THROWS_AS(make_grid(4, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(16, NAN), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(16, INFINITY), std::invalid_argument);
}

TEST_CASE("kernel is orthogonal after refinement") {
    for (int n : {8, 64, 512}) {
        auto g = make_grid(n, 20.0);
        double worst = 0;
        const std::size_t nn = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i < nn; ++i)
            for (std::size_t j = 0; j < nn; ++j) {
                double s = 0;
                for (std::size_t k = 0; k < nn; ++k) s += g->kernel[i * nn + k] * g->kernel[k * nn + j];
                worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
            }
        CHECK(worst < 1e-13);
    }
}

TEST_CASE("Gaussian transform pair") {
    auto g = make_grid(512, 40.0);
    auto fhat = transform(gaussian(g));
    CHECK(fhat.space == Space::spectral);
    auto exact = sample_spectral(g, [](double p) { return cplx(oracle::gaussian_hat(p), 0); });
    CHECK(rel_l2_diff(fhat, exact) < 1e-8);
}

TEST_CASE("transform matches adaptive Hankel quadrature for an algebraic profile") {
    auto g = make_grid(512, 60.0);
    auto f = [](double r) { return std::pow(1 + r * r, -4.0); };
    auto fhat = transform(sample(g, [&](double r) { return cplx(f(r), 0); }));
    for (int k : {0, 5, 40, 120}) {
        const double ref = oracle::hankel4(f, g->rho[k], 60.0);
        CHECK(std::abs(fhat[k].real() - ref) < 1e-9 * std::abs(oracle::hankel4(f, g->rho[0], 60.0)));
    }
}

TEST_CASE("round trip and Plancherel") {
    auto g = make_grid(512, 40.0);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    // band limited: random spectrum in the lower 3/4 of the nodes
    RadialField s(g, Space::spectral);
    for (int k = 0; k < 3 * 512 / 4; ++k) s[k] = cplx(nd(rng), nd(rng)) * std::exp(-0.002 * k);
    auto f = transform(s);
    auto back = transform(transform(f));
    CHECK(rel_l2_diff(back, f) < 1e-10);
    const double phys = l2_norm_sq(f);
    const double spec = l2_norm_sq_spectral(transform(f));
    CHECK(std::abs(phys - spec) / phys < 1e-8);
    auto zero = transform(RadialField(g));
    CHECK(max_abs(zero) == 0.0);
}

TEST_CASE("serial and parallel kernels agree") {
    auto g = make_grid(1024, 50.0);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    rvec X(1024 * 3), Y1(1024 * 3), Y2(1024 * 3);
    for (auto& x : X) x = nd(rng);
    kernels::matvec_serial(g->kernel.data(), 1024, X.data(), Y1.data(), 3);
    kernels::matvec_parallel(g->kernel.data(), 1024, X.data(), Y2.data(), 3);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < Y1.size(); ++i) {
        num += (Y1[i] - Y2[i]) * (Y1[i] - Y2[i]);
        den += Y1[i] * Y1[i];
    }
    CHECK(std::sqrt(num / den) < 1e-13);
}

TEST_CASE("multipliers") {
    auto g = make_grid(1024, 200.0);
    auto W2 = W_field(g) * W_field(g);
    CHECK(rel_l2_diff(op_Dinv(op_D(W2)), W2) < 1e-8);

    auto f = gaussian(g, 2.0);
    CHECK(rel_l2_diff(wave_flow(f, 0.0), f) < 1e-13);
    auto m1 = [](double p) { return std::polar(1.0, 0.3 * p * p); };
    auto m2 = [](double p) { return cplx(1.0 / (1 + p * p), 0); };
    auto two = apply_multiplier(apply_multiplier(f, m1), m2);
    auto one = apply_multiplier(f, [&](double p) { return m1(p) * m2(p); });
    CHECK(rel_l2_diff(two, one) < 1e-13);
    CHECK_THROWS_AS(apply_multiplier(f, [](double) { return cplx(NAN, 0); }), std::domain_error);
}

TEST_CASE("Laplacian of W is -W^3 in the interior") {
    for (auto [n, R] : {std::pair{1024, 200.0}, std::pair{4096, 400.0}}) {
        auto g = make_grid(n, R);
        auto lap = op_laplacian(W_trunc(g));
        double worst = 0;
        for (int k = 0; k < n && g->r[k] < R / 2; ++k)
            worst = std::max(worst, std::abs(lap[k].real() + std::pow(oracle::W(g->r[k]), 3)));
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("norms and pairing") {
    auto g = make_grid(4096, 400.0);
    auto W = W_field(g);
    CHECK(std::abs(std::pow(lp_norm(W, 4), 4) / oracle::W4_4() - 1) < 1e-6);
    auto W2 = W * W;
    CHECK(std::abs(lp_norm(W2, 2) / std::sqrt(oracle::W4_4()) - 1) < 1e-6);
    CHECK(inner(W, W * W2) == doctest::Approx(oracle::W4_4()).epsilon(1e-6));
    CHECK(lp_norm(RadialField(g), 3) == 0.0);
    CHECK(lp_norm(RadialField(g), INFINITY) == 0.0);
    CHECK(lp_norm(W, INFINITY) == doctest::Approx(oracle::W(g->r[0])));
    CHECK_THROWS_AS(lp_norm(W, 0.5), std::invalid_argument);

    auto f = gaussian(g, 3.0);
    CHECK(inner(f, cplx(0, 1) * f) == 0.0);
    for (double p : {1.0, 2.0, 4.0, 8.0 / 3}) CHECK(lp_norm(cplx(-2.5, 0) * f, p) == doctest::Approx(2.5 * lp_norm(f, p)).epsilon(1e-14));
}

TEST_CASE("gradient norm") {
    auto g = make_grid(4096, 400.0);
    auto Wt = W_trunc(g);
    const double G = gradient_norm_sq(Wt);
    // truncation of the slowly decaying W shifts the spectral value at the 1e-3 level
    CHECK(std::abs(G / oracle::W4_4() - 1) < 2e-3);
    CHECK(inner(Wt, op_laplacian(Wt)) == doctest::Approx(-G).epsilon(1e-10));
    CHECK(gradient_norm_sq(cplx(0.7, 0) * Wt) == doctest::Approx(0.49 * G).epsilon(1e-13));
    CHECK(gradient_norm_sq(RadialField(g)) == 0.0);

    auto g2 = make_grid(512, 40.0);
    CHECK(gradient_norm_sq(gaussian(g2)) == doctest::Approx(oracle::radial_integral([](double r) { return r * r * std::exp(-r * r); })).epsilon(1e-10));
}

TEST_CASE("finite difference radial derivative") {
    auto g = make_grid(1024, 50.0);
    auto d = d_dr(gaussian(g, 2.0));
    double worst = 0;
    for (int k = 0; k < 1024; ++k) {
        const double r = g->r[k];
        worst = std::max(worst, std::abs(d[k].real() + r / 4 * std::exp(-r * r / 8)));
    }
    CHECK(worst < 1e-6);
}
