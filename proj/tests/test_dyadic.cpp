#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "zk/dyadic.hpp"

using namespace zk;

namespace {

// the cos^2 bump written out independently
double phi_ref(double t) {
    if (t <= 1) return 1;
    if (t >= 2) return 0;
    return 0.5 * (1 + std::cos(oracle::pi * (t - 1)));
}

RadialField band_limited(const GridPtr& g) {
    // spectrally supported well inside the grid band
    return sample_spectral(g, [](double p) { return cplx(std::exp(-(p - 3) * (p - 3)) + 0.5 * std::exp(-(p - 10) * (p - 10) / 4), 0); });
}

}  // namespace

TEST_CASE("bump and annulus pieces") {
    for (double t : {0.0, 0.5, 1.0, 1.25, 1.5, 1.9, 2.0, 3.0}) CHECK(bump_phi(t) == doctest::Approx(phi_ref(t)).epsilon(1e-15));
    CHECK(chi0(0.4) == 0.0);
    CHECK(chi0(2.0) == 0.0);
    CHECK(chi0(1.0) == doctest::Approx(1.0));
    // telescoping: the pieces over all scales sum to one away from 0
    for (double rho : {0.013, 0.7, 1.0, 3.3, 17.0, 250.0}) {
        double tot = 0;
        for (int k = -20; k <= 20; ++k) tot += chi0(rho / std::ldexp(1.0, k));
        CHECK(tot == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("dyadic blocks cover the grid band") {
    auto g = make_grid(256, 40);
    const auto b = dyadic_blocks(*g);
    REQUIRE(!b.empty());
    CHECK(b.front() / 2 < g->rho_min());
    CHECK(b.back() * 2 > g->rho_max());
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] == 2 * b[i - 1]);
}

TEST_CASE("partition of unity on band-limited data") {
    auto g = make_grid(512, 40);
    const RadialField f = band_limited(g);
    const auto pieces = lp_decompose(f);
    RadialField sum(g);
    for (const auto& p : pieces) sum = sum + p;
    CHECK(rel_l2_diff(sum, to_physical(f)) < 1e-9);
    CHECK(uncovered_mass(f) < 1e-18 * l2_norm_sq(f) + 1e-300);
    // a single piece equals the direct projection
    const auto blocks = dyadic_blocks(*g);
    const std::size_t i = 3;
    CHECK(rel_l2_diff(pieces[i], lp_project(f, blocks[i])) < 1e-13);
}

TEST_CASE("besov norm brackets the L2 norm") {
    auto g = make_grid(512, 40);
    const RadialField f = band_limited(g);
    const double b = besov_norm(f, 0, 2, 2);
    const double l2 = std::sqrt(l2_norm_sq(f));
    // chi0^2 summed over the scales lies in [1/2, 1]
    CHECK(b <= l2 * (1 + 1e-12));
    CHECK(b >= l2 / std::sqrt(2.0) * (1 - 1e-12));
    CHECK(besov_norm(f, 0, 2, INFINITY) <= b);
    CHECK_THROWS_AS(besov_norm(f, 0, 0.5, 2), std::invalid_argument);
}

TEST_CASE("frequency weight table for beta 2 and S = {1, 1024}") {
    const auto w = build_weight(2, {1, 1024});
    CHECK(std::abs(w(4) - 1) < 1e-12);
    CHECK(std::abs(w(32) - 32) < 1e-12 * 32);
    CHECK(std::abs(w(256) - 1024) < 1e-12 * 1024);
    // unit below 1, plateaus of width beta^2 each side, tail r / beta^2
    CHECK(w(0.01) == 1.0);
    CHECK(w(1.0) == 1.0);
    CHECK(w(3.9) == 1.0);
    CHECK(w(300) == 1024.0);
    CHECK(w(4096) == 1024.0);
    CHECK(std::abs(w(8192) - 2048) < 1e-12 * 2048);
    CHECK(std::abs(w(1e6) - 2.5e5) < 1e-12 * 2.5e5);
    // p on the intermediate interval: log 4 / log sqrt(1024 / 16) = 2/3
    CHECK(std::abs(w.p_exponent(32) - 2.0 / 3.0) < 1e-14);
    // continuity at the plateau ends
    CHECK(std::abs(w(4 * (1 + 1e-12)) - 1) < 1e-10);
    CHECK(std::abs(w(256 * (1 - 1e-12)) - 1024) < 1e-7);
    const auto pcs = w.breakpoints();
    CHECK(pcs.size() == 5);
    CHECK(pcs[2].kind == FrequencyWeight::Piece::loglinear);
}

TEST_CASE("frequency weight bounds r / beta^2 <= w <= beta^2 r") {
    const auto w = build_weight(2, {1, 1 << 12, 1 << 24});
    for (int i = 0; i <= 400; ++i) {
        const double r = std::pow(10.0, -1 + 9.0 * i / 400);
        const double v = w(r);
        if (r <= 1)
            CHECK(v == 1.0);
        else {
            CHECK(v >= r / 4 * (1 - 1e-12));
            CHECK(v <= 4 * r * (1 + 1e-12));
        }
    }
}

TEST_CASE("weight separation is enforced") {
    CHECK_THROWS_WITH_AS(build_weight(2, {1, 16}), doctest::Contains("(1, 16)"), std::invalid_argument);
    CHECK_THROWS_AS(build_weight(2, {2, 1024}), std::invalid_argument);
    CHECK_THROWS_AS(build_weight(1.0, {1}), std::invalid_argument);
    CHECK_NOTHROW(build_weight(2, {1, 17}));
}

TEST_CASE("monotonicity and dyadic sum at large separation") {
    const double s = 0.5, sp = 0.8, beta = 2;
    // separation beta^{4 ceil(2 s'/(s'-s))}
    const double sep = std::pow(beta, 4 * std::ceil(2 * sp / (sp - s)));
    const auto w = build_weight(beta, {1, 2 * sep, 4 * sep * sep});
    double prev = -1;
    bool increasing = true;
    for (int i = 0; i < 200; ++i) {
        const double r = std::pow(10.0, -2 + 18.0 * i / 199);
        const double v = std::pow(r, sp) * std::pow(w(r), -s);
        if (!(v > prev)) increasing = false;
        prev = v;
    }
    CHECK(increasing);
    double worst = 0;
    for (double lo : {0.01, 1.0, 100.0, 1e4, 1e8})
        for (double hi : {10.0, 1e3, 1e6, 1e12, 1e16})
            if (hi > lo) worst = std::max(worst, weight_sum_ratio(w, s, sp, lo, hi));
    CHECK(worst <= 10 / (sp - s));
}

TEST_CASE("weight multiplier at s = 0 is the identity") {
    auto g = make_grid(512, 40);
    const RadialField f = band_limited(g);
    const auto w = build_weight(2, {1, 1024});
    CHECK(rel_l2_diff(weight_multiplier(f, w, 0), to_physical(f)) < 1e-9);
}

TEST_CASE("exponent 2(a)") {
    CHECK(exponent_2of(0) == 2.0);
    CHECK(exponent_2of(-1) == 4.0);
    CHECK(exponent_2of(-0.5) == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("spacetime norm") {
    auto g = make_grid(256, 30);
    const RadialField phi = band_limited(g);
    SUBCASE("constant trajectory factorizes") {
        TrajectorySamples tr;
        for (int i = 0; i <= 20; ++i) tr.push(0.5 * i, phi);
        const auto nx = spacetime_norm_X(tr, 0.2, false);
        const double expect = std::sqrt(10.0) * besov_norm(phi, 0.2, exponent_2of(0.2 - 1), 2);
        CHECK(nx.x_part == doctest::Approx(expect).epsilon(1e-12));
        const auto nd = spacetime_norm_X(tr, 0.2, true);
        CHECK(nd.value == doctest::Approx(std::sqrt(10.0) * besov_norm(phi, -0.2, exponent_2of(1 - 0.2), 2)).epsilon(1e-12));
        // horizons agree with restriction
        const auto hz = spacetime_norm_X_horizons(tr, 0.2, false, {2.5, 10});
        CHECK(hz[0].x_part == doctest::Approx(spacetime_norm_X(tr.restrict_to(0, 2.5), 0.2, false).x_part).epsilon(1e-13));
        CHECK(hz[1].value == doctest::Approx(nx.value).epsilon(1e-13));
    }
    SUBCASE("zero trajectory and homogeneity") {
        TrajectorySamples tr, tr3;
        for (int i = 0; i <= 5; ++i) {
            tr.push(i, RadialField(g));
            tr3.push(i, cplx(3.0) * phi);
        }
        CHECK(spacetime_norm_X(tr, 0, false).value == 0.0);
        TrajectorySamples tr1;
        for (int i = 0; i <= 5; ++i) tr1.push(i, phi);
        CHECK(spacetime_norm_X(tr3, 0.1, false).value == doctest::Approx(3 * spacetime_norm_X(tr1, 0.1, false).value).epsilon(1e-12));
        CHECK(spacetime_norm_X(tr1.restrict_to(1, 3), 0.1, false).x_part <= spacetime_norm_X(tr1, 0.1, false).x_part);
    }
    SUBCASE("errors") {
        TrajectorySamples tr;
        tr.push(0, phi);
        CHECK_THROWS_AS(tr.push(0, phi), std::invalid_argument);
        CHECK_THROWS_AS(spacetime_norm_X(tr, 3.0 / 7.0, false), std::invalid_argument);
        CHECK_THROWS_AS(spacetime_norm_X(tr, -0.1, false), std::invalid_argument);
    }
}

TEST_CASE("time Lq norm by trapezoid") {
    // int_0^1 t^2 dt = 1/3 with |v|^2 = t^2 -> trapezoid error h^2/6 * ... at h = 1e-3
    std::vector<double> t, v;
    for (int i = 0; i <= 1000; ++i) {
        t.push_back(i / 1000.0);
        v.push_back(i / 1000.0);
    }
    CHECK(time_lq_norm(t, v, 2) == doctest::Approx(std::sqrt(1.0 / 3)).epsilon(1e-6));
}
