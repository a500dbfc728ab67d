#include <array>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "zk/virial.hpp"

using namespace zk;

namespace {

// truncated Taylor series in eps around a point: c[k] = f^(k)(x) / k!
struct Jet {
    static constexpr int K = 5;
    std::array<double, K> c{};

    static Jet var(double x) {
        Jet j;
        j.c[0] = x;
        j.c[1] = 1;
        return j;
    }
    static Jet constant(double v) {
        Jet j;
        j.c[0] = v;
        return j;
    }
    double d(int k) const {
        double f = 1;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * f;
    }
    Jet deriv() const {
        Jet j;
        for (int k = 0; k + 1 < K; ++k) j.c[k] = (k + 1) * c[k + 1];
        return j;
    }
};

Jet operator+(Jet a, const Jet& b) {
    for (int k = 0; k < Jet::K; ++k) a.c[k] += b.c[k];
    return a;
}
Jet operator-(Jet a, const Jet& b) {
    for (int k = 0; k < Jet::K; ++k) a.c[k] -= b.c[k];
    return a;
}
Jet operator*(double s, Jet a) {
    for (auto& v : a.c) v *= s;
    return a;
}
Jet operator*(const Jet& a, const Jet& b) {
    Jet o;
    for (int i = 0; i < Jet::K; ++i)
        for (int j = 0; i + j < Jet::K; ++j) o.c[i + j] += a.c[i] * b.c[j];
    return o;
}
Jet operator/(const Jet& a, const Jet& b) {
    Jet o;
    for (int k = 0; k < Jet::K; ++k) {
        double s = a.c[k];
        for (int j = 1; j <= k; ++j) s -= b.c[j] * o.c[k - j];
        o.c[k] = s / b.c[0];
    }
    return o;
}
// a^p by the recurrence from g' a = p a' g
Jet pow(const Jet& a, double p) {
    Jet g;
    g.c[0] = std::pow(a.c[0], p);
    for (int k = 1; k < Jet::K; ++k) {
        double s = 0;
        for (int j = 1; j <= k; ++j) s += (p * j - (k - j)) * a.c[j] * g.c[k - j];
        g.c[k] = s / (k * a.c[0]);
    }
    return g;
}

// radial Laplacian in four dimensions, as a series (loses two orders)
Jet lap(const Jet& f, const Jet& x) { return f.deriv().deriv() + 3.0 * (f.deriv() / x); }
// A_s f = x f' + (4 + s)/2 f
Jet A(double s, const Jet& f, const Jet& x) { return x * f.deriv() + ((4 + s) / 2) * f; }

struct Oracle {
    double psi, f0, f1, f2, f3, f4, f5, lap_psi, r_lap_psi_r, h;
};

Oracle oracle_at(double xv) {
    const Jet x = Jet::var(xv);
    const Jet psi = pow(Jet::constant(1) + x * x, -0.5);
    Oracle o{};
    o.psi = psi.c[0];
    o.f0 = std::sqrt(A(-2, psi, x).c[0]);
    const Jet f0j = pow(A(-2, psi, x), 0.5);
    const Jet lp = lap(psi, x);
    o.f1 = -A(-4, psi, x).c[0];
    o.f2 = (-1.0 * A(8, lp, x) + 4.0 * (f0j * lap(f0j, x))).c[0];
    o.f3 = A(4, psi, x).c[0] - 4 * std::pow(o.f0, 4);
    o.f4 = -A(6, lp, x).c[0] / 4;
    o.f5 = A(2, psi, x).c[0] - 3 * std::pow(o.f0, 3);
    o.lap_psi = lp.c[0];
    o.r_lap_psi_r = xv * lp.d(1);
    o.h = A(3, psi, x).c[0];
    return o;
}

RadialField gauss(const GridPtr& g, double a, double w, double phase = 0) {
    return sample(g, [=](double r) { return a * std::exp(-r * r / (2 * w * w)) * std::polar(1.0, phase * r * r); });
}

}  // namespace

TEST_CASE("jet oracle sanity") {
    // d/dx (1+x^2)^{-1/2} = -x (1+x^2)^{-3/2}
    const Jet x = Jet::var(0.7);
    const Jet p = pow(Jet::constant(1) + x * x, -0.5);
    CHECK(p.d(1) == doctest::Approx(-0.7 * std::pow(1.49, -1.5)).epsilon(1e-14));
    // Laplacian of r^2 in four dimensions is 8
    CHECK(lap(x * x, x).c[0] == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("closed form weights satisfy the defining relations") {
    namespace wf = weight_forms;
    for (int i = 0; i <= 400; ++i) {
        const double x = 0.01 + 0.05 * i;
        const Oracle o = oracle_at(x);
        CHECK(std::abs(wf::psi(x) - o.psi) < 1e-14);
        CHECK(std::abs(wf::f0(x) - o.f0) < 1e-13);
        CHECK(std::abs(wf::f1(x) - o.f1) < 1e-13);
        CHECK(std::abs(wf::f2(x) - o.f2) < 1e-11);
        CHECK(std::abs(wf::f3(x) - o.f3) < 1e-12);
        CHECK(std::abs(wf::f4(x) - o.f4) < 1e-11);
        CHECK(std::abs(wf::f5(x) - o.f5) < 1e-12);
        CHECK(std::abs(wf::h(x) - o.h) < 1e-13);
    }
}

TEST_CASE("sampled weights and their relations") {
    auto g = make_grid(1024, 100);
    const double R = 10;
    const auto w = make_virial_weights(g, R);
    for (std::size_t k = 0; k < g->r.size(); k += 7) {
        const double x = g->r[k] / R;
        const Oracle o = oracle_at(x);
        CHECK(std::abs(w.lap_psi[k].real() - o.lap_psi / (R * R)) < 1e-13);
        CHECK(std::abs(w.r_lap_psi_r[k].real() - o.r_lap_psi_r / (R * R)) < 1e-13);
        CHECK(w.La[k].real() == doctest::Approx(x * x / std::pow(1 + x, 4)).epsilon(1e-14));
    }
    const auto res = weight_relation_residuals(w, 50);
    for (double r : res) CHECK(r < 1e-10);
}

TEST_CASE("weights are positive") {
    auto g = make_grid(1024, 200);
    const auto w = make_virial_weights(g, 10);
    for (std::size_t k = 0; k < g->r.size(); ++k) {
        CHECK(w.f1[k].real() > 0);
        CHECK(w.f2[k].real() > 0);
        CHECK(w.f3[k].real() > 0);
        CHECK(w.f4[k].real() > 0);
        CHECK(w.f5[k].real() > 0);
        const double x = g->r[k] / 10;
        // f5 ~ x^2 / <x>^3
        CHECK(w.f5[k].real() <= 5 * x * x / std::pow(1 + x * x, 1.5));
    }
}

TEST_CASE("grid operators agree with analytic derivatives") {
    auto g = make_grid(2048, 100);
    const auto w = make_virial_weights(g, 10);
    const auto A2 = apply_As(w.psi, 2);
    const auto L = laplacian_fd(w.psi);
    double e1 = 0, e2 = 0;
    for (std::size_t k = 0; k < g->r.size() && g->r[k] < 50; ++k) {
        e1 = std::max(e1, std::abs(A2[k].real() - (w.r_psi_r[k].real() + 3 * w.psi[k].real())));
        e2 = std::max(e2, std::abs(L[k].real() - w.lap_psi[k].real()));
    }
    CHECK(e1 < 1e-9);
    CHECK(e2 < 1e-9);
}

TEST_CASE("A_s on constants and monomials") {
    auto g = make_grid(256, 10);
    const auto one = sample(g, [](double) { return cplx(1); });
    const auto r4 = sample(g, [](double r) { return cplx(r * r * r * r); });
    const auto a = apply_As(one, 3);
    const auto b = apply_As(r4, 1);
    for (std::size_t k = 0; k < g->r.size(); ++k) {
        CHECK(a[k].real() == doctest::Approx(3.5).epsilon(1e-12));
        // r d/dr r^4 + 2.5 r^4 = 6.5 r^4, exact for the 5 point stencil
        CHECK(b[k].real() == doctest::Approx(6.5 * r4[k].real()).epsilon(1e-9));
    }
}

TEST_CASE("commutator brace") {
    auto g = make_grid(512, 60);
    const auto f = gauss(g, 1.0, 2.0);
    const auto c = sample(g, [](double) { return cplx(2.0); });
    CHECK(std::sqrt(l2_norm_sq(commutator_brace(c, f))) < 1e-8 * std::sqrt(l2_norm_sq(f)));
    double prev = INFINITY;
    for (double R : {2.0, 4.0, 8.0, 16.0}) {
        const auto w = make_virial_weights(g, R);
        const double v = std::sqrt(l2_norm_sq(commutator_brace(w.psi, f)));
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("bilinear commutator beta") {
    auto g = make_grid(512, 60);
    const auto f = gauss(g, 1.0, 2.0, 0.05), h = gauss(g, 0.5, 1.5);
    const auto w = make_virial_weights(g, 8);
    CHECK(bilinear_commutator_beta(f, h, w) == doctest::Approx(bilinear_commutator_beta(h, f, w)).epsilon(1e-12));
    // constant weight: only the finite difference error remains
    const auto flat = flat_virial_weights(g);
    CHECK(std::abs(bilinear_commutator_beta(f, f, flat)) < 1e-5 * gradient_norm_sq(f));
    double prev = INFINITY;
    for (double R : {4.0, 8.0, 16.0, 32.0}) {
        const double b = std::abs(bilinear_commutator_beta(f, f, make_virial_weights(g, R)));
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("virial functionals on special states") {
    auto g = make_grid(512, 60);
    const auto w = make_virial_weights(g, 10);
    SUBCASE("real data has vanishing virial") {
        const ZakharovState s{gauss(g, 1.0, 2.0), gauss(g, 0.4, 1.5), 0};
        const auto v = virial_values(s, w);
        CHECK(std::abs(v.V_R) < 1e-12);
        CHECK(std::abs(v.V_inf) < 1e-12);
    }
    SUBCASE("ground state has zero leading rate") {
        auto g2 = make_grid(1024, 200);
        const auto W = truncated_W(g2);
        const auto v = virial_values({W, W * W, 0}, make_virial_weights(g2, 10));
        // only the truncation of W leaves a nonzero K
        const double K = functionals(W, W * W).K;
        CHECK(v.rate_inf == doctest::Approx(4 * K).epsilon(1e-8));
        CHECK(std::abs(v.rate_inf) < 1e-2 * oracle::W4_4());
    }
    SUBCASE("NS matches the f_j expansion") {
        const double R = 5;
        const auto wr = make_virial_weights(g, R);
        const auto u = gauss(g, 0.8, 2.0, 0.1);
        const auto v = virial_values({u, RadialField(g), 0}, wr);
        const auto f0u = wr.f0 * u;
        const auto e = functionals(f0u, RadialField(g));
        const auto u2 = abs_sq(u);
        const double rest = integrate(cplx(1.0 / (R * R)) * u2 * wr.f2) - integrate(u2 * u2 * wr.f3);
        const double expect = 4 * e.K + rest;
        CHECK(v.NS == doctest::Approx(expect).epsilon(1e-4));
    }
    SUBCASE("tail and eta split") {
        const ZakharovState s{gauss(g, 1.0, 2.0), gauss(g, 0.4, 1.5), 0};
        CHECK(l4_tail(s.u, w) > 0);
        const auto e = eta_split(s, 10);
        CHECK(e.delta == doctest::Approx(std::pow(10.0, -8.0 / 11)));
        CHECK(e.low_fraction >= 0);
        CHECK(e.low_fraction <= 1);
    }
}

TEST_CASE("rate identities along a short run") {
    auto g = make_grid(512, 60);
    const ZakharovState s0{gauss(g, 1.0, 1.5, 0.1), gauss(g, 0.5, 2.0), 0};
    IntegratorConfig c;
    c.dt = 1e-3;
    Diagnostics d;
    d.store_trajectory = true;
    d.store_every = 0.02;
    const auto log = run(s0, c, 0.4, d);
    const auto rep = rate_check(log.traj_u, log.traj_N, make_virial_weights(g, 10));
    CHECK(rep.rows.size() == log.traj_u.size());
    CHECK(rep.mismatch_R < 1e-2);
    CHECK(rep.mismatch_inf < 1e-2);
    CHECK(std::isnan(rep.rows.front().fd_V_R));
    TrajectorySamples few = log.traj_u.restrict_to(0, 0.05);
    CHECK_THROWS_AS(rate_check(few, log.traj_N.restrict_to(0, 0.05), make_virial_weights(g, 10)), std::invalid_argument);
}
