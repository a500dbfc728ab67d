#include "zk/normal_form.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>

#include "zk/dyadic.hpp"

#ifdef ZK_USE_OPENMP
#include <omp.h>
#endif

namespace zk {

namespace {

// largest dyadic number <= x
double dyadic_floor(double x) { return std::ldexp(1.0, static_cast<int>(std::floor(std::log2(x) + 1e-12))); }

// a denominator this small relative to the frequencies counts as vanishing
constexpr double kResonanceTol = 1e-3;
// spectral values below this fraction of the peak are dropped from the quadrature
constexpr double kNegligible = 1e-10;

bool is_hl(double iota, double j, double k) { return iota * j >= std::max(k, 2.0) * (1 - 1e-12); }

// P_{<=L} f = F^{-1}[phi(rho / L) fhat]
RadialField low_pass(const RadialField& fhat, double L) {
    RadialField s = fhat;
    for (std::size_t k = 0; k < s.size(); ++k) s.values[k] *= bump_phi(s.grid->rho[k] / L);
    return transform(s);
}

}  // namespace

RadialField hl_product(const RadialField& f, const RadialField& g, double iota) {
    require_same_grid(f, g, "hl_product");
    if (!(iota > 0 && iota < 1)) throw std::invalid_argument("hl_product: iota must lie in (0,1)");
    const auto blocks = dyadic_blocks(*f.grid);
    const auto fj = lp_decompose(f);
    const RadialField ghat = to_spectral(g);
    RadialField out(f.grid);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const double j = blocks[b];
        if (!is_hl(iota, j, 0.0)) continue;
        const RadialField glow = low_pass(ghat, dyadic_floor(iota * j));
        out = out + fj[b] * glow;
    }
    return out;
}

RadialField hl_product_pairs(const RadialField& f, const RadialField& g, double iota) {
    require_same_grid(f, g, "hl_product_pairs");
    const auto blocks = dyadic_blocks(*f.grid);
    const auto fj = lp_decompose(f);
    const auto gk = lp_decompose(g);
    RadialField out(f.grid);
    for (std::size_t a = 0; a < blocks.size(); ++a)
        for (std::size_t b = 0; b < blocks.size(); ++b)
            if (is_hl(iota, blocks[a], blocks[b])) out = out + fj[a] * gk[b];
    return out;
}

RadialField lh_product(const RadialField& f, const RadialField& g, double iota) { return hl_product(g, f, iota); }

RadialField hh_product(const RadialField& f, const RadialField& g, double iota) {
    return to_physical(f) * to_physical(g) - hl_product(f, g, iota) - hl_product(g, f, iota);
}

AngularQuadrature make_angular_quadrature(int n_theta) {
    if (n_theta < 2) throw std::invalid_argument("make_angular_quadrature: need at least 2 nodes");
    AngularQuadrature q;
    q.n_theta = n_theta;
    const double pi = std::numbers::pi;
    for (int i = 1; i <= n_theta; ++i) {
        const double th = i * pi / (n_theta + 1);
        q.nodes.push_back(std::cos(th));
        q.weights.push_back(4 * pi * pi / (n_theta + 1) * std::sin(th) * std::sin(th));
    }
    return q;
}

double kernel_denominator(KernelKind kind, double xi, double xi_minus_eta, double eta) {
    switch (kind) {
        case KernelKind::omega_plus: return xi * xi - xi_minus_eta - eta * eta;
        case KernelKind::omega_minus: return xi * xi + xi_minus_eta - eta * eta;
        case KernelKind::omega_tilde: return xi - xi_minus_eta * xi_minus_eta + eta * eta;
    }
    return 0;
}

double hl_mask(double tau, double sigma, double iota) {
    if (tau <= 0) return 0;
    const double k1 = dyadic_floor(tau);
    double m = 0;
    for (double k : {k1, 2 * k1}) {
        const double c = chi0(tau / k);
        if (c == 0 || !is_hl(iota, k, 0.0)) continue;
        m += c * bump_phi(sigma / dyadic_floor(iota * k));
    }
    return m;
}

double hl_mask_pairs(double tau, double sigma, double iota) {
    double m = 0;
    for (int a = -24; a <= 24; ++a) {
        const double k = std::ldexp(1.0, a);
        const double ck = chi0(tau / k);
        if (ck == 0) continue;
        for (int b = -24; b <= 24; ++b) {
            const double l = std::ldexp(1.0, b);
            if (is_hl(iota, k, l)) m += ck * chi0(sigma / l);
        }
    }
    return m;
}

double kernel_mask(KernelKind kind, double tau, double sigma, double iota) {
    if (kind == KernelKind::omega_tilde) return hl_mask(tau, sigma, iota) + hl_mask(sigma, tau, iota);
    return hl_mask(tau, sigma, iota);
}

namespace {

// fhat on the rho nodes extended evenly through 0 and by zeros past rho_max
struct SpectralInterpolant {
    std::vector<double> x;
    std::vector<cplx> v;
    double h = 0;
    static constexpr int pad = 3;

    explicit SpectralInterpolant(const RadialField& fhat) {
        const auto& rho = fhat.grid->rho;
        const int n = fhat.grid->n;
        h = std::numbers::pi / fhat.grid->r_max;
        x.resize(static_cast<std::size_t>(n + 2 * pad));
        v.resize(x.size());
        for (int i = 0; i < pad; ++i) {
            x[static_cast<std::size_t>(pad - 1 - i)] = -rho[static_cast<std::size_t>(i)];
            v[static_cast<std::size_t>(pad - 1 - i)] = fhat.values[static_cast<std::size_t>(i)];
            x[static_cast<std::size_t>(pad + n + i)] = rho.back() + (i + 1) * h;
            v[static_cast<std::size_t>(pad + n + i)] = 0;
        }
        for (int i = 0; i < n; ++i) {
            x[static_cast<std::size_t>(pad + i)] = rho[static_cast<std::size_t>(i)];
            v[static_cast<std::size_t>(pad + i)] = fhat.values[static_cast<std::size_t>(i)];
        }
    }

    cplx operator()(double t) const {
        const int last = static_cast<int>(x.size()) - 1;
        if (t >= x[static_cast<std::size_t>(last - 2)]) return 0;
        // nodes are nearly uniform with spacing h, start from the estimate and correct
        int i = static_cast<int>((t - x[pad]) / h) + pad;
        i = std::clamp(i, 2, last - 3);
        while (i > 2 && x[static_cast<std::size_t>(i)] > t) --i;
        while (i < last - 3 && x[static_cast<std::size_t>(i + 1)] <= t) ++i;
        const int s0 = i - 2;
        cplx acc = 0;
        for (int a = 0; a < 6; ++a) {
            double w = 1;
            const double xa = x[static_cast<std::size_t>(s0 + a)];
            for (int b = 0; b < 6; ++b)
                if (b != a) w *= (t - x[static_cast<std::size_t>(s0 + b)]) / (xa - x[static_cast<std::size_t>(s0 + b)]);
            acc += w * v[static_cast<std::size_t>(s0 + a)];
        }
        return acc;
    }
};

template <bool Reference>
RadialField bilinear_impl(const BilinearKernelSpec& spec, const RadialField& f, const RadialField& g, const AngularQuadrature& quad) {
    require_same_grid(f, g, "apply_bilinear");
    if (!(spec.iota > 0 && spec.iota < 1)) throw std::invalid_argument("apply_bilinear: iota must lie in (0,1)");
    const RadialField fhat = to_spectral(f), ghat = to_spectral(g);
    const auto& grid = *f.grid;
    const int n = grid.n;
    const SpectralInterpolant F(fhat);

    double gmax = 0;
    for (const auto& v : ghat.values) gmax = std::max(gmax, std::abs(v));
    std::vector<int> active;
    for (int s = 0; s < n; ++s)
        if (std::abs(ghat.values[static_cast<std::size_t>(s)]) > kNegligible * gmax) active.push_back(s);
    double fmax = 0;
    for (const auto& v : fhat.values) fmax = std::max(fmax, std::abs(v));

    RadialField out(f.grid, Space::spectral);
    if (gmax == 0) return transform(out);
    std::atomic<bool> bad{false};
    std::atomic<double> bad_den{0.0};
    const double norm = 1.0 / kTwoPi4;
    const long nl = n;

    auto body = [&](long m) {
        const double rho = grid.rho[static_cast<std::size_t>(m)];
        cplx acc = 0;
        for (int s : active) {
            const double sg = grid.rho[static_cast<std::size_t>(s)];
            cplx inner = 0;
            for (int i = 0; i < quad.n_theta; ++i) {
                const double c = quad.nodes[static_cast<std::size_t>(i)];
                const double tau = std::sqrt(std::max(0.0, rho * rho + sg * sg - 2 * rho * sg * c));
                double mk;
                if constexpr (Reference) {
                    mk = hl_mask_pairs(tau, sg, spec.iota);
                    if (spec.kind == KernelKind::omega_tilde) mk += hl_mask_pairs(sg, tau, spec.iota);
                } else {
                    mk = kernel_mask(spec.kind, tau, sg, spec.iota);
                }
                if (mk == 0) continue;
                const double den = kernel_denominator(spec.kind, rho, tau, sg);
                const cplx Ft = F(tau);
                if (std::abs(Ft) <= kNegligible * fmax) continue;
                if (std::abs(den) < kResonanceTol * (1 + rho * rho + tau * tau + sg * sg)) {
                    bad = true;
                    bad_den = den;
                    continue;
                }
                inner += quad.weights[static_cast<std::size_t>(i)] * mk / den * Ft;
            }
            acc += grid.wrho[static_cast<std::size_t>(s)] * ghat.values[static_cast<std::size_t>(s)] * inner;
        }
        out.values[static_cast<std::size_t>(m)] = norm * acc;
    };

    if constexpr (Reference) {
        for (long m = 0; m < nl; ++m) body(m);
    } else {
#ifdef ZK_USE_OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (!omp_in_parallel())
#endif
        for (long m = 0; m < nl; ++m) body(m);
    }
    if (bad) {
        std::ostringstream os;
        os << "apply_bilinear: denominator " << bad_den.load() << " vanishes on the restricted support (iota = " << spec.iota << ")";
        throw DenominatorError(os.str());
    }
    return transform(out);
}

}  // namespace

RadialField apply_bilinear(const BilinearKernelSpec& spec, const RadialField& f, const RadialField& g, const AngularQuadrature& quad) {
    return bilinear_impl<false>(spec, f, g, quad);
}

RadialField apply_bilinear_reference(const BilinearKernelSpec& spec, const RadialField& f, const RadialField& g, const AngularQuadrature& quad) {
    return bilinear_impl<true>(spec, f, g, quad);
}

RadialField omega(const RadialField& f, const RadialField& g, double iota, const AngularQuadrature& quad) {
    const auto plus = apply_bilinear({KernelKind::omega_plus, iota}, f, g, quad);
    const auto minus = apply_bilinear({KernelKind::omega_minus, iota}, conj(f), g, quad);
    return cplx(0.5, 0) * (plus + minus);
}

RadialField omega_tilde(const RadialField& f, const RadialField& g, double iota, const AngularQuadrature& quad) {
    return apply_bilinear({KernelKind::omega_tilde, iota}, f, g, quad);
}

FieldPair omega_vec(const RadialField& phi, const RadialField& psi, double iota1, double iota2, const AngularQuadrature& quad) {
    return {omega(psi, phi, iota1, quad), op_D(omega_tilde(phi, conj(phi), iota2, quad))};
}

FieldPair normal_transform(const RadialField& u, const RadialField& N, double iota1, double iota2, const AngularQuadrature& quad) {
    auto [a, b] = omega_vec(to_physical(u), to_physical(N), iota1, iota2, quad);
    return {to_physical(u) - a, to_physical(N) - b};
}

InverseResult normal_inverse(const RadialField& u1, const RadialField& N1, double iota1, double iota2, int max_iter, double tol,
                             const AngularQuadrature& quad) {
    const RadialField u0 = to_physical(u1), N0 = to_physical(N1);
    InverseResult res{u0, N0, 0, 0.0};
    const double scale = std::sqrt(l2_norm_sq(u0) + l2_norm_sq(N0));
    double prev = -1;
    int bad_streak = 0;
    for (int it = 1; it <= max_iter; ++it) {
        auto [a, b] = omega_vec(res.u, res.N, iota1, iota2, quad);
        RadialField un = u0 + a, Nn = N0 + b;
        const double incr = std::sqrt(l2_norm_sq(un - res.u) + l2_norm_sq(Nn - res.N));
        res.u = std::move(un);
        res.N = std::move(Nn);
        res.iterations = it;
        if (prev > 0) {
            const double factor = incr / prev;
            res.contraction = std::max(res.contraction, factor);
            bad_streak = factor >= 1 ? bad_streak + 1 : 0;
            if (bad_streak >= 3) {
                std::ostringstream os;
                os << "normal_inverse: iteration does not contract (factor " << factor << ")";
                throw NonContraction(os.str(), factor);
            }
        }
        if (incr <= tol * std::max(scale, 1e-300) || incr == 0) return res;
        prev = incr;
    }
    std::ostringstream os;
    os << "normal_inverse: no convergence in " << max_iter << " iterations (contraction " << res.contraction << ")";
    throw NonContraction(os.str(), res.contraction);
}

}  // namespace zk
