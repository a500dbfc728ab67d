#include "zk/radial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "zk/bessel.hpp"
#include "zk/kernels.hpp"

namespace zk {

namespace {

void lagrange_derivative_weights(const double* x, int npts, int center, double* w) {
    const double x0 = x[center];
    for (int i = 0; i < npts; ++i) {
        if (i == center) {
            double s = 0;
            for (int m = 0; m < npts; ++m)
                if (m != center) s += 1.0 / (x0 - x[m]);
            w[i] = s;
        } else {
            double num = 1, den = 1;
            for (int m = 0; m < npts; ++m) {
                if (m != i) den *= x[i] - x[m];
                if (m != i && m != center) num *= x0 - x[m];
            }
            w[i] = num / den;
        }
    }
}

// Fornberg weights for the second derivative at x0 on the nodes x
void second_derivative_weights(const double* x, int npts, double x0, double* w) {
    constexpr int M = 2;
    std::vector<std::array<double, M + 1>> c(static_cast<std::size_t>(npts));
    for (auto& row : c) row.fill(0.0);
    c[0][0] = 1;
    double c1 = 1, c4 = x[0] - x0;
    for (int i = 1; i < npts; ++i) {
        const int mn = std::min(i, M);
        double c2 = 1;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[static_cast<std::size_t>(i)][k] = c1 * (k * c[static_cast<std::size_t>(i - 1)][k - 1] - c5 * c[static_cast<std::size_t>(i - 1)][k]) / c2;
                c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[static_cast<std::size_t>(j)][k] = (c4 * c[static_cast<std::size_t>(j)][k] - k * c[static_cast<std::size_t>(j)][k - 1]) / c3;
            c[static_cast<std::size_t>(j)][0] = c4 * c[static_cast<std::size_t>(j)][0] / c3;
        }
        c1 = c2;
    }
    for (int i = 0; i < npts; ++i) w[i] = c[static_cast<std::size_t>(i)][M];
}

void build_fd(RadialGrid& g) {
    const int n = g.n;
    g.fd_idx.resize(static_cast<std::size_t>(n));
    g.fd_w.resize(static_cast<std::size_t>(n));
    g.fd2_w.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double x[5];
        int idx[5];
        int center = 2;
        if (k + 2 >= n) {
            // one sided at the outer edge
            for (int i = 0; i < 5; ++i) idx[i] = n - 5 + i;
            center = k - (n - 5);
            for (int i = 0; i < 5; ++i) x[i] = g.r[static_cast<std::size_t>(idx[i])];
        } else {
            for (int i = 0; i < 5; ++i) {
                const int j = k - 2 + i;
                if (j >= 0) {
                    idx[i] = j;
                    x[i] = g.r[static_cast<std::size_t>(j)];
                } else {
                    // f is even in r: f(-r_m) = f(r_m)
                    idx[i] = -j - 1;
                    x[i] = -g.r[static_cast<std::size_t>(-j - 1)];
                }
            }
        }
        double w[5], w2[5];
        lagrange_derivative_weights(x, 5, center, w);
        second_derivative_weights(x, 5, x[center], w2);
        for (int i = 0; i < 5; ++i) {
            g.fd_idx[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = idx[i];
            g.fd_w[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = w[i];
            g.fd2_w[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = w2[i];
        }
    }
}

void refine_kernel(RadialGrid& g) {
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<Mat> T(g.kernel.data(), g.n, g.n);
    for (int it = 0; it < 3; ++it) {
        Mat T2 = T * T;
        T2.diagonal().array() -= 1.0;
        if (T2.cwiseAbs().maxCoeff() < 1e-14) break;
        // T (3I - T^2) / 2 written with E = T^2 - I
        Mat refined = T - 0.5 * (T * T2);
        T = 0.5 * (refined + refined.transpose());
    }
}

}  // namespace

GridPtr make_grid(int n, double r_max) {
    if (n < 8) throw std::invalid_argument("make_grid: n must be >= 8, got " + std::to_string(n));
    if (!std::isfinite(r_max) || r_max <= 0) throw std::invalid_argument("make_grid: r_max must be finite and positive");

    auto g = std::make_shared<RadialGrid>();
    g->n = n;
    g->r_max = r_max;
    const auto z = bessel_j1_zeros(n + 1);
    const double S = z[static_cast<std::size_t>(n)];
    g->S = S;
    const double V = S / r_max;
    const std::size_t nn = static_cast<std::size_t>(n);

    rvec j2(nn);
    g->r.resize(nn);
    g->rho.resize(nn);
    g->wr.resize(nn);
    g->wrho.resize(nn);
    for (std::size_t k = 0; k < nn; ++k) {
        g->r[k] = z[k] * r_max / S;
        g->rho[k] = z[k] / r_max;
        j2[k] = std::abs(bessel_j0(z[k]));  // |J_2(j_k)| = |J_0(j_k)| at zeros of J_1
        g->wr[k] = 2.0 * r_max * r_max * g->r[k] * g->r[k] / (S * S * j2[k] * j2[k]);
        g->wrho[k] = 2.0 * V * V * g->rho[k] * g->rho[k] / (S * S * j2[k] * j2[k]);
    }

    g->kernel.assign(nn * nn, 0.0);
    const long nl = n;
#ifdef ZK_USE_OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (long m = 0; m < nl; ++m) {
        const std::size_t mm = static_cast<std::size_t>(m);
        for (std::size_t k = mm; k < nn; ++k) {
            const double v = 2.0 * bessel_j1(z[mm] * z[k] / S) / (S * j2[mm] * j2[k]);
            g->kernel[mm * nn + k] = v;
            g->kernel[k * nn + mm] = v;
        }
    }
    if (n <= kRefineLimit) refine_kernel(*g);

    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    g->fwd_in.resize(nn);
    g->fwd_out.resize(nn);
    g->inv_in.resize(nn);
    g->inv_out.resize(nn);
    for (std::size_t k = 0; k < nn; ++k) {
        g->fwd_in[k] = g->r[k] / j2[k];
        g->fwd_out[k] = four_pi2 * (r_max * r_max / S) * j2[k] / g->rho[k];
        g->inv_in[k] = g->rho[k] / j2[k];
        g->inv_out[k] = (V * V / S) * j2[k] / (four_pi2 * g->r[k]);
    }
    build_fd(*g);
    return g;
}

std::string RadialGrid::fingerprint() const {
    double trace = 0;
    for (int k = 0; k < n; ++k) trace += kernel[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1)];
    char buf[160];
    std::snprintf(buf, sizeof buf, "fb1:n=%d:rmax=%.17g:S=%.17g:tr=%.12e", n, r_max, S, trace);
    return buf;
}

void RadialGrid::forward_real(const double* in, double* out, std::size_t ncols) const {
    const std::size_t nn = static_cast<std::size_t>(n);
    rvec x(nn * ncols);
    for (std::size_t c = 0; c < ncols; ++c)
        for (std::size_t k = 0; k < nn; ++k) x[c * nn + k] = fwd_in[k] * in[c * nn + k];
    kernels::matvec(kernel.data(), nn, x.data(), out, ncols);
    for (std::size_t c = 0; c < ncols; ++c)
        for (std::size_t k = 0; k < nn; ++k) out[c * nn + k] *= fwd_out[k];
}

void RadialGrid::inverse_real(const double* in, double* out, std::size_t ncols) const {
    const std::size_t nn = static_cast<std::size_t>(n);
    rvec x(nn * ncols);
    for (std::size_t c = 0; c < ncols; ++c)
        for (std::size_t k = 0; k < nn; ++k) x[c * nn + k] = inv_in[k] * in[c * nn + k];
    kernels::matvec(kernel.data(), nn, x.data(), out, ncols);
    for (std::size_t c = 0; c < ncols; ++c)
        for (std::size_t k = 0; k < nn; ++k) out[c * nn + k] *= inv_out[k];
}

RadialField::RadialField(GridPtr g, Space s) : grid(std::move(g)), space(s) {
    values.assign(static_cast<std::size_t>(grid->n), cplx(0, 0));
}

RadialField::RadialField(GridPtr g, cvec v, Space s) : grid(std::move(g)), values(std::move(v)), space(s) {
    if (values.size() != static_cast<std::size_t>(grid->n)) throw std::invalid_argument("RadialField: size does not match grid");
}

RadialField sample(const GridPtr& g, const std::function<cplx(double)>& f) {
    RadialField out(g);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(g->r[k]);
    return out;
}

RadialField sample_spectral(const GridPtr& g, const std::function<cplx(double)>& f) {
    RadialField out(g, Space::spectral);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(g->rho[k]);
    return out;
}

namespace {

RadialField transform_impl(const RadialField& f, bool forward) {
    const std::size_t nn = f.size();
    for (const auto& v : f.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw std::domain_error("transform: non-finite input");
    rvec in(2 * nn), out(2 * nn);
    for (std::size_t k = 0; k < nn; ++k) {
        in[k] = f.values[k].real();
        in[nn + k] = f.values[k].imag();
    }
    if (forward)
        f.grid->forward_real(in.data(), out.data(), 2);
    else
        f.grid->inverse_real(in.data(), out.data(), 2);
    RadialField g(f.grid, forward ? Space::spectral : Space::physical);
    for (std::size_t k = 0; k < nn; ++k) g.values[k] = cplx(out[k], out[nn + k]);
    return g;
}

}  // namespace

RadialField transform(const RadialField& f) { return transform_impl(f, f.space == Space::physical); }
RadialField to_physical(const RadialField& f) { return f.space == Space::physical ? f : transform(f); }
RadialField to_spectral(const RadialField& f) { return f.space == Space::spectral ? f : transform(f); }

RadialField apply_multiplier(const RadialField& f, const cvec& m) {
    RadialField s = to_spectral(f);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!std::isfinite(m[k].real()) || !std::isfinite(m[k].imag()))
            throw std::domain_error("apply_multiplier: non-finite multiplier at rho = " + std::to_string(f.grid->rho[k]));
        s.values[k] *= m[k];
    }
    return transform(s);
}

RadialField apply_multiplier(const RadialField& f, const std::function<cplx(double)>& m) {
    cvec mv(f.size());
    for (std::size_t k = 0; k < mv.size(); ++k) mv[k] = m(f.grid->rho[k]);
    return apply_multiplier(f, mv);
}

RadialField op_D(const RadialField& f) {
    return apply_multiplier(f, [](double p) { return cplx(p, 0); });
}
RadialField op_Dinv(const RadialField& f) {
    return apply_multiplier(f, [](double p) { return cplx(1.0 / p, 0); });
}
RadialField op_laplacian(const RadialField& f) {
    return apply_multiplier(f, [](double p) { return cplx(-p * p, 0); });
}
RadialField schrodinger_flow(const RadialField& f, double t) {
    return apply_multiplier(f, [t](double p) { return std::polar(1.0, t * p * p); });
}
RadialField wave_flow(const RadialField& f, double t, double alpha) {
    return apply_multiplier(f, [t, alpha](double p) { return std::polar(1.0, alpha * t * p); });
}

void require_same_grid(const RadialField& a, const RadialField& b, const char* where) {
    if (a.grid != b.grid && (a.grid->n != b.grid->n || a.grid->r_max != b.grid->r_max))
        throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

void require_physical(const RadialField& a, const char* where) {
    if (a.space != Space::physical) throw std::invalid_argument(std::string(where) + ": field must be in physical space");
}

double lp_norm(const RadialField& f0, double p) {
    if (!(p >= 1)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const RadialField f = to_physical(f0);
    if (std::isinf(p)) return max_abs(f);
    double s = 0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f.grid->wr[k] * std::pow(std::abs(f.values[k]), p);
    return std::pow(kSphereArea * s, 1.0 / p);
}

double l2_norm_sq(const RadialField& f) {
    if (f.space == Space::spectral) return l2_norm_sq_spectral(f);
    double s = 0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f.grid->wr[k] * std::norm(f.values[k]);
    return kSphereArea * s;
}

double l2_norm_sq_spectral(const RadialField& fhat) {
    double s = 0;
    for (std::size_t k = 0; k < fhat.size(); ++k) s += fhat.grid->wrho[k] * std::norm(fhat.values[k]);
    return kSphereArea * s / kTwoPi4;
}

double inner(const RadialField& f0, const RadialField& g0) {
    require_same_grid(f0, g0, "inner");
    const RadialField f = to_physical(f0), g = to_physical(g0);
    double s = 0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f.grid->wr[k] * (std::conj(f.values[k]) * g.values[k]).real();
    return kSphereArea * s;
}

double gradient_norm_sq(const RadialField& f) {
    const RadialField s = to_spectral(f);
    double acc = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double p = s.grid->rho[k];
        acc += s.grid->wrho[k] * p * p * std::norm(s.values[k]);
    }
    return kSphereArea * acc / kTwoPi4;
}

double integrate(const RadialField& f0) {
    const RadialField f = to_physical(f0);
    double s = 0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f.grid->wr[k] * f.values[k].real();
    return kSphereArea * s;
}

double ball_mass(const RadialField& f0, double radius) {
    const RadialField f = to_physical(f0);
    double s = 0;
    for (std::size_t k = 0; k < f.size() && f.grid->r[k] < radius; ++k) s += f.grid->wr[k] * std::norm(f.values[k]);
    return kSphereArea * s;
}

cvec d_dr(const GridPtr& g, const cvec& v) {
    cvec out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        cplx acc = 0;
        for (std::size_t i = 0; i < 5; ++i) acc += g->fd_w[k][i] * v[static_cast<std::size_t>(g->fd_idx[k][i])];
        out[k] = acc;
    }
    return out;
}

RadialField d_dr(const RadialField& f0) {
    const RadialField f = to_physical(f0);
    return RadialField(f.grid, d_dr(f.grid, f.values));
}

RadialField laplacian_fd(const RadialField& f0) {
    const RadialField f = to_physical(f0);
    const auto& g = *f.grid;
    RadialField out(f.grid);
    for (std::size_t k = 0; k < f.size(); ++k) {
        cplx d1 = 0, d2 = 0;
        for (std::size_t i = 0; i < 5; ++i) {
            const cplx v = f.values[static_cast<std::size_t>(g.fd_idx[k][i])];
            d1 += g.fd_w[k][i] * v;
            d2 += g.fd2_w[k][i] * v;
        }
        out.values[k] = d2 + 3.0 / g.r[k] * d1;
    }
    return out;
}

std::array<double, 3> low_frequency_profile(const RadialField& f) {
    const RadialField s = to_spectral(f);
    double mx = 0;
    for (const auto& v : s.values) mx = std::max(mx, std::abs(v));
    std::array<double, 3> out{};
    for (std::size_t k = 0; k < 3; ++k) out[k] = mx > 0 ? std::abs(s.values[k]) / mx : 0.0;
    return out;
}

namespace {
template <class Op>
RadialField zip(const RadialField& a, const RadialField& b, Op op, const char* where) {
    require_same_grid(a, b, where);
    if (a.space != b.space) throw std::invalid_argument(std::string(where) + ": space mismatch");
    RadialField out(a.grid, a.space);
    for (std::size_t k = 0; k < a.size(); ++k) out.values[k] = op(a.values[k], b.values[k]);
    return out;
}
}  // namespace

RadialField operator+(const RadialField& a, const RadialField& b) {
    return zip(a, b, [](cplx x, cplx y) { return x + y; }, "operator+");
}
RadialField operator-(const RadialField& a, const RadialField& b) {
    return zip(a, b, [](cplx x, cplx y) { return x - y; }, "operator-");
}
RadialField operator*(const RadialField& a, const RadialField& b) {
    require_physical(a, "operator*");
    return zip(a, b, [](cplx x, cplx y) { return x * y; }, "operator*");
}
RadialField operator*(cplx s, const RadialField& a) {
    RadialField out = a;
    for (auto& v : out.values) v *= s;
    return out;
}
RadialField conj(const RadialField& a) {
    RadialField out = a;
    for (auto& v : out.values) v = std::conj(v);
    return out;
}
RadialField abs_sq(const RadialField& a) {
    RadialField out = to_physical(a);
    for (auto& v : out.values) v = std::norm(v);
    return out;
}
RadialField real_part(const RadialField& a) {
    RadialField out = a;
    for (auto& v : out.values) v = v.real();
    return out;
}
double max_abs(const RadialField& a) {
    double m = 0;
    for (const auto& v : a.values) m = std::max(m, std::abs(v));
    return m;
}
double rel_l2_diff(const RadialField& a, const RadialField& b) {
    const RadialField d = a - b;
    const double nb = l2_norm_sq(b);
    const double nd = l2_norm_sq(d);
    if (nb == 0) return std::sqrt(nd);
    return std::sqrt(nd / nb);
}

}  // namespace zk
