#include "zk/virial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace zk {

namespace weight_forms {

double psi(double x) { return 1.0 / std::sqrt(1.0 + x * x); }
double f0(double x) { return std::pow(psi(x), 1.5); }
double f1(double x) {
    const double p = psi(x);
    return x * x * p * p * p;
}
double f2(double x) {
    const double p = psi(x), p3 = p * p * p;
    return 3 * p3 + 3 * p3 * p * p - 6 * p3 * p * p * p * p;
}
double f3(double x) {
    const double p = psi(x);
    return 3 * p + p * p * p - 4 * std::pow(p, 6);
}
double f4(double x) {
    const double p = psi(x), p3 = p * p * p;
    return (2 * p3 + 3 * p3 * p * p + 15 * p3 * std::pow(p, 4)) / 4;
}
double f5(double x) {
    const double p = psi(x);
    return 3 * (p - std::pow(p, 4.5)) - x * x * p * p * p;
}
double h(double x) {
    const double p = psi(x);
    return 3.5 * p - x * x * p * p * p;
}
double Lambda(double x) { return x * x / std::pow(1 + x, 4); }

}  // namespace weight_forms

namespace {

RadialField on_grid(const GridPtr& g, double R, double (*f)(double)) {
    return sample(g, [R, f](double r) { return cplx(f(r / R)); });
}

double pairing(const RadialField& a, const RadialField& b) { return inner(a, b); }

// Re int conj(a) * b * w
double weighted(const RadialField& a, const RadialField& b, const RadialField& w) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a.grid->wr[k] * (std::conj(a.values[k]) * b.values[k]).real() * w.values[k].real();
    return kSphereArea * s;
}

const cplx I(0, 1);

}  // namespace

VirialWeights make_virial_weights(const GridPtr& g, double R) {
    if (!(R > 0) || !std::isfinite(R)) throw std::invalid_argument("make_virial_weights: R must be positive");
    namespace wf = weight_forms;
    VirialWeights w;
    w.R = R;
    w.psi = on_grid(g, R, wf::psi);
    w.f0 = on_grid(g, R, wf::f0);
    w.f1 = on_grid(g, R, wf::f1);
    w.f2 = on_grid(g, R, wf::f2);
    w.f3 = on_grid(g, R, wf::f3);
    w.f4 = on_grid(g, R, wf::f4);
    w.f5 = on_grid(g, R, wf::f5);
    w.h = on_grid(g, R, wf::h);
    w.La = on_grid(g, R, wf::Lambda);
    const double R2 = R * R;
    w.r_psi_r = sample(g, [R](double r) {
        const double x = r / R, p = wf::psi(x);
        return cplx(-x * x * p * p * p);
    });
    w.lap_psi = sample(g, [R, R2](double r) {
        const double p = wf::psi(r / R), p3 = p * p * p;
        return cplx(-(p3 + 3 * p3 * p * p) / R2);
    });
    w.r_lap_psi_r = sample(g, [R, R2](double r) {
        const double x = r / R, p = wf::psi(x), p5 = std::pow(p, 5);
        return cplx((3 * x * x * p5 + 15 * x * x * p5 * p * p) / R2);
    });
    w.lap_f0 = sample(g, [R, R2](double r) {
        const double p = wf::psi(r / R);
        return cplx(-(0.75 * std::pow(p, 3.5) + 5.25 * std::pow(p, 5.5)) / R2);
    });
    return w;
}

VirialWeights flat_virial_weights(const GridPtr& g) {
    VirialWeights w;
    w.R = INFINITY;
    auto c = [&](double v) { return sample(g, [v](double) { return cplx(v); }); };
    w.psi = c(1);
    w.f0 = c(1);
    w.f1 = c(0);
    w.f2 = c(0);
    w.f3 = c(0);
    w.f4 = c(0);
    w.f5 = c(0);
    w.h = c(3.5);
    w.La = c(0);
    w.r_psi_r = c(0);
    w.lap_psi = c(0);
    w.r_lap_psi_r = c(0);
    w.lap_f0 = c(0);
    return w;
}

RadialField apply_As(const RadialField& f0, double s) {
    const RadialField f = to_physical(f0);
    const RadialField fr = d_dr(f);
    RadialField out(f.grid);
    const double c = (4 + s) / 2;
    for (std::size_t k = 0; k < f.size(); ++k) out.values[k] = f.grid->r[k] * fr.values[k] + c * f.values[k];
    return out;
}

std::array<double, 6> weight_relation_residuals(const VirialWeights& w, double r_cut) {
    // the Laplacian terms carry R^2 because the f_j are functions of r / R
    const double R2 = std::isfinite(w.R) ? w.R * w.R : 0.0;
    std::array<double, 6> res{};
    const auto& g = *w.psi.grid;
    for (std::size_t k = 0; k < w.psi.size(); ++k) {
        if (g.r[k] >= r_cut) break;
        const double p = w.psi[k].real(), rp = w.r_psi_r[k].real(), f0 = w.f0[k].real();
        const double l = w.lap_psi[k].real(), rl = w.r_lap_psi_r[k].real();
        const double e[6] = {
            f0 * f0 - (rp + p),
            w.f1[k].real() + rp,
            w.f2[k].real() + R2 * (rl + 6 * l - 4 * f0 * w.lap_f0[k].real()),
            w.f3[k].real() - (rp + 4 * p) + 4 * f0 * f0 * f0 * f0,
            4 * w.f4[k].real() + R2 * (rl + 5 * l),
            w.f5[k].real() - (rp + 3 * p) + 3 * f0 * f0 * f0,
        };
        for (int j = 0; j < 6; ++j) res[j] = std::max(res[j], std::abs(e[j]));
    }
    return res;
}

RadialField commutator_brace(const RadialField& w, const RadialField& g) {
    require_same_grid(w, g, "commutator_brace");
    const RadialField wp = to_physical(w), gp = to_physical(g);
    return op_D(wp * op_Dinv(gp)) - wp * gp;
}

VirialBreakdown virial_values(const ZakharovState& s, const VirialWeights& w) {
    require_same_grid(s.u, s.N, "virial_values");
    require_same_grid(s.u, w.psi, "virial_values");
    const RadialField u = to_physical(s.u), N = to_physical(s.N);
    const auto& g = u.grid;
    const std::size_t n = u.size();
    const RadialField ur = d_dr(u), Nr = d_dr(N);
    const RadialField DiN = op_Dinv(N);

    RadialField a(g), b(g), c(g), d(g);
    for (std::size_t k = 0; k < n; ++k) {
        const double r = g->r[k], p = w.psi[k].real(), rp = w.r_psi_r[k].real();
        a.values[k] = I * (2 * p * r * ur[k] + rp * u[k] + 4 * p * u[k]);
        b.values[k] = I * (2 * p * r * Nr[k] + rp * N[k] + 5 * p * N[k]);
        c.values[k] = I * (r * ur[k] + 2.0 * u[k]);
        d.values[k] = I * (r * Nr[k] + 2.5 * N[k]);
    }
    VirialBreakdown v;
    v.t = s.t;
    v.V_R = pairing(u, a) + 0.5 * pairing(DiN, b);
    v.V_inf = 2 * pairing(u, c) + pairing(DiN, d);

    // weight combinations A_s applied to psi and Delta psi
    RadialField A4psi(g), A8lap(g), A6lap(g), A2psi(g);
    for (std::size_t k = 0; k < n; ++k) {
        const double p = w.psi[k].real(), rp = w.r_psi_r[k].real();
        const double l = w.lap_psi[k].real(), rl = w.r_lap_psi_r[k].real();
        A4psi.values[k] = rp + 4 * p;
        A8lap.values[k] = rl + 6 * l;
        A6lap.values[k] = rl + 5 * l;
        A2psi.values[k] = rp + 3 * p;
    }
    const RadialField u2 = abs_sq(u);
    const RadialField u4 = u2 * u2;
    v.NS = 4 * weighted(ur, ur, w.psi) + 4 * weighted(ur, ur, w.r_psi_r) - weighted(u4, RadialField(g, cvec(n, 1.0)), A4psi) -
           weighted(u, u, A8lap);

    const RadialField nu = N - u2;
    const RadialField eta = op_Dinv(nu);
    const RadialField etar = d_dr(eta);
    v.QN = 0.5 * weighted(nu, nu, w.psi) + 0.5 * weighted(etar, etar, w.psi) + weighted(etar, etar, w.r_psi_r) -
           0.25 * weighted(eta, eta, A6lap);

    const RadialField A1u2 = apply_As(u2, 1);
    const RadialField brace = commutator_brace(w.psi, A1u2) + cplx(0.5) * commutator_brace(w.r_psi_r, u2);
    v.CC3p = pairing(nu, brace);
    v.CC = -weighted(nu * u, u, A2psi) + v.CC3p;

    const EnergyReport e = functionals(u, N);
    v.rate_inf = 4 * e.K + l2_norm_sq(nu) - 3 * pairing(nu * u, u);
    return v;
}

double bilinear_commutator_beta(const RadialField& f0, const RadialField& g0, const VirialWeights& w) {
    require_same_grid(f0, g0, "bilinear_commutator_beta");
    const RadialField f = to_physical(f0), g = to_physical(g0);
    return pairing(w.h * op_D(f), op_D(g)) - pairing(w.h * d_dr(f), d_dr(g));
}

double l4_tail(const RadialField& u, const VirialWeights& w) {
    const RadialField a = abs_sq(to_physical(u));
    return integrate(a * a * w.La);
}

EtaSplit eta_split(const ZakharovState& s, double R) {
    EtaSplit out;
    out.delta = std::pow(R, -8.0 / 11.0);
    const RadialField nu = to_physical(s.N) - abs_sq(to_physical(s.u));
    const RadialField eta = to_spectral(op_Dinv(nu));
    RadialField lo = eta, hi = eta;
    for (std::size_t k = 0; k < eta.size(); ++k) {
        const double m = bump_phi(eta.grid->rho[k] / out.delta);
        lo.values[k] *= m;
        hi.values[k] *= 1 - m;
    }
    out.low = std::sqrt(l2_norm_sq_spectral(lo));
    out.high = std::sqrt(l2_norm_sq_spectral(hi));
    const double tot = std::hypot(out.low, out.high);
    out.low_fraction = tot > 0 ? out.low / tot : 0.0;
    return out;
}

RateReport rate_check(const TrajectorySamples& traj_u, const TrajectorySamples& traj_N, const VirialWeights& w) {
    traj_u.validate();
    traj_N.validate();
    const std::size_t m = traj_u.size();
    if (m != traj_N.size()) throw std::invalid_argument("rate_check: u and N sample counts differ");
    if (m < 5) throw std::invalid_argument("rate_check: need at least five samples");
    const double dt = traj_u.times[1] - traj_u.times[0];
    for (std::size_t i = 1; i < m; ++i) {
        if (traj_u.times[i] != traj_N.times[i]) throw std::invalid_argument("rate_check: u and N sample times differ");
        if (std::abs(traj_u.times[i] - traj_u.times[i - 1] - dt) > 1e-9 * std::max(1.0, std::abs(traj_u.times[i])))
            throw std::invalid_argument("rate_check: samples must be uniformly spaced");
    }

    RateReport rep;
    rep.rows.resize(m);
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < static_cast<int>(m); ++i)
        rep.rows[i].v = virial_values(ZakharovState{traj_u.fields[i], traj_N.fields[i], traj_u.times[i]}, w);

    double dR = 0, dI = 0, sR = 0, sI = 0, rich = 0, rich_scale = 0;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        auto& row = rep.rows[i];
        row.fd_V_R = (rep.rows[i + 1].v.V_R - rep.rows[i - 1].v.V_R) / (2 * dt);
        row.fd_V_inf = (rep.rows[i + 1].v.V_inf - rep.rows[i - 1].v.V_inf) / (2 * dt);
        dR = std::max(dR, std::abs(row.fd_V_R - row.v.rate_R()));
        dI = std::max(dI, std::abs(row.fd_V_inf - row.v.rate_inf));
        sR = std::max({sR, std::abs(row.fd_V_R), std::abs(row.v.rate_R())});
        sI = std::max({sI, std::abs(row.fd_V_inf), std::abs(row.v.rate_inf)});
        if (i >= 2 && i + 2 < m) {
            const double wide_R = (rep.rows[i + 2].v.V_R - rep.rows[i - 2].v.V_R) / (4 * dt);
            const double wide_I = (rep.rows[i + 2].v.V_inf - rep.rows[i - 2].v.V_inf) / (4 * dt);
            rich = std::max({rich, std::abs(wide_R - row.fd_V_R), std::abs(wide_I - row.fd_V_inf)});
            rich_scale = std::max({rich_scale, std::abs(row.fd_V_R), std::abs(row.fd_V_inf)});
        }
    }
    rep.mismatch_R = sR > 0 ? dR / sR : 0.0;
    rep.mismatch_inf = sI > 0 ? dI / sI : 0.0;
    rep.richardson = rich_scale > 0 ? rich / rich_scale : 0.0;
    if (rep.richardson > 0.1) {
        std::ostringstream os;
        os << "rate_check: sample stride too coarse, stride 1 and stride 2 differences disagree by " << rep.richardson;
        throw StrideTooCoarse(os.str(), rep.richardson);
    }
    return rep;
}

}  // namespace zk
