#include "zk/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace zk {

double W_profile(double r) { return 1.0 / (1.0 + r * r / 8.0); }

double smooth_cutoff(double r, double a, double b) {
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    const double c = std::cos(std::numbers::pi * (r - a) / (2 * (b - a)));
    return c * c;
}

RadialField truncated_W(const GridPtr& g, double lambda, double mu) {
    const double a = 0.6 * g->r_max, b = 0.9 * g->r_max;
    return sample(g, [=](double r) { return cplx(lambda * mu * W_profile(mu * r) * smooth_cutoff(r, a, b), 0); });
}

GroundState ground_state(const GridPtr& g) {
    GroundState gs;
    gs.field = sample(g, [](double r) { return cplx(W_profile(r), 0); });
    gs.truncated = truncated_W(g);

    // grid quadrature of the closed-form integrands plus the exact tail beyond r_max;
    // with t = r^2/8: W^4 r^3 dr = 32 t/(1+t)^4 dt and |W'|^2 r^3 dr = 16 t^2/(1+t)^4 dt
    double q = 0, gr = 0;
    for (int k = 0; k < g->n; ++k) {
        const double r = g->r[static_cast<std::size_t>(k)], w = W_profile(r);
        const double w4 = w * w * w * w;
        q += g->wr[static_cast<std::size_t>(k)] * w4;
        gr += g->wr[static_cast<std::size_t>(k)] * (r * r / 16.0) * w4;
    }
    const double T1 = 1.0 + g->r_max * g->r_max / 8.0;
    const double tail_q = 32.0 * (1.0 / (2 * T1 * T1) - 1.0 / (3 * T1 * T1 * T1));
    const double tail_g = 16.0 * (1.0 / T1 - 1.0 / (T1 * T1) + 1.0 / (3 * T1 * T1 * T1));
    auto& c = gs.constants;
    c.W4_4 = kSphereArea * (q + tail_q);
    c.grad_W_sq = kSphereArea * (gr + tail_g);
    c.C_S = std::pow(c.W4_4, 0.25) / std::sqrt(c.grad_W_sq);
    c.E_S_W = 0.5 * c.grad_W_sq - 0.25 * c.W4_4;
    c.mass_threshold = std::sqrt(c.W4_4);
    return gs;
}

const char* to_string(Side s) {
    switch (s) {
        case Side::scattering_side: return "scattering_side";
        case Side::blowup_side: return "blowup_side";
        case Side::above_threshold_energy: return "above_threshold_energy";
        case Side::indeterminate: return "indeterminate";
    }
    return "?";
}

Side classify(double energy_Z, double N_L2) {
    if (!(energy_Z < exact::E_S_W)) return Side::above_threshold_energy;
    const double rel = (N_L2 - exact::mass_threshold) / exact::mass_threshold;
    if (std::abs(rel) <= kThresholdBand) return Side::indeterminate;
    return rel < 0 ? Side::scattering_side : Side::blowup_side;
}

EnergyReport functionals(const RadialField& u0, const RadialField& N0) {
    require_same_grid(u0, N0, "functionals");
    const RadialField u = to_physical(u0), N = to_physical(N0);
    EnergyReport e;
    e.mass = l2_norm_sq(u);
    e.grad_sq = gradient_norm_sq(u);
    double u4 = 0, nn = 0, nu2 = 0, coup = 0;
    const auto& wr = u.grid->wr;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double a2 = std::norm(u.values[k]);
        u4 += wr[k] * a2 * a2;
        nn += wr[k] * std::norm(N.values[k]);
        nu2 += wr[k] * std::norm(N.values[k] - a2);
        coup += wr[k] * N.values[k].real() * a2;
    }
    e.u4_4 = kSphereArea * u4;
    e.N_L2 = std::sqrt(kSphereArea * nn);
    e.nu_L2 = std::sqrt(kSphereArea * nu2);
    e.energy_S = 0.5 * e.grad_sq - 0.25 * e.u4_4;
    e.energy_Z = 0.5 * e.grad_sq + 0.25 * kSphereArea * nn - 0.5 * kSphereArea * coup;
    e.K = e.grad_sq - e.u4_4;
    e.classification = classify(e.energy_Z, e.N_L2);
    return e;
}

namespace {

// +1 when margin > 0, -1 when margin < 0, 0 inside the relative band around the boundary
int tri(double margin, double scale) {
    if (std::abs(margin) <= kThresholdBand * scale) return 0;
    return margin > 0 ? 1 : -1;
}

}  // namespace

DichotomyReport check_dichotomy_equivalence(const std::vector<SamplePair>& samples) {
    DichotomyReport rep;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto e = functionals(samples[i].u, samples[i].N);
        if (!(e.energy_Z < exact::E_S_W)) {
            ++rep.skipped;
            continue;
        }
        ++rep.checked;
        // K >= 0,  ||N|| < ||W||_4^2,  ||N||^2 <= 4 E_Z  (sign +1 means the condition holds)
        const int c1 = tri(e.K, e.grad_sq);
        const int c2 = tri(exact::mass_threshold - e.N_L2, exact::mass_threshold);
        const int c3 = tri(4 * e.energy_Z - e.N_L2 * e.N_L2, std::max(e.N_L2 * e.N_L2, std::abs(4 * e.energy_Z)));
        int pos = 0, neg = 0;
        for (int c : {c1, c2, c3}) {
            if (c > 0) ++pos;
            if (c < 0) ++neg;
        }
        if (pos > 0 && neg > 0) {
            std::ostringstream os;
            os << "#" << i << " " << samples[i].label << ": K=" << e.K << " |N|=" << e.N_L2 << " 4E_Z=" << 4 * e.energy_Z;
            rep.counterexamples.push_back(os.str());
        } else {
            ++rep.agreements;
            if (pos > 0) ++rep.scattering_side;
            if (neg > 0) ++rep.blowup_side;
        }
    }
    return rep;
}

EstKReport check_estK(const std::vector<EstKSample>& samples, double slack) {
    EstKReport rep;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const double G = gradient_norm_sq(s.phi);
        const double Q = std::pow(lp_norm(s.phi, 4), 4);
        const double ES = 0.5 * G - 0.25 * Q;
        const double a = s.a;
        if (a < 0 || ES + a * a / 4 > exact::E_S_W) {
            ++rep.skipped;
            continue;
        }
        ++rep.checked;
        const double K = G - Q, q2 = std::sqrt(Q);
        std::vector<std::pair<double, double>> margins;  // (margin, scale)
        if (K >= 0) {
            margins.push_back({K - a * q2, std::max(std::abs(K), a * q2)});
            margins.push_back({exact::mass_threshold - q2 - a, exact::mass_threshold});
        }
        if (K <= 0) margins.push_back({-3 * a * q2 - 4 * K - a * a, std::max({3 * a * q2, 4 * std::abs(K), a * a})});
        for (auto [m, sc] : margins) {
            const double norm = sc > 0 ? m / sc : m;
            rep.worst_margin = std::min(rep.worst_margin, norm);
            if (m < -slack * std::max(sc, 1.0)) {
                ++rep.violations;
                std::ostringstream os;
                os << "#" << i << " " << s.label << ": K=" << K << " a=" << a << " margin=" << m;
                rep.details.push_back(os.str());
            }
        }
    }
    return rep;
}

namespace {

RadialField gaussian_profile(const GridPtr& g, double amp, double width, double phase = 0) {
    const cplx c = std::polar(amp, phase);
    return sample(g, [=](double r) { return c * std::exp(-r * r / (2 * width * width)); });
}

}  // namespace

SamplePair sample_generator(const GridPtr& g, SampleKind kind, const SampleParams& p) {
    SamplePair s;
    std::ostringstream label;
    switch (kind) {
        case SampleKind::ground_state_scaled: {
            s.u = truncated_W(g, p.lambda, p.mu);
            s.N = abs_sq(s.u);
            label << "W(lambda=" << p.lambda << ",mu=" << p.mu << ")";
            break;
        }
        case SampleKind::gaussian: {
            s.u = gaussian_profile(g, p.amplitude, p.width);
            s.N = abs_sq(s.u);
            label << "gauss(a=" << p.amplitude << ",w=" << p.width << ")";
            break;
        }
        case SampleKind::mixture: {
            s.u = RadialField(g);
            for (std::size_t i = 0; i < p.amplitudes.size(); ++i) s.u = s.u + gaussian_profile(g, p.amplitudes[i], p.widths[i]);
            s.N = abs_sq(s.u);
            label << "mix(" << p.amplitudes.size() << ")";
            break;
        }
        case SampleKind::curve_scale: {
            s.u = cplx(p.lambda, 0) * p.base->u;
            s.N = cplx(p.lambda * p.lambda, 0) * p.base->N;
            label << "scale(" << p.lambda << "," << p.base->label << ")";
            break;
        }
        case SampleKind::curve_nu: {
            s.u = cplx(p.lambda, 0) * p.base->u;
            s.N = p.base->N - abs_sq(p.base->u) + abs_sq(s.u);
            label << "nu(" << p.lambda << "," << p.base->label << ")";
            break;
        }
    }
    if (p.n_amplitude != 0 && kind != SampleKind::curve_scale && kind != SampleKind::curve_nu) {
        s.N = s.N + gaussian_profile(g, p.n_amplitude, p.n_width, p.n_phase);
        label << "+nu(" << p.n_amplitude << "," << p.n_width << "," << p.n_phase << ")";
    }
    s.label = label.str();
    return s;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double normal01(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

namespace {

double urange(std::mt19937_64& rng, double a, double b) { return a + (b - a) * uniform01(rng); }

SampleParams random_params(std::mt19937_64& rng, SampleKind kind) {
    SampleParams p;
    switch (kind) {
        case SampleKind::ground_state_scaled:
            p.lambda = uniform01(rng) < 0.5 ? urange(rng, 0.2, 0.95) : urange(rng, 1.05, 1.6);
            p.mu = std::exp(urange(rng, -0.5, 0.7));
            break;
        case SampleKind::gaussian:
            p.amplitude = std::exp(urange(rng, std::log(0.05), std::log(8.0)));
            p.width = urange(rng, 0.4, 3.0);
            break;
        case SampleKind::mixture: {
            const int m = 2 + static_cast<int>(uniform01(rng) * 2);
            for (int i = 0; i < m; ++i) {
                p.amplitudes.push_back(urange(rng, -5, 5));
                p.widths.push_back(urange(rng, 0.3, 3.0));
            }
            break;
        }
        default: break;
    }
    if (uniform01(rng) < 0.5) {
        p.n_amplitude = std::exp(urange(rng, std::log(1e-3), std::log(2.0)));
        p.n_width = urange(rng, 0.5, 4.0);
        p.n_phase = urange(rng, 0, 2 * std::numbers::pi);
    }
    return p;
}

}  // namespace

std::vector<SamplePair> random_dichotomy_samples(const GridPtr& g, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SamplePair> out;
    std::vector<SamplePair> bases;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count && attempts < 50 * count) {
        ++attempts;
        const double pick = uniform01(rng);
        SamplePair s;
        if (pick < 0.2 && !bases.empty()) {
            SampleParams p;
            p.base = &bases[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(bases.size()))];
            p.lambda = urange(rng, 0.85, 1.15);
            s = sample_generator(g, uniform01(rng) < 0.5 ? SampleKind::curve_scale : SampleKind::curve_nu, p);
        } else {
            const SampleKind k = pick < 0.55 ? SampleKind::ground_state_scaled : (pick < 0.85 ? SampleKind::gaussian : SampleKind::mixture);
            s = sample_generator(g, k, random_params(rng, k));
        }
        const auto e = functionals(s.u, s.N);
        // stay clearly below the energy constraint so discretization cannot decide the side
        if (!(e.energy_Z < exact::E_S_W * (1 - 1e-3))) continue;
        if (bases.size() < 64) bases.push_back(s);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<EstKSample> random_estK_samples(const GridPtr& g, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<EstKSample> out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count && attempts < 50 * count) {
        ++attempts;
        EstKSample s;
        const double pick = uniform01(rng);
        if (pick < 0.5) {
            const double lam = urange(rng, 0.1, 1.4), mu = std::exp(urange(rng, -0.5, 0.7));
            s.phi = truncated_W(g, lam, mu);
            std::ostringstream os;
            os << "W(" << lam << "," << mu << ")";
            s.label = os.str();
        } else {
            const double a = std::exp(urange(rng, std::log(0.05), std::log(8.0))), w = urange(rng, 0.4, 3.0);
            s.phi = gaussian_profile(g, a, w);
            std::ostringstream os;
            os << "gauss(" << a << "," << w << ")";
            s.label = os.str();
        }
        const double G = gradient_norm_sq(s.phi), Q = std::pow(lp_norm(s.phi, 4), 4);
        const double room = exact::E_S_W - (0.5 * G - 0.25 * Q);
        if (room < 0) continue;
        const double amax = 2 * std::sqrt(room);
        // a quarter of the draws sit on the admissibility boundary
        s.a = uniform01(rng) < 0.25 ? amax * (1 - 1e-12) : amax * uniform01(rng);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace zk
