#include "zk/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace zk {

double bump_phi(double t) {
    if (t <= 1) return 1.0;
    if (t >= 2) return 0.0;
    const double c = std::cos(std::numbers::pi * (t - 1) / 2);
    return c * c;
}

double chi0(double rho) { return bump_phi(rho) - bump_phi(2 * rho); }

std::vector<double> dyadic_blocks(const RadialGrid& g) {
    const int kmin = static_cast<int>(std::floor(std::log2(g.rho_min() / 2)));
    const int kmax = static_cast<int>(std::ceil(std::log2(2 * g.rho_max())));
    std::vector<double> out;
    for (int k = kmin; k <= kmax; ++k) {
        const double j = std::ldexp(1.0, k);
        if (2 * j > g.rho_min() && j / 2 < g.rho_max()) out.push_back(j);
    }
    return out;
}

RadialField lp_project(const RadialField& f, double j) {
    RadialField s = to_spectral(f);
    for (std::size_t k = 0; k < s.size(); ++k) s.values[k] *= chi0(s.grid->rho[k] / j);
    return transform(s);
}

std::vector<RadialField> lp_decompose(const RadialField& f) {
    const auto& g = *f.grid;
    const auto blocks = dyadic_blocks(g);
    const RadialField s = to_spectral(f);
    const std::size_t n = s.size(), nb = blocks.size();
    // one batched inverse transform for all pieces (real and imaginary columns)
    rvec in(2 * nb * n), out(2 * nb * n);
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t k = 0; k < n; ++k) {
            const double c = chi0(g.rho[k] / blocks[b]);
            in[(2 * b) * n + k] = c * s.values[k].real();
            in[(2 * b + 1) * n + k] = c * s.values[k].imag();
        }
    g.inverse_real(in.data(), out.data(), 2 * nb);
    std::vector<RadialField> pieces;
    pieces.reserve(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        RadialField p(f.grid);
        for (std::size_t k = 0; k < n; ++k) p.values[k] = cplx(out[(2 * b) * n + k], out[(2 * b + 1) * n + k]);
        pieces.push_back(std::move(p));
    }
    return pieces;
}

double uncovered_mass(const RadialField& f) {
    RadialField s = to_spectral(f);
    const auto blocks = dyadic_blocks(*f.grid);
    for (std::size_t k = 0; k < s.size(); ++k) {
        double tot = 0;
        for (double j : blocks) tot += chi0(s.grid->rho[k] / j);
        s.values[k] *= 1 - tot;
    }
    return l2_norm_sq_spectral(s);
}

double besov_norm(const RadialField& f, double s, double p, double q) {
    if (!(p >= 1) || !(q >= 1)) throw std::invalid_argument("besov_norm: p and q must be >= 1");
    const auto blocks = dyadic_blocks(*f.grid);
    const auto pieces = lp_decompose(f);
    double acc = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const double v = std::pow(blocks[b], s) * lp_norm(pieces[b], p);
        if (std::isinf(q))
            acc = std::max(acc, v);
        else
            acc += std::pow(v, q);
    }
    return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

FrequencyWeight build_weight(double beta, std::vector<double> S) {
    if (!(beta > 1) || !std::isfinite(beta)) throw std::invalid_argument("build_weight: beta must be > 1");
    if (S.empty()) throw std::invalid_argument("build_weight: empty scale set");
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    if (S.front() != 1.0) throw std::invalid_argument("build_weight: the scale set must contain 1 as its least element");
    FrequencyWeight w;
    w.beta = beta;
    w.scales = S;
    w.separation = INFINITY;
    const double b4 = std::pow(beta, 4);
    for (std::size_t i = 0; i + 1 < S.size(); ++i) {
        const double ratio = S[i + 1] / S[i];
        w.separation = std::min(w.separation, ratio);
        if (!(ratio > b4)) {
            std::ostringstream os;
            os << "build_weight: separation violated by pair (" << S[i] << ", " << S[i + 1] << "): ratio " << ratio
               << " <= beta^4 = " << b4;
            throw std::invalid_argument(os.str());
        }
    }
    return w;
}

double FrequencyWeight::p_exponent(double r) const {
    const double b2 = beta * beta;
    for (std::size_t i = 0; i + 1 < scales.size(); ++i) {
        const double lo = scales[i], hi = scales[i + 1];
        if (r > b2 * lo && r < hi / b2) return std::log(b2) / std::log(std::sqrt(hi / (b2 * b2 * lo)));
    }
    return 0.0;
}

double FrequencyWeight::operator()(double r) const {
    const double b2 = beta * beta;
    if (r <= 1) return 1.0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        const double sg = scales[i];
        if (r >= sg / b2 && r <= b2 * sg) return sg;
        if (i + 1 < scales.size() && r > b2 * sg && r < scales[i + 1] / b2) {
            const double hi = scales[i + 1];
            const double p = std::log(b2) / std::log(std::sqrt(hi / (b2 * b2 * sg)));
            return r * std::pow(r / std::sqrt(hi * sg), p);
        }
    }
    return r / b2;
}

std::vector<FrequencyWeight::Piece> FrequencyWeight::breakpoints() const {
    const double b2 = beta * beta;
    std::vector<Piece> out;
    out.push_back({0.0, 1.0 / b2, Piece::unit, 1.0});
    for (std::size_t i = 0; i < scales.size(); ++i) {
        out.push_back({scales[i] / b2, scales[i] * b2, Piece::plateau, scales[i]});
        if (i + 1 < scales.size()) out.push_back({scales[i] * b2, scales[i + 1] / b2, Piece::loglinear, 0.0});
    }
    out.push_back({scales.back() * b2, INFINITY, Piece::tail, 0.0});
    return out;
}

double weight_sum_ratio(const FrequencyWeight& w, double s, double s_prime, double lo, double hi) {
    if (!(lo > 0) || !(hi >= lo)) throw std::invalid_argument("weight_sum_ratio: need 0 < lo <= hi");
    double sum = 0, sup = 0;
    for (int k = static_cast<int>(std::ceil(std::log2(lo) - 1e-12)); std::ldexp(1.0, k) <= hi * (1 + 1e-12); ++k) {
        const double r = std::ldexp(1.0, k);
        const double v = std::pow(r, s_prime) * std::pow(w(r), -s);
        sum += v;
        sup = std::max(sup, v);
    }
    return sup > 0 ? sum / sup : 0.0;
}

RadialField weight_multiplier(const RadialField& f, const FrequencyWeight& w, double s) {
    const auto blocks = dyadic_blocks(*f.grid);
    RadialField sp = to_spectral(f);
    for (std::size_t k = 0; k < sp.size(); ++k) {
        double m = 0;
        for (double j : blocks) m += std::pow(w(j), s) * chi0(sp.grid->rho[k] / j);
        sp.values[k] *= m;
    }
    return transform(sp);
}

void TrajectorySamples::push(double t, const RadialField& f) {
    if (!times.empty() && !(t > times.back())) throw std::invalid_argument("TrajectorySamples: times must increase");
    if (!fields.empty()) require_same_grid(fields.front(), f, "TrajectorySamples");
    times.push_back(t);
    fields.push_back(to_physical(f));
}

TrajectorySamples TrajectorySamples::restrict_to(double t0, double t1) const {
    TrajectorySamples out;
    out.role = role;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= t0 && times[i] <= t1) {
            out.times.push_back(times[i]);
            out.fields.push_back(fields[i]);
        }
    return out;
}

void TrajectorySamples::validate() const {
    if (times.size() != fields.size()) throw std::invalid_argument("TrajectorySamples: size mismatch");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("TrajectorySamples: times must increase");
        require_same_grid(fields[0], fields[i], "TrajectorySamples");
    }
}

double exponent_2of(double a) { return 1.0 / (0.5 + a / 4.0); }

double time_lq_norm(const std::vector<double>& t, const std::vector<double>& v, double q) {
    double acc = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
        acc += 0.5 * (t[i] - t[i - 1]) * (std::pow(std::abs(v[i]), q) + std::pow(std::abs(v[i - 1]), q));
    return std::pow(acc, 1.0 / q);
}

std::vector<SpacetimeNorm> spacetime_norm_X_horizons(const TrajectorySamples& traj, double delta, bool dual,
                                                     const std::vector<double>& horizons) {
    if (!(delta >= 0) || !(delta < kDeltaStar)) throw std::invalid_argument("spacetime_norm_X: delta must lie in [0, 3/7)");
    traj.validate();
    std::vector<SpacetimeNorm> out(horizons.size());
    if (traj.size() == 0) return out;
    const auto blocks = dyadic_blocks(*traj.fields[0].grid);
    const double p = dual ? exponent_2of(1 - delta) : exponent_2of(delta - 1);
    const double sreg = dual ? -delta : delta;
    std::vector<std::vector<double>> l2(traj.size());
    std::vector<double> besov_sq(traj.size(), 0.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto pieces = lp_decompose(traj.fields[i]);
        l2[i].resize(blocks.size());
        double acc = 0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            l2[i][b] = l2_norm_sq(pieces[b]);
            const double v = std::pow(blocks[b], sreg) * lp_norm(pieces[b], p);
            acc += v * v;
        }
        besov_sq[i] = acc;
    }
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        std::vector<double> sup_l2(blocks.size(), 0.0);
        double integral = 0;
        for (std::size_t i = 0; i < traj.size() && traj.times[i] <= horizons[h] * (1 + 1e-12); ++i) {
            for (std::size_t b = 0; b < blocks.size(); ++b) sup_l2[b] = std::max(sup_l2[b], l2[i][b]);
            if (i > 0) integral += 0.5 * (traj.times[i] - traj.times[i - 1]) * (besov_sq[i] + besov_sq[i - 1]);
        }
        double sum_sup = 0;
        for (double v : sup_l2) sum_sup += v;
        out[h].linf_l2 = std::sqrt(sum_sup);
        out[h].x_part = std::sqrt(integral);
        out[h].value = dual ? out[h].x_part : std::max(out[h].linf_l2, out[h].x_part);
    }
    return out;
}

SpacetimeNorm spacetime_norm_X(const TrajectorySamples& traj, double delta, bool dual) {
    if (traj.size() == 0) {
        if (!(delta >= 0) || !(delta < kDeltaStar)) throw std::invalid_argument("spacetime_norm_X: delta must lie in [0, 3/7)");
        return {};
    }
    return spacetime_norm_X_horizons(traj, delta, dual, {traj.times.back()})[0];
}

}  // namespace zk
