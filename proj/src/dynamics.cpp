#include "zk/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>

namespace zk {

const char* to_string(EvolutionMode m) {
    switch (m) {
        case EvolutionMode::full: return "full";
        case EvolutionMode::linear_potential: return "linear_potential";
        case EvolutionMode::free: return "free";
    }
    return "?";
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::scattering_like: return "scattering_like";
        case Verdict::blowup_like: return "blowup_like";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

double Sponge::rate(double r, double r_max) const {
    if (!enabled) return 0.0;
    const double r0 = start * r_max;
    if (r <= r0) return 0.0;
    const double x = (r - r0) / (r_max - r0);
    return strength * x * x;
}

void IntegratorConfig::validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("IntegratorConfig: dt must be positive and finite");
    if (adaptive && !(dt_floor > 0)) throw std::invalid_argument("IntegratorConfig: dt_floor must be positive when adaptive");
    if (!(drift_tol > 0)) throw std::invalid_argument("IntegratorConfig: drift_tol must be positive");
    if (!(ceiling_grad > 1)) throw std::invalid_argument("IntegratorConfig: ceiling_grad must exceed 1");
    if (!std::isfinite(alpha) || alpha < 0) throw std::invalid_argument("IntegratorConfig: alpha must be finite and >= 0");
    if (adaptive && check_every < 1) throw std::invalid_argument("IntegratorConfig: check_every must be >= 1");
    if (monitor_every < 1) throw std::invalid_argument("IntegratorConfig: monitor_every must be >= 1");
    if (sponge.enabled && (!(sponge.start > 0 && sponge.start < 1) || !(sponge.strength >= 0)))
        throw std::invalid_argument("IntegratorConfig: sponge start must lie in (0,1) and strength >= 0");
}

Stepper::Stepper(const GridPtr& g, const IntegratorConfig& cfg) : g_(g), cfg_(cfg), n_(static_cast<std::size_t>(g->n)) {
    cfg_.validate();
    uhat_.assign(2 * n_, 0.0);
    Nhat_.assign(2 * n_, 0.0);
    in_.resize(5 * n_);
    out_.resize(5 * n_);
    set_dt(cfg_.dt);
}

void Stepper::set_dt(double h) {
    h_ = h;
    half_s_.resize(n_);
    half_w_.resize(n_);
    damp_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
        const double p = g_->rho[k];
        half_s_[k] = std::polar(1.0, 0.5 * h * p * p);
        half_w_[k] = std::polar(1.0, 0.5 * h * cfg_.alpha * p);
        damp_[k] = std::exp(-cfg_.sponge.rate(g_->r[k], g_->r_max) * h);
    }
}

void Stepper::load(const ZakharovState& s) {
    require_same_grid(s.u, s.N, "Stepper::load");
    if (s.u.grid.get() != g_.get() && s.u.grid->fingerprint() != g_->fingerprint())
        throw std::invalid_argument("Stepper::load: state lives on a different grid");
    const RadialField u = to_spectral(s.u), N = to_spectral(s.N);
    for (std::size_t k = 0; k < n_; ++k) {
        uhat_[k] = u.values[k].real();
        uhat_[n_ + k] = u.values[k].imag();
        Nhat_[k] = N.values[k].real();
        Nhat_[n_ + k] = N.values[k].imag();
    }
    t_ = s.t;
}

void Stepper::restore(const Snapshot& s) {
    if (s.uhat.size() != uhat_.size() || s.Nhat.size() != Nhat_.size()) throw std::invalid_argument("Stepper::restore: snapshot size mismatch");
    uhat_ = s.uhat;
    Nhat_ = s.Nhat;
    t_ = s.t;
}

ZakharovState Stepper::state() const {
    rvec in(4 * n_), out(4 * n_);
    std::copy(uhat_.begin(), uhat_.end(), in.begin());
    std::copy(Nhat_.begin(), Nhat_.end(), in.begin() + 2 * n_);
    g_->inverse_real(in.data(), out.data(), 4);
    ZakharovState s{RadialField(g_), RadialField(g_), t_};
    for (std::size_t k = 0; k < n_; ++k) {
        s.u.values[k] = cplx(out[k], out[n_ + k]);
        s.N.values[k] = cplx(out[2 * n_ + k], out[3 * n_ + k]);
    }
    return s;
}

double Stepper::grad_sq() const {
    double acc = 0;
    for (std::size_t k = 0; k < n_; ++k) {
        const double p = g_->rho[k];
        acc += g_->wrho[k] * p * p * (uhat_[k] * uhat_[k] + uhat_[n_ + k] * uhat_[n_ + k]);
    }
    return kSphereArea * acc / kTwoPi4;
}

double Stepper::energy_Z() const {
    const ZakharovState s = state();
    double nn = 0, coup = 0;
    for (std::size_t k = 0; k < n_; ++k) {
        const double w = g_->wr[k];
        nn += w * std::norm(s.N.values[k]);
        coup += w * s.N.values[k].real() * std::norm(s.u.values[k]);
    }
    if (cfg_.mode == EvolutionMode::free) coup = 0;
    return 0.5 * grad_sq() + kSphereArea * (0.25 * nn - 0.5 * coup);
}

namespace {

void rotate(double* re, double* im, const cvec& ph, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const cplx z = cplx(re[k], im[k]) * ph[k];
        re[k] = z.real();
        im[k] = z.imag();
    }
}

bool all_finite(const rvec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

bool Stepper::advance(double h) {
    if (h == 0 || !std::isfinite(h)) throw std::invalid_argument("Stepper::advance: step must be nonzero and finite");
    if (h < 0 && cfg_.sponge.enabled) throw std::invalid_argument("Stepper::advance: backward steps are not defined with a sponge");
    if (h != h_) set_dt(h);
    const std::size_t n = n_;
    const bool free = cfg_.mode == EvolutionMode::free;
    const bool sponge = cfg_.sponge.enabled;
    const bool wave = sponge && cfg_.sponge.damp_wave;

    rotate(uhat_.data(), uhat_.data() + n, half_s_, n);
    rotate(Nhat_.data(), Nhat_.data() + n, half_w_, n);

    if (!free || sponge) {
        // columns: Re u, Im u, Re N [, Im N]
        const std::size_t nin = wave ? 4 : 3;
        std::copy(uhat_.begin(), uhat_.end(), in_.begin());
        std::copy(Nhat_.begin(), Nhat_.begin() + (wave ? 2 * n : n), in_.begin() + 2 * n);
        g_->inverse_real(in_.data(), out_.data(), nin);
        double* ur = out_.data();
        double* ui = out_.data() + n;
        double* nr = out_.data() + 2 * n;
        double* ni = out_.data() + 3 * n;
        // new columns: Re u, Im u, |u|^2 [, Re N, Im N]
        for (std::size_t k = 0; k < n; ++k) {
            cplx u(ur[k], ui[k]);
            if (!free) u *= std::polar(1.0, -h * nr[k]);
            in_[2 * n + k] = std::norm(u);
            if (sponge) u *= damp_[k];
            if (wave) {
                in_[3 * n + k] = nr[k] * damp_[k];
                in_[4 * n + k] = ni[k] * damp_[k];
            }
            in_[k] = u.real();
            in_[n + k] = u.imag();
        }
        const std::size_t nout = wave ? 5 : 3;
        g_->forward_real(in_.data(), out_.data(), nout);
        std::copy(out_.begin(), out_.begin() + 2 * n, uhat_.begin());
        if (wave) std::copy(out_.begin() + 3 * n, out_.begin() + 5 * n, Nhat_.begin());
        if (cfg_.mode == EvolutionMode::full) {
            // N -= i h D |u|^2 with a real transform: only the imaginary part moves
            const double* src = out_.data() + 2 * n;
            for (std::size_t k = 0; k < n; ++k) Nhat_[n + k] -= h * g_->rho[k] * src[k];
        }
    }

    rotate(uhat_.data(), uhat_.data() + n, half_s_, n);
    rotate(Nhat_.data(), Nhat_.data() + n, half_w_, n);
    t_ += h;
    return all_finite(uhat_) && all_finite(Nhat_);
}

ZakharovState step(const ZakharovState& s, const IntegratorConfig& cfg) {
    Stepper st(s.u.grid, cfg);
    st.load(s);
    if (!st.advance(cfg.dt)) throw std::runtime_error("step: non-finite values");
    return st.state();
}

LogRow measure(const ZakharovState& s, const Diagnostics& diag, double dt, bool sponge, EvolutionMode mode) {
    const EnergyReport e = functionals(s.u, s.N);
    LogRow row{};
    row.t = s.t;
    row.mass = e.mass;
    row.energy_Z = mode == EvolutionMode::free ? 0.5 * e.grad_sq + 0.25 * e.N_L2 * e.N_L2 : e.energy_Z;
    row.grad_u_L2 = std::sqrt(e.grad_sq);
    row.N_L2 = e.N_L2;
    row.u_L4 = std::pow(e.u4_4, 0.25);
    row.K_u = e.K;
    row.local_mass = ball_mass(s.u, diag.R_local);
    row.u_L2ms = lp_norm(s.u, 1.0 / (0.5 - diag.s_decay / 4.0));
    row.dt_current = dt;
    row.sponge_active = sponge;
    return row;
}

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

RunLog run(const ZakharovState& s0, const IntegratorConfig& cfg, double t_end, const Diagnostics& diag) {
    cfg.validate();
    if (!(t_end > s0.t)) throw std::invalid_argument("run: t_end must exceed the initial time");
    if (diag.store_trajectory && !(diag.store_every > 0)) throw std::invalid_argument("run: store_every must be positive");
    if (!(diag.s_decay > 0 && diag.s_decay < 2)) throw std::invalid_argument("run: s_decay must lie in (0, 2)");

    RunLog log;
    log.traj_u.role = "u";
    log.traj_N.role = "N";
    Stepper st(s0.u.grid, cfg);
    st.load(s0);
    ZakharovState healthy = st.state();
    healthy.t = s0.t;

    const LogRow first = measure(healthy, diag, cfg.dt, cfg.sponge.enabled, cfg.mode);
    log.rows.push_back(first);
    log.initial_grad = first.grad_u_L2;
    log.max_grad_ratio = 1.0;
    const double E0 = first.energy_Z, M0 = first.mass;
    const double e_scale = std::max({std::abs(E0), 0.5 * first.grad_u_L2 * first.grad_u_L2, 1e-300});
    const double m_scale = std::max(M0, 1e-300);
    Side last_side = functionals(healthy.u, healthy.N).classification;

    if (diag.store_trajectory) {
        log.traj_u.push(healthy.t, healthy.u);
        log.traj_N.push(healthy.t, healthy.N);
    }
    double next_store = s0.t + diag.store_every;
    const double t_eps = 1e-10 * std::max(1.0, std::abs(t_end));
    const double g0 = std::max(st.grad_sq(), 1e-300);
    double h = cfg.dt;
    int reported = 0;

    // everything a rejected adaptive block has to roll back
    struct Mark {
        Stepper::Snapshot snap;
        std::size_t rows, samples, events;
        double next_store, E, max_grad_ratio, energy_drift, mass_drift;
        int steps;
        Side side;
    };
    auto mark_now = [&](double E) {
        return Mark{st.snapshot(), log.rows.size(), log.traj_u.size(), log.events.size(), next_store, E,
                    log.max_grad_ratio, log.energy_drift, log.mass_drift, log.steps, last_side};
    };
    Mark mark = mark_now(cfg.adaptive ? st.energy_Z() : 0.0);
    int in_block = 0;

    auto trip = [&](const std::string& kind, const std::string& detail) {
        log.blowup = true;
        log.events.push_back({st.time(), kind, detail});
    };

    while (st.time() < t_end - t_eps) {
        const double hh = std::min(h, t_end - st.time());
        if (!st.advance(hh)) {
            trip("nonfinite", "non-finite values in the spectral state");
            break;
        }
        ++log.steps;
        ++in_block;
        const bool at_end = st.time() >= t_end - t_eps;

        if (cfg.adaptive && (in_block >= cfg.check_every || at_end)) {
            const double E1 = st.energy_Z();
            const double drift = std::abs(E1 - mark.E) / std::max({std::abs(mark.E), st.grad_sq(), 1e-300});
            if (drift > cfg.drift_tol) {
                const double t_block = mark.snap.t;
                st.restore(mark.snap);
                log.rows.resize(mark.rows);
                log.traj_u.times.resize(mark.samples);
                log.traj_u.fields.resize(mark.samples);
                log.traj_N.times.resize(mark.samples);
                log.traj_N.fields.resize(mark.samples);
                log.events.resize(mark.events);
                next_store = mark.next_store;
                log.max_grad_ratio = mark.max_grad_ratio;
                log.energy_drift = mark.energy_drift;
                log.mass_drift = mark.mass_drift;
                log.steps = mark.steps;
                last_side = mark.side;
                ++log.rejected;
                in_block = 0;
                h *= 0.5;
                if (reported < 20) {
                    log.events.push_back({t_block, "step_rejected", "energy change " + fmt(drift) + ", dt -> " + fmt(h)});
                    ++reported;
                }
                mark.events = log.events.size();
                if (h < cfg.dt_floor) {
                    trip("dt_underflow", "dt " + fmt(h) + " below floor " + fmt(cfg.dt_floor));
                    break;
                }
                continue;
            }
            if (drift < cfg.drift_tol / 32 && h < cfg.dt) h = std::min(cfg.dt, 2 * h);
            in_block = 0;
            mark = mark_now(E1);
        }

        const double ratio = std::sqrt(st.grad_sq() / g0);
        log.max_grad_ratio = std::max(log.max_grad_ratio, ratio);
        const bool store_now = diag.store_trajectory && st.time() >= next_store - t_eps;
        const bool ceiling = ratio > cfg.ceiling_grad;
        const bool monitor = log.steps % cfg.monitor_every == 0 || at_end || ceiling;
        if (monitor || store_now) {
            ZakharovState cur = st.state();
            if (store_now) {
                log.traj_u.push(cur.t, cur.u);
                log.traj_N.push(cur.t, cur.N);
                while (next_store <= st.time() + t_eps) next_store += diag.store_every;
            }
            if (monitor) {
                const LogRow row = measure(cur, diag, hh, cfg.sponge.enabled, cfg.mode);
                log.rows.push_back(row);
                const double edrift = std::abs(row.energy_Z - E0) / e_scale;
                log.energy_drift = std::max(log.energy_drift, edrift);
                log.mass_drift = std::max(log.mass_drift, std::abs(row.mass - M0) / m_scale);
                const Side side = classify(row.energy_Z, row.N_L2);
                const bool definite = cfg.mode == EvolutionMode::full && (side == Side::scattering_side || side == Side::blowup_side);
                const bool was_definite = last_side == Side::scattering_side || last_side == Side::blowup_side;
                if (definite && was_definite && side != last_side)
                    log.events.push_back({row.t, "side_flip",
                                          std::string(to_string(last_side)) + " -> " + to_string(side) + " at energy drift " + fmt(edrift)});
                if (definite) last_side = side;
            }
            if (ceiling) {
                trip("grad_ceiling", "||grad u|| reached " + fmt(ratio) + "x its initial value");
                break;
            }
            healthy = std::move(cur);
        }
    }
    if (log.rejected > reported)
        log.events.push_back({st.time(), "step_rejected", std::to_string(log.rejected) + " rejections in total"});
    if (log.blowup) log.events.push_back({healthy.t, "blowup_trip", "last healthy state at t = " + fmt(healthy.t)});
    log.final_state = log.blowup ? healthy : st.state();
    return log;
}

VerdictReport scattering_diagnostics(const RunLog& log, const ScatterCriteria& crit) {
    VerdictReport r;
    r.grad_ratio = log.max_grad_ratio;
    if (log.blowup) {
        r.verdict = Verdict::blowup_like;
        r.reason = "blow-up trip fired";
        for (const auto& e : log.events)
            if (e.kind == "grad_ceiling" || e.kind == "dt_underflow" || e.kind == "nonfinite") r.reason = e.kind + ": " + e.detail;
        return r;
    }
    if (log.rows.size() < 4) {
        r.reason = "too few logged rows";
        return r;
    }
    const double t0 = log.rows.front().t, t1 = log.rows.back().t;
    const double tq = t0 + 0.75 * (t1 - t0);
    double loc_max = 0, lp_max = 0, loc_late = 0, lp_late = 0;
    for (const auto& row : log.rows) {
        loc_max = std::max(loc_max, row.local_mass);
        lp_max = std::max(lp_max, row.u_L2ms);
        if (row.t >= tq) {
            loc_late = std::max(loc_late, row.local_mass);
            lp_late = std::max(lp_late, row.u_L2ms);
        }
    }
    r.local_ratio = loc_max > 0 ? loc_late / loc_max : 0.0;
    r.lp_ratio = lp_max > 0 ? lp_late / lp_max : 0.0;
    const bool bounded = log.max_grad_ratio <= crit.bounded_factor;
    if (r.local_ratio <= crit.local_fraction && r.lp_ratio <= crit.lp_fraction && bounded) {
        r.verdict = Verdict::scattering_like;
        r.reason = "local mass and L^{2(-s)} norm decayed with bounded gradient";
    } else {
        r.reason = "local ratio " + fmt(r.local_ratio) + ", lp ratio " + fmt(r.lp_ratio) + ", grad ratio " + fmt(r.grad_ratio);
    }
    return r;
}

NDecomposition decompose_N(const TrajectorySamples& traj_u, const TrajectorySamples& traj_N, double iota, double alpha, int n_theta) {
    traj_u.validate();
    traj_N.validate();
    if (traj_u.size() != traj_N.size()) throw std::invalid_argument("decompose_N: u and N sample counts differ");
    for (std::size_t i = 0; i < traj_u.size(); ++i)
        if (traj_u.times[i] != traj_N.times[i]) throw std::invalid_argument("decompose_N: u and N sample times differ");
    NDecomposition out;
    out.N_F.role = "N_F";
    out.N_N.role = "N_N";
    out.N_D.role = "N_D";
    if (traj_u.size() == 0) return out;
    const AngularQuadrature quad = make_angular_quadrature(n_theta);
    const std::size_t m = traj_u.size();
    std::vector<RadialField> NN(m);
    for (std::size_t i = 0; i < m; ++i) NN[i] = op_D(omega_tilde(traj_u.fields[i], conj(traj_u.fields[i]), iota, quad));
    const RadialField base = traj_N.fields[0] - NN[0];
    const double t0 = traj_u.times[0];
    const double f0 = std::sqrt(l2_norm_sq(base));
    for (std::size_t i = 0; i < m; ++i) {
        const double t = traj_u.times[i];
        RadialField NF = wave_flow(base, t - t0, alpha);
        RadialField ND = traj_N.fields[i] - NF - NN[i];
        const double a = std::sqrt(l2_norm_sq(NF));
        out.NF_sup = std::max(out.NF_sup, a);
        out.NN_sup = std::max(out.NN_sup, std::sqrt(l2_norm_sq(NN[i])));
        out.ND_sup = std::max(out.ND_sup, std::sqrt(l2_norm_sq(ND)));
        if (f0 > 0) out.NF_spread = std::max(out.NF_spread, std::abs(a - f0) / f0);
        out.N_F.push(t, NF);
        out.N_N.push(t, NN[i]);
        out.N_D.push(t, ND);
    }
    return out;
}

RadialField random_band_limited(const GridPtr& g, double lo, double hi, std::mt19937_64& rng) {
    if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("random_band_limited: need 0 < lo < hi");
    constexpr int kBumps = 8;
    const double width = 0.15 * (hi - lo) + 0.05;
    std::vector<double> centers(kBumps);
    std::vector<cplx> coef(kBumps);
    for (int b = 0; b < kBumps; ++b) {
        centers[b] = lo + (hi - lo) * uniform01(rng);
        const double re = normal01(rng);
        const double im = normal01(rng);
        coef[b] = cplx(re, im);
    }
    RadialField f = sample_spectral(g, [&](double p) {
        cplx acc = 0;
        for (int b = 0; b < kBumps; ++b) {
            const double x = (p - centers[b]) / width;
            acc += coef[b] * std::exp(-0.5 * x * x);
        }
        const double window = bump_phi(p / hi) * (1.0 - bump_phi(2.0 * p / lo));
        return acc * window;
    });
    f = to_physical(f);
    const double nrm = std::sqrt(l2_norm_sq(f));
    if (!(nrm > 0)) throw std::runtime_error("random_band_limited: degenerate draw");
    return cplx(1.0 / nrm) * f;
}

namespace {

RadialField potential_datum(const GridPtr& g, const PotentialFamily& V) {
    switch (V.kind) {
        case PotentialFamily::zero: return RadialField(g);
        case PotentialFamily::free_wave: {
            const double w = V.width;
            RadialField N = sample(g, [w](double r) { return cplx(std::exp(-r * r / (2 * w * w))); });
            const double target = V.mass_fraction * exact::mass_threshold;
            return cplx(target / std::sqrt(l2_norm_sq(N))) * N;
        }
        case PotentialFamily::ground_state_static: {
            const RadialField W = truncated_W(g, V.lambda, V.lambda);
            return W * W;
        }
    }
    return RadialField(g);
}

}  // namespace

ProbeResult strichartz_probe(const GridPtr& g, const PotentialFamily& V, const ProbeConfig& cfg) {
    if (cfg.ensemble < 1) throw std::invalid_argument("strichartz_probe: ensemble must be >= 1");
    if (cfg.horizons.empty()) throw std::invalid_argument("strichartz_probe: no horizons");
    if (!(cfg.delta >= 0 && cfg.delta < kDeltaStar)) throw std::invalid_argument("strichartz_probe: delta must lie in [0, 3/7)");
    std::vector<double> horizons = cfg.horizons;
    std::sort(horizons.begin(), horizons.end());
    if (!(horizons.front() > 0)) throw std::invalid_argument("strichartz_probe: horizons must be positive");
    const double T = horizons.back();

    IntegratorConfig ic;
    ic.dt = cfg.dt;
    ic.mode = EvolutionMode::linear_potential;
    ic.alpha = V.kind == PotentialFamily::ground_state_static ? 0.0 : 1.0;
    ic.sponge.enabled = cfg.sponge;
    ic.monitor_every = 1 << 30;
    Diagnostics diag;
    diag.store_trajectory = true;
    diag.store_every = cfg.sample_every;

    const RadialField N0 = potential_datum(g, V);
    ProbeResult res;
    res.horizons = horizons;
    res.member_ratio.assign(cfg.ensemble, std::vector<double>(horizons.size(), 0.0));
    std::vector<std::vector<double>> member_x(cfg.ensemble, std::vector<double>(horizons.size(), 0.0));
    std::vector<std::string> errors(cfg.ensemble);

#pragma omp parallel for schedule(dynamic, 1)
    for (int e = 0; e < cfg.ensemble; ++e) {
        try {
            std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(e + 1));
            const RadialField u0 = random_band_limited(g, cfg.band_lo, cfg.band_hi, rng);
            const RunLog log = run(ZakharovState{u0, N0, 0.0}, ic, T, diag);
            const double u0n = std::sqrt(l2_norm_sq(u0));
            const auto norms = spacetime_norm_X_horizons(log.traj_u, cfg.delta, false, horizons);
            for (std::size_t h = 0; h < horizons.size(); ++h) {
                res.member_ratio[e][h] = norms[h].value / u0n;
                member_x[e][h] = norms[h].x_part / u0n;
            }
        } catch (const std::exception& ex) {
            errors[e] = ex.what();
        }
    }
    for (const auto& err : errors)
        if (!err.empty()) throw std::runtime_error("strichartz_probe: " + err);
    res.ratio.assign(horizons.size(), 0.0);
    res.x_ratio.assign(horizons.size(), 0.0);
    for (int e = 0; e < cfg.ensemble; ++e)
        for (std::size_t h = 0; h < horizons.size(); ++h) {
            res.ratio[h] = std::max(res.ratio[h], res.member_ratio[e][h]);
            res.x_ratio[h] = std::max(res.x_ratio[h], member_x[e][h]);
        }
    return res;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need at least two matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("loglog_slope: values must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0)) throw std::invalid_argument("loglog_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

AppendixAResult appendix_a_probe(const GridPtr& g, const std::vector<double>& lambdas, double T, double q, double dt_scale) {
    if (lambdas.size() < 2) throw std::invalid_argument("appendix_a_probe: need at least two lambda values");
    if (!(T > 0) || !(q > 4) || !(dt_scale > 0)) throw std::invalid_argument("appendix_a_probe: need T > 0, q > 4, dt_scale > 0");
    AppendixAResult res;
    res.lambdas = lambdas;
    res.predicted = 1.0 - 4.0 / q;
    res.norms.assign(lambdas.size(), 0.0);
    std::vector<std::string> errors(lambdas.size());

#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < static_cast<int>(lambdas.size()); ++i) {
        try {
            const double lam = lambdas[i];
            if (!(lam > 0)) throw std::invalid_argument("lambda must be positive");
            RadialField V = sample(g, [lam](double r) {
                const double w = lam * W_profile(lam * r);
                return cplx(w * w);
            });
            RadialField u0 = sample(g, [lam](double r) { return cplx(smooth_cutoff(r, 1.0, 2.0) * lam * W_profile(lam * r)); });
            IntegratorConfig ic;
            ic.mode = EvolutionMode::linear_potential;
            ic.alpha = 0.0;
            const int steps = static_cast<int>(std::ceil(T / (dt_scale / (lam * lam)) - 1e-9));
            ic.dt = T / steps;
            Stepper st(g, ic);
            st.load(ZakharovState{u0, V, 0.0});
            const int stride = std::max(1, steps / 200);
            std::vector<double> ts{0.0}, vals{lp_norm(u0, q)};
            for (int s = 1; s <= steps; ++s) {
                if (!st.advance(ic.dt)) throw std::runtime_error("non-finite values");
                if (s % stride == 0 || s == steps) {
                    ts.push_back(st.time());
                    vals.push_back(lp_norm(st.state().u, q));
                }
            }
            res.norms[i] = time_lq_norm(ts, vals, 2.0);
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    }
    for (const auto& err : errors)
        if (!err.empty()) throw std::runtime_error("appendix_a_probe: " + err);
    res.exponent = loglog_slope(res.lambdas, res.norms);
    return res;
}

}  // namespace zk
