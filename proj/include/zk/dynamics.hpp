#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zk/dyadic.hpp"
#include "zk/normal_form.hpp"
#include "zk/radial.hpp"
#include "zk/variational.hpp"

namespace zk {

struct ZakharovState {
    RadialField u, N;
    double t = 0;
};

enum class EvolutionMode { full, linear_potential, free };
const char* to_string(EvolutionMode m);

struct Sponge {
    bool enabled = false;
    double start = 0.8;      // fraction of r_max where damping begins
    double strength = 5.0;   // peak damping rate at r_max
    bool damp_wave = false;  // also damp N (costs two extra transform columns per step)
    double rate(double r, double r_max) const;
};

struct IntegratorConfig {
    double dt = 1e-3;
    EvolutionMode mode = EvolutionMode::full;
    double alpha = 1.0;  // wave speed: N evolves with e^{i alpha t D}
    bool adaptive = false;
    double dt_floor = 1e-6;
    double drift_tol = 2e-4;      // relative energy change over one check block that triggers halving
    int check_every = 10;         // steps per adaptive check block
    double ceiling_grad = 20.0;   // blow-up trip when ||grad u|| exceeds this multiple of its initial value
    Sponge sponge;
    int monitor_every = 10;

    void validate() const;
};

// Strang splitting with exactly solvable substeps; state is held spectrally between steps
class Stepper {
public:
    Stepper(const GridPtr& g, const IntegratorConfig& cfg);

    void load(const ZakharovState& s);
    ZakharovState state() const;
    double time() const { return t_; }
    // one step of size h (may differ from cfg.dt, negative only without a sponge);
    // returns false on non-finite values
    bool advance(double h);
    // E_Z in full and linear_potential modes; without the coupling term in free mode,
    // so it is the invariant of the flow actually being integrated
    double energy_Z() const;
    double grad_sq() const;

    struct Snapshot {
        rvec uhat, Nhat;
        double t = 0;
    };
    Snapshot snapshot() const { return {uhat_, Nhat_, t_}; }
    void restore(const Snapshot& s);

private:
    void set_dt(double h);
    GridPtr g_;
    IntegratorConfig cfg_;
    std::size_t n_;
    double t_ = 0, h_ = 0;
    rvec uhat_;  // [Re | Im]
    rvec Nhat_;  // [Re | Im]
    cvec half_s_, half_w_;
    rvec damp_;
    rvec in_, out_;
};

ZakharovState step(const ZakharovState& s, const IntegratorConfig& cfg);

struct LogRow {
    double t, mass, energy_Z, grad_u_L2, N_L2, u_L4, K_u, local_mass, u_L2ms, dt_current;
    bool sponge_active;
};

struct RunEvent {
    double t;
    std::string kind;  // blowup_trip, nonfinite, dt_underflow, grad_ceiling, side_flip, step_rejected
    std::string detail;
};

struct Diagnostics {
    double R_local = 10.0;
    double s_decay = 0.5;  // u_L2ms is the L^{2(-s)} norm
    bool store_trajectory = false;
    double store_every = 0.1;  // time between stored samples
};

struct RunLog {
    std::vector<LogRow> rows;
    std::vector<RunEvent> events;
    TrajectorySamples traj_u, traj_N;
    ZakharovState final_state;  // last healthy state
    bool blowup = false;
    int steps = 0, rejected = 0;
    double initial_grad = 0, max_grad_ratio = 0;
    double energy_drift = 0;  // max relative |E_Z(t) - E_Z(0)| over logged rows
    double mass_drift = 0;
};

RunLog run(const ZakharovState& s0, const IntegratorConfig& cfg, double t_end, const Diagnostics& diag);

// energy_Z follows the same mode convention as Stepper::energy_Z
LogRow measure(const ZakharovState& s, const Diagnostics& diag, double dt, bool sponge, EvolutionMode mode = EvolutionMode::full);

enum class Verdict { scattering_like, blowup_like, inconclusive };
const char* to_string(Verdict v);

struct ScatterCriteria {
    double local_fraction = 0.5;   // local mass over the final quarter must drop below this fraction of its max
    double lp_fraction = 0.9;      // same for the L^{2(-s)} norm
    double bounded_factor = 5.0;   // grad u may not exceed this multiple of its initial value
};

struct VerdictReport {
    Verdict verdict = Verdict::inconclusive;
    double local_ratio = 1, lp_ratio = 1, grad_ratio = 1;
    std::string reason;
};

VerdictReport scattering_diagnostics(const RunLog& log, const ScatterCriteria& crit = {});

struct NDecomposition {
    TrajectorySamples N_F, N_N, N_D;
    double NF_sup = 0, NN_sup = 0, ND_sup = 0;
    double NF_spread = 0;  // max relative deviation of ||N_F(t)|| from ||N_F(0)||
};

NDecomposition decompose_N(const TrajectorySamples& traj_u, const TrajectorySamples& traj_N, double iota, double alpha = 1.0,
                           int n_theta = 32);

// potential families for the Strichartz probe
struct PotentialFamily {
    enum Kind { zero, free_wave, ground_state_static } kind = zero;
    double mass_fraction = 0.5;  // ||V(0)||_2 / ||W^2||_2 for free_wave
    double width = 2.0;          // Gaussian profile width for free_wave
    double lambda = 1.0;         // W_lambda for ground_state_static
};

struct ProbeConfig {
    double delta = 0;
    int ensemble = 4;
    std::vector<double> horizons = {5, 10, 20, 30, 40, 50};
    double dt = 0.01;
    double sample_every = 0.1;
    bool sponge = true;
    double band_lo = 0.25, band_hi = 3.0;  // frequency band of the random data
    std::uint64_t seed = 1;
};

struct ProbeResult {
    std::vector<double> horizons;
    std::vector<double> ratio;  // max over ensemble of ||u||_{X~^delta(0,T)} / ||u(0)||_2
    std::vector<double> x_ratio;  // the same for the square-summed part alone
    std::vector<std::vector<double>> member_ratio;
};

ProbeResult strichartz_probe(const GridPtr& g, const PotentialFamily& V, const ProbeConfig& cfg);
RadialField random_band_limited(const GridPtr& g, double lo, double hi, std::mt19937_64& rng);

struct AppendixAResult {
    std::vector<double> lambdas, norms;  // ||u||_{L^2_t L^q(0,T)}
    double exponent = 0;                 // least squares slope of log norm vs log lambda
    double predicted = 0;                // 1 - 4/q
};

AppendixAResult appendix_a_probe(const GridPtr& g, const std::vector<double>& lambdas, double T, double q, double dt_scale = 0.025);

// least squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace zk
