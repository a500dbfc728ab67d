#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "zk/radial.hpp"

namespace zk {

namespace exact {
inline constexpr double W4_4 = 105.27578027828649;          // 32 pi^2 / 3
inline constexpr double E_S_W = W4_4 / 4;                   // 8 pi^2 / 3
inline constexpr double mass_threshold = 10.260398641294913;  // sqrt(32 pi^2 / 3)
}  // namespace exact

double W_profile(double r);  // [1 + r^2/8]^{-1}
// smooth step: 1 on [0,a], cos^2 ramp, 0 on [b, inf)
double smooth_cutoff(double r, double a, double b);

struct GroundStateConstants {
    double grad_W_sq = 0, W4_4 = 0, C_S = 0, E_S_W = 0, mass_threshold = 0;
};

struct GroundState {
    RadialField field;      // W on the grid (not truncated)
    RadialField truncated;  // W times the cutoff on [0.6, 0.9] r_max
    GroundStateConstants constants;
};

GroundState ground_state(const GridPtr& g);
// lambda * mu * W(mu r) with the standard truncation
RadialField truncated_W(const GridPtr& g, double lambda = 1.0, double mu = 1.0);

enum class Side { scattering_side, blowup_side, above_threshold_energy, indeterminate };
const char* to_string(Side s);

struct EnergyReport {
    double mass = 0, energy_S = 0, energy_Z = 0, K = 0, N_L2 = 0, nu_L2 = 0;
    double grad_sq = 0, u4_4 = 0;
    Side classification = Side::indeterminate;
};

EnergyReport functionals(const RadialField& u, const RadialField& N);
Side classify(double energy_Z, double N_L2);

struct SamplePair {
    RadialField u, N;
    std::string label;
};

struct DichotomyReport {
    int checked = 0, skipped = 0, agreements = 0;
    std::vector<std::string> counterexamples;
    int scattering_side = 0, blowup_side = 0;
};

inline constexpr double kThresholdBand = 1e-9;

DichotomyReport check_dichotomy_equivalence(const std::vector<SamplePair>& samples);

struct EstKSample {
    RadialField phi;
    double a = 0;
    std::string label;
};

struct EstKReport {
    int checked = 0, skipped = 0, violations = 0;
    double worst_margin = INFINITY;  // smallest normalized margin seen
    std::vector<std::string> details;
};

EstKReport check_estK(const std::vector<EstKSample>& samples, double slack = 1e-8);

enum class SampleKind { ground_state_scaled, gaussian, mixture, curve_scale, curve_nu };

struct SampleParams {
    double lambda = 1, mu = 1;
    double amplitude = 1, width = 1;
    double n_amplitude = 0, n_width = 1, n_phase = 0;
    std::vector<double> amplitudes, widths;  // mixture components
    const SamplePair* base = nullptr;         // for the two deformation curves
};

SamplePair sample_generator(const GridPtr& g, SampleKind kind, const SampleParams& p);

// portable draws from a 64-bit Mersenne twister
double uniform01(std::mt19937_64& rng);
double normal01(std::mt19937_64& rng);

// random pairs with E_Z < E_S(W) covering both sides of the threshold
std::vector<SamplePair> random_dichotomy_samples(const GridPtr& g, int count, std::uint64_t seed);
// random admissible (phi, a): E_S(phi) + a^2/4 <= E_S(W)
std::vector<EstKSample> random_estK_samples(const GridPtr& g, int count, std::uint64_t seed);

}  // namespace zk
