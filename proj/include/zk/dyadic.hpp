#pragma once

#include <string>
#include <vector>

#include "zk/radial.hpp"

namespace zk {

// C^1 bump: 1 on [0,1], cos^2 ramp on (1,2), 0 beyond
double bump_phi(double t);
// chi_0(rho) = phi(rho) - phi(2 rho), supported in (1/2, 2)
double chi0(double rho);

// dyadic j = 2^k whose annulus (j/2, 2j) meets [rho_min, rho_max]
std::vector<double> dyadic_blocks(const RadialGrid& g);

RadialField lp_project(const RadialField& f, double j);
// all pieces over dyadic_blocks(g), physical space, same order as dyadic_blocks
std::vector<RadialField> lp_decompose(const RadialField& f);
// spectral L^2 mass of f not covered by the partition on this grid
double uncovered_mass(const RadialField& f);

double besov_norm(const RadialField& f, double s, double p, double q);

class FrequencyWeight {
public:
    double beta = 2;
    std::vector<double> scales;  // sorted, scales[0] == 1
    double separation = 0;

    double operator()(double r) const;
    // exponent p(r) on intermediate intervals, 0 elsewhere
    double p_exponent(double r) const;

    struct Piece {
        double lo, hi;
        enum Kind { unit, plateau, loglinear, tail } kind;
        double value;  // plateau level
    };
    std::vector<Piece> breakpoints() const;
};

FrequencyWeight build_weight(double beta, std::vector<double> S);

// sum of r^{s'} w(r)^{-s} over dyadic r in [lo, hi], divided by its sup over the same r
double weight_sum_ratio(const FrequencyWeight& w, double s, double s_prime, double lo, double hi);

RadialField weight_multiplier(const RadialField& f, const FrequencyWeight& w, double s);

struct TrajectorySamples {
    std::vector<double> times;
    std::vector<RadialField> fields;
    std::string role = "u";

    void push(double t, const RadialField& f);
    std::size_t size() const { return times.size(); }
    TrajectorySamples restrict_to(double t0, double t1) const;
    void validate() const;
};

inline constexpr double kDeltaStar = 3.0 / 7.0;

// 1/p = 1/2 + a/4, the Lebesgue exponent written 2(a) in four dimensions
double exponent_2of(double a);

struct SpacetimeNorm {
    double linf_l2 = 0;  // script-L^infty_t L^2
    double x_part = 0;   // X^delta (or X^delta_* when dual)
    double value = 0;    // max of the two (dual: x_part)
};

SpacetimeNorm spacetime_norm_X(const TrajectorySamples& traj, double delta, bool dual);
// the same norm on [t_0, T] for each horizon T, decomposing every sample once
std::vector<SpacetimeNorm> spacetime_norm_X_horizons(const TrajectorySamples& traj, double delta, bool dual,
                                                     const std::vector<double>& horizons);

// (int |f|^q dt)^{1/q} over samples via trapezoid of |f|^q, q < infinity
double time_lq_norm(const std::vector<double>& t, const std::vector<double>& v, double q);

}  // namespace zk
