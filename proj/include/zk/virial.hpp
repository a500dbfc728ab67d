#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "zk/dyadic.hpp"
#include "zk/dynamics.hpp"
#include "zk/radial.hpp"

namespace zk {

// closed forms in x = r/R with psi = (1 + x^2)^{-1/2}
namespace weight_forms {
double psi(double x);
double f0(double x);
double f1(double x);
double f2(double x);
double f3(double x);
double f4(double x);
double f5(double x);
double h(double x);       // A_3 psi
double Lambda(double x);  // x^2 / (1 + x)^4
}  // namespace weight_forms

struct VirialWeights {
    double R = 10;
    RadialField psi, f0, f1, f2, f3, f4, f5, h, La;
    // auxiliary closed forms used by the identities
    RadialField r_psi_r;      // r d/dr psi
    RadialField lap_psi;      // Delta psi (four dimensional radial Laplacian)
    RadialField r_lap_psi_r;  // r d/dr Delta psi
    RadialField lap_f0;       // Delta f_0
};

VirialWeights make_virial_weights(const GridPtr& g, double R);
// the same weights with psi replaced by the constant 1 (h = 3.5, all derivatives zero)
VirialWeights flat_virial_weights(const GridPtr& g);

// r f_r + ((4 + s)/2) f with the grid derivative rule
RadialField apply_As(const RadialField& f, double s);
// residuals of the six defining relations of f_0..f_5 with the derivatives of psi
// and f_0 taken from their closed forms; max over nodes with r < r_cut
//   f0^2 = A_{-2} psi, f1 = -A_{-4} psi, f2 = R^2 (-A_8 Lap psi + 4 f0 Lap f0),
//   f3 = A_4 psi - 4 f0^4, 4 f4 = -R^2 A_6 Lap psi, f5 = A_2 psi - 3 f0^3
std::array<double, 6> weight_relation_residuals(const VirialWeights& w, double r_cut);

// D (w D^{-1} g) - w g
RadialField commutator_brace(const RadialField& w, const RadialField& g);

struct VirialBreakdown {
    double t = 0;
    double V_R = 0, NS = 0, QN = 0, CC = 0, CC3p = 0;
    double V_inf = 0, rate_inf = 0;
    double rate_R() const { return NS + QN + CC; }
};

VirialBreakdown virial_values(const ZakharovState& s, const VirialWeights& w);

// <h D f | D g> - <h f_r | g_r>
double bilinear_commutator_beta(const RadialField& f, const RadialField& g, const VirialWeights& w);

// <|u|^4 | Lambda_R>
double l4_tail(const RadialField& u, const VirialWeights& w);

// eta = D^{-1} nu split at frequency delta = R^{-8/11}
struct EtaSplit {
    double delta = 0, low = 0, high = 0, low_fraction = 0;
};
EtaSplit eta_split(const ZakharovState& s, double R);

struct StrideTooCoarse : std::runtime_error {
    double disagreement;
    StrideTooCoarse(const std::string& what, double d) : std::runtime_error(what), disagreement(d) {}
};

struct RateRow {
    VirialBreakdown v;
    double fd_V_R = NAN, fd_V_inf = NAN;  // centered differences, NaN at the window ends
};

struct RateReport {
    std::vector<RateRow> rows;
    double mismatch_R = 0, mismatch_inf = 0;  // max |difference| over the max magnitude of either side
    double richardson = 0;                   // disagreement between stride 1 and stride 2 differences
};

// samples must be uniformly spaced in time; throws StrideTooCoarse when the
// stride 1 and stride 2 centered differences disagree by more than 10%
RateReport rate_check(const TrajectorySamples& traj_u, const TrajectorySamples& traj_N, const VirialWeights& w);

}  // namespace zk
