#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace zk {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;
using rvec = std::vector<double>;

inline constexpr double kSphereArea = 19.739208802178716;  // 2 pi^2, area of S^3
inline constexpr double kTwoPi4 = 1558.5454565440389;      // (2 pi)^4

// Fourier-Bessel collocation grid: r_k = j_k r_max / j_{n+1}, rho_k = j_k / r_max,
// with j_k the zeros of J_1. Immutable after construction.
class RadialGrid {
public:
    int n = 0;
    double r_max = 0;
    double S = 0;  // j_{n+1}
    rvec r, rho;
    rvec wr, wrho;  // quadrature for int f r^3 dr (physical / spectral side)
    rvec kernel;    // n x n symmetric, row major, orthogonal

    // forward: fhat = fwd_out .* (T (fwd_in .* f)); inverse likewise
    rvec fwd_in, fwd_out, inv_in, inv_out;

    // 5 point derivative stencils on r (even extension through r = 0)
    std::vector<std::array<int, 5>> fd_idx;
    std::vector<std::array<double, 5>> fd_w;
    std::vector<std::array<double, 5>> fd2_w;  // second derivative on the same nodes

    double rho_min() const { return rho.front(); }
    double rho_max() const { return rho.back(); }
    std::string fingerprint() const;

    // batch transforms on real columns of length n laid out contiguously
    void forward_real(const double* in, double* out, std::size_t ncols) const;
    void inverse_real(const double* in, double* out, std::size_t ncols) const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// kernels above this size skip the Newton-Schulz orthogonality polish
inline constexpr int kRefineLimit = 2048;

GridPtr make_grid(int n, double r_max);

enum class Space { physical, spectral };

struct RadialField {
    GridPtr grid;
    cvec values;
    Space space = Space::physical;

    RadialField() = default;
    RadialField(GridPtr g, Space s = Space::physical);
    RadialField(GridPtr g, cvec v, Space s = Space::physical);

    std::size_t size() const { return values.size(); }
    cplx& operator[](std::size_t i) { return values[i]; }
    const cplx& operator[](std::size_t i) const { return values[i]; }
};

RadialField sample(const GridPtr& g, const std::function<cplx(double)>& f);
RadialField sample_spectral(const GridPtr& g, const std::function<cplx(double)>& f);

RadialField transform(const RadialField& f);
RadialField to_physical(const RadialField& f);
RadialField to_spectral(const RadialField& f);

// F^{-1}[m(rho) fhat]; the result is in physical space
RadialField apply_multiplier(const RadialField& f, const std::function<cplx(double)>& m);
// same with precomputed multiplier values on rho nodes
RadialField apply_multiplier(const RadialField& f, const cvec& m);

RadialField op_D(const RadialField& f);
RadialField op_Dinv(const RadialField& f);
RadialField op_laplacian(const RadialField& f);
RadialField schrodinger_flow(const RadialField& f, double t);  // e^{-it Delta}: multiplier e^{it rho^2}
RadialField wave_flow(const RadialField& f, double t, double alpha = 1.0);  // e^{i alpha t D}

double lp_norm(const RadialField& f, double p);
double inner(const RadialField& f, const RadialField& g);
double l2_norm_sq(const RadialField& f);
double l2_norm_sq_spectral(const RadialField& fhat);  // (2 pi)^-4 normalized
double gradient_norm_sq(const RadialField& f);
double integrate(const RadialField& f);  // Re int f dx
double ball_mass(const RadialField& f, double radius);  // int_{r<radius} |f|^2 dx

// radial derivative by 4th order finite differences
RadialField d_dr(const RadialField& f);
cvec d_dr(const GridPtr& g, const cvec& v);
// four dimensional radial Laplacian f_rr + 3 f_r / r on the same stencils
RadialField laplacian_fd(const RadialField& f);

// relative size of the three lowest frequency coefficients (D^{-1} sensitivity flag)
std::array<double, 3> low_frequency_profile(const RadialField& f);

// pointwise helpers
RadialField operator+(const RadialField& a, const RadialField& b);
RadialField operator-(const RadialField& a, const RadialField& b);
RadialField operator*(const RadialField& a, const RadialField& b);
RadialField operator*(cplx s, const RadialField& a);
RadialField conj(const RadialField& a);
RadialField abs_sq(const RadialField& a);
RadialField real_part(const RadialField& a);
double max_abs(const RadialField& a);
double rel_l2_diff(const RadialField& a, const RadialField& b);

void require_same_grid(const RadialField& a, const RadialField& b, const char* where);
void require_physical(const RadialField& a, const char* where);

}  // namespace zk
