#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "zk/radial.hpp"

namespace zk {

// (f,g)_{HL}: sum over dyadic (j,k) with iota*j >= max(k,2) of P_j f * P_k g
RadialField hl_product(const RadialField& f, const RadialField& g, double iota);
RadialField lh_product(const RadialField& f, const RadialField& g, double iota);
RadialField hh_product(const RadialField& f, const RadialField& g, double iota);
// same as hl_product by explicit enumeration of the dyadic pairs (reference)
RadialField hl_product_pairs(const RadialField& f, const RadialField& g, double iota);

enum class KernelKind { omega_plus, omega_minus, omega_tilde };

struct BilinearKernelSpec {
    KernelKind kind = KernelKind::omega_plus;
    double iota = 0.125;
};

struct AngularQuadrature {
    int n_theta = 64;
    std::vector<double> nodes, weights;  // weights include the 4 pi area of S^2
};

AngularQuadrature make_angular_quadrature(int n_theta = 64);

// symbol-level pieces, exposed for spot checks
double kernel_denominator(KernelKind kind, double xi, double xi_minus_eta, double eta);
// restriction mask m(tau, sigma) for the high-low pairs (tau: first slot, sigma: second)
double hl_mask(double tau, double sigma, double iota);
double hl_mask_pairs(double tau, double sigma, double iota);  // direct pair sum, reference
double kernel_mask(KernelKind kind, double tau, double sigma, double iota);

struct DenominatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// returns the bilinear output in physical space
RadialField apply_bilinear(const BilinearKernelSpec& spec, const RadialField& f, const RadialField& g, const AngularQuadrature& quad);
// serial reference: pair-enumerated mask and no threading
RadialField apply_bilinear_reference(const BilinearKernelSpec& spec, const RadialField& f, const RadialField& g, const AngularQuadrature& quad);

RadialField omega(const RadialField& f, const RadialField& g, double iota, const AngularQuadrature& quad);
RadialField omega_tilde(const RadialField& f, const RadialField& g, double iota, const AngularQuadrature& quad);

using FieldPair = std::pair<RadialField, RadialField>;

// Omega-vector(phi, psi) = (Omega_{i1}(psi, phi), D tilde-Omega_{i2}(phi, conj phi))
FieldPair omega_vec(const RadialField& phi, const RadialField& psi, double iota1, double iota2, const AngularQuadrature& quad);
FieldPair normal_transform(const RadialField& u, const RadialField& N, double iota1, double iota2, const AngularQuadrature& quad);

struct NonContraction : std::runtime_error {
    double factor;
    NonContraction(const std::string& what, double f) : std::runtime_error(what), factor(f) {}
};

struct InverseResult {
    RadialField u, N;
    int iterations = 0;
    double contraction = 0;  // largest measured increment ratio
};

InverseResult normal_inverse(const RadialField& u1, const RadialField& N1, double iota1, double iota2, int max_iter, double tol,
                             const AngularQuadrature& quad);

}  // namespace zk
