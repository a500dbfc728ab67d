#pragma once

#include <vector>

namespace zk {

double bessel_j0(double x);
// J_1 with a Hankel asymptotic branch for large arguments (the kernel needs ~n^2 values)
double bessel_j1(double x);

// first `count` positive zeros of J_1
std::vector<double> bessel_j1_zeros(int count);

}  // namespace zk
