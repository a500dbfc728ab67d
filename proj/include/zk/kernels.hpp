#pragma once

#include <cstddef>

namespace zk::kernels {

// Y[c*n + m] = sum_k T[m*n + k] * X[c*n + k]  for c < ncols (column blocks of length n).
// The serial version is the plain reference loop; the parallel one splits blocks of four
// rows over OpenMP threads and vectorizes the row reductions. Reductions never cross
// threads, so the parallel result does not depend on the thread count.
void matvec_serial(const double* T, std::size_t n, const double* X, double* Y, std::size_t ncols);
void matvec_parallel(const double* T, std::size_t n, const double* X, double* Y, std::size_t ncols);

enum class Mode { serial, parallel };

// process wide selection used by the transforms; defaults to parallel
void set_mode(Mode m);
Mode mode();

inline void matvec(const double* T, std::size_t n, const double* X, double* Y, std::size_t ncols) {
    if (mode() == Mode::serial)
        matvec_serial(T, n, X, Y, ncols);
    else
        matvec_parallel(T, n, X, Y, ncols);
}

void set_threads(int k);
int max_threads();

}  // namespace zk::kernels
