#include "zk/kernels.hpp"

#include <atomic>

#ifdef ZK_USE_OPENMP
#include <omp.h>
#endif

namespace zk::kernels {

namespace {
std::atomic<Mode> g_mode{Mode::parallel};
}

void set_mode(Mode m) { g_mode.store(m); }
Mode mode() { return g_mode.load(); }

void set_threads(int k) {
#ifdef ZK_USE_OPENMP
    if (k > 0) omp_set_num_threads(k);
#else
    (void)k;
#endif
}

int max_threads() {
#ifdef ZK_USE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void matvec_serial(const double* T, std::size_t n, const double* X, double* Y, std::size_t ncols) {
    for (std::size_t c = 0; c < ncols; ++c) {
        const double* x = X + c * n;
        double* y = Y + c * n;
        for (std::size_t m = 0; m < n; ++m) {
            const double* row = T + m * n;
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += row[k] * x[k];
            y[m] = acc;
        }
    }
}

void matvec_parallel(const double* T, std::size_t n, const double* X, double* Y, std::size_t ncols) {
    const long nblk = static_cast<long>(n / 4);
    // four rows share each load of x; the kernel is streamed once for all columns
#ifdef ZK_USE_OPENMP
#pragma omp parallel for schedule(static) if (n >= 128 && !omp_in_parallel())
#endif
    for (long b = 0; b < nblk; ++b) {
        const std::size_t m = static_cast<std::size_t>(b) * 4;
        const double* r0 = T + m * n;
        const double* r1 = r0 + n;
        const double* r2 = r1 + n;
        const double* r3 = r2 + n;
        for (std::size_t c = 0; c < ncols; ++c) {
            const double* x = X + c * n;
            double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
#ifdef ZK_USE_OPENMP
#pragma omp simd reduction(+ : a0, a1, a2, a3)
#endif
            for (std::size_t k = 0; k < n; ++k) {
                const double xv = x[k];
                a0 += r0[k] * xv;
                a1 += r1[k] * xv;
                a2 += r2[k] * xv;
                a3 += r3[k] * xv;
            }
            double* y = Y + c * n + m;
            y[0] = a0;
            y[1] = a1;
            y[2] = a2;
            y[3] = a3;
        }
    }
    for (std::size_t m = static_cast<std::size_t>(nblk) * 4; m < n; ++m)
        for (std::size_t c = 0; c < ncols; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += T[m * n + k] * X[c * n + k];
            Y[c * n + m] = acc;
        }
}

}  // namespace zk::kernels
