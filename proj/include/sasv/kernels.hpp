#pragma once

#include <cstddef>

// Dense f64 inner loops used by the encoder, the trainer and trial
// construction. Every kernel has a scalar reference implementation and,
// on x86-64, an AVX2/FMA variant; the active set is picked once at
// startup from CPUID (override with SASV_FORCE_SCALAR=1). SIMD variants
// may differ from the reference in the last ulps because reductions
// reassociate; the equivalence tests bound that difference.

namespace sasv::kern {

struct Ops {
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // sum_i (a[i] - b[i])^2
    double (*dist2)(const double* a, const double* b, std::size_t n);
    // One Adam step over a flat tensor. bc1/bc2 are the bias corrections
    // 1 - beta1^t and 1 - beta2^t for the current step t.
    void (*adam_step)(double* p, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double bc1, double bc2);
    const char* name;
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dist2(const double* a, const double* b, std::size_t n);
void adam_step(double* p, double* m, double* v, const double* g,
               std::size_t n, double lr, double beta1, double beta2,
               double eps, double bc1, double bc2);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SASV_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dist2(const double* a, const double* b, std::size_t n);
void adam_step(double* p, double* m, double* v, const double* g,
               std::size_t n, double lr, double beta1, double beta2,
               double eps, double bc1, double bc2);
}  // namespace avx2
#endif

const Ops& scalar_ops();
#if defined(SASV_HAVE_AVX2_KERNELS)
const Ops& avx2_ops();
bool avx2_available();
#endif

// Runtime-selected implementation.
const Ops& active();
const char* active_name();

inline double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}
inline double dist2(const double* a, const double* b, std::size_t n) {
    return active().dist2(a, b, n);
}
inline void adam_step(double* p, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double bc1, double bc2) {
    active().adam_step(p, m, v, g, n, lr, beta1, beta2, eps, bc1, bc2);
}

}  // namespace sasv::kern
