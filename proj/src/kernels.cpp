#include "sasv/kernels.hpp"

#include <cmath>
#include <cstdlib>

namespace sasv::kern {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dist2(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void adam_step(double* p, double* m, double* v, const double* g,
               std::size_t n, double lr, double beta1, double beta2,
               double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace scalar

const Ops& scalar_ops() {
    static const Ops ops{scalar::dot, scalar::axpy, scalar::dist2,
                         scalar::adam_step, "scalar"};
    return ops;
}

#if defined(SASV_HAVE_AVX2_KERNELS)
const Ops& avx2_ops() {
    static const Ops ops{avx2::dot, avx2::axpy, avx2::dist2, avx2::adam_step,
                         "avx2"};
    return ops;
}

bool avx2_available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

namespace {

const Ops& select() {
    const char* force = std::getenv("SASV_FORCE_SCALAR");
    if (force != nullptr && force[0] != '\0' && force[0] != '0')
        return scalar_ops();
#if defined(SASV_HAVE_AVX2_KERNELS)
    if (avx2_available()) return avx2_ops();
#endif
    return scalar_ops();
}

}  // namespace

const Ops& active() {
    static const Ops& ops = select();
    return ops;
}

const char* active_name() { return active().name; }

}  // namespace sasv::kern
