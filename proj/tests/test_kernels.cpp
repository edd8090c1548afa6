#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "sasv/kernels.hpp"
#include "sasv/rng.hpp"

using namespace sasv;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.next_gaussian();
    return v;
}

// long double accumulation as the reference for the reductions
long double dot_ld(const std::vector<double>& a, const std::vector<double>& b) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
    return acc;
}

}  // namespace

TEST_CASE("scalar kernels match long-double references") {
    Rng rng(101);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 33u,
                          100u, 1000u}) {
        auto a = random_vec(rng, n);
        auto b = random_vec(rng, n);
        const double d = kern::scalar::dot(a.data(), b.data(), n);
        const long double ref = dot_ld(a, b);
        CHECK(std::fabs(d - static_cast<double>(ref)) <=
              1e-13 * (1.0 + std::fabs(static_cast<double>(ref))) * (n + 1));

        auto y = random_vec(rng, n);
        auto y_ref = y;
        kern::scalar::axpy(0.75, a.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i) y_ref[i] += 0.75 * a[i];
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == y_ref[i]);

        const double dd = kern::scalar::dist2(a.data(), b.data(), n);
        long double rr = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            const long double t = static_cast<long double>(a[i]) - b[i];
            rr += t * t;
        }
        CHECK(std::fabs(dd - static_cast<double>(rr)) <=
              1e-13 * (1.0 + static_cast<double>(rr)) * (n + 1));
    }
}

#if defined(SASV_HAVE_AVX2_KERNELS)
TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (!kern::avx2_available()) return;
    Rng rng(202);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 9u, 15u, 16u,
                          17u, 31u, 32u, 33u, 100u, 257u, 1000u}) {
        auto a = random_vec(rng, n, 2.0);
        auto b = random_vec(rng, n, 2.0);

        const double ds = kern::scalar::dot(a.data(), b.data(), n);
        const double dv = kern::avx2::dot(a.data(), b.data(), n);
        CHECK(std::fabs(ds - dv) <=
              1e-12 * (1.0 + std::fabs(ds)) * (n + 1));

        auto ys = random_vec(rng, n);
        auto yv = ys;
        kern::scalar::axpy(-1.25, a.data(), ys.data(), n);
        kern::avx2::axpy(-1.25, a.data(), yv.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::fabs(ys[i] - yv[i]) <= 1e-14 * (1.0 + std::fabs(ys[i])));

        const double es = kern::scalar::dist2(a.data(), b.data(), n);
        const double ev = kern::avx2::dist2(a.data(), b.data(), n);
        CHECK(std::fabs(es - ev) <= 1e-12 * (1.0 + es) * (n + 1));

        // Adam step equivalence
        auto p_s = random_vec(rng, n);
        auto p_v = p_s;
        auto m_s = random_vec(rng, n, 0.1);
        auto m_v = m_s;
        auto v_s = random_vec(rng, n, 0.0);
        for (double& x : v_s) x = std::fabs(x) + 0.01;
        auto v_v = v_s;
        auto g = random_vec(rng, n);
        kern::scalar::adam_step(p_s.data(), m_s.data(), v_s.data(), g.data(),
                                n, 1e-3, 0.9, 0.999, 1e-8, 0.5, 0.25);
        kern::avx2::adam_step(p_v.data(), m_v.data(), v_v.data(), g.data(), n,
                              1e-3, 0.9, 0.999, 1e-8, 0.5, 0.25);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::fabs(p_s[i] - p_v[i]) <=
                  1e-13 * (1.0 + std::fabs(p_s[i])));
            CHECK(std::fabs(m_s[i] - m_v[i]) <=
                  1e-13 * (1.0 + std::fabs(m_s[i])));
            CHECK(std::fabs(v_s[i] - v_v[i]) <=
                  1e-13 * (1.0 + std::fabs(v_s[i])));
        }
    }
}
#endif

TEST_CASE("dispatch selects a named implementation") {
    const char* name = kern::active_name();
    REQUIRE(name != nullptr);
    const bool known = std::strcmp(name, "scalar") == 0 ||
                       std::strcmp(name, "avx2") == 0;
    CHECK(known);
    // dispatched result matches the implementation it names
    std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> b{0.5, -1.0, 2.0, 0.0, 1.0};
    const double d = kern::dot(a.data(), b.data(), a.size());
    CHECK(d == kern::active().dot(a.data(), b.data(), a.size()));
}
