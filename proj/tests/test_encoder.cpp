#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sasv/encoder.hpp"
#include "sasv/rng.hpp"
#include "test_support.hpp"

using namespace sasv;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.next_gaussian();
    return v;
}

AttentionParams random_attention(Rng& rng, std::size_t d, std::size_t h) {
    AttentionParams p;
    p.dim = d;
    p.n_heads = h;
    p.w_q = random_vec(rng, d * d);
    p.w_k = random_vec(rng, d * d);
    p.w_v = random_vec(rng, d * d);
    p.w_o = random_vec(rng, d * d);
    return p;
}

// Straightforward long-double reimplementation, kept independent of the
// library's kernels and loop structure.
std::vector<double> naive_matvec(const std::vector<double>& m,
                                 const std::vector<double>& x) {
    const std::size_t d = x.size();
    std::vector<double> y(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < d; ++j)
            acc += static_cast<long double>(m[i * d + j]) * x[j];
        y[i] = static_cast<double>(acc);
    }
    return y;
}

std::vector<double> naive_cross_attend(
    const std::vector<double>& e_t,
    const std::vector<std::vector<double>>& rows, const AttentionParams& p) {
    const std::size_t d = p.dim;
    const std::size_t hd = d / p.n_heads;
    const auto q = naive_matvec(p.w_q, e_t);
    std::vector<std::vector<double>> k, v;
    for (const auto& r : rows) {
        k.push_back(naive_matvec(p.w_k, r));
        v.push_back(naive_matvec(p.w_v, r));
    }
    std::vector<double> ctx(d, 0.0);
    for (std::size_t h = 0; h < p.n_heads; ++h) {
        std::vector<long double> scores(rows.size(), 0.0L);
        for (std::size_t j = 0; j < rows.size(); ++j) {
            long double acc = 0.0L;
            for (std::size_t i = 0; i < hd; ++i)
                acc += static_cast<long double>(q[h * hd + i]) *
                       k[j][h * hd + i];
            scores[j] = acc / std::sqrt(static_cast<long double>(hd));
        }
        long double z = 0.0L;
        std::vector<long double> w(rows.size());
        const long double mx = *std::max_element(scores.begin(), scores.end());
        for (std::size_t j = 0; j < rows.size(); ++j) {
            w[j] = std::exp(scores[j] - mx);
            z += w[j];
        }
        for (std::size_t i = 0; i < hd; ++i) {
            long double acc = 0.0L;
            for (std::size_t j = 0; j < rows.size(); ++j)
                acc += (w[j] / z) * v[j][h * hd + i];
            ctx[h * hd + i] = static_cast<double>(acc);
        }
    }
    return naive_matvec(p.w_o, ctx);
}

ClassLogits naive_forward(const std::vector<double>& e_t,
                          const std::vector<std::vector<double>>& rows,
                          const EncoderParams& p) {
    const std::size_t d = e_t.size();
    std::vector<double> m(d, 0.0);
    if (p.aggregation == Aggregation::CrossAttention) {
        m = naive_cross_attend(e_t, rows, *p.attn);
    } else {
        for (std::size_t i = 0; i < d; ++i) {
            long double acc = 0.0L;
            for (const auto& r : rows) acc += r[i];
            m[i] = static_cast<double>(acc / rows.size());
        }
    }
    std::vector<double> feats;
    feats.insert(feats.end(), m.begin(), m.end());
    feats.insert(feats.end(), e_t.begin(), e_t.end());
    for (std::size_t i = 0; i < d; ++i) feats.push_back(m[i] * e_t[i]);
    for (std::size_t i = 0; i < d; ++i) feats.push_back(m[i] * m[i]);
    for (std::size_t i = 0; i < d; ++i) feats.push_back(e_t[i] * e_t[i]);
    double out[3];
    for (int c = 0; c < 3; ++c) {
        long double acc = p.head.b[c];
        for (std::size_t i = 0; i < feats.size(); ++i)
            acc += static_cast<long double>(p.head.w[c * feats.size() + i]) *
                   feats[i];
        out[c] = static_cast<double>(acc);
    }
    return {out[0], out[1], out[2]};
}

std::vector<std::span<const double>> spans_of(
    const std::vector<std::vector<double>>& rows) {
    std::vector<std::span<const double>> s;
    for (const auto& r : rows) s.emplace_back(r);
    return s;
}

}  // namespace

TEST_CASE("single enrollment: attention output ignores the query") {
    Rng rng(11);
    const std::size_t d = 8;
    const AttentionParams p = random_attention(rng, d, 2);
    const auto e_r = random_vec(rng, d);
    const auto expected = naive_matvec(p.w_o, naive_matvec(p.w_v, e_r));
    for (int i = 0; i < 5; ++i) {
        const auto e_t = random_vec(rng, d);
        const auto out = cross_attend(e_t, spans_of({e_r}), p);
        for (std::size_t j = 0; j < d; ++j)
            CHECK(out[j] == doctest::Approx(expected[j]).epsilon(1e-12));
    }
}

TEST_CASE("attention is permutation-invariant over enrollment rows") {
    Rng rng(12);
    const std::size_t d = 8;
    const AttentionParams p = random_attention(rng, d, 4);
    std::vector<std::vector<double>> rows;
    for (int j = 0; j < 4; ++j) rows.push_back(random_vec(rng, d));
    const auto e_t = random_vec(rng, d);
    const auto base = cross_attend(e_t, spans_of(rows), p);
    std::vector<std::vector<double>> perm{rows[2], rows[0], rows[3], rows[1]};
    const auto swapped = cross_attend(e_t, spans_of(perm), p);
    for (std::size_t j = 0; j < d; ++j)
        CHECK(swapped[j] == doctest::Approx(base[j]).epsilon(1e-12));
}

TEST_CASE("two-key identity-projection case, hand-computed") {
    AttentionParams p;
    p.dim = 2;
    p.n_heads = 1;
    p.w_q = {1, 0, 0, 1};
    p.w_k = {1, 0, 0, 1};
    p.w_v = {1, 0, 0, 1};
    p.w_o = {1, 0, 0, 1};
    const std::vector<double> e_t{1.0, 0.0};
    const std::vector<std::vector<double>> rows{{1.0, 0.0}, {0.0, 1.0}};
    std::vector<double> weights;
    const auto out = cross_attend(e_t, spans_of(rows), p, &weights);
    // scores = (1/sqrt(2), 0); weights = softmax of those
    REQUIRE(weights.size() == 2);
    CHECK(weights[0] == doctest::Approx(0.66976154932665693).epsilon(1e-14));
    CHECK(weights[1] == doctest::Approx(0.33023845067334307).epsilon(1e-14));
    CHECK(out[0] == doctest::Approx(weights[0]).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx(weights[1]).epsilon(1e-14));
}

TEST_CASE("attention weights are a distribution per head") {
    Rng rng(14);
    const std::size_t d = 12;
    const AttentionParams p = random_attention(rng, d, 3);
    std::vector<std::vector<double>> rows;
    for (int j = 0; j < 5; ++j) rows.push_back(random_vec(rng, d));
    const auto e_t = random_vec(rng, d);
    std::vector<double> weights;
    cross_attend(e_t, spans_of(rows), p, &weights);
    REQUIRE(weights.size() == 3 * 5);
    for (std::size_t h = 0; h < 3; ++h) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(weights[h * 5 + j] >= 0.0);
            sum += weights[h * 5 + j];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("aggregate_concat basics") {
    const std::vector<double> e_t{2.0, 2.0};
    SUBCASE("K = 1 concatenates directly") {
        const std::vector<std::vector<double>> rows{{3.0, -1.0}};
        const auto out = aggregate_concat(e_t, spans_of(rows));
        CHECK(out == std::vector<double>{3.0, -1.0, 2.0, 2.0});
    }
    SUBCASE("identical rows collapse to that row") {
        const std::vector<std::vector<double>> rows{{5.0, 7.0}, {5.0, 7.0},
                                                    {5.0, 7.0}};
        const auto out = aggregate_concat(e_t, spans_of(rows));
        CHECK(out[0] == doctest::Approx(5.0));
        CHECK(out[1] == doctest::Approx(7.0));
    }
    SUBCASE("mean of distinct rows") {
        const std::vector<std::vector<double>> rows{{1.0, 0.0}, {0.0, 1.0}};
        const auto out = aggregate_concat(e_t, spans_of(rows));
        CHECK(out == std::vector<double>{0.5, 0.5, 2.0, 2.0});
    }
}

TEST_CASE("forward: zero head weights pass the bias through") {
    for (auto agg : {Aggregation::CrossAttention, Aggregation::EmbedConcat}) {
        EncoderParams p = init_encoder_params(agg, 6, 2, 5);
        std::fill(p.head.w.begin(), p.head.w.end(), 0.0);
        p.head.b = {1.0, 2.0, 3.0};
        Rng rng(3);
        std::vector<std::vector<double>> rows{random_vec(rng, 6),
                                              random_vec(rng, 6)};
        const auto e_t = random_vec(rng, 6);
        EncoderScratch s;
        const ClassLogits out = forward_rows(e_t, spans_of(rows), p, s);
        CHECK(out.tar == 1.0);
        CHECK(out.non == 2.0);
        CHECK(out.spf == 3.0);
    }
}

TEST_CASE("forward is pure: identical inputs give identical logits") {
    Rng rng(21);
    const EncoderParams p =
        init_encoder_params(Aggregation::CrossAttention, 8, 2, 9);
    std::vector<std::vector<double>> rows{random_vec(rng, 8),
                                          random_vec(rng, 8)};
    const auto e_t = random_vec(rng, 8);
    EncoderScratch s1, s2;
    const ClassLogits a = forward_rows(e_t, spans_of(rows), p, s1);
    const ClassLogits b = forward_rows(e_t, spans_of(rows), p, s2);
    CHECK(a.tar == b.tar);
    CHECK(a.non == b.non);
    CHECK(a.spf == b.spf);
}

TEST_CASE("forward matches an independent dense recomputation") {
    Rng rng(31);
    for (auto agg : {Aggregation::CrossAttention, Aggregation::EmbedConcat}) {
        for (int rep = 0; rep < 10; ++rep) {
            const std::size_t d = 4;
            EncoderParams p = init_encoder_params(agg, d, 2, 100 + rep);
            std::vector<std::vector<double>> rows;
            const std::size_t kk = 1 + rng.next_index(3);
            for (std::size_t j = 0; j < kk; ++j)
                rows.push_back(random_vec(rng, d, 1.5));
            const auto e_t = random_vec(rng, d, 1.5);
            EncoderScratch s;
            const ClassLogits got = forward_rows(e_t, spans_of(rows), p, s);
            const ClassLogits want = naive_forward(e_t, rows, p);
            CHECK(got.tar == doctest::Approx(want.tar).epsilon(1e-12));
            CHECK(got.non == doctest::Approx(want.non).epsilon(1e-12));
            CHECK(got.spf == doctest::Approx(want.spf).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward resolves trial utterances and errors by name") {
    std::vector<UtteranceRecord> manifest{
        test::bona("e1", "spk0", Gender::F, 0),
        test::bona("e2", "spk0", Gender::F, 1),
        test::bona("t", "spk0", Gender::F, 2),
    };
    const EmbeddingStore store = test::ramp_store(3, 4);
    const ManifestIndex index(manifest);
    const EncoderParams p =
        init_encoder_params(Aggregation::EmbedConcat, 4, 1, 5);
    const Trial ok{"t0", {"e1", "e2"}, "t", TrialClass::Target};
    CHECK_NOTHROW(forward(ok, index, store, p));
    const Trial bad{"t1", {"e1", "missing"}, "t", TrialClass::Target};
    CHECK_THROWS_WITH_AS(forward(bad, index, store, p),
                         doctest::Contains("'missing'"),
                         std::invalid_argument);
}

TEST_CASE("logits stay finite over the supported input range") {
    Rng rng(41);
    const EncoderParams p =
        init_encoder_params(Aggregation::CrossAttention, 8, 4, 3);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<std::vector<double>> rows;
        const std::size_t kk = 1 + rng.next_index(4);
        for (std::size_t j = 0; j < kk; ++j)
            rows.push_back(random_vec(rng, 8, 1e3 * rng.next_unit()));
        const auto e_t = random_vec(rng, 8, 1e3 * rng.next_unit());
        EncoderScratch s;
        const ClassLogits out = forward_rows(e_t, spans_of(rows), p, s);
        CHECK(std::isfinite(out.tar));
        CHECK(std::isfinite(out.non));
        CHECK(std::isfinite(out.spf));
    }
}

TEST_CASE("parameter and dimension validation") {
    CHECK_THROWS_AS(init_encoder_params(Aggregation::CrossAttention, 6, 4, 1),
                    std::invalid_argument);  // 6 % 4 != 0
    EncoderParams p = init_encoder_params(Aggregation::CrossAttention, 8, 2, 1);
    CHECK_THROWS_AS(validate_params(p, 16), std::invalid_argument);
    p.attn.reset();
    CHECK_THROWS_AS(validate_params(p, 8), std::invalid_argument);

    Rng rng(5);
    const AttentionParams a = random_attention(rng, 4, 2);
    const auto e_t = random_vec(rng, 6);  // wrong dim
    const auto row = random_vec(rng, 4);
    CHECK_THROWS_AS(cross_attend(e_t, spans_of({row}), a),
                    std::invalid_argument);
    const auto e_ok = random_vec(rng, 4);
    CHECK_THROWS_AS(cross_attend(e_ok, {}, a), std::invalid_argument);
}
