#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sasv/core.hpp"
#include "sasv/rng.hpp"

using namespace sasv;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double lse(std::vector<std::pair<double, double>> terms) {
    return log_sum_exp(terms);
}

// long double reference; valid as long as exp() stays inside long double
// range, which covers every case exercised here.
long double lse_ld(const std::vector<std::pair<double, double>>& terms) {
    long double sum = 0.0L;
    for (const auto& [lw, v] : terms)
        sum += std::exp(static_cast<long double>(lw) + v);
    return std::log(sum);
}
}  // namespace

TEST_CASE("log_sum_exp basics") {
    CHECK(lse({{0.0, 0.0}}) == 0.0);

    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const double x = 10.0 * rng.next_gaussian();
        const double w = std::log(0.5);
        CHECK(std::fabs(lse({{w, x}, {w, x}}) - x) <= 1e-12 * (1 + std::fabs(x)));
    }

    // naive exp would overflow; long double handles exp(1000) directly
    const double big = lse({{0.0, 1000.0}, {0.0, 1000.0}});
    const long double ref = lse_ld({{0.0, 1000.0}, {0.0, 1000.0}});
    CHECK(std::fabs(big - static_cast<double>(ref)) < 1e-12 * 1000.0);
    CHECK(big == doctest::Approx(1000.6931471805599453).epsilon(1e-15));
}

TEST_CASE("log_sum_exp edge cases and errors") {
    CHECK_THROWS_AS(lse({}), std::invalid_argument);
    // -inf log-weight drops the term
    CHECK(lse({{-kInf, 5.0}, {0.0, 2.0}}) == 2.0);
    // all -inf weights: total mass zero
    CHECK(lse({{-kInf, 1.0}, {-kInf, 2.0}}) == -kInf);
    CHECK_THROWS_AS(lse({{0.0, kInf}}), std::invalid_argument);
    CHECK_THROWS_AS(lse({{0.0, std::nan("")}}), std::invalid_argument);
    CHECK_THROWS_AS(lse({{kInf, 0.0}}), std::invalid_argument);
}

TEST_CASE("log_sum_exp stays finite over large magnitudes") {
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        std::vector<std::pair<double, double>> terms;
        const int n = 1 + static_cast<int>(rng.next_index(6));
        for (int j = 0; j < n; ++j)
            terms.push_back({rng.next_gaussian(),
                             2e6 * (rng.next_unit() - 0.5)});
        CHECK(std::isfinite(log_sum_exp(terms)));
    }
}

TEST_CASE("softmax symmetry, shift invariance and a frozen oracle value") {
    const std::vector<double> thirds = softmax(std::vector<double>{0, 0, 0});
    for (double p : thirds) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-15));

    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> a(3);
        for (double& x : a) x = 5.0 * rng.next_gaussian();
        const double c = 20.0 * (rng.next_unit() - 0.5);
        std::vector<double> b = a;
        for (double& x : b) x += c;
        const auto pa = softmax(a), pb = softmax(b);
        double sum = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(pa[k] > 0.0);
            CHECK(std::fabs(pa[k] - pb[k]) <= 1e-12);
            sum += pa[k];
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }

    // high-precision evaluation of softmax(1.0, -0.5, 0.2)
    const auto p = softmax(std::vector<double>{1.0, -0.5, 0.2});
    CHECK(p[0] == doctest::Approx(0.59792193751765570).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.13341441767457397).epsilon(1e-14));
    CHECK(p[2] == doctest::Approx(0.26866364480777033).epsilon(1e-14));

    CHECK_THROWS_AS(softmax(std::vector<double>{1.0, kInf}),
                    std::invalid_argument);
    CHECK_THROWS_AS(softmax(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("priors constructor accepts exactly the valid simplex") {
    CHECK_NOTHROW(Priors(0.9405, 0.0095, 0.0500));
    const Priors p = Priors::asvspoof5_eval();
    CHECK(p.tar() == 0.9405);
    CHECK(p.non() == 0.0095);
    CHECK(p.spf() == 0.0500);

    CHECK_THROWS_AS(Priors(1.0, 0.0, 0.0), std::invalid_argument);  // rejection prior zero
    CHECK_THROWS_AS(Priors(0.5, 0.5, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Priors(0.9405, 0.0095, 0.05 + 3e-9), std::invalid_argument);
    CHECK_THROWS_AS(Priors(-0.1, 0.6, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Priors(0.5, kInf, 0.5), std::invalid_argument);

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        double a = rng.next_unit_pos(), b = rng.next_unit_pos(),
               c = rng.next_unit_pos();
        const double z = a + b + c;
        CHECK_NOTHROW(Priors(a / z, b / z, c / z));
        CHECK_THROWS_AS(Priors(a / z + 0.01, b / z, c / z),
                        std::invalid_argument);
    }
}

TEST_CASE("utterance and manifest validation") {
    auto ok_bona = UtteranceRecord{"u1", "s1", Gender::F,
                                   Authenticity::BonaFide, "", 0};
    auto ok_spoof = UtteranceRecord{"u2", "s1", Gender::F, Authenticity::Spoof,
                                    "A01", 1};
    CHECK_NOTHROW(validate_record(ok_bona));
    CHECK_NOTHROW(validate_record(ok_spoof));

    auto bad1 = ok_bona;
    bad1.attack_label = "A01";
    CHECK_THROWS_WITH_AS(validate_record(bad1),
                         doctest::Contains("carries attack_label"),
                         std::invalid_argument);
    auto bad2 = ok_spoof;
    bad2.attack_label.clear();
    CHECK_THROWS_WITH_AS(validate_record(bad2),
                         doctest::Contains("missing attack_label"),
                         std::invalid_argument);

    std::vector<UtteranceRecord> dup{ok_bona, ok_bona};
    CHECK_THROWS_WITH_AS(validate_manifest(dup), doctest::Contains("duplicate"),
                         std::invalid_argument);
}

TEST_CASE("manifest index resolves and errors by name") {
    std::vector<UtteranceRecord> manifest{
        {"a", "s1", Gender::F, Authenticity::BonaFide, "", 7},
        {"b", "s1", Gender::F, Authenticity::BonaFide, "", 9}};
    ManifestIndex index(manifest);
    CHECK(index.embedding_ref("a") == 7);
    CHECK(index.embedding_ref("b") == 9);
    CHECK_THROWS_WITH_AS(index.record("zz"), doctest::Contains("'zz'"),
                         std::invalid_argument);
}

TEST_CASE("score record validation ties attack to the spoof class") {
    const ScoreRecord ok_tar{"t1", TrialClass::Target, "", 0.5};
    const ScoreRecord ok_spf{"s1", TrialClass::Spoof, "A01", -2.0};
    const ScoreRecord bad_attack{"t1", TrialClass::Target, "A01", 0.5};
    const ScoreRecord bad_missing{"s1", TrialClass::Spoof, "", 0.5};
    const ScoreRecord bad_inf{"t1", TrialClass::Target, "", kInf};
    CHECK_NOTHROW(validate_score(ok_tar));
    CHECK_NOTHROW(validate_score(ok_spf));
    CHECK_THROWS_AS(validate_score(bad_attack), std::invalid_argument);
    CHECK_THROWS_AS(validate_score(bad_missing), std::invalid_argument);
    CHECK_THROWS_AS(validate_score(bad_inf), std::invalid_argument);
}
