#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "sasv/kernels.hpp"
#include "sasv/synthgen.hpp"

using namespace sasv;

TEST_CASE("degenerate noise: every utterance sits on the speaker mean") {
    SynthConfig cfg;
    cfg.n_speakers = 3;
    cfg.utts_per_speaker = 4;
    cfg.dim = 6;
    cfg.channel_scale = 0.0;
    cfg.n_attacks = 0;
    const Population pop = generate_population(cfg);
    for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
        const auto first = pop.embeddings.row(s * cfg.utts_per_speaker);
        for (std::size_t u = 1; u < cfg.utts_per_speaker; ++u) {
            const auto r = pop.embeddings.row(s * cfg.utts_per_speaker + u);
            CHECK(kern::dist2(first.data(), r.data(), cfg.dim) == 0.0);
        }
    }
}

TEST_CASE("hardest-spoof limit: alpha=1, beta->0, sigma_utt=0 lands on the mean") {
    SynthConfig cfg;
    cfg.n_speakers = 2;
    cfg.utts_per_speaker = 3;
    cfg.dim = 8;
    cfg.channel_scale = 0.0;
    cfg.spoof_fidelity = 1.0;
    cfg.artifact_scale = 1e-30;  // vanishes after f32 quantization
    cfg.n_attacks = 2;
    const Population pop = generate_population(cfg);
    for (const auto& rec : pop.manifest) {
        if (rec.authenticity != Authenticity::Spoof) continue;
        const UtteranceRecord* bona_rec = nullptr;
        for (const auto& r : pop.manifest)
            if (r.speaker_id == rec.speaker_id &&
                r.authenticity == Authenticity::BonaFide) {
                bona_rec = &r;
                break;
            }
        REQUIRE(bona_rec != nullptr);
        const auto spoof_row = pop.embeddings.row(rec.embedding_ref);
        const auto bona_row = pop.embeddings.row(bona_rec->embedding_ref);
        CHECK(kern::dist2(spoof_row.data(), bona_row.data(), cfg.dim) == 0.0);
    }
}

TEST_CASE("determinism: identical seed, identical population") {
    SynthConfig cfg;
    cfg.n_speakers = 5;
    cfg.utts_per_speaker = 4;
    cfg.dim = 16;
    cfg.n_attacks = 3;
    cfg.seed = 42;
    const Population a = generate_population(cfg);
    const Population b = generate_population(cfg);
    REQUIRE(a.manifest.size() == b.manifest.size());
    for (std::size_t i = 0; i < a.manifest.size(); ++i) {
        CHECK(a.manifest[i].utt_id == b.manifest[i].utt_id);
        CHECK(a.manifest[i].speaker_id == b.manifest[i].speaker_id);
        CHECK(a.manifest[i].attack_label == b.manifest[i].attack_label);
        CHECK(a.manifest[i].embedding_ref == b.manifest[i].embedding_ref);
        const auto ra = a.embeddings.row(i);
        const auto rb = b.embeddings.row(i);
        for (std::size_t d = 0; d < cfg.dim; ++d) CHECK(ra[d] == rb[d]);
    }
    cfg.seed = 43;
    const Population c = generate_population(cfg);
    bool any_diff = false;
    for (std::size_t d = 0; d < cfg.dim; ++d)
        if (c.embeddings.row(0)[d] != a.embeddings.row(0)[d]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("between-speaker spread dominates within-speaker spread") {
    SynthConfig cfg;
    cfg.n_speakers = 50;
    cfg.utts_per_speaker = 10;
    cfg.dim = 32;
    cfg.speaker_scale = 1.0;
    cfg.channel_scale = 0.1;
    cfg.n_attacks = 0;
    cfg.seed = 7;
    const Population pop = generate_population(cfg);

    double within = 0.0, between = 0.0;
    std::size_t nw = 0, nb = 0;
    for (std::size_t i = 0; i < pop.manifest.size(); ++i) {
        for (std::size_t j = i + 1; j < pop.manifest.size(); ++j) {
            const auto a = pop.embeddings.row(i);
            const auto b = pop.embeddings.row(j);
            const double d =
                std::sqrt(kern::dist2(a.data(), b.data(), cfg.dim));
            if (pop.manifest[i].speaker_id == pop.manifest[j].speaker_id) {
                within += d;
                ++nw;
            } else {
                between += d;
                ++nb;
            }
        }
    }
    within /= static_cast<double>(nw);
    between /= static_cast<double>(nb);
    CHECK(between > within);
    CHECK(between > 3.0 * within);  // sigma ratio 10 separates decisively
}

TEST_CASE("population structure: genders alternate, attacks labeled, refs valid") {
    SynthConfig cfg;
    cfg.n_speakers = 4;
    cfg.utts_per_speaker = 2;
    cfg.n_attacks = 2;
    cfg.dim = 4;
    const Population pop = generate_population(cfg);
    CHECK(pop.manifest.size() ==
          cfg.n_speakers * (cfg.utts_per_speaker + cfg.n_attacks));
    for (const auto& rec : pop.manifest) {
        CHECK_NOTHROW(validate_record(rec));
        CHECK(rec.embedding_ref < pop.embeddings.size());
        const std::size_t spk_index = std::stoul(rec.speaker_id.substr(3));
        CHECK(rec.gender == (spk_index % 2 == 0 ? Gender::F : Gender::M));
        for (double x : pop.embeddings.row(rec.embedding_ref))
            CHECK(static_cast<double>(static_cast<float>(x)) == x);
    }
    CHECK_NOTHROW(validate_manifest(pop.manifest));
}

TEST_CASE("config validation") {
    SynthConfig cfg;
    cfg.utts_per_speaker = 0;
    cfg.n_attacks = 2;
    CHECK_THROWS_WITH_AS(generate_population(cfg),
                         doctest::Contains("n_attacks"),
                         std::invalid_argument);
    cfg.n_attacks = 0;
    CHECK_THROWS_AS(generate_population(cfg), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.spoof_fidelity = 1.5;
    CHECK_THROWS_AS(generate_population(cfg), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.speaker_scale = 0.0;
    CHECK_THROWS_AS(generate_population(cfg), std::invalid_argument);
}

TEST_CASE("discrete world: uniform two-vector world has 0.5 likelihoods") {
    DiscreteWorldConfig cfg;
    cfg.n_vocab = 2;
    cfg.dim = 2;
    cfg.k_enroll = 1;
    cfg.n_enroll_tuples = 1;
    cfg.uniform = true;
    const DiscreteWorld w = build_discrete_world(cfg);
    REQUIRE(w.n_outcomes() == 2);
    for (std::size_t x = 0; x < 2; ++x) {
        CHECK(w.likelihood(TrialClass::Target, x) == 0.5);
        CHECK(w.likelihood(TrialClass::Nontarget, x) == 0.5);
        CHECK(w.likelihood(TrialClass::Spoof, x) == 0.5);
    }
}

TEST_CASE("discrete world: PMFs normalize and support limits hold") {
    DiscreteWorldConfig cfg;
    cfg.n_vocab = 6;
    cfg.dim = 3;
    cfg.k_enroll = 2;
    cfg.n_enroll_tuples = 10;
    cfg.seed = 5;
    const DiscreteWorld w = build_discrete_world(cfg);
    REQUIRE(w.n_outcomes() == 60);
    for (auto cls :
         {TrialClass::Target, TrialClass::Nontarget, TrialClass::Spoof}) {
        double sum = 0.0;
        for (std::size_t x = 0; x < w.n_outcomes(); ++x) {
            const double p = w.likelihood(cls, x);
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
    }

    DiscreteWorldConfig big;
    big.n_vocab = 1000;
    big.n_enroll_tuples = 200;  // 200k outcomes
    CHECK_THROWS_WITH_AS(build_discrete_world(big),
                         doctest::Contains("too large"),
                         std::invalid_argument);
}

TEST_CASE("discrete world from hand-specified tables matches row by row") {
    // 4 vocabulary vectors, 3 enrollment tuples (one per nominal speaker)
    std::vector<std::vector<double>> vocab{
        {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    std::vector<std::vector<std::size_t>> tuples{{0, 0}, {1, 1}, {2, 2}};
    // 12 outcomes; rows: tuple-major, test-minor
    std::array<std::vector<double>, 3> pmf;
    pmf[0] = {0.30, 0.02, 0.01, 0.01, 0.02, 0.30, 0.01, 0.01,
              0.02, 0.01, 0.28, 0.01};  // target mass on the matching test
    pmf[1] = {0.02, 0.10, 0.10, 0.11, 0.10, 0.02, 0.11, 0.10,
              0.10, 0.11, 0.02, 0.11};  // nontarget spread
    pmf[2] = {0.05, 0.05, 0.05, 0.18, 0.05, 0.05, 0.05, 0.19,
              0.05, 0.05, 0.05, 0.18};  // spoof mass on vector 3
    const DiscreteWorld w = DiscreteWorld::from_tables(vocab, tuples, pmf);
    REQUIRE(w.n_outcomes() == 12);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t x = 0; x < 12; ++x)
            CHECK(w.likelihood(static_cast<TrialClass>(c), x) == pmf[c][x]);

    // misnormalized PMF rejected
    auto bad = pmf;
    bad[1][0] += 0.01;
    CHECK_THROWS_WITH_AS(DiscreteWorld::from_tables(vocab, tuples, bad),
                         doctest::Contains("sum to 1"), std::invalid_argument);
}
