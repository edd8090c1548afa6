#include "sasv/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace sasv {

void validate_config(const SynthConfig& cfg) {
    if (cfg.n_speakers == 0)
        throw std::invalid_argument("n_speakers must be positive");
    if (cfg.utts_per_speaker == 0) {
        if (cfg.n_attacks > 0)
            throw std::invalid_argument(
                "n_attacks > 0 requires utts_per_speaker >= 1 (spoofs target "
                "speakers that must have bona-fide utterances)");
        throw std::invalid_argument("utts_per_speaker must be positive");
    }
    if (cfg.dim == 0) throw std::invalid_argument("dim must be positive");
    if (!(cfg.speaker_scale > 0.0))
        throw std::invalid_argument("speaker_scale must be positive");
    if (!(cfg.channel_scale >= 0.0))
        throw std::invalid_argument("channel_scale must be non-negative");
    if (cfg.spoof_fidelity < 0.0 || cfg.spoof_fidelity > 1.0)
        throw std::invalid_argument("spoof_fidelity must lie in [0, 1]");
    if (!(cfg.artifact_scale > 0.0))
        throw std::invalid_argument("artifact_scale must be positive");
}

namespace {

std::string speaker_name(std::size_t s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "spk%03zu", s);
    return buf;
}

std::string attack_name(std::size_t a) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "A%02zu", a + 1);
    return buf;
}

void fill_gaussian(Rng& rng, std::vector<double>& v) {
    for (double& x : v) x = rng.next_gaussian();
}

// Quantize to f32 precision so the binary store round-trips losslessly.
void quantize_row(std::vector<double>& v) {
    for (double& x : v) x = static_cast<double>(static_cast<float>(x));
}

}  // namespace

Population generate_population(const SynthConfig& cfg) {
    validate_config(cfg);
    Rng rng(cfg.seed);
    const std::size_t d = cfg.dim;

    // Draw order is part of the determinism contract: speaker means,
    // then attack directions, then bona-fide rows, then spoof rows.
    std::vector<std::vector<double>> means(cfg.n_speakers,
                                           std::vector<double>(d));
    for (auto& mu : means) {
        fill_gaussian(rng, mu);
        for (double& x : mu) x *= cfg.speaker_scale;
    }

    std::vector<std::vector<double>> attack_dirs(cfg.n_attacks,
                                                 std::vector<double>(d));
    for (auto& dir : attack_dirs) {
        fill_gaussian(rng, dir);
        double norm = 0.0;
        for (double x : dir) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) norm = 1.0;
        for (double& x : dir) x /= norm;
    }

    Population pop{std::vector<UtteranceRecord>{}, EmbeddingStore(d)};
    pop.manifest.reserve(cfg.n_speakers * (cfg.utts_per_speaker + cfg.n_attacks));

    std::vector<double> row(d);
    for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
        const Gender g = (s % 2 == 0) ? Gender::F : Gender::M;
        for (std::size_t u = 0; u < cfg.utts_per_speaker; ++u) {
            fill_gaussian(rng, row);
            for (std::size_t i = 0; i < d; ++i)
                row[i] = means[s][i] + cfg.channel_scale * row[i];
            quantize_row(row);
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%s_utt%03zu",
                          speaker_name(s).c_str(), u);
            pop.manifest.push_back({buf, speaker_name(s), g,
                                    Authenticity::BonaFide, "",
                                    pop.embeddings.size()});
            pop.embeddings.append(row);
        }
    }
    for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
        const Gender g = (s % 2 == 0) ? Gender::F : Gender::M;
        for (std::size_t a = 0; a < cfg.n_attacks; ++a) {
            fill_gaussian(rng, row);
            for (std::size_t i = 0; i < d; ++i)
                row[i] = cfg.spoof_fidelity * means[s][i] +
                         cfg.artifact_scale * attack_dirs[a][i] +
                         cfg.channel_scale * row[i];
            quantize_row(row);
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%s_spf_%s",
                          speaker_name(s).c_str(), attack_name(a).c_str());
            pop.manifest.push_back({buf, speaker_name(s), g,
                                    Authenticity::Spoof, attack_name(a),
                                    pop.embeddings.size()});
            pop.embeddings.append(row);
        }
    }
    return pop;
}

DiscreteWorld DiscreteWorld::from_tables(
    std::vector<std::vector<double>> vocab,
    std::vector<std::vector<std::size_t>> enroll_tuples,
    std::array<std::vector<double>, 3> pmf) {
    if (vocab.empty()) throw std::invalid_argument("empty vocabulary");
    const std::size_t d = vocab[0].size();
    if (d == 0) throw std::invalid_argument("vocabulary vectors must be non-empty");
    for (const auto& v : vocab) {
        if (v.size() != d)
            throw std::invalid_argument("inconsistent vocabulary dims");
        for (double x : v)
            if (!std::isfinite(x))
                throw std::invalid_argument("non-finite vocabulary entry");
    }
    if (enroll_tuples.empty())
        throw std::invalid_argument("need at least one enrollment tuple");
    for (const auto& t : enroll_tuples) {
        if (t.empty())
            throw std::invalid_argument("enrollment tuples must be non-empty");
        for (std::size_t id : t)
            if (id >= vocab.size())
                throw std::invalid_argument("enrollment tuple references "
                                            "out-of-range vocabulary entry");
    }
    const std::size_t n_outcomes = enroll_tuples.size() * vocab.size();
    if (n_outcomes > kMaxOutcomes)
        throw std::invalid_argument(
            "discrete world support too large: " + std::to_string(n_outcomes) +
            " outcomes exceeds " + std::to_string(kMaxOutcomes));
    for (const auto& p : pmf) {
        if (p.size() != n_outcomes)
            throw std::invalid_argument("PMF size does not match outcome count");
        double sum = 0.0;
        for (double x : p) {
            if (!(x >= 0.0) || !std::isfinite(x))
                throw std::invalid_argument("PMF entries must be in [0, 1]");
            sum += x;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("PMF must sum to 1 (tolerance 1e-9)");
    }
    DiscreteWorld w;
    w.vocab_ = std::move(vocab);
    w.tuples_ = std::move(enroll_tuples);
    w.pmf_ = std::move(pmf);
    return w;
}

double DiscreteWorld::likelihood(TrialClass c, std::size_t outcome) const {
    const auto& p = pmf_[static_cast<std::size_t>(c)];
    if (outcome >= p.size())
        throw std::out_of_range("outcome index out of range");
    return p[outcome];
}

ClassLogits DiscreteWorld::log_likelihoods(std::size_t outcome) const {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    ClassLogits out;
    const double pt = likelihood(TrialClass::Target, outcome);
    const double pn = likelihood(TrialClass::Nontarget, outcome);
    const double ps = likelihood(TrialClass::Spoof, outcome);
    out.tar = pt > 0.0 ? std::log(pt) : neg_inf;
    out.non = pn > 0.0 ? std::log(pn) : neg_inf;
    out.spf = ps > 0.0 ? std::log(ps) : neg_inf;
    return out;
}

std::size_t DiscreteWorld::sample_outcome(TrialClass c, Rng& rng) const {
    const auto& p = pmf_[static_cast<std::size_t>(c)];
    const double u = rng.next_unit();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return i;
    }
    return p.size() - 1;
}

DiscreteWorld build_discrete_world(const DiscreteWorldConfig& cfg) {
    if (cfg.n_vocab == 0 || cfg.dim == 0 || cfg.k_enroll == 0 ||
        cfg.n_enroll_tuples == 0)
        throw std::invalid_argument("discrete world config fields must be positive");
    const std::size_t n_outcomes = cfg.n_enroll_tuples * cfg.n_vocab;
    if (n_outcomes > DiscreteWorld::kMaxOutcomes)
        throw std::invalid_argument(
            "discrete world support too large: " + std::to_string(n_outcomes) +
            " outcomes exceeds " +
            std::to_string(DiscreteWorld::kMaxOutcomes));

    Rng rng(cfg.seed);
    std::vector<std::vector<double>> vocab(cfg.n_vocab,
                                           std::vector<double>(cfg.dim));
    for (auto& v : vocab)
        for (double& x : v) x = rng.next_gaussian();

    std::vector<std::vector<std::size_t>> tuples(
        cfg.n_enroll_tuples, std::vector<std::size_t>(cfg.k_enroll));
    for (auto& t : tuples)
        for (std::size_t& id : t) id = rng.next_index(cfg.n_vocab);

    std::array<std::vector<double>, 3> pmf;
    for (auto& p : pmf) {
        p.assign(n_outcomes, 1.0 / static_cast<double>(n_outcomes));
        if (!cfg.uniform) {
            double sum = 0.0;
            for (double& x : p) {
                x = std::exp(rng.next_gaussian());
                sum += x;
            }
            for (double& x : p) x /= sum;
        }
    }
    return DiscreteWorld::from_tables(std::move(vocab), std::move(tuples),
                                      std::move(pmf));
}

}  // namespace sasv
