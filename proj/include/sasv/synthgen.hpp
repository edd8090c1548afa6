#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sasv/core.hpp"
#include "sasv/embedding_store.hpp"
#include "sasv/rng.hpp"

namespace sasv {

// Synthetic population generator. Stands in for an audio embedding
// extractor: speaker means are isotropic Gaussian draws at speaker_scale,
// bona-fide utterances add isotropic noise at channel_scale, and a spoof
// for attack a against speaker s sits at
//   spoof_fidelity * mu_s + artifact_scale * delta_a + noise,
// with delta_a a fixed unit direction per attack. One spoof utterance is
// generated per (speaker, attack) pair.
struct SynthConfig {
    std::size_t n_speakers = 50;
    std::size_t utts_per_speaker = 10;
    std::size_t dim = 32;
    double speaker_scale = 1.0;   // sigma_spk
    double channel_scale = 0.1;   // sigma_utt
    std::size_t n_attacks = 6;
    double spoof_fidelity = 0.3;  // alpha in [0,1]
    double artifact_scale = 5.0;  // beta > 0
    std::uint64_t seed = 7;
};

void validate_config(const SynthConfig& cfg);

struct Population {
    std::vector<UtteranceRecord> manifest;
    EmbeddingStore embeddings;
};

// Deterministic for a given config; embeddings are quantized to f32
// precision so the binary store format round-trips bit-exactly. Genders
// alternate F/M by speaker index.
Population generate_population(const SynthConfig& cfg);

// Finite generative world with exactly enumerable class-conditional
// likelihoods. An outcome is (enrollment tuple, test vocabulary entry);
// each trial class carries an explicit PMF over outcomes. Used to verify
// Bayes-optimality of LLR thresholding by brute force.
struct DiscreteWorldConfig {
    std::size_t n_vocab = 4;
    std::size_t dim = 2;
    std::size_t k_enroll = 1;
    std::size_t n_enroll_tuples = 1;  // tuples drawn uniformly from vocab^k
    bool uniform = false;             // uniform PMFs instead of random ones
    std::uint64_t seed = 1;
};

class DiscreteWorld {
public:
    static constexpr std::size_t kMaxOutcomes = 100000;

    // Validates shapes and that each PMF sums to 1 within 1e-9.
    static DiscreteWorld from_tables(
        std::vector<std::vector<double>> vocab,
        std::vector<std::vector<std::size_t>> enroll_tuples,
        std::array<std::vector<double>, 3> pmf);

    std::size_t dim() const { return vocab_.empty() ? 0 : vocab_[0].size(); }
    std::size_t n_vocab() const { return vocab_.size(); }
    std::size_t n_outcomes() const { return pmf_[0].size(); }
    const std::vector<std::vector<std::size_t>>& enroll_tuples() const {
        return tuples_;
    }
    const std::vector<std::vector<double>>& vocab() const { return vocab_; }

    // P(outcome | class) straight from the table.
    double likelihood(TrialClass c, std::size_t outcome) const;
    // (log P(x|tar), log P(x|non), log P(x|spf)); -inf where mass is zero.
    ClassLogits log_likelihoods(std::size_t outcome) const;

    // Inverse-CDF sample of an outcome under P(. | class).
    std::size_t sample_outcome(TrialClass c, Rng& rng) const;

private:
    DiscreteWorld() = default;
    std::vector<std::vector<double>> vocab_;
    std::vector<std::vector<std::size_t>> tuples_;
    std::array<std::vector<double>, 3> pmf_;
};

// Random small world; throws when the outcome count would exceed
// DiscreteWorld::kMaxOutcomes.
DiscreteWorld build_discrete_world(const DiscreteWorldConfig& cfg);

}  // namespace sasv
