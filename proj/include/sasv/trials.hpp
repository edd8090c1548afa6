#pragma once

#include <cstdint>
#include <vector>

#include "sasv/core.hpp"
#include "sasv/embedding_store.hpp"

namespace sasv {

enum class SamplingStrategy { Random, HardPair };

const char* to_string(SamplingStrategy s);
SamplingStrategy strategy_from_string(const std::string& s);

struct TrialBuildConfig {
    std::size_t n_per_class = 100;
    std::size_t k_enroll = 3;
    SamplingStrategy strategy = SamplingStrategy::Random;
    std::uint64_t seed = 0;
};

// Builds a balanced three-class trial set (n_per_class each).
//
// Targets: enrollment = k_enroll distinct bona-fide utterances of one
// speaker, sampled so that every speaker with at least k_enroll + 1
// bona-fide utterances is enrolled at least once (full coverage). Under
// HardPair the test is the speaker's remaining utterance farthest from the
// enrollment centroid; under Random it is drawn uniformly.
//
// Nontarget and spoof trials reuse the i-th target trial's enrollment.
// Nontargets: Random draws any other speaker's bona-fide utterance;
// HardPair restricts to same-gender speakers and picks the candidate
// closest to the enrollment centroid. Spoofs: a spoofed utterance whose
// attacked speaker is the enrolled speaker when one exists, otherwise any
// spoofed utterance, drawn uniformly.
//
// Distance ties break toward the lexicographically smaller utt_id.
// Deterministic for a given (manifest, store, config).
std::vector<Trial> build_trials(const std::vector<UtteranceRecord>& manifest,
                                const EmbeddingStore& store,
                                const TrialBuildConfig& cfg);

}  // namespace sasv
