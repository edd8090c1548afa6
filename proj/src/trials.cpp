#include "sasv/trials.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "sasv/kernels.hpp"
#include "sasv/rng.hpp"

namespace sasv {

const char* to_string(SamplingStrategy s) {
    return s == SamplingStrategy::Random ? "random" : "hard_pair";
}

SamplingStrategy strategy_from_string(const std::string& s) {
    if (s == "random") return SamplingStrategy::Random;
    if (s == "hard_pair") return SamplingStrategy::HardPair;
    throw std::invalid_argument("unknown sampling strategy: '" + s + "'");
}

namespace {

struct SpeakerPool {
    std::string speaker_id;
    Gender gender = Gender::Unknown;
    std::vector<std::size_t> bona;   // manifest indices, sorted by utt_id
    std::vector<std::size_t> spoof;  // manifest indices, sorted by utt_id
};

std::string trial_name(char prefix, std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%c%06zu", prefix, i);
    return buf;
}

void centroid_of(const std::vector<std::size_t>& rows,
                 const std::vector<UtteranceRecord>& manifest,
                 const EmbeddingStore& store, std::vector<double>& out) {
    out.assign(store.dim(), 0.0);
    for (std::size_t idx : rows) {
        auto r = store.row(manifest[idx].embedding_ref);
        kern::axpy(1.0, r.data(), out.data(), out.size());
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& x : out) x *= inv;
}

}  // namespace

std::vector<Trial> build_trials(const std::vector<UtteranceRecord>& manifest,
                                const EmbeddingStore& store,
                                const TrialBuildConfig& cfg) {
    if (cfg.n_per_class == 0)
        throw std::invalid_argument("n_per_class must be positive");
    if (cfg.k_enroll == 0)
        throw std::invalid_argument("k_enroll must be positive");
    validate_manifest(manifest);
    for (const auto& rec : manifest) {
        if (rec.embedding_ref >= store.size())
            throw std::invalid_argument("utterance '" + rec.utt_id +
                                        "' references missing embedding row");
    }

    // std::map keeps speaker visitation in sorted order for determinism.
    std::map<std::string, SpeakerPool> pools;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& rec = manifest[i];
        auto& pool = pools[rec.speaker_id];
        pool.speaker_id = rec.speaker_id;
        if (rec.authenticity == Authenticity::BonaFide) {
            pool.gender = rec.gender;  // gender is carried by bona-fide records
            pool.bona.push_back(i);
        } else {
            pool.spoof.push_back(i);
        }
    }
    auto by_utt_id = [&](std::size_t a, std::size_t b) {
        return manifest[a].utt_id < manifest[b].utt_id;
    };
    for (auto& [id, pool] : pools) {
        std::sort(pool.bona.begin(), pool.bona.end(), by_utt_id);
        std::sort(pool.spoof.begin(), pool.spoof.end(), by_utt_id);
    }

    std::vector<const SpeakerPool*> eligible;
    const SpeakerPool* deficient = nullptr;
    for (const auto& [id, pool] : pools) {
        if (pool.bona.size() >= cfg.k_enroll + 1)
            eligible.push_back(&pool);
        else if (deficient == nullptr && !pool.bona.empty())
            deficient = &pool;
    }
    if (eligible.size() < 2) {
        if (deficient != nullptr)
            throw std::invalid_argument(
                "speaker '" + deficient->speaker_id + "' has " +
                std::to_string(deficient->bona.size()) +
                " bona-fide utterances, need at least " +
                std::to_string(cfg.k_enroll + 1) +
                " for enrollment plus test");
        throw std::invalid_argument(
            "need at least 2 speakers with k_enroll + 1 bona-fide utterances");
    }
    if (cfg.n_per_class < eligible.size())
        throw std::invalid_argument(
            "n_per_class (" + std::to_string(cfg.n_per_class) +
            ") is below the number of eligible speakers (" +
            std::to_string(eligible.size()) +
            "); full speaker coverage impossible");

    std::vector<std::size_t> all_spoof;
    std::vector<std::size_t> all_bona;
    for (const auto& [id, pool] : pools) {
        all_spoof.insert(all_spoof.end(), pool.spoof.begin(), pool.spoof.end());
        all_bona.insert(all_bona.end(), pool.bona.begin(), pool.bona.end());
    }
    std::sort(all_spoof.begin(), all_spoof.end(), by_utt_id);
    std::sort(all_bona.begin(), all_bona.end(), by_utt_id);
    if (all_spoof.empty())
        throw std::invalid_argument(
            "manifest contains no spoofed utterances; spoof trials impossible");

    const bool hard = cfg.strategy == SamplingStrategy::HardPair;
    if (hard) {
        bool any_gender = false;
        for (const auto& [id, pool] : pools)
            if (pool.gender != Gender::Unknown) any_gender = true;
        if (!any_gender)
            throw std::invalid_argument(
                "hard-pair strategy requires gender metadata");
    }

    Rng rng(cfg.seed);

    // Target trials: one pass over all eligible speakers (shuffled), then
    // uniform speaker draws.
    std::vector<const SpeakerPool*> order = eligible;
    rng.shuffle(order);

    std::vector<Trial> targets;
    targets.reserve(cfg.n_per_class);
    std::vector<std::vector<double>> centroids(cfg.n_per_class);
    std::vector<const SpeakerPool*> enrolled(cfg.n_per_class);
    std::vector<double> centroid;
    for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
        const SpeakerPool* pool =
            i < order.size() ? order[i] : eligible[rng.next_index(eligible.size())];
        std::vector<std::size_t> utts = pool->bona;
        rng.shuffle(utts);
        std::vector<std::size_t> enroll(utts.begin(),
                                        utts.begin() + cfg.k_enroll);
        std::sort(enroll.begin(), enroll.end(), by_utt_id);
        std::vector<std::size_t> rest(utts.begin() + cfg.k_enroll, utts.end());
        std::sort(rest.begin(), rest.end(), by_utt_id);

        centroid_of(enroll, manifest, store, centroid);

        std::size_t test_idx;
        if (hard) {
            // Farthest remaining utterance from the enrollment centroid.
            double best = -1.0;
            test_idx = rest.front();
            for (std::size_t idx : rest) {
                auto r = store.row(manifest[idx].embedding_ref);
                const double d =
                    kern::dist2(r.data(), centroid.data(), centroid.size());
                if (d > best) {
                    best = d;
                    test_idx = idx;
                }
            }
        } else {
            test_idx = rest[rng.next_index(rest.size())];
        }

        Trial t;
        t.trial_id = trial_name('t', i);
        for (std::size_t idx : enroll) t.enroll_ids.push_back(manifest[idx].utt_id);
        t.test_id = manifest[test_idx].utt_id;
        t.label = TrialClass::Target;
        targets.push_back(std::move(t));
        centroids[i] = centroid;
        enrolled[i] = pool;
    }

    // Nontarget trials, conditioned on the i-th target enrollment.
    std::vector<Trial> nontargets;
    nontargets.reserve(cfg.n_per_class);
    for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
        const SpeakerPool* pool = enrolled[i];
        std::size_t test_idx = manifest.size();
        if (hard) {
            if (pool->gender == Gender::Unknown)
                throw std::invalid_argument(
                    "hard-pair nontarget for speaker '" + pool->speaker_id +
                    "' impossible: enrollment speaker gender unknown");
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t idx : all_bona) {
                const auto& rec = manifest[idx];
                if (rec.speaker_id == pool->speaker_id) continue;
                if (rec.gender != pool->gender) continue;
                auto r = store.row(rec.embedding_ref);
                const double d = kern::dist2(r.data(), centroids[i].data(),
                                             centroids[i].size());
                if (d < best) {
                    best = d;
                    test_idx = idx;
                }
            }
            if (test_idx == manifest.size())
                throw std::invalid_argument(
                    "hard-pair nontarget for speaker '" + pool->speaker_id +
                    "' impossible: no same-gender impostor candidates");
        } else {
            std::size_t own = 0;
            for (std::size_t idx : all_bona)
                if (manifest[idx].speaker_id == pool->speaker_id) ++own;
            const std::size_t n_others = all_bona.size() - own;
            std::size_t r = rng.next_index(n_others);
            for (std::size_t idx : all_bona) {
                if (manifest[idx].speaker_id == pool->speaker_id) continue;
                if (r == 0) {
                    test_idx = idx;
                    break;
                }
                --r;
            }
        }
        Trial t;
        t.trial_id = trial_name('n', i);
        t.enroll_ids = targets[i].enroll_ids;
        t.test_id = manifest[test_idx].utt_id;
        t.label = TrialClass::Nontarget;
        nontargets.push_back(std::move(t));
    }

    // Spoof trials, conditioned on the i-th target enrollment.
    std::vector<Trial> spoofs;
    spoofs.reserve(cfg.n_per_class);
    for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
        const SpeakerPool* pool = enrolled[i];
        const std::vector<std::size_t>& cands =
            pool->spoof.empty() ? all_spoof : pool->spoof;
        const std::size_t test_idx = cands[rng.next_index(cands.size())];
        Trial t;
        t.trial_id = trial_name('s', i);
        t.enroll_ids = targets[i].enroll_ids;
        t.test_id = manifest[test_idx].utt_id;
        t.label = TrialClass::Spoof;
        spoofs.push_back(std::move(t));
    }

    std::vector<Trial> out;
    out.reserve(3 * cfg.n_per_class);
    for (auto& t : targets) out.push_back(std::move(t));
    for (auto& t : nontargets) out.push_back(std::move(t));
    for (auto& t : spoofs) out.push_back(std::move(t));
    return out;
}

}  // namespace sasv
