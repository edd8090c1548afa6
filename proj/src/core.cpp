#include "sasv/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace sasv {

const char* to_string(Gender g) {
    switch (g) {
        case Gender::F: return "F";
        case Gender::M: return "M";
        default: return "U";
    }
}

const char* to_string(Authenticity a) {
    return a == Authenticity::BonaFide ? "bonafide" : "spoof";
}

const char* to_string(TrialClass c) {
    switch (c) {
        case TrialClass::Target: return "target";
        case TrialClass::Nontarget: return "nontarget";
        default: return "spoof";
    }
}

Gender gender_from_string(const std::string& s) {
    if (s == "F") return Gender::F;
    if (s == "M") return Gender::M;
    if (s == "U") return Gender::Unknown;
    throw std::invalid_argument("unknown gender: '" + s + "'");
}

Authenticity authenticity_from_string(const std::string& s) {
    if (s == "bonafide") return Authenticity::BonaFide;
    if (s == "spoof") return Authenticity::Spoof;
    throw std::invalid_argument("unknown authenticity: '" + s + "'");
}

TrialClass trial_class_from_string(const std::string& s) {
    if (s == "target") return TrialClass::Target;
    if (s == "nontarget") return TrialClass::Nontarget;
    if (s == "spoof") return TrialClass::Spoof;
    throw std::invalid_argument("unknown trial class: '" + s + "'");
}

void validate_record(const UtteranceRecord& rec) {
    if (rec.utt_id.empty())
        throw std::invalid_argument("utterance with empty utt_id");
    if (rec.speaker_id.empty())
        throw std::invalid_argument("utterance '" + rec.utt_id +
                                    "' has empty speaker_id");
    const bool spoofed = rec.authenticity == Authenticity::Spoof;
    if (spoofed && rec.attack_label.empty())
        throw std::invalid_argument("spoof utterance '" + rec.utt_id +
                                    "' missing attack_label");
    if (!spoofed && !rec.attack_label.empty())
        throw std::invalid_argument("bona-fide utterance '" + rec.utt_id +
                                    "' carries attack_label '" +
                                    rec.attack_label + "'");
}

void validate_manifest(const std::vector<UtteranceRecord>& manifest) {
    std::unordered_set<std::string> seen;
    seen.reserve(manifest.size());
    for (const auto& rec : manifest) {
        validate_record(rec);
        if (!seen.insert(rec.utt_id).second)
            throw std::invalid_argument("duplicate utt_id '" + rec.utt_id +
                                        "' in manifest");
    }
}

Priors::Priors(double tar, double non, double spf)
    : tar_(tar), non_(non), spf_(spf) {
    if (!std::isfinite(tar) || !std::isfinite(non) || !std::isfinite(spf))
        throw std::invalid_argument("priors must be finite");
    if (tar < 0.0 || tar > 1.0 || non < 0.0 || non > 1.0 || spf < 0.0 ||
        spf > 1.0)
        throw std::invalid_argument("priors must lie in [0, 1]");
    if (std::fabs(tar + non + spf - 1.0) > 1e-9)
        throw std::invalid_argument("priors must sum to 1 (tolerance 1e-9)");
    if (non + spf <= 0.0)
        throw std::invalid_argument(
            "rejection prior pi_non + pi_spf must be positive");
}

void validate_logits(const ClassLogits& s) {
    if (!std::isfinite(s.tar) || !std::isfinite(s.non) || !std::isfinite(s.spf))
        throw std::invalid_argument("class logits must be finite");
}

void validate_score(const ScoreRecord& rec) {
    if (!std::isfinite(rec.llr))
        throw std::invalid_argument("score for trial '" + rec.trial_id +
                                    "' is not finite");
    const bool spoofed = rec.label == TrialClass::Spoof;
    if (spoofed && rec.attack_label.empty())
        throw std::invalid_argument("spoof score '" + rec.trial_id +
                                    "' missing attack_label");
    if (!spoofed && !rec.attack_label.empty())
        throw std::invalid_argument("non-spoof score '" + rec.trial_id +
                                    "' carries attack_label");
}

ManifestIndex::ManifestIndex(const std::vector<UtteranceRecord>& manifest)
    : manifest_(&manifest) {
    validate_manifest(manifest);
    sorted_.reserve(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i)
        sorted_.emplace_back(manifest[i].utt_id, i);
    std::sort(sorted_.begin(), sorted_.end());
}

const UtteranceRecord& ManifestIndex::record(const std::string& utt_id) const {
    auto it = std::lower_bound(
        sorted_.begin(), sorted_.end(), utt_id,
        [](const auto& a, const std::string& b) { return a.first < b; });
    if (it == sorted_.end() || it->first != utt_id)
        throw std::invalid_argument("utterance '" + utt_id +
                                    "' not found in manifest");
    return (*manifest_)[it->second];
}

double log_sum_exp(std::span<const std::pair<double, double>> terms) {
    if (terms.empty()) throw std::invalid_argument("empty log-sum-exp");
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& [lw, v] : terms) {
        if (!std::isfinite(v))
            throw std::invalid_argument("log-sum-exp value must be finite");
        if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity())
            throw std::invalid_argument(
                "log-sum-exp weight must be finite or -inf");
        m = std::max(m, lw + v);
    }
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double sum = 0.0;
    for (const auto& [lw, v] : terms) {
        const double t = lw + v;
        if (t == -std::numeric_limits<double>::infinity()) continue;
        sum += std::exp(t - m);
    }
    return m + std::log(sum);
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("empty softmax");
    double m = -std::numeric_limits<double>::infinity();
    for (double x : logits) {
        if (!std::isfinite(x))
            throw std::invalid_argument("softmax input must be finite");
        m = std::max(m, x);
    }
    std::vector<double> out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        z += out[i];
    }
    for (double& x : out) x /= z;
    return out;
}

}  // namespace sasv
