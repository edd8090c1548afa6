#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sasv {

enum class Gender { F, M, Unknown };
enum class Authenticity { BonaFide, Spoof };
enum class TrialClass { Target = 0, Nontarget = 1, Spoof = 2 };

const char* to_string(Gender g);
const char* to_string(Authenticity a);
const char* to_string(TrialClass c);
Gender gender_from_string(const std::string& s);
Authenticity authenticity_from_string(const std::string& s);
TrialClass trial_class_from_string(const std::string& s);

// One utterance of a manifest. attack_label is non-empty exactly when the
// utterance is spoofed; for spoofs, speaker_id names the attacked speaker.
struct UtteranceRecord {
    std::string utt_id;
    std::string speaker_id;
    Gender gender = Gender::Unknown;
    Authenticity authenticity = Authenticity::BonaFide;
    std::string attack_label;  // empty iff bona fide
    std::size_t embedding_ref = 0;
};

void validate_record(const UtteranceRecord& rec);
// Per-record validation plus utt_id uniqueness.
void validate_manifest(const std::vector<UtteranceRecord>& manifest);

// One decision unit: K enrollment utterances of one speaker plus a test.
struct Trial {
    std::string trial_id;
    std::vector<std::string> enroll_ids;
    std::string test_id;
    TrialClass label = TrialClass::Target;
};

// Evaluation priors over {target, nontarget, spoof}. Validated: each in
// [0,1], sum to 1 within 1e-9, and pi_non + pi_spf > 0 (the rejection
// hypothesis must have positive prior).
class Priors {
public:
    Priors(double tar, double non, double spf);
    double tar() const { return tar_; }
    double non() const { return non_; }
    double spf() const { return spf_; }
    // ASVspoof5 evaluation priors.
    static Priors asvspoof5_eval() { return Priors(0.9405, 0.0095, 0.0500); }

private:
    double tar_, non_, spf_;
};

struct ClassLogits {
    double tar = 0.0;
    double non = 0.0;
    double spf = 0.0;
};

// Throws unless all components are finite.
void validate_logits(const ClassLogits& s);

// Per-trial evaluation unit: LLR plus ground truth.
struct ScoreRecord {
    std::string trial_id;
    TrialClass label = TrialClass::Target;
    std::string attack_label;  // non-empty iff label == Spoof
    double llr = 0.0;
};

void validate_score(const ScoreRecord& rec);

// Lookup from utt_id to manifest record; validates the manifest on
// construction.
class ManifestIndex {
public:
    explicit ManifestIndex(const std::vector<UtteranceRecord>& manifest);
    // Throws naming the utterance when unresolved.
    const UtteranceRecord& record(const std::string& utt_id) const;
    std::size_t embedding_ref(const std::string& utt_id) const {
        return record(utt_id).embedding_ref;
    }

private:
    const std::vector<UtteranceRecord>* manifest_;
    std::vector<std::pair<std::string, std::size_t>> sorted_;  // utt_id -> pos
};

// log sum_j exp(log_weight_j + value_j), max-subtraction stabilized.
// log_weights may be -inf (the term drops out); values must be finite.
double log_sum_exp(std::span<const std::pair<double, double>> terms);

// Softmax over finite logits; positive entries summing to 1.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace sasv
