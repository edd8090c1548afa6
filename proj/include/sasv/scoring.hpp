#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sasv/core.hpp"

namespace sasv {

// Calibrated LLR parameters:
//   llr = s_tar - log(exp(a*s_non + b) + exp(c*s_spf + d)).
struct CalibrationParams {
    double a = 1.0;
    double b = 0.0;
    double c = 1.0;
    double d = 0.0;
};

void validate_calibration(const CalibrationParams& p);

// Empirical class frequencies of a training trial set; every class must be
// present (strictly positive).
class TrainPriors {
public:
    TrainPriors(double tar, double non, double spf);
    static TrainPriors from_counts(std::size_t n_tar, std::size_t n_non,
                                   std::size_t n_spf);
    static TrainPriors from_trials(const std::vector<Trial>& trials);
    double tar() const { return tar_; }
    double non() const { return non_; }
    double spf() const { return spf_; }

private:
    double tar_, non_, spf_;
};

// s'_i = s_i - log pi_train_i.
ClassLogits adjust_logits(const ClassLogits& s, const TrainPriors& pi_train);

// Prior-weighted LLR over adjusted logits:
//   llr = s'_tar - log( w_non e^{s'_non} + w_spf e^{s'_spf} ),
// with w_x = pi_x / (pi_non + pi_spf). Computed in the log domain.
double llr_from_logits(const ClassLogits& adjusted, const Priors& priors);

double calibrated_llr(const ClassLogits& raw, const CalibrationParams& calib);

// The parameters for which calibrated_llr(s) equals
// llr_from_logits(adjust_logits(s), priors) + log pi_train_tar:
//   a = c = 1, b = log w_non - log pi_train_non,
//             d = log w_spf - log pi_train_spf.
CalibrationParams reduction_identity_init(const Priors& priors,
                                          const TrainPriors& pi_train);

struct CalibFitConfig {
    std::size_t iterations = 2000;
    double learning_rate = 0.01;
};

// Fits (a, b, c, d) by minimizing the prior-weighted binary cross-entropy
// of the accept posterior sigmoid(llr + logit(pi_tar)) against the binary
// accept/reject label (reject = nontarget or spoof). Full-batch Adam from
// the reduction-identity initialization (training priors measured from the
// dev labels); returns the best-loss iterate, so the result never scores
// worse than the initialization on the dev objective. Deterministic.
CalibrationParams fit_calibration(
    const std::vector<std::pair<ClassLogits, TrialClass>>& dev,
    const Priors& priors, const CalibFitConfig& cfg = {});

// Dev-set value of the calibration objective for a fixed parameter set.
double calibration_loss(
    const std::vector<std::pair<ClassLogits, TrialClass>>& dev,
    const Priors& priors, const CalibrationParams& params);

}  // namespace sasv
