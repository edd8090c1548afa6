#pragma once

#include <span>
#include <string>
#include <vector>

#include "sasv/core.hpp"

namespace sasv {

// a-DCF configuration. Cost and normalization defaults follow the
// ASVspoof5 convention: C_miss = 1, C_fa,non = C_fa,spf = 10, and the
// normalizer is the better of the two trivial systems,
// min(c_miss*pi_tar, c_fa_non*pi_non + c_fa_spf*pi_spf).
struct ADCFConfig {
    Priors priors = Priors::asvspoof5_eval();
    double c_miss = 1.0;
    double c_fa_non = 10.0;
    double c_fa_spf = 10.0;
    bool normalize = true;
};

void validate_config(const ADCFConfig& cfg);

// cost(tau) = c_miss*pi_tar*P_miss + c_fa_non*pi_non*P_fa_non
//           + c_fa_spf*pi_spf*P_fa_spf, with P_miss the fraction of target
// scores < tau and P_fa_x the fraction of class-x scores >= tau (ties
// accept). All three classes must be present.
double a_dcf(std::span<const ScoreRecord> scores, double tau,
             const ADCFConfig& cfg);

struct MinADCF {
    double min_cost;
    double tau_star;
};

// Exact minimum over all thresholds: the candidate set is -inf, the
// midpoints between consecutive distinct scores, and +inf, which covers
// every achievable decision rule. Cost ties break toward the larger tau.
MinADCF min_a_dcf(std::span<const ScoreRecord> scores, const ADCFConfig& cfg);

// LLR threshold implied by matched priors and unit costs.
double bayes_threshold(const Priors& priors);

struct ErrorRates {
    double p_miss;
    double p_fa_non;
    double p_fa_spf;
};

// Per-class error rates at a fixed threshold (ties accept).
ErrorRates error_rates(std::span<const ScoreRecord> scores, double tau);

struct HistogramRow {
    TrialClass cls;
    std::string attack;  // empty for class-level rows
    double bin_lo;
    double bin_hi;
    std::size_t count;
};

// Per-class score histograms over the shared range [min score, max score];
// when by_attack, additional per-attack rows for the spoof class.
std::vector<HistogramRow> score_histograms(std::span<const ScoreRecord> scores,
                                           std::size_t n_bins, bool by_attack);

}  // namespace sasv
