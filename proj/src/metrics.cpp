#include "sasv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace sasv {

void validate_config(const ADCFConfig& cfg) {
    if (!(cfg.c_miss > 0.0) || !(cfg.c_fa_non > 0.0) || !(cfg.c_fa_spf > 0.0))
        throw std::invalid_argument("a-DCF costs must be positive");
}

namespace {

struct ClassScores {
    std::vector<double> tar, non, spf;  // sorted ascending
};

ClassScores split_and_sort(std::span<const ScoreRecord> scores) {
    ClassScores cs;
    for (const auto& rec : scores) {
        validate_score(rec);
        switch (rec.label) {
            case TrialClass::Target: cs.tar.push_back(rec.llr); break;
            case TrialClass::Nontarget: cs.non.push_back(rec.llr); break;
            case TrialClass::Spoof: cs.spf.push_back(rec.llr); break;
        }
    }
    if (cs.tar.empty()) throw std::invalid_argument("no target scores");
    if (cs.non.empty()) throw std::invalid_argument("no nontarget scores");
    if (cs.spf.empty()) throw std::invalid_argument("no spoof scores");
    std::sort(cs.tar.begin(), cs.tar.end());
    std::sort(cs.non.begin(), cs.non.end());
    std::sort(cs.spf.begin(), cs.spf.end());
    return cs;
}

// Shared by a_dcf and the min_a_dcf sweep so both paths produce
// bit-identical costs for the same counts.
double cost_from_counts(std::size_t n_miss, std::size_t n_fa_non,
                        std::size_t n_fa_spf, const ClassScores& cs,
                        const ADCFConfig& cfg) {
    const double p_miss =
        static_cast<double>(n_miss) / static_cast<double>(cs.tar.size());
    const double p_fa_non =
        static_cast<double>(n_fa_non) / static_cast<double>(cs.non.size());
    const double p_fa_spf =
        static_cast<double>(n_fa_spf) / static_cast<double>(cs.spf.size());
    double cost = cfg.c_miss * cfg.priors.tar() * p_miss +
                  cfg.c_fa_non * cfg.priors.non() * p_fa_non +
                  cfg.c_fa_spf * cfg.priors.spf() * p_fa_spf;
    if (cfg.normalize) {
        const double norm =
            std::min(cfg.c_miss * cfg.priors.tar(),
                     cfg.c_fa_non * cfg.priors.non() +
                         cfg.c_fa_spf * cfg.priors.spf());
        cost /= norm;
    }
    return cost;
}

// miss = # targets < tau; fa_x = # class-x >= tau.
double cost_at(const ClassScores& cs, double tau, const ADCFConfig& cfg) {
    auto below = [tau](const std::vector<double>& v) -> std::size_t {
        return static_cast<std::size_t>(
            std::lower_bound(v.begin(), v.end(), tau) - v.begin());
    };
    const std::size_t n_miss = below(cs.tar);
    const std::size_t n_fa_non = cs.non.size() - below(cs.non);
    const std::size_t n_fa_spf = cs.spf.size() - below(cs.spf);
    return cost_from_counts(n_miss, n_fa_non, n_fa_spf, cs, cfg);
}

}  // namespace

double a_dcf(std::span<const ScoreRecord> scores, double tau,
             const ADCFConfig& cfg) {
    validate_config(cfg);
    if (std::isnan(tau)) throw std::invalid_argument("tau must not be NaN");
    const ClassScores cs = split_and_sort(scores);
    return cost_at(cs, tau, cfg);
}

MinADCF min_a_dcf(std::span<const ScoreRecord> scores, const ADCFConfig& cfg) {
    validate_config(cfg);
    const ClassScores cs = split_and_sort(scores);

    std::vector<double> all;
    all.reserve(cs.tar.size() + cs.non.size() + cs.spf.size());
    all.insert(all.end(), cs.tar.begin(), cs.tar.end());
    all.insert(all.end(), cs.non.begin(), cs.non.end());
    all.insert(all.end(), cs.spf.begin(), cs.spf.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> candidates;
    candidates.reserve(all.size() + 1);
    candidates.push_back(-inf);
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        const double mid = all[i] + (all[i + 1] - all[i]) / 2.0;
        candidates.push_back(mid);
    }
    candidates.push_back(inf);
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());

    MinADCF best{inf, -inf};
    for (double tau : candidates) {
        const double cost = cost_at(cs, tau, cfg);
        if (cost <= best.min_cost) {  // ties break toward the larger tau
            best.min_cost = cost;
            best.tau_star = tau;
        }
    }
    return best;
}

ErrorRates error_rates(std::span<const ScoreRecord> scores, double tau) {
    const ClassScores cs = split_and_sort(scores);
    auto below = [tau](const std::vector<double>& v) -> std::size_t {
        return static_cast<std::size_t>(
            std::lower_bound(v.begin(), v.end(), tau) - v.begin());
    };
    ErrorRates r;
    r.p_miss = static_cast<double>(below(cs.tar)) /
               static_cast<double>(cs.tar.size());
    r.p_fa_non = static_cast<double>(cs.non.size() - below(cs.non)) /
                 static_cast<double>(cs.non.size());
    r.p_fa_spf = static_cast<double>(cs.spf.size() - below(cs.spf)) /
                 static_cast<double>(cs.spf.size());
    return r;
}

double bayes_threshold(const Priors& priors) {
    if (!(priors.tar() > 0.0))
        throw std::invalid_argument("bayes threshold needs pi_tar > 0");
    return std::log((priors.non() + priors.spf()) / priors.tar());
}

std::vector<HistogramRow> score_histograms(std::span<const ScoreRecord> scores,
                                           std::size_t n_bins,
                                           bool by_attack) {
    if (scores.empty()) throw std::invalid_argument("no scores to histogram");
    if (n_bins == 0) throw std::invalid_argument("n_bins must be positive");
    for (const auto& rec : scores) validate_score(rec);

    double lo = scores[0].llr, hi = scores[0].llr;
    for (const auto& rec : scores) {
        lo = std::min(lo, rec.llr);
        hi = std::max(hi, rec.llr);
    }
    const double width = hi - lo;

    auto bin_of = [&](double x) -> std::size_t {
        if (width == 0.0) return 0;
        const double t = (x - lo) / width * static_cast<double>(n_bins);
        const std::size_t b = static_cast<std::size_t>(t);
        return std::min(b, n_bins - 1);
    };
    auto edges = [&](std::size_t b) -> std::pair<double, double> {
        const double step = width / static_cast<double>(n_bins);
        return {lo + step * static_cast<double>(b),
                b + 1 == n_bins ? hi : lo + step * static_cast<double>(b + 1)};
    };

    std::vector<HistogramRow> rows;
    auto emit_group = [&](TrialClass cls, const std::string& attack) {
        std::vector<std::size_t> counts(n_bins, 0);
        bool any = false;
        for (const auto& rec : scores) {
            if (rec.label != cls) continue;
            if (!attack.empty() && rec.attack_label != attack) continue;
            ++counts[bin_of(rec.llr)];
            any = true;
        }
        if (!any) return;
        for (std::size_t b = 0; b < n_bins; ++b) {
            const auto [blo, bhi] = edges(b);
            rows.push_back({cls, attack, blo, bhi, counts[b]});
        }
    };

    emit_group(TrialClass::Target, "");
    emit_group(TrialClass::Nontarget, "");
    emit_group(TrialClass::Spoof, "");
    if (by_attack) {
        std::map<std::string, bool> attacks;
        for (const auto& rec : scores)
            if (rec.label == TrialClass::Spoof) attacks[rec.attack_label] = true;
        for (const auto& [attack, _] : attacks)
            emit_group(TrialClass::Spoof, attack);
    }
    return rows;
}

}  // namespace sasv
