#include "sasv/scoring.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sasv {

void validate_calibration(const CalibrationParams& p) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c) ||
        !std::isfinite(p.d))
        throw std::invalid_argument("calibration parameters must be finite");
}

TrainPriors::TrainPriors(double tar, double non, double spf)
    : tar_(tar), non_(non), spf_(spf) {
    if (!std::isfinite(tar) || !std::isfinite(non) || !std::isfinite(spf))
        throw std::invalid_argument("training priors must be finite");
    if (!(tar > 0.0) || !(non > 0.0) || !(spf > 0.0))
        throw std::invalid_argument(
            "training priors must be strictly positive (every class present)");
    if (std::fabs(tar + non + spf - 1.0) > 1e-9)
        throw std::invalid_argument("training priors must sum to 1");
}

TrainPriors TrainPriors::from_counts(std::size_t n_tar, std::size_t n_non,
                                     std::size_t n_spf) {
    const std::size_t n = n_tar + n_non + n_spf;
    if (n_tar == 0 || n_non == 0 || n_spf == 0)
        throw std::invalid_argument(
            "training set must contain all three classes");
    const double dn = static_cast<double>(n);
    return TrainPriors(static_cast<double>(n_tar) / dn,
                       static_cast<double>(n_non) / dn,
                       static_cast<double>(n_spf) / dn);
}

TrainPriors TrainPriors::from_trials(const std::vector<Trial>& trials) {
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& t : trials) ++counts[static_cast<std::size_t>(t.label)];
    return from_counts(counts[0], counts[1], counts[2]);
}

ClassLogits adjust_logits(const ClassLogits& s, const TrainPriors& pi_train) {
    validate_logits(s);
    return {s.tar - std::log(pi_train.tar()), s.non - std::log(pi_train.non()),
            s.spf - std::log(pi_train.spf())};
}

double llr_from_logits(const ClassLogits& adjusted, const Priors& priors) {
    validate_logits(adjusted);
    const double rej = priors.non() + priors.spf();
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const double lw_non =
        priors.non() > 0.0 ? std::log(priors.non() / rej) : neg_inf;
    const double lw_spf =
        priors.spf() > 0.0 ? std::log(priors.spf() / rej) : neg_inf;
    const std::pair<double, double> terms[2] = {{lw_non, adjusted.non},
                                                {lw_spf, adjusted.spf}};
    return adjusted.tar - log_sum_exp(terms);
}

double calibrated_llr(const ClassLogits& raw, const CalibrationParams& calib) {
    validate_logits(raw);
    validate_calibration(calib);
    const std::pair<double, double> terms[2] = {
        {0.0, calib.a * raw.non + calib.b}, {0.0, calib.c * raw.spf + calib.d}};
    return raw.tar - log_sum_exp(terms);
}

CalibrationParams reduction_identity_init(const Priors& priors,
                                          const TrainPriors& pi_train) {
    const double rej = priors.non() + priors.spf();
    if (!(priors.non() > 0.0) || !(priors.spf() > 0.0))
        throw std::invalid_argument(
            "reduction-identity initialization needs positive pi_non and "
            "pi_spf");
    CalibrationParams p;
    p.a = 1.0;
    p.b = std::log(priors.non() / rej) - std::log(pi_train.non());
    p.c = 1.0;
    p.d = std::log(priors.spf() / rej) - std::log(pi_train.spf());
    return p;
}

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct DevSummary {
    std::size_t n_tar = 0;
    std::size_t n_rej = 0;
};

DevSummary summarize(const std::vector<std::pair<ClassLogits, TrialClass>>& dev) {
    DevSummary s;
    std::size_t n_non = 0, n_spf = 0;
    for (const auto& [logits, label] : dev) {
        validate_logits(logits);
        switch (label) {
            case TrialClass::Target: ++s.n_tar; break;
            case TrialClass::Nontarget: ++n_non; break;
            case TrialClass::Spoof: ++n_spf; break;
        }
    }
    if (s.n_tar == 0 || n_non == 0 || n_spf == 0)
        throw std::invalid_argument(
            "calibration dev set must contain all three classes");
    s.n_rej = n_non + n_spf;
    return s;
}

}  // namespace

double calibration_loss(
    const std::vector<std::pair<ClassLogits, TrialClass>>& dev,
    const Priors& priors, const CalibrationParams& params) {
    const DevSummary sum = summarize(dev);
    if (!(priors.tar() > 0.0) || !(priors.tar() < 1.0))
        throw std::invalid_argument(
            "calibration objective needs pi_tar in (0, 1)");
    const double tau0 = std::log(priors.tar() / (1.0 - priors.tar()));
    double loss_tar = 0.0, loss_rej = 0.0;
    for (const auto& [logits, label] : dev) {
        const double llr = calibrated_llr(logits, params);
        if (label == TrialClass::Target)
            loss_tar += softplus(-(llr + tau0));
        else
            loss_rej += softplus(llr + tau0);
    }
    return priors.tar() * loss_tar / static_cast<double>(sum.n_tar) +
           (1.0 - priors.tar()) * loss_rej / static_cast<double>(sum.n_rej);
}

CalibrationParams fit_calibration(
    const std::vector<std::pair<ClassLogits, TrialClass>>& dev,
    const Priors& priors, const CalibFitConfig& cfg) {
    if (cfg.iterations == 0 || !(cfg.learning_rate > 0.0))
        throw std::invalid_argument("invalid calibration fit config");
    const DevSummary sum = summarize(dev);
    if (!(priors.tar() > 0.0) || !(priors.tar() < 1.0))
        throw std::invalid_argument(
            "calibration objective needs pi_tar in (0, 1)");

    std::size_t counts[3] = {0, 0, 0};
    for (const auto& [logits, label] : dev)
        ++counts[static_cast<std::size_t>(label)];
    const TrainPriors dev_priors =
        TrainPriors::from_counts(counts[0], counts[1], counts[2]);

    double theta[4];
    {
        const CalibrationParams init = reduction_identity_init(priors, dev_priors);
        theta[0] = init.a;
        theta[1] = init.b;
        theta[2] = init.c;
        theta[3] = init.d;
    }

    const double tau0 = std::log(priors.tar() / (1.0 - priors.tar()));
    const double w_tar = priors.tar() / static_cast<double>(sum.n_tar);
    const double w_rej =
        (1.0 - priors.tar()) / static_cast<double>(sum.n_rej);

    double best_loss = std::numeric_limits<double>::infinity();
    double best[4] = {theta[0], theta[1], theta[2], theta[3]};

    double m[4] = {0, 0, 0, 0};
    double v[4] = {0, 0, 0, 0};
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    for (std::size_t it = 0; it <= cfg.iterations; ++it) {
        double loss = 0.0;
        double g[4] = {0, 0, 0, 0};
        for (const auto& [logits, label] : dev) {
            const double u = theta[0] * logits.non + theta[1];
            const double w = theta[2] * logits.spf + theta[3];
            const double mx = std::max(u, w);
            const double lse = mx + std::log(std::exp(u - mx) + std::exp(w - mx));
            const double llr = logits.tar - lse;
            // d llr / d(u, w) = -softmax(u, w)
            const double pu = sigmoid(u - w);
            double dldllr;
            if (label == TrialClass::Target) {
                loss += w_tar * softplus(-(llr + tau0));
                dldllr = -w_tar * sigmoid(-(llr + tau0));
            } else {
                loss += w_rej * softplus(llr + tau0);
                dldllr = w_rej * sigmoid(llr + tau0);
            }
            const double du = -dldllr * pu;
            const double dw = -dldllr * (1.0 - pu);
            g[0] += du * logits.non;
            g[1] += du;
            g[2] += dw * logits.spf;
            g[3] += dw;
        }
        if (loss < best_loss) {
            best_loss = loss;
            for (int i = 0; i < 4; ++i) best[i] = theta[i];
        }
        if (it == cfg.iterations) break;
        const double t = static_cast<double>(it + 1);
        const double bc1 = 1.0 - std::pow(beta1, t);
        const double bc2 = 1.0 - std::pow(beta2, t);
        for (int i = 0; i < 4; ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            theta[i] -= cfg.learning_rate * (m[i] / bc1) /
                        (std::sqrt(v[i] / bc2) + eps);
        }
    }
    return {best[0], best[1], best[2], best[3]};
}

}  // namespace sasv
