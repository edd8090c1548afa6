#include "sasv/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sasv/kernels.hpp"
#include "sasv/rng.hpp"

namespace sasv {

const char* to_string(OptimizerKind o) {
    return o == OptimizerKind::SGD ? "sgd" : "adam";
}

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::SGD;
    if (s == "adam") return OptimizerKind::Adam;
    throw std::invalid_argument("unknown optimizer: '" + s + "'");
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (cfg.batch_size == 0)
        throw std::invalid_argument("batch_size must be positive");
    if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
        throw std::invalid_argument("learning_rate must be non-negative");
    if (cfg.adam_beta1 < 0.0 || cfg.adam_beta1 >= 1.0 || cfg.adam_beta2 < 0.0 ||
        cfg.adam_beta2 >= 1.0 || !(cfg.adam_epsilon > 0.0))
        throw std::invalid_argument("invalid adam parameters");
}

double ce_loss(const ClassLogits& logits, TrialClass label) {
    validate_logits(logits);
    const double s[3] = {logits.tar, logits.non, logits.spf};
    const double m = std::max(s[0], std::max(s[1], s[2]));
    const double lse =
        m + std::log(std::exp(s[0] - m) + std::exp(s[1] - m) + std::exp(s[2] - m));
    return lse - s[static_cast<std::size_t>(label)];
}

namespace {

// Backward through the head's pair features and, for cross-attention,
// through W_o, the per-head softmax and the Q/K/V projections. Embeddings
// are inputs, not parameters, so no gradient flows into the store.
void backward_into(const EncoderParams& p, const ClassLogits& logits,
                   TrialClass label, EncoderScratch& s, EncoderParams& g) {
    const std::size_t d = s.test.size();
    const std::size_t in = p.head.in_dim;

    const double sm[3] = {logits.tar, logits.non, logits.spf};
    const double mx = std::max(sm[0], std::max(sm[1], sm[2]));
    double e0 = std::exp(sm[0] - mx), e1 = std::exp(sm[1] - mx),
           e2 = std::exp(sm[2] - mx);
    const double z = e0 + e1 + e2;
    double g_s[3] = {e0 / z, e1 / z, e2 / z};
    g_s[static_cast<std::size_t>(label)] -= 1.0;

    // Head: dW = g_s outer feats, db = g_s, g_feats = W^T g_s.
    s.g_feats.assign(in, 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        kern::axpy(g_s[i], s.feats.data(), g.head.w.data() + i * in, in);
        g.head.b[i] += g_s[i];
        kern::axpy(g_s[i], p.head.w.data() + i * in, s.g_feats.data(), in);
    }

    // Pair features [m; e; m*e; m*m; e*e]: only the m-dependent blocks
    // carry gradient upstream.
    s.g_m.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        s.g_m[i] = s.g_feats[i] + s.g_feats[2 * d + i] * s.test[i] +
                   2.0 * s.g_feats[3 * d + i] * s.m[i];
    }

    if (p.aggregation != Aggregation::CrossAttention) return;

    const auto& a = *p.attn;
    auto& ga = *g.attn;
    const std::size_t kk = s.rows.size();
    const std::size_t hd = d / a.n_heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));

    // m = W_o ctx.
    s.g_ctx.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        kern::axpy(s.g_m[i], s.ctx.data(), ga.w_o.data() + i * d, d);
        kern::axpy(s.g_m[i], a.w_o.data() + i * d, s.g_ctx.data(), d);
    }

    s.g_q.assign(d, 0.0);
    s.g_k.assign(kk * d, 0.0);
    s.g_v.assign(kk * d, 0.0);
    s.g_w.resize(kk);
    s.g_z.resize(kk);

    for (std::size_t h = 0; h < a.n_heads; ++h) {
        const std::size_t off = h * hd;
        const double* w = s.attw.data() + h * kk;

        // ctx_h = sum_j w_j v_{j,h}
        double dot_wg = 0.0;
        for (std::size_t j = 0; j < kk; ++j) {
            s.g_w[j] = kern::dot(s.g_ctx.data() + off, s.v.data() + j * d + off, hd);
            kern::axpy(w[j], s.g_ctx.data() + off, s.g_v.data() + j * d + off, hd);
            dot_wg += w[j] * s.g_w[j];
        }
        // softmax backward
        for (std::size_t j = 0; j < kk; ++j)
            s.g_z[j] = w[j] * (s.g_w[j] - dot_wg);
        // scores z_j = q_h . k_{j,h} / sqrt(hd)
        for (std::size_t j = 0; j < kk; ++j) {
            const double gz = s.g_z[j] * inv_sqrt;
            kern::axpy(gz, s.k.data() + j * d + off, s.g_q.data() + off, hd);
            kern::axpy(gz, s.q.data() + off, s.g_k.data() + j * d + off, hd);
        }
    }

    // q = W_q e_t; k_j = W_k e_rj; v_j = W_v e_rj.
    for (std::size_t i = 0; i < d; ++i)
        kern::axpy(s.g_q[i], s.test.data(), ga.w_q.data() + i * d, d);
    for (std::size_t j = 0; j < kk; ++j) {
        const double* row = s.rows[j].data();
        for (std::size_t i = 0; i < d; ++i) {
            kern::axpy(s.g_k[j * d + i], row, ga.w_k.data() + i * d, d);
            kern::axpy(s.g_v[j * d + i], row, ga.w_v.data() + i * d, d);
        }
    }
}

void gather_rows(const Trial& trial, const ManifestIndex& index,
                 const EmbeddingStore& store,
                 std::vector<std::span<const double>>& rows) {
    rows.clear();
    for (const auto& id : trial.enroll_ids)
        rows.push_back(store.row(index.embedding_ref(id)));
}

}  // namespace

double accumulate_grad(const Trial& trial, const ManifestIndex& index,
                       const EmbeddingStore& store, const EncoderParams& params,
                       EncoderScratch& scratch, EncoderParams& grad_accum) {
    gather_rows(trial, index, store, scratch.rows);
    const auto e_t = store.row(index.embedding_ref(trial.test_id));
    // forward_rows copies rows into scratch; pass the gathered set.
    std::vector<std::span<const double>> rows = scratch.rows;
    const ClassLogits logits = forward_rows(e_t, rows, params, scratch);
    const double loss = ce_loss(logits, trial.label);
    backward_into(params, logits, trial.label, scratch, grad_accum);
    return loss;
}

std::pair<double, EncoderParams> grad(const Trial& trial,
                                      const ManifestIndex& index,
                                      const EmbeddingStore& store,
                                      const EncoderParams& params) {
    EncoderParams g = zeros_like(params);
    EncoderScratch scratch;
    const double loss =
        accumulate_grad(trial, index, store, params, scratch, g);
    return {loss, std::move(g)};
}

namespace {

struct AdamState {
    std::vector<std::vector<double>> m, v;
    std::size_t t = 0;
};

void scale_tensors(EncoderParams& g, double factor) {
    for_each_tensor(g, [&](std::vector<double>& t) {
        for (double& x : t) x *= factor;
    });
}

void zero_tensors(EncoderParams& g) {
    for_each_tensor(g, [](std::vector<double>& t) {
        std::fill(t.begin(), t.end(), 0.0);
    });
}

}  // namespace

TrainResult train(const std::vector<Trial>& trials, const ManifestIndex& index,
                  const EmbeddingStore& store, const EncoderParams& init,
                  const TrainConfig& cfg) {
    validate_config(cfg);
    if (trials.empty()) throw std::invalid_argument("empty trial list");
    validate_params(init, store.dim());

    EncoderParams params = init;
    EncoderParams grads = zeros_like(init);
    EncoderScratch scratch;

    AdamState adam;
    if (cfg.optimizer == OptimizerKind::Adam) {
        for_each_tensor(params, [&](std::vector<double>& t) {
            adam.m.emplace_back(t.size(), 0.0);
            adam.v.emplace_back(t.size(), 0.0);
        });
    }

    // Tensor pointers stay valid: parameter vectors are never resized.
    std::vector<std::vector<double>*> pv, gv;
    for_each_tensor(params, [&](std::vector<double>& t) { pv.push_back(&t); });
    for_each_tensor(grads, [&](std::vector<double>& t) { gv.push_back(&t); });

    std::vector<std::size_t> order(trials.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    result.loss_curve.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            std::iota(order.begin(), order.end(), 0);
            Rng rng(cfg.seed + epoch);
            rng.shuffle(order);
        }
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size, ++batch_index) {
            const std::size_t end =
                std::min(start + cfg.batch_size, order.size());
            zero_tensors(grads);
            double batch_loss = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                batch_loss += accumulate_grad(trials[order[i]], index, store,
                                              params, scratch, grads);
            }
            if (!std::isfinite(batch_loss))
                throw std::runtime_error(
                    "training diverged at epoch " + std::to_string(epoch) +
                    " batch " + std::to_string(batch_index) +
                    " (non-finite loss)");
            epoch_loss += batch_loss;
            const double inv_n = 1.0 / static_cast<double>(end - start);
            scale_tensors(grads, inv_n);

            if (cfg.optimizer == OptimizerKind::SGD) {
                for (std::size_t k = 0; k < pv.size(); ++k)
                    kern::axpy(-cfg.learning_rate, gv[k]->data(),
                               pv[k]->data(), pv[k]->size());
            } else {
                ++adam.t;
                const double bc1 =
                    1.0 - std::pow(cfg.adam_beta1,
                                   static_cast<double>(adam.t));
                const double bc2 =
                    1.0 - std::pow(cfg.adam_beta2,
                                   static_cast<double>(adam.t));
                for (std::size_t k = 0; k < pv.size(); ++k)
                    kern::adam_step(pv[k]->data(), adam.m[k].data(),
                                    adam.v[k].data(), gv[k]->data(),
                                    pv[k]->size(), cfg.learning_rate,
                                    cfg.adam_beta1, cfg.adam_beta2,
                                    cfg.adam_epsilon, bc1, bc2);
            }
        }
        result.loss_curve.push_back(epoch_loss /
                                    static_cast<double>(order.size()));
    }
    result.params = std::move(params);
    return result;
}

}  // namespace sasv
