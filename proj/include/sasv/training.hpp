#pragma once

#include <cstdint>
#include <vector>

#include "sasv/core.hpp"
#include "sasv/embedding_store.hpp"
#include "sasv/encoder.hpp"

namespace sasv {

enum class OptimizerKind { SGD, Adam };

const char* to_string(OptimizerKind o);
OptimizerKind optimizer_from_string(const std::string& s);

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    bool shuffle = true;
};

void validate_config(const TrainConfig& cfg);

// -log softmax(logits)[label], via stable log-sum-exp.
double ce_loss(const ClassLogits& logits, TrialClass label);

// Analytic gradient of ce_loss(forward(trial)) with respect to every
// parameter tensor. Returns (loss, gradients); gradients mirror the
// parameter structure. Verified against central finite differences in the
// test suite.
std::pair<double, EncoderParams> grad(const Trial& trial,
                                      const ManifestIndex& index,
                                      const EmbeddingStore& store,
                                      const EncoderParams& params);

// Scratch-reusing variant: accumulates the trial's gradient into
// grad_accum (same structure as params) and returns the loss.
double accumulate_grad(const Trial& trial, const ManifestIndex& index,
                       const EmbeddingStore& store, const EncoderParams& params,
                       EncoderScratch& scratch, EncoderParams& grad_accum);

struct TrainResult {
    EncoderParams params;
    std::vector<double> loss_curve;  // one mean loss per epoch
};

// Mini-batch training with batch gradient = mean of per-trial gradients.
// Epoch e shuffles with seed cfg.seed + e. Deterministic; throws
// "training diverged ..." when the loss goes non-finite.
TrainResult train(const std::vector<Trial>& trials, const ManifestIndex& index,
                  const EmbeddingStore& store, const EncoderParams& init,
                  const TrainConfig& cfg);

}  // namespace sasv
