#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sasv/core.hpp"
#include "sasv/embedding_store.hpp"

namespace sasv {

// Multi-head cross-attention parameters. All matrices are dim x dim,
// row-major; projections carry no bias. dim must be divisible by n_heads.
struct AttentionParams {
    std::size_t dim = 0;
    std::size_t n_heads = 1;
    std::vector<double> w_q, w_k, w_v, w_o;
};

// Linear classification head: 3 x in_dim weights plus a 3-vector bias.
struct HeadParams {
    std::size_t in_dim = 0;
    std::vector<double> w;
    std::vector<double> b;
};

enum class Aggregation { CrossAttention, EmbedConcat };

const char* to_string(Aggregation a);
Aggregation aggregation_from_string(const std::string& s);

struct EncoderParams {
    Aggregation aggregation = Aggregation::CrossAttention;
    std::optional<AttentionParams> attn;  // present iff CrossAttention
    HeadParams head;
};

void validate_params(const EncoderParams& p, std::size_t dim);

// The head consumes pairwise interaction features of the aggregated
// enrollment representation m and the test embedding e:
//   [ m ; e ; m*e ; m*m ; e*e ]   (elementwise products)
// so the linear head can express dot products and squared distances
// between test and enrollment. A head acting on m alone cannot: the test
// utterance reaches m only through attention weights, which are invariant
// to everything the keys share.
std::size_t head_input_dim(std::size_t dim);
void pair_features(std::span<const double> m, std::span<const double> e,
                   std::vector<double>& out);

// Scaled dot-product multi-head cross-attention: query = test embedding,
// keys = values = enrollment rows. Returns the fused dim-vector. When
// attn_weights is non-null it receives the per-head softmax weights,
// row-major n_heads x K.
std::vector<double> cross_attend(
    std::span<const double> e_t,
    const std::vector<std::span<const double>>& enroll_rows,
    const AttentionParams& p, std::vector<double>* attn_weights = nullptr);

// [ mean of enrollment rows ; e_t ], a 2*dim vector.
std::vector<double> aggregate_concat(
    std::span<const double> e_t,
    const std::vector<std::span<const double>>& enroll_rows);

// Intermediates of one forward pass, reusable across trials. Exposed so
// the trainer can run the hand-derived backward pass without
// recomputation.
struct EncoderScratch {
    std::vector<std::span<const double>> rows;  // enrollment rows
    std::span<const double> test;
    std::vector<double> q;      // dim
    std::vector<double> k, v;   // K x dim, flat
    std::vector<double> attw;   // n_heads x K
    std::vector<double> ctx;    // dim (heads concatenated)
    std::vector<double> m;      // aggregated representation
    std::vector<double> feats;  // head input
    // backward workspace
    std::vector<double> g_feats, g_m, g_ctx, g_q, g_k, g_v, g_w, g_z;
};

// Forward pass given pre-gathered rows; fills the scratch intermediates.
ClassLogits forward_rows(std::span<const double> e_t,
                         const std::vector<std::span<const double>>& rows,
                         const EncoderParams& p, EncoderScratch& s);

// Resolves the trial's utterances and runs the forward pass.
ClassLogits forward(const Trial& trial, const ManifestIndex& index,
                    const EmbeddingStore& store, const EncoderParams& p);

// Gaussian init, entry scale 1/sqrt(fan_in), zero biases, seeded.
EncoderParams init_encoder_params(Aggregation agg, std::size_t dim,
                                  std::size_t n_heads, std::uint64_t seed);

// Same-shape zero structure, used as a gradient accumulator.
EncoderParams zeros_like(const EncoderParams& p);

// Visits every tensor in a fixed order (w_q, w_k, w_v, w_o, head.w,
// head.b); params, gradients and optimizer state all iterate identically.
template <class P, class F>
void for_each_tensor(P& p, F&& f) {
    if (p.attn) {
        f(p.attn->w_q);
        f(p.attn->w_k);
        f(p.attn->w_v);
        f(p.attn->w_o);
    }
    f(p.head.w);
    f(p.head.b);
}

}  // namespace sasv
