#include "sasv/encoder.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sasv/kernels.hpp"
#include "sasv/rng.hpp"

namespace sasv {

const char* to_string(Aggregation a) {
    return a == Aggregation::CrossAttention ? "cross_attention" : "embed_concat";
}

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "cross_attention") return Aggregation::CrossAttention;
    if (s == "embed_concat") return Aggregation::EmbedConcat;
    throw std::invalid_argument("unknown aggregation: '" + s + "'");
}

std::size_t head_input_dim(std::size_t dim) { return 5 * dim; }

void validate_params(const EncoderParams& p, std::size_t dim) {
    if (p.aggregation == Aggregation::CrossAttention) {
        if (!p.attn)
            throw std::invalid_argument(
                "cross-attention aggregation requires attention parameters");
        const auto& a = *p.attn;
        if (a.dim != dim)
            throw std::invalid_argument("attention dim mismatch");
        if (a.n_heads == 0 || a.dim % a.n_heads != 0)
            throw std::invalid_argument("dim must be divisible by n_heads");
        const std::size_t n = a.dim * a.dim;
        if (a.w_q.size() != n || a.w_k.size() != n || a.w_v.size() != n ||
            a.w_o.size() != n)
            throw std::invalid_argument("attention matrices must be dim x dim");
    } else if (p.attn) {
        throw std::invalid_argument(
            "embed-concat aggregation must not carry attention parameters");
    }
    if (p.head.in_dim != head_input_dim(dim))
        throw std::invalid_argument("head input dim mismatch");
    if (p.head.w.size() != 3 * p.head.in_dim || p.head.b.size() != 3)
        throw std::invalid_argument("head tensor shapes invalid");
}

void pair_features(std::span<const double> m, std::span<const double> e,
                   std::vector<double>& out) {
    const std::size_t d = m.size();
    if (e.size() != d) throw std::invalid_argument("pair feature dim mismatch");
    out.resize(5 * d);
    for (std::size_t i = 0; i < d; ++i) {
        out[i] = m[i];
        out[d + i] = e[i];
        out[2 * d + i] = m[i] * e[i];
        out[3 * d + i] = m[i] * m[i];
        out[4 * d + i] = e[i] * e[i];
    }
}

namespace {

// y = M x with M row-major r x c.
void matvec(const double* M, const double* x, double* y, std::size_t r,
            std::size_t c) {
    for (std::size_t i = 0; i < r; ++i) y[i] = kern::dot(M + i * c, x, c);
}

void check_rows(std::span<const double> e_t,
                const std::vector<std::span<const double>>& rows,
                std::size_t dim) {
    if (e_t.size() != dim)
        throw std::invalid_argument("test embedding dim mismatch");
    if (rows.empty())
        throw std::invalid_argument("need at least one enrollment row");
    for (const auto& r : rows)
        if (r.size() != dim)
            throw std::invalid_argument("enrollment row dim mismatch");
}

void attention_into(std::span<const double> e_t,
                    const std::vector<std::span<const double>>& rows,
                    const AttentionParams& p, EncoderScratch& s) {
    const std::size_t d = p.dim;
    const std::size_t kk = rows.size();
    const std::size_t hd = d / p.n_heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));

    s.q.resize(d);
    s.k.resize(kk * d);
    s.v.resize(kk * d);
    s.attw.assign(p.n_heads * kk, 0.0);
    s.ctx.assign(d, 0.0);

    matvec(p.w_q.data(), e_t.data(), s.q.data(), d, d);
    for (std::size_t j = 0; j < kk; ++j) {
        matvec(p.w_k.data(), rows[j].data(), s.k.data() + j * d, d, d);
        matvec(p.w_v.data(), rows[j].data(), s.v.data() + j * d, d, d);
    }

    for (std::size_t h = 0; h < p.n_heads; ++h) {
        const std::size_t off = h * hd;
        double* w = s.attw.data() + h * kk;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < kk; ++j) {
            w[j] = kern::dot(s.q.data() + off, s.k.data() + j * d + off, hd) *
                   inv_sqrt;
            mx = std::max(mx, w[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < kk; ++j) {
            w[j] = std::exp(w[j] - mx);
            z += w[j];
        }
        for (std::size_t j = 0; j < kk; ++j) w[j] /= z;
        for (std::size_t j = 0; j < kk; ++j)
            kern::axpy(w[j], s.v.data() + j * d + off, s.ctx.data() + off, hd);
    }

    s.m.resize(d);
    matvec(p.w_o.data(), s.ctx.data(), s.m.data(), d, d);
}

}  // namespace

std::vector<double> cross_attend(
    std::span<const double> e_t,
    const std::vector<std::span<const double>>& enroll_rows,
    const AttentionParams& p, std::vector<double>* attn_weights) {
    if (p.n_heads == 0 || p.dim == 0 || p.dim % p.n_heads != 0)
        throw std::invalid_argument("dim must be divisible by n_heads");
    check_rows(e_t, enroll_rows, p.dim);
    EncoderScratch s;
    attention_into(e_t, enroll_rows, p, s);
    if (attn_weights != nullptr) *attn_weights = s.attw;
    return s.m;
}

std::vector<double> aggregate_concat(
    std::span<const double> e_t,
    const std::vector<std::span<const double>>& enroll_rows) {
    const std::size_t d = e_t.size();
    check_rows(e_t, enroll_rows, d);
    std::vector<double> out(2 * d, 0.0);
    for (const auto& r : enroll_rows)
        kern::axpy(1.0, r.data(), out.data(), d);
    const double inv = 1.0 / static_cast<double>(enroll_rows.size());
    for (std::size_t i = 0; i < d; ++i) out[i] *= inv;
    for (std::size_t i = 0; i < d; ++i) out[d + i] = e_t[i];
    return out;
}

ClassLogits forward_rows(std::span<const double> e_t,
                         const std::vector<std::span<const double>>& rows,
                         const EncoderParams& p, EncoderScratch& s) {
    const std::size_t d = e_t.size();
    validate_params(p, d);
    check_rows(e_t, rows, d);
    s.rows = rows;
    s.test = e_t;

    if (p.aggregation == Aggregation::CrossAttention) {
        attention_into(e_t, rows, *p.attn, s);
    } else {
        s.m.assign(d, 0.0);
        for (const auto& r : rows)
            kern::axpy(1.0, r.data(), s.m.data(), d);
        const double inv = 1.0 / static_cast<double>(rows.size());
        for (double& x : s.m) x *= inv;
    }

    pair_features(s.m, e_t, s.feats);
    const std::size_t in = p.head.in_dim;
    ClassLogits out;
    out.tar = kern::dot(p.head.w.data() + 0 * in, s.feats.data(), in) + p.head.b[0];
    out.non = kern::dot(p.head.w.data() + 1 * in, s.feats.data(), in) + p.head.b[1];
    out.spf = kern::dot(p.head.w.data() + 2 * in, s.feats.data(), in) + p.head.b[2];
    return out;
}

ClassLogits forward(const Trial& trial, const ManifestIndex& index,
                    const EmbeddingStore& store, const EncoderParams& p) {
    std::vector<std::span<const double>> rows;
    rows.reserve(trial.enroll_ids.size());
    for (const auto& id : trial.enroll_ids)
        rows.push_back(store.row(index.embedding_ref(id)));
    const auto e_t = store.row(index.embedding_ref(trial.test_id));
    EncoderScratch s;
    return forward_rows(e_t, rows, p, s);
}

EncoderParams init_encoder_params(Aggregation agg, std::size_t dim,
                                  std::size_t n_heads, std::uint64_t seed) {
    if (dim == 0) throw std::invalid_argument("dim must be positive");
    Rng rng(seed);
    EncoderParams p;
    p.aggregation = agg;
    if (agg == Aggregation::CrossAttention) {
        if (n_heads == 0 || dim % n_heads != 0)
            throw std::invalid_argument("dim must be divisible by n_heads");
        AttentionParams a;
        a.dim = dim;
        a.n_heads = n_heads;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
        for (auto* m : {&a.w_q, &a.w_k, &a.w_v, &a.w_o}) {
            m->resize(dim * dim);
            for (double& x : *m) x = scale * rng.next_gaussian();
        }
        p.attn = std::move(a);
    }
    p.head.in_dim = head_input_dim(dim);
    p.head.w.resize(3 * p.head.in_dim);
    const double hscale = 1.0 / std::sqrt(static_cast<double>(p.head.in_dim));
    for (double& x : p.head.w) x = hscale * rng.next_gaussian();
    p.head.b.assign(3, 0.0);
    return p;
}

EncoderParams zeros_like(const EncoderParams& p) {
    EncoderParams z;
    z.aggregation = p.aggregation;
    if (p.attn) {
        AttentionParams a;
        a.dim = p.attn->dim;
        a.n_heads = p.attn->n_heads;
        a.w_q.assign(p.attn->w_q.size(), 0.0);
        a.w_k.assign(p.attn->w_k.size(), 0.0);
        a.w_v.assign(p.attn->w_v.size(), 0.0);
        a.w_o.assign(p.attn->w_o.size(), 0.0);
        z.attn = std::move(a);
    }
    z.head.in_dim = p.head.in_dim;
    z.head.w.assign(p.head.w.size(), 0.0);
    z.head.b.assign(p.head.b.size(), 0.0);
    return z;
}

}  // namespace sasv
