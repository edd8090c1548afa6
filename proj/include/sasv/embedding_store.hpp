#pragma once

#include <span>
#include <vector>

namespace sasv {

// Row-major matrix of utterance embeddings, indexed by embedding_ref.
// Values are held as doubles but every stored value is exactly
// representable as a 32-bit float, so the on-disk f32 format round-trips
// losslessly.
class EmbeddingStore {
public:
    explicit EmbeddingStore(std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return rows_; }

    std::span<const double> row(std::size_t i) const;

    // Appends one row; entries must be finite and f32-representable is the
    // caller's concern (generate/load paths quantize before appending).
    void append(std::span<const double> row);

private:
    std::size_t dim_;
    std::size_t rows_ = 0;
    std::vector<double> data_;
};

}  // namespace sasv
