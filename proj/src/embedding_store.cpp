#include "sasv/embedding_store.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sasv {

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
}

std::span<const double> EmbeddingStore::row(std::size_t i) const {
    if (i >= rows_)
        throw std::out_of_range("embedding_ref " + std::to_string(i) +
                                " out of range (store has " +
                                std::to_string(rows_) + " rows)");
    return {data_.data() + i * dim_, dim_};
}

void EmbeddingStore::append(std::span<const double> row) {
    if (row.size() != dim_)
        throw std::invalid_argument("embedding row has dim " +
                                    std::to_string(row.size()) + ", expected " +
                                    std::to_string(dim_));
    for (double x : row) {
        if (!std::isfinite(x))
            throw std::invalid_argument("embedding row contains non-finite value");
    }
    data_.insert(data_.end(), row.begin(), row.end());
    ++rows_;
}

}  // namespace sasv
