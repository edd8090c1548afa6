#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "sasv/core.hpp"
#include "sasv/embedding_store.hpp"

namespace sasv::test {

// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        dir_ = std::filesystem::temp_directory_path() /
               ("sasv_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }
    std::filesystem::path operator/(const std::string& name) const {
        return dir_ / name;
    }

private:
    std::filesystem::path dir_;
};

inline UtteranceRecord bona(const std::string& utt, const std::string& spk,
                            Gender g, std::size_t ref) {
    return {utt, spk, g, Authenticity::BonaFide, "", ref};
}

inline UtteranceRecord spoofed(const std::string& utt, const std::string& spk,
                               Gender g, const std::string& attack,
                               std::size_t ref) {
    return {utt, spk, g, Authenticity::Spoof, attack, ref};
}

// Store with n rows of the given dim; row i = base + i * step elementwise.
inline EmbeddingStore ramp_store(std::size_t n, std::size_t dim,
                                 double base = 0.0, double step = 1.0) {
    EmbeddingStore store(dim);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d)
            row[d] = static_cast<double>(
                static_cast<float>(base + static_cast<double>(i) * step +
                                   static_cast<double>(d) * 0.25));
        store.append(row);
    }
    return store;
}

}  // namespace sasv::test
