#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sasv/core.hpp"
#include "sasv/embedding_store.hpp"
#include "sasv/encoder.hpp"
#include "sasv/scoring.hpp"

namespace sasv::io {

inline constexpr const char* kToolVersion = "0.1.0";

// Run metadata embedded in every JSON output. Contains no timestamps so
// re-runs are byte-identical.
struct Provenance {
    std::vector<std::string> inputs;
    std::optional<std::uint64_t> seed;
    std::string config_hash;  // fnv1a64 of the effective config document
};

std::string fnv1a64_hex(const std::string& bytes);

// Writes via a temp file in the same directory, then renames.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

// --- manifest (JSON lines, one UtteranceRecord per line) ---
void write_manifest(const std::filesystem::path& path,
                    const std::vector<UtteranceRecord>& manifest);
std::vector<UtteranceRecord> read_manifest(const std::filesystem::path& path);

// --- embeddings (binary: magic "SASVEMB1", u32 count, u32 dim,
//     row-major little-endian f32) ---
void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingStore& store);
EmbeddingStore read_embeddings(const std::filesystem::path& path);

// --- trials (JSON lines) ---
void write_trials(const std::filesystem::path& path,
                  const std::vector<Trial>& trials);
std::vector<Trial> read_trials(const std::filesystem::path& path);

// --- scores (TSV: trial_id, label, attack or "-", llr at 17 digits) ---
void write_scores(const std::filesystem::path& path,
                  const std::vector<ScoreRecord>& scores);
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);

// --- logits (TSV: trial_id, label, attack or "-", s_tar, s_non, s_spf) ---
struct LogitRecord {
    std::string trial_id;
    TrialClass label;
    std::string attack_label;
    ClassLogits logits;
};
void write_logits(const std::filesystem::path& path,
                  const std::vector<LogitRecord>& rows);
std::vector<LogitRecord> read_logits(const std::filesystem::path& path);

// --- model parameters (JSON document of named flat arrays with shapes) ---
void write_model(const std::filesystem::path& path, const EncoderParams& params,
                 const Provenance& prov);
EncoderParams read_model(const std::filesystem::path& path);

// --- calibration parameters (JSON) ---
void write_calibration(const std::filesystem::path& path,
                       const CalibrationParams& calib, const Provenance& prov);
CalibrationParams read_calibration(const std::filesystem::path& path);

// --- loss curve (CSV: epoch, mean_loss) ---
void write_loss_curve(const std::filesystem::path& path,
                      const std::vector<double>& losses);

std::string format_double(double x);  // shortest exact round-trip (%.17g)

}  // namespace sasv::io
