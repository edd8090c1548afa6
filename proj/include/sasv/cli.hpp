#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sasv/core.hpp"
#include "sasv/encoder.hpp"
#include "sasv/synthgen.hpp"
#include "sasv/training.hpp"
#include "sasv/trials.hpp"

namespace sasv::cli {

// Experiment configuration document; every field has a default and unknown
// keys are rejected before any work starts.
struct EncoderSettings {
    Aggregation aggregation = Aggregation::CrossAttention;
    std::size_t dim = 32;
    std::size_t n_heads = 4;
    std::uint64_t seed = 13;
};

struct ScoringSettings {
    Priors pi_eval = Priors::asvspoof5_eval();
    std::size_t calib_iterations = 2000;
    double calib_learning_rate = 0.01;
};

struct MetricsSettings {
    Priors pi_eval = Priors::asvspoof5_eval();
    double c_miss = 1.0;
    double c_fa_non = 10.0;
    double c_fa_spf = 10.0;
    bool normalize = true;
    std::size_t n_bins = 50;
};

struct RunConfig {
    SynthConfig synth;
    TrialBuildConfig trials;
    EncoderSettings encoder;
    TrainConfig train;
    ScoringSettings scoring;
    MetricsSettings metrics;
};

// Parses and validates the config file; missing sections fall back to
// defaults, unknown keys are errors.
RunConfig load_run_config(const std::optional<std::filesystem::path>& path);

// Canonical serialization of the effective config, hashed into output
// provenance.
std::string canonical_config_json(const RunConfig& cfg);

// Entry point shared by the binary and the tests. Returns the process
// exit code: 0 success, 2 validation error, 3 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace sasv::cli
