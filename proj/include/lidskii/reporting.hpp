#pragma once

#include "lidskii/serialize.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lidskii {

struct ExperimentConfig {
    std::string name;
    std::string task;  // analyze-exponent | decompose | sum | contour-verify | evolve | full-verify
    std::vector<std::filesystem::path> operator_paths;
    Json params;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = "out";
    int threads = 1;
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// Exit status: 0 pass, 1 verification failure, 2 input error.
/// Writes every produced file plus a manifest.json listing paths, sizes and
/// checksums; deterministic given (config, seed).
int run_experiment(const ExperimentConfig& config);

/// FNV-1a 64-bit checksum, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace lidskii
