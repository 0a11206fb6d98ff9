#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "blindmm/model.hpp"
#include "blindmm/sim.hpp"

namespace blindmm {

struct ConfigFile {
    ExperimentConfig config;
    /// Absent when the document has no "seed"; callers pick a fallback.
    std::optional<std::uint64_t> seed;
};

/// Parses an experiment document:
///
///   {"scenario": "fig4" | "fig6:cond=100" | {"H": ..., "Cw": ...},
///    "estimators": ["ls", "sbme", "ebme:b=-1"],
///    "snr_grid_db": [-10, 0, 10],
///    "directions": "max-eigenvector" | ["min-eigenvector", "random-sphere:20", [1, 0, 0]],
///    "trials": 10000, "seed": 7}
///
/// Inline matrices are nested arrays or CSV paths relative to `base_dir`.
/// `estimators` is required; snr_grid_db defaults to −10..20 dB, directions
/// to both extreme eigenvectors, trials to 10000. Throws Config naming the
/// offending field.
ConfigFile parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});

/// Reads and parses `path`; relative files resolve against its directory.
ConfigFile load_config(const std::filesystem::path& path);

/// The model an ExperimentConfig refers to (inline H/Cw or a named one).
Model model_for_config(const ExperimentConfig& config);

}  // namespace blindmm
