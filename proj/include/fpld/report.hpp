#pragma once

// Result files: CSV rows, run manifests and optional SVG plots.

#include <filesystem>
#include <string>
#include <vector>

#include "fpld/sim.hpp"

namespace fpld {

inline constexpr const char* kToolVersion = "0.1.0";

/// One row per seed per point. The suboptimality column is written only
/// when `with_suboptimality` is set (adaptive runs).
std::string csv_text(const std::vector<ResultRow>& rows, bool with_suboptimality = false);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Manifest next to a CSV: subcommand, tool version, timestamp and the
/// resolved configuration as re-loadable key = value lines.
std::string manifest_text(const std::string& subcommand, const std::string& config_path,
                          const std::string& output_dir, const std::string& resolved);

/// Mean +- stderr per (sweep_name, policy) series plus the bound curves,
/// log-scale y axis.
std::string svg_plot(const std::vector<PointSummary>& points, const std::string& sweep_name,
                     const std::string& title);

}  // namespace fpld
