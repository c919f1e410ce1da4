#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace eop {

// Every constant the pipeline depends on. Defaults reproduce the FTSE100
// setup: 510-minute days, 252-day years, 4096-sample subseries, j* = 4,
// hourly window translations and r = 4.5%.
struct RunConfig {
    int minutes_per_day = 510;
    int minutes_per_year = 510 * 252;
    double outlier_sigma = 10.0;
    std::size_t drift_window_minutes = 2550;
    int max_scale = 11;
    int j_star = 4;
    std::size_t ensemble_stride = 60;
    double rate_annual = 0.045;
    double calibration_lower = 0.1;
    double calibration_upper = 3.0;
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
};

// Applies "key = value" assignments from a stream. '#' starts a comment.
// Unknown keys and malformed values throw.
void apply_config(RunConfig& config, std::istream& in);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value);

std::string to_config_text(const RunConfig& config);

}  // namespace eop
