#include "eop/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eop/error.hpp"

namespace eop {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw Error("config key '" + key + "': malformed value '" + value + "'");
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (minutes_per_day < 1) throw Error("minutes_per_day must be positive");
    if (minutes_per_year < 1) throw Error("minutes_per_year must be positive");
    if (!(outlier_sigma > 0.0)) throw Error("outlier_sigma must be positive");
    if (drift_window_minutes < 2) throw Error("drift_window_minutes must be at least 2");
    if (max_scale < 0 || max_scale > 30) throw Error("J must lie in [0, 30]");
    if (j_star < 1 || j_star > max_scale + 1) throw Error("j_star must lie in [1, J + 1]");
    if (ensemble_stride < 1) throw Error("ensemble_stride must be positive");
    if (!(calibration_lower > 0.0) || !(calibration_upper > calibration_lower)) {
        throw Error("calibration bounds must satisfy 0 < lower < upper");
    }
}

nlohmann::json RunConfig::to_json() const {
    return nlohmann::json{
        {"minutes_per_day", minutes_per_day},
        {"minutes_per_year", minutes_per_year},
        {"outlier_sigma", outlier_sigma},
        {"drift_window_minutes", drift_window_minutes},
        {"J", max_scale},
        {"j_star", j_star},
        {"ensemble_stride", ensemble_stride},
        {"rate_annual", rate_annual},
        {"calibration_lower", calibration_lower},
        {"calibration_upper", calibration_upper},
        {"seed", seed},
    };
}

void apply_config_value(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "minutes_per_day") {
        config.minutes_per_day = parse_number<int>(key, value);
    } else if (key == "minutes_per_year") {
        config.minutes_per_year = parse_number<int>(key, value);
    } else if (key == "outlier_sigma") {
        config.outlier_sigma = parse_number<double>(key, value);
    } else if (key == "drift_window_minutes") {
        config.drift_window_minutes = parse_number<std::size_t>(key, value);
    } else if (key == "J") {
        config.max_scale = parse_number<int>(key, value);
    } else if (key == "j_star") {
        config.j_star = parse_number<int>(key, value);
    } else if (key == "ensemble_stride") {
        config.ensemble_stride = parse_number<std::size_t>(key, value);
    } else if (key == "rate_annual") {
        config.rate_annual = parse_number<double>(key, value);
    } else if (key == "calibration_lower") {
        config.calibration_lower = parse_number<double>(key, value);
    } else if (key == "calibration_upper") {
        config.calibration_upper = parse_number<double>(key, value);
    } else if (key == "seed") {
        config.seed = parse_number<std::uint64_t>(key, value);
    } else {
        throw Error("unknown config key '" + key + "'");
    }
}

void apply_config(RunConfig& config, std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error("config line " + std::to_string(line_no) + ": expected key = value");
        }
        apply_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    try {
        apply_config(config, in);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string to_config_text(const RunConfig& config) {
    std::ostringstream out;
    const auto json = config.to_json();
    for (const auto& [key, value] : json.items()) out << key << " = " << value.dump() << '\n';
    return out.str();
}

}  // namespace eop
