#include "eop/series_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>

#include "eop/error.hpp"

namespace eop {

namespace {

using Metadata = std::map<std::string, std::string>;

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

// Reads the magic line and the "# key=value" block; leaves the stream at the
// first data line, which is returned.
Metadata read_header(std::istream& in, std::string& first_data_line, bool& has_data) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kSeriesMagic) {
        throw Error("not an eop series file (missing '" + std::string(kSeriesMagic) + "')");
    }
    Metadata meta;
    has_data = false;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw Error("malformed series metadata line '" + line + "'");
            meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        first_data_line = line;
        has_data = true;
        break;
    }
    return meta;
}

double parse_double(std::string_view text, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error("series line " + std::to_string(line_no) + ": malformed number '" +
                    std::string(text) + "'");
    }
    return v;
}

template <typename T>
T meta_number(const Metadata& meta, const std::string& key, T fallback) {
    const auto it = meta.find(key);
    if (it == meta.end()) return fallback;
    T v{};
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error("series metadata '" + key + "' is malformed: '" + s + "'");
    }
    return v;
}

void require_kind(const Metadata& meta, std::string_view kind) {
    const auto it = meta.find("kind");
    if (it == meta.end() || it->second != kind) {
        throw Error("series file kind is '" + (it == meta.end() ? std::string("?") : it->second) +
                    "', expected '" + std::string(kind) + "'");
    }
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

void write_prices(std::ostream& out, const PriceSeries& series) {
    out << kSeriesMagic << '\n';
    out << "# kind=prices\n";
    out << "# minutes_per_day=" << series.minutes_per_day << '\n';
    out << "# count=" << series.size() << '\n';
    out << "# sessions=" << (series.empty() ? 0 : series.session_boundaries.size() + 1) << '\n';
    out << "timestamp,price\n";
    for (const auto& r : series.records) {
        out << format_timestamp(r.timestamp) << ',' << format_double(r.price) << '\n';
    }
}

void write_returns(std::ostream& out, const ReturnSeries& series) {
    out << kSeriesMagic << '\n';
    out << "# kind=returns\n";
    out << "# count=" << series.size() << '\n';
    out << "# step_minutes=" << series.step_minutes << '\n';
    out << "# mean_removed=" << format_double(series.mean_removed) << '\n';
    out << "# outliers_neutralized=" << series.outliers_neutralized << '\n';
    out << "# drift_window=" << series.drift.window_minutes << '\n';
    out << "# per_minute_drift=" << format_double(series.drift.per_minute_drift) << '\n';
    out << "# drift_fallback=" << (series.drift_fallback ? 1 : 0) << '\n';
    if (series.first) out << "# first=" << format_timestamp(*series.first) << '\n';
    if (series.last) out << "# last=" << format_timestamp(*series.last) << '\n';
    for (double v : series.values) out << format_double(v) << '\n';
}

PriceSeries read_prices(std::istream& in) {
    std::string line;
    bool has_data = false;
    const auto meta = read_header(in, line, has_data);
    require_kind(meta, "prices");
    PriceSeries series;
    series.minutes_per_day = meta_number<int>(meta, "minutes_per_day", 510);
    if (!has_data || line != "timestamp,price") throw Error("price series lacks its column header");
    std::string rest{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::istringstream body(line + '\n' + rest);
    auto parsed = parse_price_csv(body);
    parsed.minutes_per_day = series.minutes_per_day;
    return parsed;
}

ReturnSeries read_returns(std::istream& in) {
    std::string line;
    bool has_data = false;
    const auto meta = read_header(in, line, has_data);
    require_kind(meta, "returns");
    ReturnSeries series;
    series.step_minutes = meta_number<int>(meta, "step_minutes", 1);
    series.mean_removed = meta_number<double>(meta, "mean_removed", 0.0);
    series.outliers_neutralized = meta_number<std::size_t>(meta, "outliers_neutralized", 0);
    series.drift.window_minutes = meta_number<std::size_t>(meta, "drift_window", 2550);
    series.drift.per_minute_drift = meta_number<double>(meta, "per_minute_drift", 0.0);
    series.drift_fallback = meta_number<int>(meta, "drift_fallback", 0) != 0;
    if (const auto it = meta.find("first"); it != meta.end()) series.first = parse_timestamp(it->second);
    if (const auto it = meta.find("last"); it != meta.end()) series.last = parse_timestamp(it->second);
    const auto expected = meta_number<std::size_t>(meta, "count", 0);
    series.values.reserve(expected);

    std::size_t line_no = meta.size() + 2;
    if (has_data) {
        do {
            line = strip_cr(line);
            if (!line.empty()) series.values.push_back(parse_double(line, line_no));
            ++line_no;
        } while (std::getline(in, line));
    }
    if (meta.count("count") != 0 && series.values.size() != expected) {
        throw Error("return series declares " + std::to_string(expected) + " values but holds " +
                    std::to_string(series.values.size()));
    }
    return series;
}

PriceSeries load_prices(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return read_prices(in);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

ReturnSeries load_returns(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return read_returns(in);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw Error("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned i = 0; i < length; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xf];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

}  // namespace eop
