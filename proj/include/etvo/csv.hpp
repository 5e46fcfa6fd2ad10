#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "etvo/error.hpp"
#include "etvo/signal.hpp"

namespace etvo {

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view text, double& out) noexcept {
    text = trim(text);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

} // namespace detail

/// Reads a `time,value` CSV. The sample period is the median timestamp gap;
/// any gap more than 0.1% away from it is rejected as non-uniform sampling.
inline Signal load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) {
            throw Error(ErrorCode::file_not_found, path.string());
        }
        throw Error(ErrorCode::io_error, "cannot open " + path.string());
    }

    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::parse_error, path.string() + ": missing header `time,value`");
    }
    ++row;
    {
        std::string_view header = detail::trim(line);
        if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header.remove_prefix(3);
        const auto comma = header.find(',');
        if (comma == std::string_view::npos || detail::trim(header.substr(0, comma)) != "time" ||
            detail::trim(header.substr(comma + 1)) != "value") {
            throw Error(ErrorCode::parse_error, path.string() + " row 1: expected header `time,value`");
        }
    }

    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++row;
        const std::string_view text = detail::trim(line);
        if (text.empty()) continue;
        const auto comma = text.find(',');
        double t = 0.0;
        double v = 0.0;
        if (comma == std::string_view::npos || !detail::parse_double(text.substr(0, comma), t) ||
            !detail::parse_double(text.substr(comma + 1), v)) {
            throw Error(ErrorCode::parse_error,
                        path.string() + " row " + std::to_string(row) + ": cannot parse `" + std::string(text) + "`");
        }
        if (!times.empty() && !(t > times.back())) {
            throw Error(ErrorCode::parse_error,
                        path.string() + " row " + std::to_string(row) + ": timestamps must be strictly increasing");
        }
        times.push_back(t);
        values.push_back(v);
    }

    if (values.empty()) {
        throw Error(ErrorCode::parse_error, path.string() + ": no data rows");
    }
    if (values.size() < 2) {
        throw Error(ErrorCode::parse_error, path.string() + ": at least two rows are needed to infer the sample period");
    }

    std::vector<double> gaps(times.size() - 1);
    for (std::size_t k = 1; k < times.size(); ++k) gaps[k - 1] = times[k] - times[k - 1];
    std::vector<double> sorted = gaps;
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    double median = *mid;
    if (sorted.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(sorted.begin(), mid));
    }

    double worst = 0.0;
    for (double gap : gaps) worst = std::max(worst, std::abs(gap - median));
    if (worst > 1e-3 * median) {
        throw Error(ErrorCode::non_uniform_sampling,
                    path.string() + ": max gap deviation " + std::to_string(worst) + " s (" +
                        std::to_string(100.0 * worst / median) + "% of the median period " + std::to_string(median) +
                        " s)");
    }
    return Signal(std::move(values), median, times.front());
}

inline void save_csv(const Signal& signal, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
    }
    out << "time,value\n";
    for (std::size_t k = 0; k < signal.size(); ++k) {
        out << detail::format_double(signal.time_at(k)) << ',' << detail::format_double(signal[k]) << '\n';
    }
    out.flush();
    if (!out) {
        throw Error(ErrorCode::io_error, "write to " + path.string() + " failed");
    }
}

} // namespace etvo
