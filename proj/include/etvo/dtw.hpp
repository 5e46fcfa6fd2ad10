#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "etvo/error.hpp"
#include "etvo/signal.hpp"

namespace etvo {

struct DtwResult {
    /// Minimum cumulative squared distance (no final square root).
    double cost = 0.0;
    /// (input index, output index) pairs from (0,0) to (N-1,N-1).
    std::vector<std::pair<std::size_t, std::size_t>> warp_path;
    /// (w0(k) - w1(k)) * T for every path point, in seconds.
    std::vector<double> time_offset;
};

/// Classical full-matrix DTW with squared Euclidean sample distance.
///
/// Step choices are stored per cell while the cost matrix is filled row by
/// row, so memory is one byte per cell plus two cost rows. Ties prefer the
/// diagonal predecessor; between the two single-axis predecessors the one
/// bringing w0 - w1 closer to zero wins, and on the main diagonal the step
/// that advances the input index is taken.
inline DtwResult dtw_align(std::span<const double> f, std::span<const double> g, double sample_period = 1.0) {
    if (f.empty() || g.empty()) {
        throw Error(ErrorCode::empty_signal, "DTW needs non-empty signals");
    }
    if (f.size() != g.size()) {
        throw Error(ErrorCode::length_mismatch, "DTW needs equal-length signals, got " + std::to_string(f.size()) +
                                                    " and " + std::to_string(g.size()));
    }
    const std::size_t n = f.size();
    enum Step : std::uint8_t { start = 0, diagonal = 1, advance_input = 2, advance_output = 3 };

    std::vector<std::uint8_t> steps(n * n, start);
    std::vector<double> prev(n), curr(n);
    auto sq = [](double x) { return x * x; };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = sq(f[i] - g[j]);
            if (i == 0 && j == 0) {
                curr[j] = d;
                continue;
            }
            if (i == 0) {
                curr[j] = d + curr[j - 1];
                steps[i * n + j] = advance_output;
                continue;
            }
            if (j == 0) {
                curr[j] = d + prev[j];
                steps[i * n + j] = advance_input;
                continue;
            }
            const double via_diag = prev[j - 1];
            const double via_input = prev[j];      // came from (i-1, j)
            const double via_output = curr[j - 1]; // came from (i, j-1)
            Step choice = diagonal;
            double best = via_diag;
            if (via_input < best || via_output < best) {
                if (via_input < via_output) {
                    choice = advance_input;
                } else if (via_output < via_input) {
                    choice = advance_output;
                } else {
                    // Predecessor (i-1, j) has offset i-1-j, (i, j-1) has offset i-j+1.
                    choice = i > j ? advance_input : (i < j ? advance_output : advance_input);
                }
                best = choice == advance_input ? via_input : via_output;
            }
            curr[j] = d + best;
            steps[i * n + j] = choice;
        }
        std::swap(prev, curr);
    }

    DtwResult result;
    result.cost = prev[n - 1];
    std::size_t i = n - 1;
    std::size_t j = n - 1;
    result.warp_path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        switch (steps[i * n + j]) {
            case diagonal: --i; --j; break;
            case advance_input: --i; break;
            case advance_output: --j; break;
            default: throw Error(ErrorCode::invalid_path, "DTW backtracking reached an unset cell");
        }
        result.warp_path.emplace_back(i, j);
    }
    std::reverse(result.warp_path.begin(), result.warp_path.end());
    result.time_offset.reserve(result.warp_path.size());
    for (const auto& [a, b] : result.warp_path) {
        result.time_offset.push_back((static_cast<double>(a) - static_cast<double>(b)) * sample_period);
    }
    return result;
}

inline DtwResult dtw_align(const Signal& f, const Signal& g) {
    if (f.size() != g.size()) {
        throw Error(ErrorCode::length_mismatch, "DTW needs equal-length signals, got " + std::to_string(f.size()) +
                                                    " and " + std::to_string(g.size()));
    }
    if (std::abs(f.sample_period() - g.sample_period()) > 1e-9 * g.sample_period()) {
        throw Error(ErrorCode::incompatible_sampling, "DTW needs signals with the same sample period");
    }
    return dtw_align(f.samples(), g.samples(), g.sample_period());
}

/// Resamples a DTW path onto output indices: for each output index k the lag
/// w1 - w0 (in samples) of the last path point with w1 = k. Positive values
/// mean the output lags the input, matching the ETO sign convention.
inline std::vector<long> dtw_lag_per_output(const DtwResult& dtw, std::size_t n) {
    std::vector<long> lag(n, 0);
    for (const auto& [a, b] : dtw.warp_path) {
        if (b < n) lag[b] = static_cast<long>(b) - static_cast<long>(a);
    }
    return lag;
}

} // namespace etvo
