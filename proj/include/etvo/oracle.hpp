#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "etvo/alignment.hpp"
#include "etvo/error.hpp"
#include "etvo/signal.hpp"

// Exhaustive search over delay-bin paths. Nothing in here calls into the
// alignment routines: sample indexing and penalty accounting are written out
// again from the path definition so that index mistakes on either side show
// up as disagreements.

namespace etvo::oracle {

inline constexpr std::uint64_t max_paths = 10'000'000;

/// Number of paths of length n over m bins with 0 <= w[k+1] <= w[k] + 1,
/// saturating at max_paths + 1.
[[nodiscard]] inline std::uint64_t count_paths(std::size_t n, int m) {
    if (n == 0 || m < 1) return 0;
    std::vector<std::uint64_t> ending(static_cast<std::size_t>(m), 1);
    for (std::size_t step = 1; step < n; ++step) {
        std::vector<std::uint64_t> next(static_cast<std::size_t>(m), 0);
        for (int to = 0; to < m; ++to) {
            std::uint64_t total = 0;
            for (int from = std::max(0, to - 1); from < m; ++from) total += ending[static_cast<std::size_t>(from)];
            next[static_cast<std::size_t>(to)] = std::min<std::uint64_t>(total, max_paths + 1);
        }
        ending = std::move(next);
    }
    std::uint64_t sum = 0;
    for (auto c : ending) sum = std::min<std::uint64_t>(sum + c, max_paths + 1);
    return sum;
}

namespace detail {

template <typename Visit>
void for_each_path(std::size_t n, int m, Visit&& visit) {
    std::vector<int> w(n, 0);
    // Odometer over the constrained digits, lexicographic order.
    auto fill_from = [&](std::size_t pos) {
        for (std::size_t k = pos; k < n; ++k) w[k] = 0;
    };
    fill_from(0);
    while (true) {
        visit(std::span<const int>(w));
        std::size_t pos = n;
        while (pos-- > 0) {
            const int cap = pos == 0 ? m - 1 : std::min(m - 1, w[pos - 1] + 1);
            if (w[pos] < cap) {
                ++w[pos];
                fill_from(pos + 1);
                break;
            }
            if (pos == 0) return;
        }
    }
}

} // namespace detail

[[nodiscard]] inline std::vector<std::vector<int>> enumerate_paths(std::size_t n, int m) {
    const std::uint64_t count = count_paths(n, m);
    if (count > max_paths) {
        throw Error(ErrorCode::too_large, "path count for N=" + std::to_string(n) + ", M=" + std::to_string(m) +
                                              " exceeds " + std::to_string(max_paths));
    }
    std::vector<std::vector<int>> paths;
    if (count == 0) return paths;
    paths.reserve(static_cast<std::size_t>(count));
    detail::for_each_path(n, m, [&](std::span<const int> w) { paths.emplace_back(w.begin(), w.end()); });
    return paths;
}

/// Cost of one path: each output sample is matched against every input sample
/// it sweeps over, and each delay adjustment is charged once.
[[nodiscard]] inline double path_total(std::span<const double> f, std::span<const double> g, int m,
                                       std::span<const int> w, double p_prop, double p_fixed, double p_slack) {
    const std::size_t n = g.size();
    // Output sample i at bin b lines up with input sample i + (m - 1) - b.
    auto mismatch = [&](std::size_t i, int b) {
        const double e = g[i] - f[i + static_cast<std::size_t>(m - 1) - static_cast<std::size_t>(b)];
        return e * e;
    };
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int hi = w[i];
        const int lo = (i + 1 < n && w[i + 1] < hi) ? w[i + 1] : hi;
        for (int b = lo; b <= hi; ++b) total += mismatch(i, b);
    }
    std::size_t k = 1;
    while (k < n) {
        const int change = w[k] - w[k - 1];
        if (change < 0) {
            total += p_fixed + p_slack - change * p_prop;
            ++k;
        } else if (change == 1) {
            std::size_t len = 0;
            while (k < n && w[k] - w[k - 1] == 1) {
                ++len;
                ++k;
            }
            total += p_fixed + p_slack + static_cast<double>(len) * p_prop;
        } else {
            ++k;
        }
    }
    return total;
}

struct BruteForceResult {
    std::vector<int> w;
    double cost = std::numeric_limits<double>::infinity();
    std::uint64_t paths_examined = 0;
};

/// Global minimum of distance + penalties over every path (ties go to the
/// lexicographically smallest path). Only defined without slack.
[[nodiscard]] inline BruteForceResult brute_force_align(const AlignedPair& pair, const AlignmentConfig& cfg) {
    if (cfg.p_slack != 0.0) {
        throw Error(ErrorCode::slack_unsupported, "the exhaustive oracle is only exact for P_slack = 0");
    }
    cfg.validate();
    const std::uint64_t count = count_paths(pair.n(), cfg.m_bins);
    if (count > max_paths) {
        throw Error(ErrorCode::too_large, "path count exceeds " + std::to_string(max_paths));
    }
    if (cfg.m_bins != pair.m_bins()) {
        throw Error(ErrorCode::invalid_config, "config M does not match the aligned pair");
    }
    const auto f = pair.input().samples();
    const auto g = pair.output().samples();
    BruteForceResult best;
    detail::for_each_path(pair.n(), cfg.m_bins, [&](std::span<const int> w) {
        ++best.paths_examined;
        const double c = path_total(f, g, cfg.m_bins, w, cfg.p_prop, cfg.p_fixed, 0.0);
        if (c < best.cost) {
            best.cost = c;
            best.w.assign(w.begin(), w.end());
        }
    });
    return best;
}

} // namespace etvo::oracle
