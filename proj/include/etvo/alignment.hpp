#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "etvo/error.hpp"
#include "etvo/signal.hpp"

namespace etvo {

/// Delay search window and adjustment penalties. Penalties are in squared
/// amplitude units: `p_prop` per delay bin changed, `p_fixed` and `p_slack`
/// per adjustment.
struct AlignmentConfig {
    int delta_t_min_samples = 0;
    int m_bins = 1;
    double p_prop = 0.0;
    double p_fixed = 0.0;
    double p_slack = 0.0;

    void validate() const {
        if (m_bins < 1) throw Error(ErrorCode::invalid_config, "m_bins must be >= 1");
        const auto ok = [](double p) { return std::isfinite(p) && p >= 0.0; };
        if (!ok(p_prop) || !ok(p_fixed) || !ok(p_slack)) {
            throw Error(ErrorCode::invalid_config, "penalties must be finite and >= 0");
        }
    }
};

[[nodiscard]] inline AlignmentConfig make_config(const AlignedPair& pair, double p_prop, double p_fixed,
                                                 double p_slack) {
    AlignmentConfig cfg{pair.delta_t_min_samples(), pair.m_bins(), p_prop, p_fixed, p_slack};
    cfg.validate();
    return cfg;
}

/// Backtracking jumps written by the streaming forward pass, one row per
/// output sample and one column per delay bin.
///
/// Entry d at (i, j): 0 = reached from (i-1, j); d > 0 = reached by a
/// downward drop inside step i from bin j+d; d < 0 = reached by a run of -d
/// diagonal steps starting at (i+d, j+d).
class DirectionMatrix {
public:
    DirectionMatrix() = default;
    DirectionMatrix(std::size_t n, int m) : n_(n), m_(m), entries_(n * static_cast<std::size_t>(m), 0) {}

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] std::int32_t at(std::size_t i, int j) const noexcept {
        return entries_[i * static_cast<std::size_t>(m_) + static_cast<std::size_t>(j)];
    }
    std::int32_t& at(std::size_t i, int j) noexcept {
        return entries_[i * static_cast<std::size_t>(m_) + static_cast<std::size_t>(j)];
    }

    int j_start = 0;
    /// Cumulative cost (distances plus penalties) of the cell at (N-1, j_start).
    double total_cost = 0.0;

private:
    std::size_t n_ = 0;
    int m_ = 0;
    std::vector<std::int32_t> entries_;
};

struct AlignmentResult {
    std::vector<int> w;
    std::vector<double> eto;
    std::vector<double> evo;
    double total_cost = 0.0;
    double distance_cost = 0.0;
};

namespace detail {

inline void check_pair_config(const AlignedPair& pair, const AlignmentConfig& cfg) {
    cfg.validate();
    if (cfg.m_bins != pair.m_bins() || cfg.delta_t_min_samples != pair.delta_t_min_samples()) {
        throw Error(ErrorCode::invalid_config, "config window (dT_min=" + std::to_string(cfg.delta_t_min_samples) +
                                                   ", M=" + std::to_string(cfg.m_bins) +
                                                   ") does not match the aligned pair");
    }
}

} // namespace detail

/// Squared distance between output sample i and the input sample at delay bin j.
[[nodiscard]] inline double delta(const AlignedPair& pair, std::size_t i, int j) noexcept {
    const double diff = pair.output()[i] - pair.input_at(i, j);
    return diff * diff;
}

/// Streaming O(N*M) forward pass.
///
/// Keeps the running downward candidate (one scalar per step), the diagonal
/// candidates (one per bin, carried to the next step) and the forward lane.
/// Candidates exclude `p_fixed`; a committed adjustment adds `p_fixed` and
/// `p_slack` to the stored cost, but `p_slack` never enters a comparison.
/// Forward wins ties; between the two adjustment kinds the diagonal wins.
[[nodiscard]] inline DirectionMatrix fast_forward(const AlignedPair& pair, const AlignmentConfig& cfg) {
    detail::check_pair_config(pair, cfg);
    const std::size_t n = pair.n();
    const int m = cfg.m_bins;
    const double p_prop = cfg.p_prop;
    const double p_fixed = cfg.p_fixed;
    const double p_slack = cfg.p_slack;
    constexpr double inf = std::numeric_limits<double>::infinity();

    const std::span<const double> f = pair.input().samples();
    const std::span<const double> g = pair.output().samples();

    DirectionMatrix dm(n, m);
    std::vector<double> lane(static_cast<std::size_t>(m), 0.0);
    std::vector<double> diag(static_cast<std::size_t>(m), inf);
    std::vector<int> diag_src(static_cast<std::size_t>(m), 0);

    for (std::size_t i = 0; i < n; ++i) {
        double down = inf;
        int down_src = 0;
        diag[0] = inf;
        const double gi = g[i];
        const double* fi = f.data() + i + static_cast<std::size_t>(m - 1);
        std::int32_t* row = &dm.at(i, 0);

        for (int j = m - 1; j >= 0; --j) {
            const auto uj = static_cast<std::size_t>(j);
            const double diff = gi - *(fi - j);
            const double d = diff * diff;
            const double lane_limit = lane[uj] - p_fixed;

            if (down < lane_limit && down < diag[uj]) {
                lane[uj] = down + p_fixed + p_slack;
                row[j] = down_src - j;
            } else if (diag[uj] < lane_limit && diag[uj] <= down) {
                lane[uj] = diag[uj] + p_fixed + p_slack;
                row[j] = -(j - diag_src[uj]);
            }
            if (down > lane[uj]) {
                down = lane[uj];
                down_src = j;
            }
            if (diag[uj] > lane[uj]) {
                diag[uj] = lane[uj];
                diag_src[uj] = j;
            }
            if (j + 1 < m) {
                diag[uj + 1] = diag[uj] + d + p_prop;
                diag_src[uj + 1] = diag_src[uj];
            }
            down = down + d + p_prop;
            lane[uj] = lane[uj] + d;
        }
    }

    int best = 0;
    for (int j = 1; j < m; ++j) {
        if (lane[static_cast<std::size_t>(j)] < lane[static_cast<std::size_t>(best)]) best = j;
    }
    dm.j_start = best;
    dm.total_cost = lane[static_cast<std::size_t>(best)];
    return dm;
}

/// Direct evaluation of the penalised recurrence, O(N*M^3), kept as the
/// cross-check for `fast_forward`. Candidate sums are accumulated from the
/// source cell towards the destination so the arithmetic matches the
/// streaming pass operation for operation.
struct ReferenceForward {
    enum class Move : std::uint8_t { start, forward, down, diagonal };
    struct Choice {
        Move move = Move::start;
        int k = 0;
    };

    std::size_t n = 0;
    int m = 0;
    std::vector<double> cost;     // n x m, row per output sample
    std::vector<Choice> choice;   // n x m
    int j_start = 0;
    double total_cost = 0.0;

    [[nodiscard]] double c(std::size_t i, int j) const { return cost[i * static_cast<std::size_t>(m) + j]; }
    [[nodiscard]] Choice at(std::size_t i, int j) const { return choice[i * static_cast<std::size_t>(m) + j]; }
};

[[nodiscard]] inline ReferenceForward reference_forward(const AlignedPair& pair, const AlignmentConfig& cfg) {
    detail::check_pair_config(pair, cfg);
    using Move = ReferenceForward::Move;
    constexpr double inf = std::numeric_limits<double>::infinity();

    ReferenceForward ref;
    ref.n = pair.n();
    ref.m = cfg.m_bins;
    const int m = ref.m;
    ref.cost.assign(ref.n * static_cast<std::size_t>(m), 0.0);
    ref.choice.assign(ref.n * static_cast<std::size_t>(m), {});
    auto cell = [&](std::size_t i, int j) -> double& { return ref.cost[i * static_cast<std::size_t>(m) + j]; };

    for (std::size_t i = 0; i < ref.n; ++i) {
        for (int j = m - 1; j >= 0; --j) {
            if (i == 0) {
                cell(0, j) = 0.0 + delta(pair, 0, j);
                ref.choice[static_cast<std::size_t>(j)] = {Move::start, 0};
                continue;
            }
            const double forward = cell(i - 1, j);

            double best_down = inf;
            int down_k = 0;
            for (int k = 1; j + k < m; ++k) {
                double v = cell(i, j + k) + cfg.p_prop;
                for (int l = k - 1; l >= 1; --l) v = v + delta(pair, i, j + l) + cfg.p_prop;
                if (v <= best_down) {
                    best_down = v;
                    down_k = k;
                }
            }

            double best_diag = inf;
            int diag_k = 0;
            for (int k = 1; k <= j && static_cast<std::size_t>(k) <= i; ++k) {
                double v = cell(i - k, j - k) + cfg.p_prop;
                for (int l = k - 1; l >= 1; --l) {
                    v = v + delta(pair, i - static_cast<std::size_t>(l), j - l) + cfg.p_prop;
                }
                if (v <= best_diag) {
                    best_diag = v;
                    diag_k = k;
                }
            }

            const double forward_limit = forward - cfg.p_fixed;
            const double d = delta(pair, i, j);
            auto& slot = ref.choice[i * static_cast<std::size_t>(m) + j];
            if (best_down < forward_limit && best_down < best_diag) {
                cell(i, j) = best_down + cfg.p_fixed + cfg.p_slack + d;
                slot = {Move::down, down_k};
            } else if (best_diag < forward_limit && best_diag <= best_down) {
                cell(i, j) = best_diag + cfg.p_fixed + cfg.p_slack + d;
                slot = {Move::diagonal, diag_k};
            } else {
                cell(i, j) = forward + d;
                slot = {Move::forward, 0};
            }
        }
    }

    const std::size_t last = ref.n - 1;
    for (int j = 1; j < m; ++j) {
        if (cell(last, j) < cell(last, ref.j_start)) ref.j_start = j;
    }
    ref.total_cost = cell(last, ref.j_start);
    return ref;
}

/// Delay-bin path read back from a forward pass. `w[i]` is the bin at which
/// step i is entered; `exit_bin[i]` is where it is left, lower than `w[i]`
/// only when the path drops inside step i.
struct BacktrackResult {
    std::vector<int> w;
    std::vector<int> exit_bin;
    std::vector<double> eto;
};

/// Path encoded by the reference pass's per-cell choices.
[[nodiscard]] inline BacktrackResult reference_path(const ReferenceForward& ref, const AlignmentConfig& cfg,
                                                    double sample_period) {
    using Move = ReferenceForward::Move;
    BacktrackResult out;
    out.w.assign(ref.n, 0);
    out.exit_bin.assign(ref.n, 0);
    long i = static_cast<long>(ref.n) - 1;
    int j = ref.j_start;
    out.exit_bin[static_cast<std::size_t>(i)] = j;
    while (i >= 0) {
        const auto ui = static_cast<std::size_t>(i);
        const auto ch = ref.at(ui, j);
        switch (ch.move) {
            case Move::down:
                j += ch.k;
                continue;
            case Move::start:
            case Move::forward:
                out.w[ui] = j;
                if (i > 0) out.exit_bin[ui - 1] = j;
                --i;
                break;
            case Move::diagonal:
                for (int l = 0; l < ch.k; ++l) {
                    out.w[ui - static_cast<std::size_t>(l)] = j - l;
                    if (l > 0) out.exit_bin[ui - static_cast<std::size_t>(l)] = j - l;
                }
                out.exit_bin[ui - static_cast<std::size_t>(ch.k)] = j - ch.k;
                i -= ch.k;
                j -= ch.k;
                break;
        }
    }
    out.eto.resize(ref.n);
    for (std::size_t k = 0; k < ref.n; ++k) {
        out.eto[k] = static_cast<double>(cfg.delta_t_min_samples + out.w[k]) * sample_period;
    }
    return out;
}

/// Walks the direction matrix from (N-1, j_start) back to step 0.
[[nodiscard]] inline BacktrackResult backtrack(const DirectionMatrix& dm, const AlignmentConfig& cfg,
                                               double sample_period) {
    const std::size_t n = dm.n();
    const int m = dm.m();
    if (n == 0 || m < 1 || dm.j_start < 0 || dm.j_start >= m) {
        throw Error(ErrorCode::corrupt_direction_matrix, "j_start outside [0, M-1]");
    }
    BacktrackResult out;
    out.w.assign(n, 0);
    out.exit_bin.assign(n, 0);
    out.eto.assign(n, 0.0);

    int j = dm.j_start;
    int run = 0;
    for (std::size_t step = n; step-- > 0;) {
        if (run > 0) {
            --j;
            --run;
        }
        out.exit_bin[step] = j;
        if (run == 0) {
            std::int32_t d = dm.at(step, j);
            int hops = 0;
            while (d > 0) {
                j += d;
                if (j >= m || ++hops > m) {
                    throw Error(ErrorCode::corrupt_direction_matrix,
                                "downward jump leaves the delay range at step " + std::to_string(step));
                }
                d = dm.at(step, j);
            }
            if (d < 0) {
                run = -d;
                if (j - run < 0 || static_cast<long>(step) - run < 0) {
                    throw Error(ErrorCode::corrupt_direction_matrix,
                                "diagonal run leaves the matrix at step " + std::to_string(step));
                }
            }
        }
        out.w[step] = j;
        out.eto[step] = static_cast<double>(cfg.delta_t_min_samples + j) * sample_period;
    }
    return out;
}

namespace detail {

inline void check_path(std::span<const int> w, std::size_t n, int m) {
    if (w.size() != n) {
        throw Error(ErrorCode::invalid_path, "path length " + std::to_string(w.size()) + " != N = " + std::to_string(n));
    }
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] < 0 || w[k] >= m) {
            throw Error(ErrorCode::invalid_path, "w[" + std::to_string(k) + "] outside [0, M-1]");
        }
        if (k > 0 && w[k] > w[k - 1] + 1) {
            throw Error(ErrorCode::invalid_path, "w[" + std::to_string(k) + "] rises by more than one bin");
        }
    }
}

} // namespace detail

/// Per-sample value offset. A drop of the delay between samples i and i+1
/// charges every bin from w[i+1] up to w[i] to sample i.
[[nodiscard]] inline std::vector<double> compute_evo(const AlignedPair& pair, std::span<const int> w) {
    detail::check_path(w, pair.n(), pair.m_bins());
    const std::size_t n = w.size();
    std::vector<double> evo(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n && w[i] > w[i + 1]) {
            double sum = 0.0;
            for (int l = w[i + 1]; l <= w[i]; ++l) sum += delta(pair, i, l);
            evo[i] = sum;
        } else {
            evo[i] = delta(pair, i, w[i]);
        }
    }
    return evo;
}

/// Number of delay adjustments along a bin path: every drop counts once, and
/// each maximal run of single-bin rises counts once.
[[nodiscard]] inline std::size_t count_adjustments(std::span<const int> w) noexcept {
    std::size_t count = 0;
    bool rising = false;
    for (std::size_t k = 1; k < w.size(); ++k) {
        const int step = w[k] - w[k - 1];
        if (step > 0) {
            if (!rising) ++count;
            rising = true;
        } else {
            if (step < 0) ++count;
            rising = false;
        }
    }
    return count;
}

struct PathCost {
    double distance = 0.0;
    double penalty = 0.0;
    [[nodiscard]] double total() const noexcept { return distance + penalty; }
};

/// Distance (sum of EVO) and penalties of an arbitrary valid bin path.
[[nodiscard]] inline PathCost path_cost(const AlignedPair& pair, std::span<const int> w, const AlignmentConfig& cfg) {
    detail::check_pair_config(pair, cfg);
    PathCost cost;
    for (double e : compute_evo(pair, w)) cost.distance += e;

    const double per_adjustment = cfg.p_fixed + cfg.p_slack;
    int rise = 0;
    for (std::size_t k = 1; k <= w.size(); ++k) {
        const int step = k < w.size() ? w[k] - w[k - 1] : 0;
        if (step == 1) {
            ++rise;
            continue;
        }
        if (rise > 0) {
            cost.penalty += per_adjustment + rise * cfg.p_prop;
            rise = 0;
        }
        if (step < 0) cost.penalty += per_adjustment + (-step) * cfg.p_prop;
    }
    return cost;
}

/// Runs the streaming pass, backtracks, and attributes value offsets.
[[nodiscard]] inline AlignmentResult align(const AlignedPair& pair, const AlignmentConfig& cfg) {
    const DirectionMatrix dm = fast_forward(pair, cfg);
    BacktrackResult path = backtrack(dm, cfg, pair.sample_period());

    AlignmentResult result;
    result.evo = compute_evo(pair, path.w);
    result.total_cost = dm.total_cost;
    for (std::size_t i = 0; i < path.w.size(); ++i) {
        for (int l = path.exit_bin[i]; l <= path.w[i]; ++l) result.distance_cost += delta(pair, i, l);
    }
    result.w = std::move(path.w);
    result.eto = std::move(path.eto);
    return result;
}

} // namespace etvo
