#pragma once

// Subcommand implementations for the `etvo` command-line tool. Argument
// parsing lives in etvo_cli.cpp; everything here takes plain option structs
// so the commands can be driven directly from tests.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "etvo/etvo.hpp"
#include "etvo/io.hpp"

namespace etvo::cli {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_input_error = 2 };

struct WindowOptions {
    double dt_min = 0.0;
    double dt_max = 0.05;
    PadPolicy pad = PadPolicy::error;
};

struct PenaltyOptions {
    std::optional<double> p_prop;
    std::optional<double> p_fixed;
    std::optional<double> p_slack;
    bool auto_tune = false;
};

struct AnalyzeOptions {
    std::filesystem::path input;
    std::filesystem::path output;
    std::filesystem::path report = "report.json";
    std::filesystem::path series = "series.csv";
    WindowOptions window;
    PenaltyOptions penalties;
};

struct SimulateOptions {
    std::filesystem::path input;
    std::filesystem::path channel;
    std::optional<std::uint64_t> seed;
    std::filesystem::path output = "output.csv";
    std::filesystem::path packets = "packets.csv";
    WindowOptions window;
};

struct SweepOptions {
    std::filesystem::path input;
    std::optional<std::filesystem::path> channel;
    std::optional<std::filesystem::path> output;
    std::string grid = "log:1e-4:1:20";
    std::optional<double> p_fixed;
    std::optional<double> p_slack;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "sweep.csv";
    WindowOptions window;
};

struct CompareOptions {
    std::filesystem::path input;
    std::filesystem::path output;
    std::filesystem::path out = "compare.csv";
    WindowOptions window;
    PenaltyOptions penalties;
};

struct VerifyOptions {
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::size_t n_max = 10;
    int m_max = 4;
};

/// Errors that mean the library caught itself in an inconsistent state,
/// as opposed to bad user input.
inline bool is_internal_failure(ErrorCode code) {
    return code == ErrorCode::corrupt_direction_matrix || code == ErrorCode::invalid_path ||
           code == ErrorCode::negative_evo;
}

/// Parses `log:a:b:n` or `lin:a:b:n` into n grid points.
inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 4 || (parts[0] != "log" && parts[0] != "lin")) {
        throw Error(ErrorCode::invalid_argument, "grid must look like log:a:b:n or lin:a:b:n, got `" + text + "`");
    }
    double a = 0.0;
    double b = 0.0;
    long count = 0;
    try {
        std::size_t used = 0;
        a = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
        b = std::stod(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
        count = std::stol(parts[3], &used);
        if (used != parts[3].size()) throw std::invalid_argument(parts[3]);
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_argument, "cannot parse grid `" + text + "`");
    }
    if (count < 2) throw Error(ErrorCode::invalid_argument, "grid needs at least two points");
    if (!(b > a) || !(a >= 0.0) || (parts[0] == "log" && !(a > 0.0))) {
        throw Error(ErrorCode::invalid_argument, "grid bounds must satisfy 0 < a < b (log) or 0 <= a < b (lin)");
    }
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (long k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(count - 1);
        grid[static_cast<std::size_t>(k)] = parts[0] == "log" ? a * std::pow(b / a, t) : a + (b - a) * t;
    }
    grid.back() = b;
    return grid;
}

/// Runs `task(index)` for every index on a small worker pool; results are
/// written by index so ordering never depends on scheduling.
template <typename Task>
void parallel_for(std::size_t count, Task&& task) {
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) task(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = next++; k < count; k = next++) task(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

inline AlignmentConfig resolve_penalties(const PenaltyOptions& opts, const AlignedPair& pair, const Signal& input,
                                         std::ostream& err) {
    if (opts.auto_tune) {
        if (opts.p_prop || opts.p_fixed || opts.p_slack) {
            throw Error(ErrorCode::invalid_argument, "--auto-tune cannot be combined with explicit penalties");
        }
        const TunedPenalties tuned = auto_tune(input);
        if (tuned.degenerate) {
            err << "warning: input signal is constant; auto-tuned penalties are all zero\n";
        }
        return make_config(pair, tuned.p_prop, tuned.p_fixed, tuned.p_slack);
    }
    if (!opts.p_prop) {
        throw Error(ErrorCode::invalid_argument, "either --p-prop or --auto-tune is required");
    }
    const double p_prop = *opts.p_prop;
    return make_config(pair, p_prop, opts.p_fixed.value_or(2.0 * p_prop), opts.p_slack.value_or(p_prop));
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_internal_failure(e.code()) ? exit_failure : exit_input_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
    return out;
}

inline int run_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Signal input = load_csv(opts.input);
        const Signal output = load_csv(opts.output);
        const AlignedPair pair =
            make_aligned_pair(input, output, opts.window.dt_min, opts.window.dt_max, opts.window.pad);
        const AlignmentConfig cfg = resolve_penalties(opts.penalties, pair, input, err);
        const AlignmentResult result = align(pair, cfg);
        const MetricReport report = make_report(pair, cfg, result);

        write_json(to_json(report), opts.report);

        auto series = open_output(opts.series);
        series << "k,time,eto_s,evo,input,output\n";
        const int m = pair.m_bins();
        for (std::size_t k = 0; k < pair.n(); ++k) {
            const double matched = pair.input()[k + static_cast<std::size_t>(m - 1 - result.w[k])];
            series << k << ',' << detail::format_double(pair.output().time_at(k)) << ','
                   << detail::format_double(result.eto[k]) << ',' << detail::format_double(result.evo[k]) << ','
                   << detail::format_double(matched) << ',' << detail::format_double(pair.output()[k]) << '\n';
        }
        if (!series) throw Error(ErrorCode::io_error, "write to " + opts.series.string() + " failed");

        out << "EDD   " << report.edd << " s/sample (" << report.edd_ms_per_s() << " ms/s)\n"
            << "ERMSE " << report.ermse << '\n'
            << "RMSE at best constant delay " << report.best_constant_delay << " s: " << report.rmse_constant_delay
            << '\n'
            << "adjustments " << report.n_adjustments << '\n';
        return int{exit_ok};
    });
}

inline int run_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Signal input = load_csv(opts.input);
        ChannelConfig cfg = load_channel_config(opts.channel);
        if (opts.seed) cfg.seed = *opts.seed;
        const SimulationResult sim = simulate(input, cfg, {opts.window.dt_min, opts.window.dt_max});
        save_csv(sim.output, opts.output);
        save_packet_log(sim.log, opts.packets);
        std::size_t lost = 0;
        std::size_t suppressed = 0;
        for (const auto& rec : sim.log) {
            lost += rec.status == PacketStatus::lost;
            suppressed += rec.status == PacketStatus::suppressed;
        }
        out << "packets " << sim.log.size() << ", lost " << lost << ", suppressed " << suppressed << ", output "
            << sim.output.size() << " samples from t=" << sim.output.start_time() << " s\n";
        return int{exit_ok};
    });
}

struct SweepRow {
    double p_prop = 0.0;
    double edd = 0.0;
    double ermse = 0.0;
    std::size_t n_adjustments = 0;
};

/// One alignment per grid point with P_fixed = 2 P_prop and P_slack = P_prop
/// unless fixed values are supplied.
inline std::vector<SweepRow> sweep_pair(const AlignedPair& pair, const std::vector<double>& grid,
                                        std::optional<double> p_fixed, std::optional<double> p_slack) {
    std::vector<SweepRow> rows(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
        const double p = grid[k];
        const AlignmentConfig cfg = make_config(pair, p, p_fixed.value_or(2.0 * p), p_slack.value_or(p));
        const AlignmentResult result = align(pair, cfg);
        rows[k] = {p, result.eto.size() >= 2 ? edd(result.eto) : 0.0, ermse(result.evo),
                   count_adjustments(result.w)};
    });
    return rows;
}

inline int run_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opts.channel.has_value() == opts.output.has_value()) {
            throw Error(ErrorCode::invalid_argument, "exactly one of --channel or --output is required");
        }
        const std::vector<double> grid = parse_grid(opts.grid);
        const Signal input = load_csv(opts.input);
        std::optional<Signal> output;
        if (opts.channel) {
            ChannelConfig cfg = load_channel_config(*opts.channel);
            if (opts.seed) cfg.seed = *opts.seed;
            output = simulate(input, cfg, {opts.window.dt_min, opts.window.dt_max}).output;
        } else {
            output = load_csv(*opts.output);
        }
        const AlignedPair pair =
            make_aligned_pair(input, *output, opts.window.dt_min, opts.window.dt_max, opts.window.pad);
        const std::vector<SweepRow> rows = sweep_pair(pair, grid, opts.p_fixed, opts.p_slack);

        auto file = open_output(opts.out);
        file << "p_prop,edd,ermse,n_adjustments\n";
        for (const auto& row : rows) {
            file << detail::format_double(row.p_prop) << ',' << detail::format_double(row.edd) << ','
                 << detail::format_double(row.ermse) << ',' << row.n_adjustments << '\n';
        }
        if (!file) throw Error(ErrorCode::io_error, "write to " + opts.out.string() + " failed");
        out << "wrote " << rows.size() << " grid points to " << opts.out.string() << '\n';
        return int{exit_ok};
    });
}

/// Largest N accepted by `compare`; the DTW step matrix needs N^2 bytes.
inline constexpr std::size_t compare_max_samples = 40'000;

inline int run_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Signal input = load_csv(opts.input);
        const Signal output = load_csv(opts.output);
        if (output.size() > compare_max_samples) {
            throw Error(ErrorCode::too_large, "compare runs full DTW; output longer than " +
                                                  std::to_string(compare_max_samples) + " samples");
        }
        const AlignedPair pair =
            make_aligned_pair(input, output, opts.window.dt_min, opts.window.dt_max, opts.window.pad);
        const AlignmentConfig cfg = resolve_penalties(opts.penalties, pair, input, err);
        const AlignmentResult etvo_result = align(pair, cfg);

        // DTW compares equal-length windows over the same time span.
        const AlignedPair same_time = make_aligned_pair(input, output, 0.0, output.sample_period(), opts.window.pad);
        const DtwResult dtw = dtw_align(same_time.input(), same_time.output());
        const std::vector<long> lag = dtw_lag_per_output(dtw, output.size());

        auto file = open_output(opts.out);
        file << "k,time,eto_etvo_s,offset_dtw_s,evo,input,output\n";
        const double period = output.sample_period();
        for (std::size_t k = 0; k < output.size(); ++k) {
            file << k << ',' << detail::format_double(output.time_at(k)) << ','
                 << detail::format_double(etvo_result.eto[k]) << ','
                 << detail::format_double(static_cast<double>(lag[k]) * period) << ','
                 << detail::format_double(etvo_result.evo[k]) << ',' << detail::format_double(same_time.input()[k])
                 << ',' << detail::format_double(output[k]) << '\n';
        }
        if (!file) throw Error(ErrorCode::io_error, "write to " + opts.out.string() + " failed");

        std::vector<int> lag_bins(lag.begin(), lag.end());
        out << "ETVO adjustments " << count_adjustments(etvo_result.w) << ", DTW adjustments "
            << count_adjustments(lag_bins) << ", DTW cost " << dtw.cost << '\n';
        return int{exit_ok};
    });
}

struct VerifySummary {
    std::size_t trials = 0;
    std::size_t failures = 0;
    double max_oracle_discrepancy = 0.0;    // relative
    double max_reference_discrepancy = 0.0; // relative
};

inline double relative_gap(double a, double b) {
    if (a == b) return 0.0;
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

/// Seeded random instances (amplitudes in [-1, 1], penalties in [0, 1],
/// no slack) checked against the exhaustive oracle and the reference pass.
inline VerifySummary verify_trials(const VerifyOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> amplitude(-1.0, 1.0);
    std::uniform_real_distribution<double> penalty(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_n(1, opts.n_max);
    std::uniform_int_distribution<int> pick_m(1, opts.m_max);

    VerifySummary summary;
    for (std::size_t t = 0; t < opts.trials; ++t) {
        const std::size_t n = pick_n(rng);
        const int m = pick_m(rng);
        std::vector<double> f(n + static_cast<std::size_t>(m) - 1);
        std::vector<double> g(n);
        for (double& v : f) v = amplitude(rng);
        for (double& v : g) v = amplitude(rng);
        const double p_prop = penalty(rng);
        const double p_fixed = penalty(rng);
        const AlignedPair pair = AlignedPair::from_samples(std::move(f), std::move(g), 0, m);
        const AlignmentConfig cfg = make_config(pair, p_prop, p_fixed, 0.0);

        const DirectionMatrix dm = fast_forward(pair, cfg);
        const ReferenceForward ref = reference_forward(pair, cfg);
        const oracle::BruteForceResult brute = oracle::brute_force_align(pair, cfg);

        const double oracle_gap = relative_gap(dm.total_cost, brute.cost);
        const double reference_gap = relative_gap(dm.total_cost, ref.total_cost);
        summary.max_oracle_discrepancy = std::max(summary.max_oracle_discrepancy, oracle_gap);
        summary.max_reference_discrepancy = std::max(summary.max_reference_discrepancy, reference_gap);
        ++summary.trials;
        if (oracle_gap > 1e-9 || reference_gap > 1e-9) ++summary.failures;
    }
    return summary;
}

inline int run_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opts.trials == 0) throw Error(ErrorCode::invalid_argument, "--trials must be at least 1");
        if (opts.n_max < 1 || opts.m_max < 1) {
            throw Error(ErrorCode::invalid_argument, "--n-max and --m-max must be at least 1");
        }
        if (oracle::count_paths(opts.n_max, opts.m_max) > oracle::max_paths) {
            throw Error(ErrorCode::too_large, "--n-max/--m-max exceed the enumeration budget");
        }
        const VerifySummary s = verify_trials(opts);
        out << "trials " << s.trials << ", failures " << s.failures << ", max relative gap vs oracle "
            << s.max_oracle_discrepancy << ", vs reference " << s.max_reference_discrepancy << '\n';
        out << (s.failures == 0 ? "PASS" : "FAIL") << '\n';
        return s.failures == 0 ? int{exit_ok} : int{exit_failure};
    });
}

} // namespace etvo::cli
