// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "etvo/etvo.hpp"
#include "support/synthetic.hpp"

using namespace etvo;
using etvo::testing::uniform_samples;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool rel_close(double a, double b, double tol) {
    return a == b || std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

double mean_of(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev_of(const std::vector<double>& x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size()));
}

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// Small random instances shared by the optimality and limit checks.
struct SmallInstance {
    AlignedPair pair;
    double p_prop;
    double p_fixed;
};

std::vector<SmallInstance> small_instances(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> penalty(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_n(1, 10);
    std::uniform_int_distribution<int> pick_m(1, 4);
    std::vector<SmallInstance> out;
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        const std::size_t n = pick_n(rng);
        const int m = pick_m(rng);
        auto f = uniform_samples(rng, n + static_cast<std::size_t>(m) - 1);
        auto g = uniform_samples(rng, n);
        const double pp = penalty(rng);
        const double pf = penalty(rng);
        out.push_back({AlignedPair::from_samples(std::move(f), std::move(g), 0, m), pp, pf});
    }
    return out;
}

struct MediumInstance {
    AlignedPair pair;
    AlignmentConfig cfg;
};

std::vector<MediumInstance> medium_instances(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> penalty(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_n(1, 200);
    std::uniform_int_distribution<int> pick_m(1, 16);
    std::uniform_int_distribution<int> pick_dmin(-8, 8);
    std::vector<MediumInstance> out;
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        const std::size_t n = pick_n(rng);
        const int m = pick_m(rng);
        auto f = uniform_samples(rng, n + static_cast<std::size_t>(m) - 1);
        auto g = uniform_samples(rng, n);
        AlignedPair pair = AlignedPair::from_samples(std::move(f), std::move(g), pick_dmin(rng), m);
        const double pp = penalty(rng);
        const double pf = penalty(rng);
        const double ps = penalty(rng);
        const AlignmentConfig cfg = make_config(pair, pp, pf, ps);
        out.push_back({std::move(pair), cfg});
    }
    return out;
}

constexpr double period = 0.001;
constexpr std::size_t long_trace = 12'000; // 12 s at 1 kHz

Signal simulated_output(const Signal& input, ChannelConfig cfg, OutputWindow window) {
    return simulate(input, cfg, window).output;
}

ChannelConfig jitter_channel(double mean, double jitter, std::uint64_t seed) {
    ChannelConfig cfg;
    cfg.mean_latency = mean;
    cfg.jitter_std = jitter;
    cfg.jitter_correlation = 0.9;
    cfg.seed = seed;
    return cfg;
}

// P_prop grid for the regularisation checks: five decades ending one decade
// above the auto-tuned value.
std::vector<double> penalty_grid(const Signal& input, std::size_t points) {
    const double base = auto_tune(input).p_prop;
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k) {
        grid[k] = base * std::pow(10.0, -4.0 + 5.0 * static_cast<double>(k) / static_cast<double>(points - 1));
    }
    return grid;
}

Outcome oracle_optimality() {
    const auto start = Clock::now();
    const auto instances = small_instances(1000, 101);
    double worst = 0.0;
    std::size_t bad = 0;
    for (const auto& inst : instances) {
        const AlignmentConfig cfg = make_config(inst.pair, inst.p_prop, inst.p_fixed, 0.0);
        const double fast = fast_forward(inst.pair, cfg).total_cost;
        const double brute = oracle::brute_force_align(inst.pair, cfg).cost;
        worst = std::max(worst, cli::relative_gap(fast, brute));
        bad += !rel_close(fast, brute, 1e-9);
    }
    const double elapsed = seconds_since(start);
    return {bad == 0 && elapsed < 60.0,
            fmt("1000 instances, %zu mismatches, max rel gap %.3g, %.2f s", bad, worst, elapsed)};
}

Outcome streaming_reference_equivalence() {
    std::size_t bad_cost = 0;
    std::size_t bad_path = 0;
    double worst = 0.0;
    for (const auto& inst : medium_instances(250, 202)) {
        const DirectionMatrix dm = fast_forward(inst.pair, inst.cfg);
        const ReferenceForward ref = reference_forward(inst.pair, inst.cfg);
        worst = std::max(worst, cli::relative_gap(dm.total_cost, ref.total_cost));
        bad_cost += !rel_close(dm.total_cost, ref.total_cost, 1e-9);
        bad_path += backtrack(dm, inst.cfg, 1.0).w != reference_path(ref, inst.cfg, 1.0).w;
    }
    return {bad_cost == 0 && bad_path == 0,
            fmt("250 instances, %zu cost and %zu path mismatches, max rel gap %.3g", bad_cost, bad_path, worst)};
}

Outcome pure_delay_recovery() {
    const Signal input = etvo::testing::haptic_trace(3000, period, 303);
    const OutputWindow window{0.0, 0.040};
    std::size_t failures = 0;
    int checked = 0;
    for (int d = 0; d < 40; ++d) {
        ChannelConfig cfg;
        cfg.mean_latency = d * period;
        const Signal output = simulated_output(input, cfg, window);
        const AlignedPair pair = make_aligned_pair(input, output, window.delta_t_min, window.delta_t_max);
        const TunedPenalties tuned = auto_tune(input);
        const AlignmentResult r = align(pair, make_config(pair, tuned.p_prop, tuned.p_fixed, tuned.p_slack));
        const double expected = static_cast<double>(pair.delta_t_min_samples() + d) * period;
        const bool eto_ok = std::all_of(r.eto.begin(), r.eto.end(), [&](double e) { return e == expected; });
        failures += !(eto_ok && edd(r.eto) == 0.0 && ermse(r.evo) == 0.0);
        ++checked;
    }
    return {failures == 0, fmt("%d delays in [0, 40) ms, %zu not recovered exactly", checked, failures)};
}

Outcome dtw_limit() {
    std::size_t bad = 0;
    double worst = 0.0;
    for (const auto& inst : small_instances(1000, 101)) {
        const AlignmentConfig cfg = make_config(inst.pair, 0.0, 0.0, 0.0);
        const double distance = align(inst.pair, cfg).distance_cost;
        const double brute = oracle::brute_force_align(inst.pair, cfg).cost;
        worst = std::max(worst, cli::relative_gap(distance, brute));
        bad += !rel_close(distance, brute, 1e-9);
    }
    return {bad == 0, fmt("1000 instances, %zu mismatches, max rel gap %.3g", bad, worst)};
}

Outcome constant_delay_limit() {
    std::size_t bad = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Signal input = etvo::testing::haptic_trace(5000, period, 500 + seed);
        const OutputWindow window{0.0, 0.06};
        const Signal output = simulated_output(input, jitter_channel(0.015, 0.010, seed), window);
        const AlignedPair pair = make_aligned_pair(input, output, window.delta_t_min, window.delta_t_max);
        const double pp = 1e6 * signal_power(pair.output().samples());
        const AlignmentResult r = align(pair, make_config(pair, pp, 2.0 * pp, pp));
        const double best = best_constant_delay_rmse(pair).rmse;
        const double e = ermse(r.evo);
        worst = std::max(worst, cli::relative_gap(e, best));
        bad += !(edd(r.eto) == 0.0 && rel_close(e, best, 1e-9));
    }
    return {bad == 0, fmt("5 jittered pairs, %zu failures, max rel ERMSE gap %.3g", bad, worst)};
}

Outcome regularization_path() {
    const auto start = Clock::now();
    const Signal input = etvo::testing::haptic_trace(long_trace, period, 606);
    const OutputWindow window{0.0, 0.08};
    const Signal output = simulated_output(input, jitter_channel(0.015, 0.010, 6), window);
    const AlignedPair pair = make_aligned_pair(input, output, window.delta_t_min, window.delta_t_max);
    const auto grid = penalty_grid(input, 20);
    const auto rows = cli::sweep_pair(pair, grid, std::nullopt, std::nullopt);
    std::size_t violations = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const bool ermse_ok = rows[k].ermse >= rows[k - 1].ermse * (1.0 - 1e-9);
        const bool edd_ok = rows[k].edd <= rows[k - 1].edd * (1.0 + 1e-9);
        violations += !(ermse_ok && edd_ok);
    }
    const double elapsed = seconds_since(start);
    return {violations <= 1 && elapsed < 300.0,
            fmt("20 grid points, %zu adjacent violations, EDD %.3g -> %.3g, ERMSE %.3g -> %.3g, %.2f s", violations,
                rows.front().edd, rows.back().edd, rows.front().ermse, rows.back().ermse, elapsed)};
}

Outcome jitter_ordering() {
    const double jitters[] = {0.0, 0.005, 0.010, 0.020};
    const OutputWindow window{0.0, 0.1};
    double mean_edd[4] = {};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Signal input = etvo::testing::haptic_trace(long_trace, period, 700 + seed);
        const auto grid = penalty_grid(input, 20);
        const double p = grid[grid.size() / 2];
        for (int k = 0; k < 4; ++k) {
            const Signal output = simulated_output(input, jitter_channel(0.015, jitters[k], seed), window);
            const AlignedPair pair = make_aligned_pair(input, output, window.delta_t_min, window.delta_t_max);
            const AlignmentResult r = align(pair, make_config(pair, p, 2.0 * p, p));
            mean_edd[k] += edd(r.eto) / 5.0;
        }
    }
    const bool increasing = mean_edd[0] < mean_edd[1] && mean_edd[1] < mean_edd[2] && mean_edd[2] < mean_edd[3];
    return {increasing, fmt("mean EDD [ms/s] at 0/5/10/20 ms jitter: %.3g %.3g %.3g %.3g", mean_edd[0] / period * 1e3,
                            mean_edd[1] / period * 1e3, mean_edd[2] / period * 1e3, mean_edd[3] / period * 1e3)};
}

Outcome noise_resilience() {
    const OutputWindow window{0.0, 0.03};
    double etvo_std = 0.0;
    double dtw_std = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Signal input = etvo::testing::haptic_trace(5000, period, 800 + seed);
        ChannelConfig cfg = jitter_channel(0.015, 0.001, seed);
        cfg.awgn_snr_db = 70.0;
        const Signal output = simulated_output(input, cfg, window);
        const AlignedPair pair = make_aligned_pair(input, output, window.delta_t_min, window.delta_t_max);
        const double scale = signal_power(input.samples());
        const AlignmentResult r = align(pair, make_config(pair, 0.005 * scale, 0.01 * scale, 0.005 * scale));

        const AlignedPair same_time = make_aligned_pair(input, output, 0.0, period);
        const DtwResult dtw = dtw_align(same_time.input(), same_time.output());
        const auto lag = dtw_lag_per_output(dtw, output.size());
        std::vector<double> offsets(lag.size());
        for (std::size_t k = 0; k < lag.size(); ++k) offsets[k] = static_cast<double>(lag[k]) * period;

        etvo_std += stddev_of(r.eto) / 5.0;
        dtw_std += stddev_of(offsets) / 5.0;
    }
    return {etvo_std < 0.25 * dtw_std,
            fmt("mean stddev ETO %.3g ms vs DTW offset %.3g ms", etvo_std * 1e3, dtw_std * 1e3)};
}

Outcome rmse_misleads() {
    // A raised-cosine pulse; y1 is the pulse 12 samples late, y2 is the pulse
    // blurred by a wide moving average but not shifted.
    const std::size_t n = 1000;
    const std::size_t lead = 40;
    std::vector<double> x(n + 2 * lead, 0.0);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = (static_cast<double>(k) - 520.0) / 120.0;
        if (std::abs(t) < 1.0) x[k] = 0.5 * (1.0 + std::cos(M_PI * t));
    }
    const Signal input(x, period, -static_cast<double>(lead) * period);

    std::vector<double> y1(n), y2(n);
    const std::size_t shift = 12;
    const long half = 30;
    for (std::size_t k = 0; k < n; ++k) {
        y1[k] = x[k + lead - shift];
        double acc = 0.0;
        for (long l = -half; l <= half; ++l) acc += x[static_cast<std::size_t>(static_cast<long>(k + lead) + l)];
        y2[k] = acc / static_cast<double>(2 * half + 1);
    }
    auto rmse_vs_input = [&](const std::vector<double>& y) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += (y[k] - x[k + lead]) * (y[k] - x[k + lead]);
        return std::sqrt(s / static_cast<double>(n));
    };
    const TunedPenalties tuned = auto_tune(input);
    auto effective = [&](const std::vector<double>& y) {
        const Signal out(y, period, 0.0);
        const AlignedPair pair = make_aligned_pair(input, out, -0.02, 0.02);
        return ermse(align(pair, make_config(pair, tuned.p_prop, tuned.p_fixed, tuned.p_slack)).evo);
    };
    const double r1 = rmse_vs_input(y1);
    const double r2 = rmse_vs_input(y2);
    const double e1 = effective(y1);
    const double e2 = effective(y2);
    return {r1 > r2 && e1 < e2, fmt("RMSE shifted %.4g vs blurred %.4g; ERMSE shifted %.4g vs blurred %.4g", r1, r2,
                                    e1, e2)};
}

double time_fast_forward(std::size_t n, int repeats) {
    std::mt19937_64 rng(n);
    const int m = 32;
    const AlignedPair pair =
        AlignedPair::from_samples(uniform_samples(rng, n + m - 1), uniform_samples(rng, n), 0, m);
    const AlignmentConfig cfg = make_config(pair, 0.05, 0.1, 0.05);
    std::vector<double> times;
    double sink = 0.0;
    for (int r = 0; r < repeats; ++r) {
        const auto start = Clock::now();
        const DirectionMatrix dm = fast_forward(pair, cfg);
        times.push_back(seconds_since(start));
        sink += dm.total_cost;
    }
    if (sink < 0.0) std::puts("");
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

Outcome linear_scaling() {
    (void)time_fast_forward(10'000, 3); // warm-up
    const double small = time_fast_forward(10'000, 41);
    const double large = time_fast_forward(100'000, 11);
    const double ratio = large / small;
    return {ratio >= 7.0 && ratio <= 13.0,
            fmt("median %.3g ms at N=1e4, %.3g ms at N=1e5, ratio %.2f", small * 1e3, large * 1e3, ratio)};
}

Outcome channel_statistics() {
    const auto lost = ge_loss_sequence(1'000'000, 0.05, 0.5, 1.0, 1111);
    const double rate = static_cast<double>(std::count(lost.begin(), lost.end(), true)) / 1e6;
    const bool loss_ok = std::abs(rate - 0.05 / 0.55) <= 0.003;

    const auto delays = jitter_sequence(1'000'000, 0.015, 0.010, 0.9, 1112);
    const double mean = mean_of(delays);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < delays.size(); ++k) {
        den += (delays[k] - mean) * (delays[k] - mean);
        if (k > 0) num += (delays[k] - mean) * (delays[k - 1] - mean);
    }
    const double rho = num / den;
    const bool rho_ok = std::abs(rho - 0.9) <= 0.01;

    const Signal unit(std::vector<double>(1'000'000, 1.0), period);
    const Signal noisy = add_awgn(unit, 70.0, 1113);
    double noise_power = 0.0;
    for (std::size_t k = 0; k < noisy.size(); ++k) noise_power += (noisy[k] - 1.0) * (noisy[k] - 1.0);
    noise_power /= static_cast<double>(noisy.size());
    const double snr = 10.0 * std::log10(1.0 / noise_power);
    const bool snr_ok = std::abs(snr - 70.0) <= 0.1;

    return {loss_ok && rho_ok && snr_ok,
            fmt("loss rate %.4f (target %.4f), lag-1 autocorrelation %.4f, SNR %.3f dB", rate, 0.05 / 0.55, rho, snr)};
}

Outcome evo_accounting() {
    std::size_t bad = 0;
    double worst = 0.0;
    for (const auto& inst : medium_instances(250, 202)) {
        const AlignmentResult r = align(inst.pair, inst.cfg);
        const double sum = std::accumulate(r.evo.begin(), r.evo.end(), 0.0);
        worst = std::max(worst, cli::relative_gap(sum, r.distance_cost));
        bad += !rel_close(sum, r.distance_cost, 1e-9);
    }
    return {bad == 0, fmt("250 instances, %zu mismatches, max rel gap %.3g", bad, worst)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"oracle optimality", oracle_optimality},
        {"streaming/reference equivalence", streaming_reference_equivalence},
        {"pure-delay recovery", pure_delay_recovery},
        {"zero-penalty limit", dtw_limit},
        {"constant-delay limit", constant_delay_limit},
        {"regularization path monotonicity", regularization_path},
        {"jitter ordering", jitter_ordering},
        {"noise resilience", noise_resilience},
        {"RMSE misleads, ERMSE does not", rmse_misleads},
        {"linear scaling", linear_scaling},
        {"channel statistics", channel_statistics},
        {"EVO accounting", evo_accounting},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome outcome;
        try {
            outcome = criteria[k].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failures += !outcome.pass;
        std::printf("criterion %2zu: %s  %s: %s\n", k + 1, outcome.pass ? "PASS" : "FAIL", criteria[k].first,
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
