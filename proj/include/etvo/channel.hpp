#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "etvo/error.hpp"
#include "etvo/signal.hpp"

namespace etvo {

/// Network impairments applied by `simulate`. Times are in seconds.
struct ChannelConfig {
    double mean_latency = 0.0;
    double jitter_std = 0.0;
    double jitter_correlation = 0.0;
    double ge_p = 0.0;        // Good -> Bad
    double ge_r = 1.0;        // Bad -> Good
    double loss_in_bad = 1.0;
    double deadband_fraction = 0.0;
    std::optional<double> awgn_snr_db; // nullopt = off
    std::uint64_t seed = 0;

    void validate() const {
        const auto prob = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
        if (!(std::isfinite(mean_latency) && mean_latency >= 0.0)) {
            throw Error(ErrorCode::invalid_config, "mean_latency must be >= 0");
        }
        if (!(std::isfinite(jitter_std) && jitter_std >= 0.0)) {
            throw Error(ErrorCode::invalid_config, "jitter_std must be >= 0");
        }
        if (!(std::isfinite(jitter_correlation) && jitter_correlation >= 0.0 && jitter_correlation < 1.0)) {
            throw Error(ErrorCode::invalid_config, "jitter_correlation must lie in [0, 1)");
        }
        if (!prob(ge_p) || !prob(ge_r) || !prob(loss_in_bad)) {
            throw Error(ErrorCode::invalid_config, "ge_p, ge_r and loss_in_bad must lie in [0, 1]");
        }
        if (!(std::isfinite(deadband_fraction) && deadband_fraction >= 0.0)) {
            throw Error(ErrorCode::invalid_config, "deadband_fraction must be >= 0");
        }
        if (awgn_snr_db && !std::isfinite(*awgn_snr_db)) {
            throw Error(ErrorCode::invalid_config, "awgn_snr_db must be finite");
        }
    }
};

enum class PacketStatus { delivered, lost, suppressed };

inline const char* to_string(PacketStatus s) noexcept {
    switch (s) {
        case PacketStatus::delivered: return "delivered";
        case PacketStatus::lost: return "lost";
        case PacketStatus::suppressed: return "suppressed";
    }
    return "unknown";
}

struct PacketRecord {
    double send_time = 0.0;
    double arrival_time = std::numeric_limits<double>::quiet_NaN(); // NaN unless delivered
    double value = 0.0;
    PacketStatus status = PacketStatus::delivered;
};

using PacketLog = std::vector<PacketRecord>;

namespace detail {

// Each impairment stage draws from its own stream so that toggling one stage
// leaves the others' random sequences untouched.
enum class Stream : std::uint64_t { loss = 1, jitter = 2, awgn = 3 };

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 stream_rng(std::uint64_t seed, Stream stream) {
    return std::mt19937_64(splitmix64(seed ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL)));
}

} // namespace detail

/// Gilbert-Elliott losses (true = lost). The chain starts in Good; packets in
/// Bad are lost with probability `loss_in_bad`.
[[nodiscard]] inline std::vector<bool> ge_loss_sequence(std::size_t n, double p, double r, double loss_in_bad,
                                                        std::uint64_t seed) {
    auto rng = detail::stream_rng(seed, detail::Stream::loss);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<bool> lost(n, false);
    bool bad = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double u_loss = uniform(rng);
        const double u_move = uniform(rng);
        lost[k] = bad && u_loss < loss_in_bad;
        bad = bad ? !(u_move < r) : (u_move < p);
    }
    return lost;
}

/// Per-packet one-way delays from a Gaussian AR(1) process whose stationary
/// standard deviation is `jitter_std` for any correlation; negative draws
/// are clamped to zero after the recursion.
[[nodiscard]] inline std::vector<double> jitter_sequence(std::size_t n, double mean_latency, double jitter_std,
                                                         double correlation, std::uint64_t seed) {
    auto rng = detail::stream_rng(seed, detail::Stream::jitter);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double innovation = std::sqrt(1.0 - correlation * correlation) * jitter_std;
    std::vector<double> delays(n, mean_latency);
    double excursion = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double z = normal(rng);
        excursion = k == 0 ? jitter_std * z : correlation * excursion + innovation * z;
        delays[k] = std::max(0.0, mean_latency + excursion);
    }
    return delays;
}

/// Weber-fraction deadband: a sample is sent when it differs from the last
/// sent value by more than `fraction` of that value. Sample 0 is always sent.
[[nodiscard]] inline std::vector<bool> apply_deadband(std::span<const double> x, double fraction) {
    std::vector<bool> sent(x.size(), false);
    if (x.empty()) return sent;
    sent[0] = true;
    double last = x[0];
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (std::abs(x[k] - last) > fraction * std::abs(last)) {
            sent[k] = true;
            last = x[k];
        }
    }
    return sent;
}

[[nodiscard]] inline std::vector<bool> apply_deadband(const Signal& signal, double fraction) {
    return apply_deadband(signal.samples(), fraction);
}

/// Adds white Gaussian noise at the requested SNR relative to the signal's
/// mean power.
[[nodiscard]] inline Signal add_awgn(const Signal& signal, double snr_db, std::uint64_t seed) {
    const double power = signal_power(signal.samples());
    if (!(power > 0.0)) {
        throw Error(ErrorCode::zero_power_signal, "cannot set an SNR for a zero-power signal");
    }
    const double noise_std = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    auto rng = detail::stream_rng(seed, detail::Stream::awgn);
    std::normal_distribution<double> normal(0.0, noise_std);
    std::vector<double> noisy(signal.samples().begin(), signal.samples().end());
    for (double& v : noisy) v += normal(rng);
    return Signal(std::move(noisy), signal.sample_period(), signal.start_time());
}

/// Delay window the simulated output must support, in seconds.
struct OutputWindow {
    double delta_t_min = 0.0;
    double delta_t_max = 0.0;
};

struct SimulationResult {
    Signal output;
    PacketLog log;
};

/// Sends every input sample as a packet through deadband, Gilbert-Elliott
/// loss and AR(1) delay, then reconstructs the output at the input rate with a
/// zero-order hold that only ever moves to newer packets. AWGN is added last.
///
/// The output covers exactly the sample times for which the input can be
/// paired over `window`.
[[nodiscard]] inline SimulationResult simulate(const Signal& input, const ChannelConfig& cfg,
                                               const OutputWindow& window) {
    cfg.validate();
    const double period = input.sample_period();
    const long long dmin = detail::to_sample_count(window.delta_t_min, period, "delta_t_min");
    const long long dmax = detail::to_sample_count(window.delta_t_max, period, "delta_t_max");
    if (dmax <= dmin) {
        throw Error(ErrorCode::invalid_argument, "delta_t_max must exceed delta_t_min");
    }
    const long long m = dmax - dmin;
    const auto n = static_cast<long long>(input.size());
    const long long first_slot = dmin + m - 1;
    const long long last_slot = n - 1 + dmin;
    if (last_slot < first_slot) {
        throw Error(ErrorCode::insufficient_coverage,
                    "input of " + std::to_string(n) + " samples is shorter than the delay window");
    }

    const auto un = static_cast<std::size_t>(n);
    const std::vector<bool> sent = cfg.deadband_fraction > 0.0 ? apply_deadband(input, cfg.deadband_fraction)
                                                               : std::vector<bool>(un, true);
    const std::vector<bool> lost = ge_loss_sequence(un, cfg.ge_p, cfg.ge_r, cfg.loss_in_bad, cfg.seed);
    const std::vector<double> delays =
        jitter_sequence(un, cfg.mean_latency, cfg.jitter_std, cfg.jitter_correlation, cfg.seed);

    SimulationResult result{Signal({0.0}, period), {}};
    result.log.resize(un);
    struct Arrival {
        double slot;
        std::size_t index;
    };
    std::vector<Arrival> arrivals;
    arrivals.reserve(un);
    for (std::size_t k = 0; k < un; ++k) {
        PacketRecord& rec = result.log[k];
        rec.send_time = input.time_at(k);
        rec.value = input[k];
        if (!sent[k]) {
            rec.status = PacketStatus::suppressed;
        } else if (lost[k]) {
            rec.status = PacketStatus::lost;
        } else {
            rec.status = PacketStatus::delivered;
            rec.arrival_time = rec.send_time + delays[k];
            arrivals.push_back({static_cast<double>(k) + delays[k] / period, k});
        }
    }
    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const Arrival& a, const Arrival& b) { return a.slot < b.slot; });

    // Slots are in input-sample units relative to input sample 0.
    constexpr double slot_tolerance = 1e-9;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(last_slot - first_slot + 1));
    std::size_t next = 0;
    long long newest = -1;
    for (long long slot = first_slot; slot <= last_slot; ++slot) {
        while (next < arrivals.size() && arrivals[next].slot <= static_cast<double>(slot) + slot_tolerance) {
            newest = std::max(newest, static_cast<long long>(arrivals[next].index));
            ++next;
        }
        out.push_back(newest >= 0 ? input[static_cast<std::size_t>(newest)] : input[0]);
    }

    Signal output(std::move(out), period, input.start_time() + static_cast<double>(first_slot) * period);
    if (cfg.awgn_snr_db) {
        output = add_awgn(output, *cfg.awgn_snr_db, cfg.seed);
    }
    result.output = std::move(output);
    return result;
}

} // namespace etvo
