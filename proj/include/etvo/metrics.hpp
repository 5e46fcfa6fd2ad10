#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "etvo/alignment.hpp"
#include "etvo/error.hpp"
#include "etvo/signal.hpp"

namespace etvo {

/// Effective delay-derivative: mean absolute first difference of the ETO
/// series, in seconds of delay change per sample interval.
[[nodiscard]] inline double edd(std::span<const double> eto) {
    if (eto.size() < 2) {
        throw Error(ErrorCode::too_short, "EDD needs at least two samples");
    }
    double sum = 0.0;
    for (std::size_t k = 1; k < eto.size(); ++k) sum += std::abs(eto[k] - eto[k - 1]);
    return sum / static_cast<double>(eto.size() - 1);
}

/// Effective RMSE: square root of the mean EVO.
[[nodiscard]] inline double ermse(std::span<const double> evo) {
    if (evo.empty()) {
        throw Error(ErrorCode::too_short, "ERMSE needs at least one sample");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < evo.size(); ++k) {
        if (!(evo[k] >= 0.0)) {
            throw Error(ErrorCode::negative_evo, "EVO[" + std::to_string(k) + "] = " + std::to_string(evo[k]));
        }
        sum += evo[k];
    }
    return std::sqrt(sum / static_cast<double>(evo.size()));
}

struct ConstantDelayFit {
    int bin = 0;
    double delay = 0.0; // seconds
    double rmse = 0.0;
};

/// Best single delay bin for the whole pair; ties go to the smaller delay.
[[nodiscard]] inline ConstantDelayFit best_constant_delay_rmse(const AlignedPair& pair) {
    ConstantDelayFit best;
    double best_sum = 0.0;
    for (int j = 0; j < pair.m_bins(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < pair.n(); ++i) sum = sum + delta(pair, i, j);
        if (j == 0 || sum < best_sum) {
            best_sum = sum;
            best.bin = j;
        }
    }
    best.delay = pair.bin_delay(best.bin);
    best.rmse = std::sqrt(best_sum / static_cast<double>(pair.n()));
    return best;
}

/// RMSE of the pair at one fixed delay bin.
[[nodiscard]] inline double rmse_at_bin(const AlignedPair& pair, int bin) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pair.n(); ++i) sum += delta(pair, i, bin);
    return std::sqrt(sum / static_cast<double>(pair.n()));
}

struct TunedPenalties {
    double p_prop = 0.0;
    double p_fixed = 0.0;
    double p_slack = 0.0;
    /// Set when the signal never moves, so every penalty collapses to zero.
    bool degenerate = false;
};

/// Penalties from the signal's mean absolute velocity: P_prop = T * mean|dx/dt|,
/// P_fixed = 2 P_prop, P_slack = P_prop.
[[nodiscard]] inline TunedPenalties auto_tune(const Signal& signal) {
    if (signal.size() < 2) {
        throw Error(ErrorCode::too_short, "auto-tuning needs at least two samples");
    }
    const double period = signal.sample_period();
    double speed_sum = 0.0;
    for (std::size_t k = 1; k < signal.size(); ++k) speed_sum += std::abs(signal[k] - signal[k - 1]) / period;
    const double mean_speed = speed_sum / static_cast<double>(signal.size() - 1);

    TunedPenalties tuned;
    tuned.p_prop = period * mean_speed;
    tuned.p_fixed = 2.0 * tuned.p_prop;
    tuned.p_slack = tuned.p_prop;
    tuned.degenerate = !(tuned.p_prop > 0.0);
    return tuned;
}

struct MetricReport {
    double edd = 0.0;                 // s per sample interval
    double ermse = 0.0;               // amplitude units
    double rmse_constant_delay = 0.0; // amplitude units
    double best_constant_delay = 0.0; // s
    std::size_t n_adjustments = 0;
    AlignmentConfig config_echo;
    double sample_period = 0.0;

    /// EDD as milliseconds of delay change per second of signal.
    [[nodiscard]] double edd_ms_per_s() const noexcept {
        return sample_period > 0.0 ? edd / sample_period * 1000.0 : 0.0;
    }
};

[[nodiscard]] inline MetricReport make_report(const AlignedPair& pair, const AlignmentConfig& cfg,
                                              const AlignmentResult& result) {
    MetricReport report;
    report.edd = result.eto.size() >= 2 ? edd(result.eto) : 0.0;
    report.ermse = ermse(result.evo);
    const ConstantDelayFit fit = best_constant_delay_rmse(pair);
    report.rmse_constant_delay = fit.rmse;
    report.best_constant_delay = fit.delay;
    report.n_adjustments = count_adjustments(result.w);
    report.config_echo = cfg;
    report.sample_period = pair.sample_period();
    return report;
}

} // namespace etvo
