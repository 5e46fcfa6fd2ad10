#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "etvo/error.hpp"

namespace etvo {

/// Uniformly sampled, real-valued time series. Immutable after construction.
class Signal {
public:
    Signal(std::vector<double> samples, double sample_period, double start_time = 0.0)
        : samples_(std::move(samples)), sample_period_(sample_period), start_time_(start_time) {
        if (samples_.empty()) {
            throw Error(ErrorCode::empty_signal, "signal must contain at least one sample");
        }
        if (!(sample_period_ > 0.0) || !std::isfinite(sample_period_)) {
            throw Error(ErrorCode::invalid_signal, "sample period must be finite and > 0");
        }
        if (!std::isfinite(start_time_)) {
            throw Error(ErrorCode::invalid_signal, "start time must be finite");
        }
        for (std::size_t k = 0; k < samples_.size(); ++k) {
            if (!std::isfinite(samples_[k])) {
                throw Error(ErrorCode::invalid_signal, "sample " + std::to_string(k) + " is not finite");
            }
        }
    }

    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] double sample_period() const noexcept { return sample_period_; }
    [[nodiscard]] double start_time() const noexcept { return start_time_; }
    [[nodiscard]] double operator[](std::size_t k) const noexcept { return samples_[k]; }
    [[nodiscard]] double time_at(std::size_t k) const noexcept {
        return start_time_ + static_cast<double>(k) * sample_period_;
    }

private:
    std::vector<double> samples_;
    double sample_period_;
    double start_time_;
};

/// Mean of squared amplitudes.
[[nodiscard]] inline double signal_power(std::span<const double> x) noexcept {
    double sum = 0.0;
    for (double v : x) sum += v * v;
    return x.empty() ? 0.0 : sum / static_cast<double>(x.size());
}

/// Input/output slices prepared for delay-bin alignment.
///
/// The output `g` has N samples; the input `f` has N + M - 1 samples and starts
/// (delta_t_min_samples + M - 1) periods before the output, so that output
/// sample i at delay bin j is compared with f[i - j + M - 1].
class AlignedPair {
public:
    AlignedPair(Signal input, Signal output, int delta_t_min_samples, int m_bins)
        : input_(std::move(input)), output_(std::move(output)),
          delta_t_min_samples_(delta_t_min_samples), m_bins_(m_bins) {
        if (m_bins_ < 1) {
            throw Error(ErrorCode::invalid_argument, "m_bins must be >= 1");
        }
        if (input_.size() != output_.size() + static_cast<std::size_t>(m_bins_) - 1) {
            throw Error(ErrorCode::length_mismatch,
                        "input length " + std::to_string(input_.size()) + " != output length " +
                            std::to_string(output_.size()) + " + M - 1 (M=" + std::to_string(m_bins_) + ")");
        }
        const double period = output_.sample_period();
        if (std::abs(input_.sample_period() - period) > 1e-9 * period) {
            throw Error(ErrorCode::incompatible_sampling, "input and output sample periods differ");
        }
        const double expected_start =
            output_.start_time() - static_cast<double>(delta_t_min_samples_ + m_bins_ - 1) * period;
        if (std::abs(input_.start_time() - expected_start) > 1e-6 * period) {
            throw Error(ErrorCode::incompatible_sampling,
                        "input start time does not match output start - (dT_min + (M-1)T)");
        }
    }

    /// Builds a pair from raw sample vectors, placing the output at t = 0.
    static AlignedPair from_samples(std::vector<double> input, std::vector<double> output,
                                    int delta_t_min_samples, int m_bins, double sample_period = 1.0) {
        const double input_start = -static_cast<double>(delta_t_min_samples + m_bins - 1) * sample_period;
        return AlignedPair(Signal(std::move(input), sample_period, input_start),
                           Signal(std::move(output), sample_period, 0.0), delta_t_min_samples, m_bins);
    }

    [[nodiscard]] const Signal& input() const noexcept { return input_; }
    [[nodiscard]] const Signal& output() const noexcept { return output_; }
    [[nodiscard]] int delta_t_min_samples() const noexcept { return delta_t_min_samples_; }
    [[nodiscard]] int m_bins() const noexcept { return m_bins_; }
    [[nodiscard]] std::size_t n() const noexcept { return output_.size(); }
    [[nodiscard]] double sample_period() const noexcept { return output_.sample_period(); }

    /// Input sample compared with output sample i at delay bin j.
    [[nodiscard]] double input_at(std::size_t i, int j) const noexcept {
        return input_[i + static_cast<std::size_t>(m_bins_ - 1 - j)];
    }

    /// Delay of bin j, in seconds.
    [[nodiscard]] double bin_delay(int j) const noexcept {
        return static_cast<double>(delta_t_min_samples_ + j) * sample_period();
    }

private:
    Signal input_;
    Signal output_;
    int delta_t_min_samples_;
    int m_bins_;
};

enum class PadPolicy { error, edge };

namespace detail {

/// Rounds seconds to a whole number of periods, rejecting anything more than
/// 1e-9 s away from the grid.
inline long long to_sample_count(double seconds, double period, const char* what) {
    const double ratio = seconds / period;
    const double rounded = std::round(ratio);
    if (std::abs(seconds - rounded * period) > 1e-9) {
        throw Error(ErrorCode::range_not_multiple_of_period,
                    std::string(what) + " = " + std::to_string(seconds) +
                        " s is not a multiple of the sample period " + std::to_string(period) + " s");
    }
    return static_cast<long long>(rounded);
}

} // namespace detail

/// Slices (and optionally edge-pads) `input` so that it covers every delay in
/// [delta_t_min, delta_t_max) for each sample of `output`.
inline AlignedPair make_aligned_pair(const Signal& input, const Signal& output, double delta_t_min,
                                     double delta_t_max, PadPolicy pad = PadPolicy::error) {
    const double period = output.sample_period();
    if (std::abs(input.sample_period() - period) > 1e-9 * period) {
        throw Error(ErrorCode::incompatible_sampling,
                    "input period " + std::to_string(input.sample_period()) + " s != output period " +
                        std::to_string(period) + " s");
    }
    if (!(delta_t_max > delta_t_min)) {
        throw Error(ErrorCode::invalid_argument, "delta_t_max must exceed delta_t_min");
    }
    const long long dmin = detail::to_sample_count(delta_t_min, period, "delta_t_min");
    const long long dmax = detail::to_sample_count(delta_t_max, period, "delta_t_max");
    const long long m = dmax - dmin;
    if (m < 1) {
        throw Error(ErrorCode::invalid_argument, "delay window narrower than one sample period");
    }

    // Index (relative to the input's first sample) of the first required input sample.
    const double first_needed_time = output.start_time() - static_cast<double>(dmin + m - 1) * period;
    const double offset_exact = (first_needed_time - input.start_time()) / period;
    const double offset_rounded = std::round(offset_exact);
    if (std::abs(offset_exact - offset_rounded) * period > 1e-9) {
        throw Error(ErrorCode::incompatible_sampling, "input and output sample grids are not aligned");
    }
    const long long first = static_cast<long long>(offset_rounded);
    const long long needed = static_cast<long long>(output.size()) + m - 1;
    const long long available = static_cast<long long>(input.size());

    const long long missing_lead = first < 0 ? -first : 0;
    const long long missing_trail = std::max(0LL, first + needed - available);
    if ((missing_lead > 0 || missing_trail > 0) && pad == PadPolicy::error) {
        throw Error(ErrorCode::insufficient_coverage,
                    "input is missing " + std::to_string(missing_lead) + " leading and " +
                        std::to_string(missing_trail) + " trailing samples for the requested window");
    }

    std::vector<double> sliced(static_cast<std::size_t>(needed));
    for (long long k = 0; k < needed; ++k) {
        const long long src = std::clamp(first + k, 0LL, available - 1);
        sliced[static_cast<std::size_t>(k)] = input[static_cast<std::size_t>(src)];
    }
    return AlignedPair(Signal(std::move(sliced), period, first_needed_time), output, static_cast<int>(dmin),
                       static_cast<int>(m));
}

} // namespace etvo
