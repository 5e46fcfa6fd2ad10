#pragma once

// JSON and CSV serialisation for reports, channel configurations and packet
// logs. Requires nlohmann/json on the include path.

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "etvo/alignment.hpp"
#include "etvo/channel.hpp"
#include "etvo/csv.hpp"
#include "etvo/error.hpp"
#include "etvo/metrics.hpp"

namespace etvo {

inline nlohmann::json to_json(const AlignmentConfig& cfg, double sample_period) {
    return {
        {"delta_t_min_samples", cfg.delta_t_min_samples},
        {"m_bins", cfg.m_bins},
        {"dt_min_s", cfg.delta_t_min_samples * sample_period},
        {"dt_max_s", (cfg.delta_t_min_samples + cfg.m_bins) * sample_period},
        {"p_prop", cfg.p_prop},
        {"p_fixed", cfg.p_fixed},
        {"p_slack", cfg.p_slack},
    };
}

inline nlohmann::json to_json(const MetricReport& report) {
    return {
        {"edd_s_per_sample", report.edd},
        {"edd_ms_per_s", report.edd_ms_per_s()},
        {"ermse", report.ermse},
        {"rmse_const_delay", report.rmse_constant_delay},
        {"best_const_delay_s", report.best_constant_delay},
        {"n_adjustments", report.n_adjustments},
        {"config", to_json(report.config_echo, report.sample_period)},
    };
}

inline nlohmann::json to_json(const ChannelConfig& cfg) {
    nlohmann::json j = {
        {"mean_latency", cfg.mean_latency},
        {"jitter_std", cfg.jitter_std},
        {"jitter_correlation", cfg.jitter_correlation},
        {"ge_p", cfg.ge_p},
        {"ge_r", cfg.ge_r},
        {"loss_in_bad", cfg.loss_in_bad},
        {"deadband_fraction", cfg.deadband_fraction},
        {"seed", cfg.seed},
    };
    if (cfg.awgn_snr_db) {
        j["awgn_snr_db"] = *cfg.awgn_snr_db;
    } else {
        j["awgn_snr_db"] = "off";
    }
    return j;
}

/// Missing keys keep their defaults (no impairment); unknown keys are rejected.
inline ChannelConfig channel_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::parse_error, "channel config must be a JSON object");
    }
    static const std::set<std::string> known = {"mean_latency", "jitter_std",       "jitter_correlation",
                                                "ge_p",         "ge_r",             "loss_in_bad",
                                                "deadband_fraction", "awgn_snr_db", "seed"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw Error(ErrorCode::parse_error, "unknown channel config key `" + key + "`");
        }
    }
    ChannelConfig cfg;
    auto number = [&](const char* key, double& out) {
        if (!j.contains(key)) return;
        if (!j.at(key).is_number()) throw Error(ErrorCode::parse_error, std::string("`") + key + "` must be a number");
        out = j.at(key).get<double>();
    };
    number("mean_latency", cfg.mean_latency);
    number("jitter_std", cfg.jitter_std);
    number("jitter_correlation", cfg.jitter_correlation);
    number("ge_p", cfg.ge_p);
    number("ge_r", cfg.ge_r);
    number("loss_in_bad", cfg.loss_in_bad);
    number("deadband_fraction", cfg.deadband_fraction);
    if (j.contains("awgn_snr_db")) {
        const auto& snr = j.at("awgn_snr_db");
        if (snr.is_number()) {
            cfg.awgn_snr_db = snr.get<double>();
        } else if (!(snr.is_null() || (snr.is_string() && snr.get<std::string>() == "off"))) {
            throw Error(ErrorCode::parse_error, "`awgn_snr_db` must be a number, null or \"off\"");
        }
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) {
            throw Error(ErrorCode::parse_error, "`seed` must be a non-negative integer");
        }
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    cfg.validate();
    return cfg;
}

inline ChannelConfig load_channel_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) throw Error(ErrorCode::file_not_found, path.string());
        throw Error(ErrorCode::io_error, "cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
    }
    return channel_config_from_json(j);
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::io_error, "write to " + path.string() + " failed");
}

/// `send_time,arrival_time,value,status`; arrival_time is empty unless delivered.
inline void save_packet_log(const PacketLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
    out << "send_time,arrival_time,value,status\n";
    for (const auto& rec : log) {
        out << detail::format_double(rec.send_time) << ',';
        if (rec.status == PacketStatus::delivered) out << detail::format_double(rec.arrival_time);
        out << ',' << detail::format_double(rec.value) << ',' << to_string(rec.status) << '\n';
    }
    if (!out) throw Error(ErrorCode::io_error, "write to " + path.string() + " failed");
}

} // namespace etvo
