#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace etvo::cli;

void add_window_flags(CLI::App* cmd, WindowOptions& window, bool with_pad) {
    cmd->add_option("--dt-min", window.dt_min, "Smallest delay searched, seconds")->capture_default_str();
    cmd->add_option("--dt-max", window.dt_max, "End of the delay window (exclusive), seconds")->capture_default_str();
    if (with_pad) {
        const std::map<std::string, etvo::PadPolicy> pads{{"error", etvo::PadPolicy::error},
                                                          {"edge", etvo::PadPolicy::edge}};
        cmd->add_option("--pad", window.pad, "Missing input coverage: error or edge")
            ->transform(CLI::CheckedTransformer(pads, CLI::ignore_case));
    }
}

void add_penalty_flags(CLI::App* cmd, PenaltyOptions& p) {
    cmd->add_option("--p-prop", p.p_prop, "Penalty per delay bin changed");
    cmd->add_option("--p-fixed", p.p_fixed, "Penalty per adjustment (default 2 * p-prop)");
    cmd->add_option("--p-slack", p.p_slack, "Hysteresis per adjustment (default p-prop)");
    cmd->add_flag("--auto-tune", p.auto_tune, "Derive penalties from the input signal");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-aware comparison of sampled signals"};
    app.require_subcommand(1);

    AnalyzeOptions analyze;
    auto* a = app.add_subcommand("analyze", "Estimate per-sample time and value offsets");
    a->add_option("input", analyze.input, "Input CSV (time,value)")->required();
    a->add_option("output", analyze.output, "Output CSV (time,value)")->required();
    a->add_option("--report", analyze.report, "Report JSON path")->capture_default_str();
    a->add_option("--series", analyze.series, "Per-sample CSV path")->capture_default_str();
    add_window_flags(a, analyze.window, true);
    add_penalty_flags(a, analyze.penalties);

    SimulateOptions simulate;
    auto* s = app.add_subcommand("simulate", "Pass an input signal through a simulated network channel");
    s->add_option("input", simulate.input, "Input CSV (time,value)")->required();
    s->add_option("channel", simulate.channel, "Channel config JSON")->required();
    s->add_option("--seed", simulate.seed, "Override the config seed");
    s->add_option("--output", simulate.output, "Output CSV path")->capture_default_str();
    s->add_option("--packets", simulate.packets, "Packet log CSV path")->capture_default_str();
    add_window_flags(s, simulate.window, false);

    SweepOptions sweep;
    auto* w = app.add_subcommand("sweep", "EDD and ERMSE across a grid of P_prop values");
    w->add_option("input", sweep.input, "Input CSV (time,value)")->required();
    auto* channel_opt = w->add_option("--channel", sweep.channel, "Channel config JSON to simulate the output");
    w->add_option("--output", sweep.output, "Recorded output CSV")->excludes(channel_opt);
    w->add_option("--p-prop-grid", sweep.grid, "log:a:b:n or lin:a:b:n")->capture_default_str();
    w->add_option("--p-fixed", sweep.p_fixed, "Fixed P_fixed (default 2 * p_prop)");
    w->add_option("--p-slack", sweep.p_slack, "Fixed P_slack (default p_prop)");
    w->add_option("--seed", sweep.seed, "Override the channel seed");
    w->add_option("--out", sweep.out, "Sweep CSV path")->capture_default_str();
    add_window_flags(w, sweep.window, true);

    CompareOptions compare;
    auto* c = app.add_subcommand("compare", "Per-sample offsets from ETVO and DTW side by side");
    c->add_option("input", compare.input, "Input CSV (time,value)")->required();
    c->add_option("output", compare.output, "Output CSV (time,value)")->required();
    c->add_option("--out", compare.out, "Comparison CSV path")->capture_default_str();
    add_window_flags(c, compare.window, true);
    add_penalty_flags(c, compare.penalties);

    VerifyOptions verify;
    auto* v = app.add_subcommand("verify", "Check the alignment against exhaustive search");
    v->add_option("--trials", verify.trials, "Number of random instances")->capture_default_str();
    v->add_option("--seed", verify.seed, "Random seed")->capture_default_str();
    v->add_option("--n-max", verify.n_max, "Largest N")->capture_default_str()->check(CLI::PositiveNumber);
    v->add_option("--m-max", verify.m_max, "Largest M")->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input_error;
    }

    if (a->parsed()) return run_analyze(analyze, std::cout, std::cerr);
    if (s->parsed()) return run_simulate(simulate, std::cout, std::cerr);
    if (w->parsed()) return run_sweep(sweep, std::cout, std::cerr);
    if (c->parsed()) return run_compare(compare, std::cout, std::cerr);
    return run_verify(verify, std::cout, std::cerr);
}
