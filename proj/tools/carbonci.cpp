// Command-line front end. Talks to the library only through carbonci.h.
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carbonci/carbonci.h"

namespace {

struct Options {
    std::string config = "carbonci.ini";
    std::string region;
    std::vector<double> alphas;
    std::string policy;
    std::optional<std::uint64_t> seed;
    std::string workspace;
    std::string mode;
};

int report_failure(const char* step, cci_status s) {
    std::fprintf(stderr, "carbonci: %s failed [%s, code %d]: %s\n", step, cci_status_name(s), static_cast<int>(s),
                 cci_last_error());
    return static_cast<int>(s) > 0 && static_cast<int>(s) < 100 ? static_cast<int>(s) : 1;
}

int run(const std::string& command, const Options& opt) {
    cci_pipeline* p = nullptr;
    cci_status s = cci_pipeline_open(opt.config.c_str(), &p);
    if (s != CCI_OK) return report_failure("loading config", s);

    auto apply = [&]() -> cci_status {
        cci_status r = CCI_OK;
        if (!opt.workspace.empty() && (r = cci_pipeline_set_workspace(p, opt.workspace.c_str())) != CCI_OK) return r;
        if (!opt.region.empty() && (r = cci_pipeline_set_region(p, opt.region.c_str())) != CCI_OK) return r;
        if (!opt.alphas.empty()) {
            cci_pipeline_clear_alphas(p);
            for (double a : opt.alphas) {
                if ((r = cci_pipeline_add_alpha(p, a)) != CCI_OK) return r;
            }
        }
        if (!opt.policy.empty() && (r = cci_pipeline_set_policy(p, opt.policy.c_str())) != CCI_OK) return r;
        if (opt.seed && (r = cci_pipeline_set_seed(p, *opt.seed)) != CCI_OK) return r;
        if (!opt.mode.empty()) {
            const cci_shift_mode m = opt.mode == "spatial" ? CCI_MODE_SPATIAL : CCI_MODE_TEMPORAL;
            r = cci_pipeline_set_mode(p, m);
        }
        return r;
    };
    s = apply();
    if (s != CCI_OK) {
        cci_pipeline_close(p);
        return report_failure("applying options", s);
    }

    if (command == "ingest") {
        s = cci_pipeline_ingest(p);
    } else if (command == "forecast") {
        s = cci_pipeline_forecast(p);
    } else if (command == "run") {
        s = cci_pipeline_run(p);
    } else if (command == "shift") {
        s = cci_pipeline_shift(p);
    } else {
        const char* text = nullptr;
        s = cci_pipeline_report(p, &text);
        if (s == CCI_OK) std::fputs(text, stdout);
    }
    cci_pipeline_close(p);
    if (s != CCI_OK) return report_failure(command.c_str(), s);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Carbon-intensity forecasts with conformal prediction intervals"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("-c,--config", opt.config, "Pipeline configuration file")->check(CLI::ExistingFile);
    app.add_option("-w,--workspace", opt.workspace, "Workspace directory (overrides CARBONCI_WORKSPACE and config)");
    app.add_option("-r,--region", opt.region, "Restrict to one configured region code");

    auto* ingest = app.add_subcommand("ingest", "Validate inputs, fill short gaps, copy into the workspace");
    auto* forecast = app.add_subcommand("forecast", "Baseline forecasts and accuracy reports");
    auto* run = app.add_subcommand("run", "SPCI intervals, coverage breakdown, width statistics");
    run->add_option("-a,--alpha", opt.alphas, "Significance level; repeat for several")
        ->check(CLI::Range(0.0, 1.0))
        ->take_all();
    run->add_option("-s,--seed", opt.seed, "Random forest seed");
    auto* shift = app.add_subcommand("shift", "Load-shifting case studies");
    shift->add_option("-p,--policy", opt.policy, "point | dominance | overlap:THETA");
    shift->add_option("-m,--mode", opt.mode, "temporal | spatial")->check(CLI::IsMember({"temporal", "spatial"}));
    auto* report = app.add_subcommand("report", "Summaries and long-format plot tables");

    CLI11_PARSE(app, argc, argv);

    for (auto* sub : {ingest, forecast, run, shift, report}) {
        if (sub->parsed()) return ::run(sub->get_name(), opt);
    }
    return 1;
}
