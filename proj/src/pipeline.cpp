#include "carbonci/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "carbonci/error.hpp"
#include "carbonci/evaluate.hpp"
#include "carbonci/ingest.hpp"
#include "carbonci/interval_file.hpp"

namespace fs = std::filesystem;

namespace carbonci::pipeline {

namespace {

const RegionId kClusterRegion{"CLUSTER"};

std::string trim_copy(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim_copy(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    T v{};
    in >> v;
    if (in.fail() || !(in >> std::ws).eof()) {
        throw Error(ErrorCode::ConfigError, "key '" + key + "' has invalid value '" + text + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw Error(ErrorCode::ConfigError, "key '" + key + "' expects true/false, got '" + text + "'");
}

std::string fmt_alpha(double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", alpha);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    }
    out << content;
    if (!out) {
        throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
    }
}

fs::path data_dir(const PipelineConfig& c) { return c.workspace / "data"; }
fs::path truth_path(const PipelineConfig& c, const RegionId& r) { return data_dir(c) / (r.code() + "_truth.csv"); }
fs::path imported_forecast_path(const PipelineConfig& c, const RegionId& r) {
    return data_dir(c) / (r.code() + "_forecast.csv");
}
fs::path baseline_forecast_path(const PipelineConfig& c, const RegionId& r) {
    return c.workspace / "forecast" / (r.code() + "_forecast.csv");
}
fs::path provenance_path(const PipelineConfig& c) { return data_dir(c) / "provenance.csv"; }
fs::path power_path(const PipelineConfig& c) { return data_dir(c) / "power.csv"; }
fs::path interval_path(const PipelineConfig& c, const RegionId& r, double alpha) {
    return c.workspace / "run" / (r.code() + "_alpha" + fmt_alpha(alpha) + "_intervals.csv");
}

std::string policy_file_tag(const shiftsim::ShiftPolicy& p) {
    std::string s = p.to_string();
    std::replace(s.begin(), s.end(), ':', '_');
    return s;
}

void require_workspace_file(const fs::path& p, const std::string& hint) {
    if (!fs::exists(p)) {
        throw Error(ErrorCode::IoError, "missing '" + p.string() + "' (" + hint + ")");
    }
}

HourlySeries load_truth(const PipelineConfig& c, const RegionId& r) {
    require_workspace_file(truth_path(c, r), "run `ingest` first");
    return ingest::parse_truth_table(truth_path(c, r), r).series;
}

ingest::FillLog load_fills(const PipelineConfig& c, const RegionId& r) {
    if (!fs::exists(provenance_path(c))) return {};
    return ingest::parse_fill_log(provenance_path(c), r.code() + "_");
}

/// Origins the pipeline issues baseline forecasts for: every hour from the first with
/// enough history up to the last one any test target needs.
std::vector<ForecastBatch> baseline_batches(const PipelineConfig& c, const HourlySeries& truth) {
    const HourlyStamp first = truth.start() + (c.baseline.lookback_hours() - 1);
    const HourlyStamp last = std::min(c.test_end - 2, truth.end() - 1);
    if (last < first) {
        throw Error(ErrorCode::InsufficientHistory,
                    truth.region().code() + ": ground truth too short for " + c.baseline.to_string());
    }
    return forecast::forecast_range(c.baseline, truth, first, last, c.forecast_horizon);
}

std::vector<ForecastBatch> load_batches(const PipelineConfig& c, const RegionId& r, const HourlySeries& truth) {
    if (fs::exists(imported_forecast_path(c, r))) {
        return ingest::parse_forecast_table(imported_forecast_path(c, r), r);
    }
    if (fs::exists(baseline_forecast_path(c, r))) {
        return ingest::parse_forecast_table(baseline_forecast_path(c, r), r);
    }
    return baseline_batches(c, truth);
}

std::set<std::string> known_keys(const std::string& section) {
    if (section == "workspace") return {"dir"};
    if (section == "inputs") return {"emission_factors", "power_trace", "peak_mw"};
    if (section == "split") return {"train_end", "calibration_end", "test_end"};
    if (section == "forecast") return {"baseline", "horizon"};
    if (section == "spci") {
        return {"alphas", "window", "lags", "trees", "max_depth", "min_leaf", "bootstrap",
                "beta_grid", "refit_stride", "seed", "threads", "horizon", "leaf_targets"};
    }
    if (section == "shift") return {"policy", "mode", "alpha", "pairs", "misleading_rule"};
    if (section.rfind("region:", 0) == 0) return {"mix", "truth", "forecast"};
    throw Error(ErrorCode::ConfigError, "unknown section [" + section + "]");
}

} // namespace

ShiftMode parse_mode(const std::string& text) {
    if (text == "temporal") return ShiftMode::Temporal;
    if (text == "spatial") return ShiftMode::Spatial;
    throw Error(ErrorCode::ConfigError, "mode must be temporal or spatial, got '" + text + "'");
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    const fs::path base = path.parent_path();
    auto resolve = [&base](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    PipelineConfig c;
    bool have_split[3] = {false, false, false};
    for (const auto& [section, body] : tree) {
        if (!body.data().empty()) {
            throw Error(ErrorCode::ConfigError, "key '" + section + "' must live inside a section");
        }
        const auto keys = known_keys(section);
        std::optional<RegionInputs> region;
        if (section.rfind("region:", 0) == 0) {
            try {
                region = RegionInputs{RegionId(section.substr(7)), {}, {}, {}};
            } catch (const Error& e) {
                throw Error(ErrorCode::ConfigError, "[" + section + "]: " + e.what());
            }
        }
        for (const auto& [key, node] : body) {
            if (!keys.count(key)) {
                throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in [" + section + "]");
            }
            const std::string value = trim_copy(node.data());
            const std::string full = section + "." + key;
            if (region) {
                if (key == "mix") region->mix = resolve(value);
                if (key == "truth") region->truth = resolve(value);
                if (key == "forecast") region->forecast = resolve(value);
            } else if (section == "workspace") {
                c.workspace = resolve(value);
            } else if (section == "inputs") {
                if (key == "emission_factors") c.emission_factors = resolve(value);
                if (key == "power_trace") c.power_trace = resolve(value);
                if (key == "peak_mw") c.peak_mw = parse_value<double>(full, value);
            } else if (section == "split") {
                HourlyStamp t;
                try {
                    t = HourlyStamp::parse(value);
                } catch (const Error& e) {
                    throw Error(ErrorCode::ConfigError, full + ": " + e.what());
                }
                if (key == "train_end") { c.train_end = t; have_split[0] = true; }
                if (key == "calibration_end") { c.calibration_end = t; have_split[1] = true; }
                if (key == "test_end") { c.test_end = t; have_split[2] = true; }
            } else if (section == "forecast") {
                if (key == "baseline") c.baseline = forecast::ForecasterSpec::parse(value);
                if (key == "horizon") c.forecast_horizon = parse_value<int>(full, value);
            } else if (section == "spci") {
                if (key == "alphas") {
                    c.alphas.clear();
                    for (const auto& a : split_list(value)) c.alphas.push_back(parse_value<double>(full, a));
                }
                if (key == "window") c.spci.window_capacity = parse_value<std::size_t>(full, value);
                if (key == "lags") c.spci.lag_window = parse_value<int>(full, value);
                if (key == "trees") c.spci.qrf.n_trees = parse_value<int>(full, value);
                if (key == "max_depth") c.spci.qrf.max_depth = parse_value<int>(full, value);
                if (key == "min_leaf") c.spci.qrf.min_leaf_size = parse_value<int>(full, value);
                if (key == "bootstrap") c.spci.qrf.bootstrap = parse_bool(full, value);
                if (key == "beta_grid") c.spci.beta_grid_size = parse_value<int>(full, value);
                if (key == "refit_stride") c.spci.refit_stride = parse_value<int>(full, value);
                if (key == "seed") c.spci.seed = parse_value<std::uint64_t>(full, value);
                if (key == "threads") c.spci.qrf.threads = parse_value<int>(full, value);
                if (key == "horizon") c.spci_horizon = parse_value<int>(full, value);
                if (key == "leaf_targets") {
                    if (value == "all_rows") {
                        c.spci.qrf.leaf_targets = conformal::LeafTargets::AllRows;
                    } else if (value == "in_bag") {
                        c.spci.qrf.leaf_targets = conformal::LeafTargets::InBag;
                    } else {
                        throw Error(ErrorCode::ConfigError, "spci.leaf_targets must be all_rows or in_bag");
                    }
                }
            } else if (section == "shift") {
                if (key == "policy") c.policy = shiftsim::ShiftPolicy::parse(value);
                if (key == "mode") c.mode = parse_mode(value);
                if (key == "alpha") c.shift_alpha = parse_value<double>(full, value);
                if (key == "pairs") {
                    for (const auto& p : split_list(value)) {
                        const auto colon = p.find(':');
                        if (colon == std::string::npos) {
                            throw Error(ErrorCode::ConfigError, "shift.pairs entries look like SOURCE:TARGET");
                        }
                        c.spatial_pairs.emplace_back(p.substr(0, colon), p.substr(colon + 1));
                    }
                }
                if (key == "misleading_rule") {
                    if (value == "shift_triggering") {
                        c.misleading_rule = shiftsim::MisleadingRule::ShiftTriggering;
                    } else if (value == "inverted") {
                        c.misleading_rule = shiftsim::MisleadingRule::Inverted;
                    } else {
                        throw Error(ErrorCode::ConfigError, "misleading_rule must be shift_triggering or inverted");
                    }
                }
            }
        }
        if (region) c.regions.push_back(std::move(*region));
    }
    if (!(have_split[0] && have_split[1] && have_split[2])) {
        throw Error(ErrorCode::ConfigError, "[split] needs train_end, calibration_end and test_end");
    }
    std::sort(c.regions.begin(), c.regions.end(),
              [](const RegionInputs& a, const RegionInputs& b) { return a.region < b.region; });
    return c;
}

void PipelineConfig::validate() const {
    if (!(train_end < calibration_end && calibration_end < test_end)) {
        throw Error(ErrorCode::ConfigError, "split boundaries must satisfy train_end < calibration_end < test_end");
    }
    if (regions.empty()) {
        throw Error(ErrorCode::ConfigError, "no [region:CODE] sections");
    }
    if (alphas.empty()) {
        throw Error(ErrorCode::ConfigError, "no significance levels");
    }
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw Error(ErrorCode::ConfigError, "alpha " + fmt_alpha(a) + " outside (0,1)");
        }
    }
    if (!(shift_alpha > 0.0 && shift_alpha < 1.0)) {
        throw Error(ErrorCode::ConfigError, "shift.alpha outside (0,1)");
    }
    if (!(peak_mw > 0.0)) {
        throw Error(ErrorCode::ConfigError, "inputs.peak_mw must be positive");
    }
    if (forecast_horizon < 1 || spci_horizon < 1) {
        throw Error(ErrorCode::ConfigError, "horizons must be >= 1");
    }
    try {
        conformal::SpciConfig probe = spci;
        probe.alpha = alphas.front();
        probe.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, std::string("[spci]: ") + e.what());
    }
    for (const auto& r : regions) {
        if (!r.truth && !r.mix) {
            throw Error(ErrorCode::ConfigError, "region " + r.region.code() + " needs a truth or mix file");
        }
        if (r.mix && !emission_factors) {
            throw Error(ErrorCode::ConfigError, "region " + r.region.code() + " has a mix file but no emission factors");
        }
    }
    if (only_region) {
        const bool found = std::any_of(regions.begin(), regions.end(),
                                       [&](const RegionInputs& r) { return r.region.code() == *only_region; });
        if (!found) {
            throw Error(ErrorCode::ConfigError, "region " + *only_region + " is not configured");
        }
    }
    for (const auto& [s, t] : spatial_pairs) {
        for (const auto* code : {&s, &t}) {
            const bool found = std::any_of(regions.begin(), regions.end(),
                                           [&](const RegionInputs& r) { return r.region.code() == *code; });
            if (!found) {
                throw Error(ErrorCode::ConfigError, "shift pair names unconfigured region " + *code);
            }
        }
    }
}

std::vector<const RegionInputs*> PipelineConfig::selected_regions() const {
    std::vector<const RegionInputs*> out;
    for (const auto& r : regions) {
        if (!only_region || r.region.code() == *only_region) out.push_back(&r);
    }
    return out;
}

void cmd_ingest(const PipelineConfig& config) {
    config.validate();
    std::optional<ingest::EmissionFactorTable> factors;
    if (config.emission_factors) factors = ingest::parse_emission_factors(*config.emission_factors);

    std::ostringstream provenance;
    provenance << "table,timestamp,filled\n";
    for (const RegionInputs* r : config.selected_regions()) {
        const std::string code = r->region.code();
        std::optional<ingest::MixTable> mix;
        if (r->mix) {
            mix = ingest::parse_mix_table(*r->mix);
            std::ostringstream out;
            ingest::write_mix_table(out, *mix);
            write_file(data_dir(config) / (code + "_mix.csv"), out.str());
            ingest::write_fill_log(provenance, mix->fills, code + "_mix");
        }
        std::optional<ingest::SeriesTable> truth;
        if (r->truth) {
            truth = ingest::parse_truth_table(*r->truth, r->region);
        } else {
            truth = ingest::SeriesTable{ingest::mix_to_carbon_intensity(*mix, *factors, r->region), mix->fills};
        }
        std::ostringstream out;
        ingest::write_series(out, truth->series, "carbon_intensity");
        write_file(truth_path(config, r->region), out.str());
        ingest::write_fill_log(provenance, truth->fills, code + "_truth");

        if (r->forecast) {
            const auto batches = ingest::parse_forecast_table(*r->forecast, r->region);
            std::ostringstream fout;
            ingest::write_forecast_table(fout, batches);
            write_file(imported_forecast_path(config, r->region), fout.str());
        }
    }
    if (config.power_trace) {
        const auto trace = ingest::parse_power_trace(*config.power_trace, kClusterRegion, config.peak_mw);
        std::ostringstream out;
        ingest::write_power_trace(out, trace);
        write_file(power_path(config), out.str());
    }
    write_file(provenance_path(config), provenance.str());
}

void cmd_forecast(const PipelineConfig& config) {
    config.validate();
    for (const RegionInputs* r : config.selected_regions()) {
        const std::string code = r->region.code();
        const HourlySeries truth = load_truth(config, r->region);
        const ingest::FillLog fills = load_fills(config, r->region);
        const auto batches = baseline_batches(config, truth);

        std::ostringstream fout;
        ingest::write_forecast_table(fout, batches);
        write_file(baseline_forecast_path(config, r->region), fout.str());

        // Accuracy over batches whose targets all fall in the test split.
        std::vector<ForecastBatch> test;
        for (const auto& b : batches) {
            if (b.target(1) >= config.calibration_end && b.target(b.horizon()) < config.test_end &&
                b.target(b.horizon()) < truth.end()) {
                test.push_back(b);
            }
        }
        const fs::path dir = config.workspace / "forecast";
        if (test.empty()) continue;

        const auto daily = forecast::daily_mape(test, truth, fills);
        std::ostringstream dout;
        dout << "region,date,mape_percent\n";
        char buf[64];
        for (const auto& d : daily) {
            std::snprintf(buf, sizeof buf, "%.4f", d.mape_percent);
            dout << code << ',' << format_day(d.epoch_day) << ',' << buf << '\n';
        }
        write_file(dir / (code + "_daily_mape.csv"), dout.str());

        std::vector<forecast::DailyMape> study;
        std::copy_if(daily.begin(), daily.end(), std::back_inserter(study),
                     [](const auto& d) { return civil_date_of_day(d.epoch_day).month >= 7; });
        if (!study.empty()) {
            std::ostringstream sout;
            forecast::write_accuracy_reports(sout, forecast::seasonal_group_stats(study));
            write_file(dir / (code + "_seasonal.csv"), sout.str());
        }

        if (config.forecast_horizon == 96) {
            std::vector<ForecastBatch> daily_issue;
            std::copy_if(test.begin(), test.end(), std::back_inserter(daily_issue),
                         [](const auto& b) { return b.target(1).hour_of_day() == 0; });
            if (!daily_issue.empty()) {
                std::ostringstream hout;
                forecast::write_accuracy_reports(hout, forecast::horizon_bucket_mape(daily_issue, truth, fills));
                write_file(dir / (code + "_horizon_buckets.csv"), hout.str());
            }
        }
    }
}

void cmd_run(const PipelineConfig& config) {
    config.validate();
    const int h = config.spci_horizon;
    const auto window = static_cast<std::int64_t>(config.spci.window_capacity);

    std::ostringstream coverage_out, width_out;
    evaluate::write_breakdown_header(coverage_out);
    evaluate::write_width_header(width_out);

    for (const RegionInputs* r : config.selected_regions()) {
        const std::string code = r->region.code();
        const HourlySeries truth = load_truth(config, r->region);
        const ingest::FillLog fills = load_fills(config, r->region);

        if (truth.end() <= config.calibration_end || truth.start() >= config.test_end) {
            throw Error(ErrorCode::EmptyTestSplit, code + ": no ground truth in [" + config.calibration_end.to_iso() +
                                                       ", " + config.test_end.to_iso() + ")");
        }
        if (truth.end() < config.test_end) {
            throw Error(ErrorCode::TruthMissing, code + ": ground truth ends at " + truth.end().to_iso() +
                                                     " before test_end " + config.test_end.to_iso());
        }

        const auto all_batches = load_batches(config, r->region, truth);
        if (all_batches.empty() || all_batches.front().horizon() < h) {
            throw Error(ErrorCode::HorizonMismatch, code + ": forecasts do not reach horizon " + std::to_string(h));
        }
        std::map<HourlyStamp, const ForecastBatch*> by_origin;
        for (const auto& b : all_batches) by_origin.emplace(b.origin, &b);
        auto batch_at = [&](HourlyStamp origin) -> const ForecastBatch& {
            const auto it = by_origin.find(origin);
            if (it == by_origin.end()) {
                throw Error(ErrorCode::AlignmentError, code + ": no forecast issued at " + origin.to_iso());
            }
            return *it->second;
        };

        const HourlyStamp emit_from = config.calibration_end - h;
        const HourlyStamp last_origin = config.test_end - 1 - h;
        const HourlyStamp first_residual_target = emit_from - (window - 1);
        if (first_residual_target < config.train_end || first_residual_target < truth.start() + h) {
            throw Error(ErrorCode::WindowTooSmall,
                        code + ": calibration split provides fewer than " + std::to_string(window) +
                            " residuals ending at " + emit_from.to_iso());
        }
        std::vector<double> initial;
        initial.reserve(static_cast<std::size_t>(window));
        for (HourlyStamp t = first_residual_target; t <= emit_from; t = t + 1) {
            initial.push_back(conformal::residual(truth.at(t), batch_at(t - h).prediction(h)));
        }

        std::vector<ForecastBatch> run_batches;
        for (HourlyStamp o = emit_from - (h - 1); o <= last_origin; o = o + 1) run_batches.push_back(batch_at(o));

        std::vector<double> points;
        std::vector<std::optional<double>> truths;
        for (HourlyStamp o = emit_from; o <= last_origin; o = o + 1) {
            points.push_back(batch_at(o).prediction(h));
            truths.emplace_back(truth.at(o + h));
        }
        const HourlySeries point_series(r->region, emit_from + h, points, Unit::Dimensionless);

        for (double alpha : config.alphas) {
            conformal::SpciConfig spci = config.spci;
            spci.alpha = alpha;
            const auto result =
                conformal::spci_run_horizons(spci, run_batches, truth, {h}, {{h, initial}}, emit_from);
            const IntervalSeries& series = result.at(h);

            std::ostringstream iout;
            write_interval_file(iout, series, points, truths);
            write_file(interval_path(config, r->region, alpha), iout.str());

            evaluate::write_breakdown_row(coverage_out, code, alpha,
                                          evaluate::breakdown(series, truth, point_series, fills));
            evaluate::write_width_row(width_out, code, alpha, evaluate::width_stats(series));
        }
    }
    write_file(config.workspace / "run" / "coverage.csv", coverage_out.str());
    write_file(config.workspace / "run" / "width.csv", width_out.str());
}

namespace {

shiftsim::HourlyOutlook load_outlook(const PipelineConfig& c, const RegionId& r) {
    const fs::path p = interval_path(c, r, c.shift_alpha);
    require_workspace_file(p, "run `run` with alpha " + fmt_alpha(c.shift_alpha) + " first");
    const auto records = read_interval_file(p);
    shiftsim::HourlyOutlook o;
    o.start = records.front().target;
    for (const auto& rec : records) {
        if (!rec.truth) {
            throw Error(ErrorCode::AlignmentError, r.code() + ": no truth for " + rec.target.to_iso() + " in " + p.string());
        }
        o.pred.push_back(rec.point_forecast);
        o.truth.push_back(*rec.truth);
        o.intervals.push_back(rec.interval);
    }
    return o;
}

} // namespace

void cmd_shift(const PipelineConfig& config) {
    config.validate();
    require_workspace_file(power_path(config), "configure inputs.power_trace and run `ingest`");
    const auto trace = ingest::parse_power_trace(power_path(config), kClusterRegion, config.peak_mw);

    std::vector<shiftsim::ShiftPolicy> policies{shiftsim::ShiftPolicy::point()};
    if (config.policy.kind != shiftsim::PolicyKind::Point) policies.push_back(config.policy);

    const std::string mode = config.mode == ShiftMode::Temporal ? "temporal" : "spatial";
    const fs::path dir = config.workspace / "shift";
    std::ostringstream summary, policy_rows;
    shiftsim::write_summary_header(summary);
    shiftsim::write_policy_header(policy_rows);

    auto emit = [&](const std::vector<shiftsim::ShiftReport>& reports) {
        shiftsim::write_summary_row(summary, reports.front());
        for (const auto& rep : reports) {
            shiftsim::write_policy_row(policy_rows, rep);
            std::ostringstream cases;
            shiftsim::write_cases(cases, rep);
            write_file(dir / (mode + "_" + rep.source + "_" + rep.target + "_" + policy_file_tag(rep.policy) +
                              "_cases.csv"),
                       cases.str());
        }
    };

    std::map<std::string, shiftsim::HourlyOutlook> outlooks;
    for (const RegionInputs* r : config.selected_regions()) {
        outlooks.emplace(r->region.code(), load_outlook(config, r->region));
    }

    if (config.mode == ShiftMode::Temporal) {
        for (const auto& [code, outlook] : outlooks) {
            std::vector<shiftsim::ShiftReport> reports;
            for (const auto& p : policies) {
                reports.push_back(shiftsim::temporal_from_hourly(code, outlook, trace, p, config.misleading_rule));
            }
            emit(reports);
        }
    } else {
        std::vector<std::pair<std::string, std::string>> pairs = config.spatial_pairs;
        if (pairs.empty()) {
            for (const auto& [s, _] : outlooks) {
                for (const auto& [t, __] : outlooks) {
                    if (s != t) pairs.emplace_back(s, t);
                }
            }
        }
        for (const auto& [s, t] : pairs) {
            if (!outlooks.count(s) || !outlooks.count(t)) {
                if (config.only_region) continue;
                throw Error(ErrorCode::AlignmentError, "no intervals for pair " + s + ":" + t);
            }
            std::vector<shiftsim::ShiftReport> reports;
            for (const auto& p : policies) {
                reports.push_back(
                    shiftsim::spatial_from_hourly(s, outlooks.at(s), t, outlooks.at(t), trace, p, config.misleading_rule));
            }
            emit(reports);
        }
        if (pairs.empty()) {
            throw Error(ErrorCode::InsufficientDays, "spatial shifting needs at least two regions");
        }
    }
    write_file(dir / (mode + "_summary.csv"), summary.str());
    write_file(dir / (mode + "_policy.csv"), policy_rows.str());
}

std::string cmd_report(const PipelineConfig& config) {
    config.validate();
    std::ostringstream text;
    auto append_file = [&](const fs::path& p, const std::string& title) {
        if (!fs::exists(p)) return;
        std::ifstream in(p);
        text << "== " << title << " (" << p.filename().string() << ")\n" << in.rdbuf() << '\n';
    };
    append_file(config.workspace / "run" / "coverage.csv", "coverage breakdown");
    append_file(config.workspace / "run" / "width.csv", "interval width");
    for (const char* mode : {"temporal", "spatial"}) {
        append_file(config.workspace / "shift" / (std::string(mode) + "_summary.csv"), std::string(mode) + " shifting");
        append_file(config.workspace / "shift" / (std::string(mode) + "_policy.csv"), std::string(mode) + " policies");
    }

    // Long-format tables: one observation per row.
    std::ostringstream intervals;
    intervals << "region,alpha,timestamp,series,value\n";
    std::ostringstream daily;
    daily << "region,date,mape_percent\n";
    bool any_intervals = false;
    for (const RegionInputs* r : config.selected_regions()) {
        for (double alpha : config.alphas) {
            const fs::path p = interval_path(config, r->region, alpha);
            if (!fs::exists(p)) continue;
            any_intervals = true;
            const std::string prefix = r->region.code() + "," + fmt_alpha(alpha) + ",";
            for (const auto& rec : read_interval_file(p)) {
                const std::string ts = rec.target.to_iso();
                auto row = [&](const char* series, double v) {
                    intervals << prefix << ts << ',' << series << ',' << ingest::format_double(v) << '\n';
                };
                if (rec.truth) row("truth", *rec.truth);
                row("point_forecast", rec.point_forecast);
                row("lower", rec.interval.lower);
                row("upper", rec.interval.upper);
                row("midpoint", 0.5 * (rec.interval.lower + rec.interval.upper));
            }
        }
        const fs::path dm = config.workspace / "forecast" / (r->region.code() + "_daily_mape.csv");
        if (fs::exists(dm)) {
            std::ifstream in(dm);
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                if (!line.empty()) daily << line << '\n';
            }
        }
    }
    if (any_intervals) write_file(config.workspace / "report" / "intervals_long.csv", intervals.str());
    write_file(config.workspace / "report" / "daily_mape_long.csv", daily.str());
    if (text.str().empty()) {
        text << "no results in " << config.workspace.string() << " yet\n";
    }
    return text.str();
}

} // namespace carbonci::pipeline
