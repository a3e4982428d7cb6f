#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carbonci/conformal.hpp"
#include "carbonci/forecast.hpp"
#include "carbonci/shiftsim.hpp"
#include "carbonci/timeseries.hpp"

namespace carbonci::pipeline {

/// Environment variable naming the workspace root. Flags win over it; it wins over the config.
inline constexpr const char* kWorkspaceEnv = "CARBONCI_WORKSPACE";

struct RegionInputs {
    RegionId region;
    std::optional<std::filesystem::path> mix;
    std::optional<std::filesystem::path> truth;
    std::optional<std::filesystem::path> forecast;
};

enum class ShiftMode { Temporal, Spatial };

struct PipelineConfig {
    std::filesystem::path workspace = "workspace";
    std::optional<std::filesystem::path> emission_factors;
    std::optional<std::filesystem::path> power_trace;
    double peak_mw = 20.0;
    std::vector<RegionInputs> regions;

    HourlyStamp train_end;
    HourlyStamp calibration_end;
    HourlyStamp test_end;

    forecast::ForecasterSpec baseline = forecast::ForecasterSpec::seasonal_naive_24h();
    int forecast_horizon = 24;

    conformal::SpciConfig spci;
    std::vector<double> alphas{0.1, 0.05, 0.01};
    int spci_horizon = 1;

    shiftsim::ShiftPolicy policy = shiftsim::ShiftPolicy::dominance();
    ShiftMode mode = ShiftMode::Temporal;
    double shift_alpha = 0.1;
    std::vector<std::pair<std::string, std::string>> spatial_pairs; // empty: every ordered pair
    shiftsim::MisleadingRule misleading_rule = shiftsim::MisleadingRule::ShiftTriggering;

    std::optional<std::string> only_region;

    /// INI-style `key = value` sections; relative paths resolve against the file's directory.
    static PipelineConfig load(const std::filesystem::path& path);
    void validate() const;

    std::vector<const RegionInputs*> selected_regions() const;
};

ShiftMode parse_mode(const std::string& text);

/// Validated, gap-filled inputs copied into `<workspace>/data` with a provenance log.
void cmd_ingest(const PipelineConfig& config);

/// Baseline forecasts and accuracy reports into `<workspace>/forecast`.
void cmd_forecast(const PipelineConfig& config);

/// SPCI intervals, coverage breakdown and width statistics into `<workspace>/run`.
void cmd_run(const PipelineConfig& config);

/// Load-shifting case studies into `<workspace>/shift`.
void cmd_shift(const PipelineConfig& config);

/// Tidy plot tables into `<workspace>/report`; returns a printable summary.
std::string cmd_report(const PipelineConfig& config);

} // namespace carbonci::pipeline
