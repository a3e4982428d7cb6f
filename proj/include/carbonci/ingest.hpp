#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "carbonci/timeseries.hpp"

namespace carbonci::ingest {

/// Gaps up to this many consecutive missing hours are forward-filled on ingest.
inline constexpr int kMaxFillGapHours = 3;

struct SourceMixRow {
    HourlyStamp stamp;
    std::map<std::string, double> generation; // MWh per source
    bool filled = false;
};

/// Hours synthesized by forward-fill. Evaluation drops these from statistics.
struct FillLog {
    std::vector<HourlyStamp> filled;

    bool contains(HourlyStamp t) const;
    void merge(const FillLog& other);
};

struct MixTable {
    std::vector<std::string> sources; // header order
    std::vector<SourceMixRow> rows;   // sorted, contiguous
    FillLog fills;
};

class EmissionFactorTable {
public:
    EmissionFactorTable() = default;
    explicit EmissionFactorTable(std::map<std::string, double> factors);

    double factor(const std::string& source) const;
    const std::map<std::string, double>& factors() const { return factors_; }

private:
    std::map<std::string, double> factors_; // gCO2eq per kWh
};

struct PowerTrace {
    RegionId region;
    HourlyStamp start;
    std::vector<double> normalized;
    double peak_mw = 0.0;

    PowerTrace(RegionId region, HourlyStamp start, std::vector<double> normalized, double peak_mw);

    HourlyStamp end() const { return start + static_cast<std::int64_t>(normalized.size()); }
    double power_mw(std::size_t i) const { return normalized[i] * peak_mw; }
};

struct SeriesTable {
    HourlySeries series;
    FillLog fills;
};

MixTable parse_mix_table(const std::filesystem::path& path);
MixTable parse_mix_table(std::istream& in, const std::string& name);

HourlySeries mix_to_carbon_intensity(const MixTable& mix, const EmissionFactorTable& factors, const RegionId& region);
HourlySeries mix_to_carbon_intensity(const std::vector<SourceMixRow>& rows, const EmissionFactorTable& factors,
                                     const RegionId& region);

EmissionFactorTable parse_emission_factors(const std::filesystem::path& path);
EmissionFactorTable parse_emission_factors(std::istream& in, const std::string& name);

/// `timestamp,carbon_intensity`
SeriesTable parse_truth_table(const std::filesystem::path& path, const RegionId& region);
SeriesTable parse_truth_table(std::istream& in, const std::string& name, const RegionId& region);

/// `origin_timestamp,h1,...,hH`; the header fixes H for the whole file.
std::vector<ForecastBatch> parse_forecast_table(const std::filesystem::path& path, const RegionId& region);
std::vector<ForecastBatch> parse_forecast_table(std::istream& in, const std::string& name, const RegionId& region);

/// `timestamp,normalized_power`
PowerTrace parse_power_trace(const std::filesystem::path& path, const RegionId& region, double peak_mw);
PowerTrace parse_power_trace(std::istream& in, const std::string& name, const RegionId& region, double peak_mw);

/// Reads `table,timestamp,filled`, keeping rows whose table name starts with `table_prefix`.
FillLog parse_fill_log(const std::filesystem::path& path, const std::string& table_prefix = "");

// Writers emit shortest round-trip decimal representations, so parse(write(x)) == x bit-for-bit.
void write_mix_table(std::ostream& out, const MixTable& mix);
void write_series(std::ostream& out, const HourlySeries& series, const std::string& value_column);
void write_forecast_table(std::ostream& out, const std::vector<ForecastBatch>& batches);
void write_power_trace(std::ostream& out, const PowerTrace& trace);
void write_fill_log(std::ostream& out, const FillLog& log, const std::string& table);

std::string format_double(double v);

} // namespace carbonci::ingest
