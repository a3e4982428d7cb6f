#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "carbonci/timeseries.hpp"

namespace carbonci {

/// One row of `target_timestamp,alpha,lower,upper,point_forecast,truth`. Truth may be blank.
struct IntervalRecord {
    HourlyStamp target;
    Interval interval;
    double point_forecast = 0.0;
    std::optional<double> truth;
};

void write_interval_file(std::ostream& out, const IntervalSeries& intervals, const std::vector<double>& points,
                         const std::vector<std::optional<double>>& truths);

std::vector<IntervalRecord> read_interval_file(std::istream& in, const std::string& name);
std::vector<IntervalRecord> read_interval_file(const std::filesystem::path& path);

} // namespace carbonci
