#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "carbonci/ingest.hpp"
#include "carbonci/timeseries.hpp"

namespace carbonci::forecast {

enum class ForecasterKind { SeasonalNaive24h, SameHourLastWeek, MovingAverage };

struct ForecasterSpec {
    ForecasterKind kind = ForecasterKind::SeasonalNaive24h;
    int window_hours = 24; // moving-average k; ignored by the other kinds

    static ForecasterSpec seasonal_naive_24h() { return {ForecasterKind::SeasonalNaive24h, 24}; }
    static ForecasterSpec same_hour_last_week() { return {ForecasterKind::SameHourLastWeek, 168}; }
    static ForecasterSpec moving_average(int k);

    /// `seasonal_naive_24h`, `same_hour_last_week`, `moving_average:K`
    static ForecasterSpec parse(const std::string& text);
    std::string to_string() const;

    int lookback_hours() const;
};

struct AccuracyReport {
    std::string group_label;
    double mape_percent = 0.0;
    double variance = 0.0;
    int n = 0;

    double stddev() const;
};

/// Forecast for origin+1..origin+H using observations up to and including `origin`.
ForecastBatch forecast(const ForecasterSpec& spec, const HourlySeries& history, HourlyStamp origin, int horizon);

/// One batch per origin in [first_origin, last_origin] stepping by `stride` hours.
std::vector<ForecastBatch> forecast_range(const ForecasterSpec& spec, const HourlySeries& history,
                                          HourlyStamp first_origin, HourlyStamp last_origin, int horizon,
                                          int stride = 1);

/// 100 * mean(|truth - pred| / |truth|)
double mape(const std::vector<double>& pred, const std::vector<double>& truth);

/// Buckets 1-24, 25-48, 49-72, 73-96 over every batch's predictions. Hours in `skip` are dropped.
std::vector<AccuracyReport> horizon_bucket_mape(const std::vector<ForecastBatch>& batches, const HourlySeries& truth,
                                                const ingest::FillLog& skip = {});

struct DailyMape {
    std::int64_t epoch_day;
    double mape_percent;
};

/// MAPE over the 24 predictions targeting each UTC day, taken from batches whose first
/// target hour is that day's midnight.
std::vector<DailyMape> daily_mape(const std::vector<ForecastBatch>& batches, const HourlySeries& truth,
                                  const ingest::FillLog& skip = {});

/// Summer (Jul-Aug), fall (Sep-Oct), winter (Nov-Dec): mean and population variance of daily MAPE.
std::vector<AccuracyReport> seasonal_group_stats(const std::vector<DailyMape>& daily);

/// `group,mape_percent,stddev,n`
void write_accuracy_reports(std::ostream& out, const std::vector<AccuracyReport>& reports);

} // namespace carbonci::forecast
