#include "carbonci/forecast.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "carbonci/error.hpp"

namespace carbonci::forecast {

ForecasterSpec ForecasterSpec::moving_average(int k) {
    if (k < 1) {
        throw Error(ErrorCode::InvalidArgument, "moving average window must be >= 1");
    }
    return {ForecasterKind::MovingAverage, k};
}

ForecasterSpec ForecasterSpec::parse(const std::string& text) {
    if (text == "seasonal_naive_24h") return seasonal_naive_24h();
    if (text == "same_hour_last_week") return same_hour_last_week();
    const std::string prefix = "moving_average:";
    if (text.rfind(prefix, 0) == 0) {
        try {
            std::size_t used = 0;
            const int k = std::stoi(text.substr(prefix.size()), &used);
            if (used == text.size() - prefix.size()) return moving_average(k);
        } catch (const std::logic_error&) {
        }
    }
    throw Error(ErrorCode::ConfigError, "unknown forecaster '" + text + "'");
}

std::string ForecasterSpec::to_string() const {
    switch (kind) {
    case ForecasterKind::SeasonalNaive24h: return "seasonal_naive_24h";
    case ForecasterKind::SameHourLastWeek: return "same_hour_last_week";
    case ForecasterKind::MovingAverage: return "moving_average:" + std::to_string(window_hours);
    }
    return "unknown";
}

int ForecasterSpec::lookback_hours() const {
    switch (kind) {
    case ForecasterKind::SeasonalNaive24h: return 24;
    case ForecasterKind::SameHourLastWeek: return 168;
    case ForecasterKind::MovingAverage: return window_hours;
    }
    return 0;
}

double AccuracyReport::stddev() const { return std::sqrt(variance); }

ForecastBatch forecast(const ForecasterSpec& spec, const HourlySeries& history, HourlyStamp origin, int horizon) {
    if (horizon < 1) {
        throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
    }
    const int lookback = spec.lookback_hours();
    const HourlyStamp first = origin - (lookback - 1);
    if (!history.contains(first) || !history.contains(origin)) {
        throw Error(ErrorCode::InsufficientHistory, spec.to_string() + " needs " + std::to_string(lookback) +
                                                        " hours ending at " + origin.to_iso());
    }
    std::vector<double> preds;
    preds.reserve(static_cast<std::size_t>(horizon));
    switch (spec.kind) {
    case ForecasterKind::SeasonalNaive24h:
    case ForecasterKind::SameHourLastWeek:
        for (int h = 1; h <= horizon; ++h) {
            preds.push_back(history.at(first + (h - 1) % lookback));
        }
        break;
    case ForecasterKind::MovingAverage: {
        double sum = 0.0;
        for (int i = 0; i < lookback; ++i) sum += history.at(first + i);
        preds.assign(static_cast<std::size_t>(horizon), sum / lookback);
        break;
    }
    }
    return ForecastBatch(history.region(), origin, std::move(preds));
}

std::vector<ForecastBatch> forecast_range(const ForecasterSpec& spec, const HourlySeries& history,
                                          HourlyStamp first_origin, HourlyStamp last_origin, int horizon,
                                          int stride) {
    if (stride < 1) {
        throw Error(ErrorCode::InvalidArgument, "origin stride must be >= 1");
    }
    std::vector<ForecastBatch> out;
    for (HourlyStamp o = first_origin; o <= last_origin; o = o + stride) {
        out.push_back(forecast(spec, history, o, horizon));
    }
    return out;
}

double mape(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(pred.size()) + " predictions vs " +
                                                   std::to_string(truth.size()) + " truths");
    }
    if (truth.empty()) {
        throw Error(ErrorCode::EmptyInput, "mape of empty sequences");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0.0) {
            throw Error(ErrorCode::ZeroTruthValue, "truth is zero at index " + std::to_string(i));
        }
        sum += std::abs(truth[i] - pred[i]) / std::abs(truth[i]);
    }
    return 100.0 * sum / static_cast<double>(truth.size());
}

namespace {

double truth_at(const HourlySeries& truth, HourlyStamp t) {
    if (!truth.contains(t)) {
        throw Error(ErrorCode::TruthMissing, "no ground truth for " + t.to_iso());
    }
    const double y = truth.at(t);
    if (y == 0.0) {
        throw Error(ErrorCode::ZeroTruthValue, "truth is zero at " + t.to_iso());
    }
    return y;
}

AccuracyReport summarize(std::string label, const std::vector<double>& xs) {
    AccuracyReport r;
    r.group_label = std::move(label);
    r.n = static_cast<int>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    r.mape_percent = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mape_percent) * (x - r.mape_percent);
    r.variance = ss / static_cast<double>(xs.size());
    return r;
}

} // namespace

std::vector<AccuracyReport> horizon_bucket_mape(const std::vector<ForecastBatch>& batches, const HourlySeries& truth,
                                                const ingest::FillLog& skip) {
    if (batches.empty()) {
        throw Error(ErrorCode::EmptyInput, "no forecast batches");
    }
    constexpr int kBuckets = 4;
    constexpr int kBucketHours = 24;
    std::array<double, kBuckets> sums{};
    std::array<int, kBuckets> counts{};
    for (const auto& b : batches) {
        if (b.horizon() != kBuckets * kBucketHours) {
            throw Error(ErrorCode::HorizonMismatch, "batch at " + b.origin.to_iso() + " has H=" +
                                                        std::to_string(b.horizon()) + ", expected 96");
        }
        for (int h = 1; h <= b.horizon(); ++h) {
            const HourlyStamp t = b.target(h);
            if (skip.contains(t)) continue;
            const double y = truth_at(truth, t);
            const int bucket = (h - 1) / kBucketHours;
            sums[bucket] += std::abs(y - b.prediction(h)) / std::abs(y);
            counts[bucket] += 1;
        }
    }
    std::vector<AccuracyReport> out;
    for (int k = 0; k < kBuckets; ++k) {
        if (counts[k] == 0) {
            throw Error(ErrorCode::TruthMissing, "every hour in a horizon bucket was excluded");
        }
        AccuracyReport r;
        r.group_label = std::to_string(k * kBucketHours + 1) + "-" + std::to_string((k + 1) * kBucketHours) + "h";
        r.n = counts[k];
        r.mape_percent = 100.0 * sums[k] / counts[k];
        out.push_back(std::move(r));
    }
    // Spread across batches: per-batch bucket MAPE around the pooled value.
    for (int k = 0; k < kBuckets; ++k) {
        std::vector<double> per_batch;
        for (const auto& b : batches) {
            std::vector<double> p, y;
            for (int h = k * kBucketHours + 1; h <= (k + 1) * kBucketHours; ++h) {
                if (skip.contains(b.target(h))) continue;
                p.push_back(b.prediction(h));
                y.push_back(truth.at(b.target(h)));
            }
            if (!p.empty()) per_batch.push_back(mape(p, y));
        }
        out[static_cast<std::size_t>(k)].variance = summarize("", per_batch).variance;
    }
    return out;
}

std::vector<DailyMape> daily_mape(const std::vector<ForecastBatch>& batches, const HourlySeries& truth,
                                  const ingest::FillLog& skip) {
    std::vector<DailyMape> out;
    for (const auto& b : batches) {
        if (b.target(1).hour_of_day() != 0 || b.horizon() < 24) continue;
        std::vector<double> p, y;
        for (int h = 1; h <= 24; ++h) {
            const HourlyStamp t = b.target(h);
            if (skip.contains(t)) continue;
            p.push_back(b.prediction(h));
            y.push_back(truth_at(truth, t));
        }
        if (p.empty()) continue;
        out.push_back({b.target(1).epoch_day(), mape(p, y)});
    }
    return out;
}

std::vector<AccuracyReport> seasonal_group_stats(const std::vector<DailyMape>& daily) {
    static const char* const kSeasons[] = {"summer", "fall", "winter"};
    std::map<int, std::vector<double>> groups;
    for (const auto& d : daily) {
        const CivilDate date = civil_date_of_day(d.epoch_day);
        if (date.month < 7) {
            throw Error(ErrorCode::DateOutOfStudyRange, format_day(d.epoch_day) + " is outside July-December");
        }
        groups[static_cast<int>((date.month - 7) / 2)].push_back(d.mape_percent);
    }
    std::vector<AccuracyReport> out;
    for (const auto& [season, xs] : groups) {
        out.push_back(summarize(kSeasons[season], xs));
    }
    return out;
}

void write_accuracy_reports(std::ostream& out, const std::vector<AccuracyReport>& reports) {
    out << "group,mape_percent,stddev,n\n";
    char buf[128];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%.4f,%.4f,%d", r.mape_percent, r.stddev(), r.n);
        out << r.group_label << ',' << buf << '\n';
    }
}

} // namespace carbonci::forecast
