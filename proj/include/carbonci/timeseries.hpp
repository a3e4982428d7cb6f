#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace carbonci {

/// Whole hours since 1970-01-01T00:00Z.
struct HourlyStamp {
    std::int64_t epoch_hour = 0;

    constexpr HourlyStamp() = default;
    constexpr explicit HourlyStamp(std::int64_t h) : epoch_hour(h) {}

    constexpr HourlyStamp operator+(std::int64_t n) const { return HourlyStamp{epoch_hour + n}; }
    constexpr HourlyStamp operator-(std::int64_t n) const { return HourlyStamp{epoch_hour - n}; }
    constexpr std::int64_t operator-(HourlyStamp o) const { return epoch_hour - o.epoch_hour; }
    constexpr auto operator<=>(const HourlyStamp&) const = default;

    /// UTC day index (days since epoch), floor semantics for pre-epoch stamps.
    constexpr std::int64_t epoch_day() const {
        return epoch_hour >= 0 ? epoch_hour / 24 : -((-epoch_hour + 23) / 24);
    }
    constexpr int hour_of_day() const { return static_cast<int>(epoch_hour - epoch_day() * 24); }

    static HourlyStamp from_civil(int year, unsigned month, unsigned day, int hour = 0);

    /// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH[:MM[:SS]]`, a space instead of `T`,
    /// and an optional `Z` or `±HH:MM` offset. Offsets are normalized to UTC.
    /// Minutes and seconds must be zero.
    static HourlyStamp parse(std::string_view text);

    /// `YYYY-MM-DDTHH:00:00Z`
    std::string to_iso() const;
};

struct CivilDate {
    int year;
    unsigned month;
    unsigned day;
};

CivilDate civil_date_of_day(std::int64_t epoch_day);
std::string format_day(std::int64_t epoch_day);

class RegionId {
public:
    RegionId() = default;
    explicit RegionId(std::string code);

    const std::string& code() const { return code_; }
    bool operator==(const RegionId&) const = default;
    auto operator<=>(const RegionId&) const = default;

private:
    std::string code_;
};

enum class Unit { GramsPerKwh, MWh, MW, Dimensionless };

const char* to_string(Unit unit);

/// Contiguous hourly series over [start, start + size()).
class HourlySeries {
public:
    HourlySeries(RegionId region, HourlyStamp start, std::vector<double> values, Unit unit);

    const RegionId& region() const { return region_; }
    HourlyStamp start() const { return start_; }
    HourlyStamp end() const { return start_ + static_cast<std::int64_t>(values_.size()); }
    Unit unit() const { return unit_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }

    bool contains(HourlyStamp t) const { return t >= start_ && t < end(); }
    double at(HourlyStamp t) const;
    double operator[](std::size_t i) const { return values_[i]; }

private:
    RegionId region_;
    HourlyStamp start_;
    std::vector<double> values_;
    Unit unit_;
};

/// Point forecasts for origin+1 .. origin+horizon.
struct ForecastBatch {
    RegionId region;
    HourlyStamp origin;
    std::vector<double> predictions;

    ForecastBatch(RegionId region, HourlyStamp origin, std::vector<double> predictions);

    int horizon() const { return static_cast<int>(predictions.size()); }
    HourlyStamp target(int h) const { return origin + h; }
    double prediction(int h) const { return predictions[static_cast<std::size_t>(h - 1)]; }
};

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.1;

    Interval() = default;
    Interval(double lower, double upper, double alpha);

    double width() const { return upper - lower; }
    bool contains(double y) const { return lower <= y && y <= upper; }
    bool operator==(const Interval&) const = default;
};

class IntervalSeries {
public:
    IntervalSeries(RegionId region, HourlyStamp start, std::vector<Interval> intervals, double alpha);

    const RegionId& region() const { return region_; }
    HourlyStamp start() const { return start_; }
    HourlyStamp end() const { return start_ + static_cast<std::int64_t>(intervals_.size()); }
    double alpha() const { return alpha_; }
    std::size_t size() const { return intervals_.size(); }
    const std::vector<Interval>& intervals() const { return intervals_; }
    const Interval& operator[](std::size_t i) const { return intervals_[i]; }

private:
    RegionId region_;
    HourlyStamp start_;
    std::vector<Interval> intervals_;
    double alpha_;
};

struct PairedSeries {
    HourlyStamp start;
    std::vector<double> first;
    std::vector<double> second;

    std::size_t size() const { return first.size(); }
};

/// Pairs values over [max(a.start, b.start), min(a.end, b.end)).
PairedSeries align(const HourlySeries& a, const HourlySeries& b);

HourlySeries slice(const HourlySeries& s, HourlyStamp from, std::int64_t len);

} // namespace carbonci
