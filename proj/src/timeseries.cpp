#include "carbonci/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "carbonci/error.hpp"

namespace carbonci {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::GapTooLarge: return "GapTooLarge";
    case ErrorCode::ZeroGeneration: return "ZeroGeneration";
    case ErrorCode::MissingFactor: return "MissingFactor";
    case ErrorCode::InconsistentHorizon: return "InconsistentHorizon";
    case ErrorCode::ValueOutOfUnitRange: return "ValueOutOfUnitRange";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::ZeroTruthValue: return "ZeroTruthValue";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::HorizonMismatch: return "HorizonMismatch";
    case ErrorCode::TruthMissing: return "TruthMissing";
    case ErrorCode::DateOutOfStudyRange: return "DateOutOfStudyRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::LagLengthMismatch: return "LagLengthMismatch";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::AlphaMismatch: return "AlphaMismatch";
    case ErrorCode::InsufficientDays: return "InsufficientDays";
    case ErrorCode::EmptyTestSplit: return "EmptyTestSplit";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

int parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    int value = 0;
    if (pos + len > text.size()) {
        throw Error(ErrorCode::ParseError, "truncated timestamp '" + std::string(whole) + "'");
    }
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(whole) + "'");
    }
    return value;
}

} // namespace

HourlyStamp HourlyStamp::from_civil(int year, unsigned month, unsigned day, int hour) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok() || hour < 0 || hour > 23) {
        throw Error(ErrorCode::ParseError, "invalid civil date/hour");
    }
    return HourlyStamp{static_cast<std::int64_t>(sys_days{ymd}.time_since_epoch().count()) * 24 + hour};
}

HourlyStamp HourlyStamp::parse(std::string_view text) {
    const std::string_view whole = text;
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);

    if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
        throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(whole) + "'");
    }
    const int year = parse_fixed_int(text, 0, 4, whole);
    const int month = parse_fixed_int(text, 5, 2, whole);
    const int day = parse_fixed_int(text, 8, 2, whole);
    int hour = 0;
    int offset_minutes = 0;

    std::size_t pos = 10;
    if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
        hour = parse_fixed_int(text, pos + 1, 2, whole);
        pos += 3;
        for (int field = 0; field < 2 && pos < text.size() && text[pos] == ':'; ++field) {
            if (parse_fixed_int(text, pos + 1, 2, whole) != 0) {
                throw Error(ErrorCode::ParseError, "sub-hourly timestamp '" + std::string(whole) + "'");
            }
            pos += 3;
        }
    }
    if (pos < text.size()) {
        const char c = text[pos];
        if (c == 'Z' && pos + 1 == text.size()) {
            pos += 1;
        } else if ((c == '+' || c == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
            const int oh = parse_fixed_int(text, pos + 1, 2, whole);
            const int om = parse_fixed_int(text, pos + 4, 2, whole);
            if (om != 0) {
                throw Error(ErrorCode::ParseError, "non-hourly UTC offset '" + std::string(whole) + "'");
            }
            offset_minutes = (c == '+' ? 1 : -1) * (oh * 60 + om);
            pos += 6;
        } else {
            throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(whole) + "'");
        }
    }
    if (month < 1 || month > 12 || day < 1 || day > 31) {
        throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(whole) + "'");
    }
    HourlyStamp local = from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day), hour);
    return local - offset_minutes / 60;
}

CivilDate civil_date_of_day(std::int64_t epoch_day) {
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{epoch_day}}};
    return CivilDate{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day())};
}

std::string format_day(std::int64_t epoch_day) {
    const CivilDate d = civil_date_of_day(epoch_day);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

std::string HourlyStamp::to_iso() const {
    const CivilDate d = civil_date_of_day(epoch_day());
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00Z", d.year, d.month, d.day, hour_of_day());
    return buf;
}

RegionId::RegionId(std::string code) : code_(std::move(code)) {
    if (code_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "region code is empty");
    }
    for (char c : code_) {
        if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) {
            throw Error(ErrorCode::InvalidArgument, "region code '" + code_ + "' must be uppercase alphanumeric");
        }
    }
}

const char* to_string(Unit unit) {
    switch (unit) {
    case Unit::GramsPerKwh: return "gCO2eq_per_kWh";
    case Unit::MWh: return "MWh";
    case Unit::MW: return "MW";
    case Unit::Dimensionless: return "dimensionless";
    }
    return "unknown";
}

HourlySeries::HourlySeries(RegionId region, HourlyStamp start, std::vector<double> values, Unit unit)
    : region_(std::move(region)), start_(start), values_(std::move(values)), unit_(unit) {
    if (values_.empty()) {
        throw Error(ErrorCode::EmptyInput, "hourly series for " + region_.code() + " has no values");
    }
    const bool non_negative = unit_ != Unit::Dimensionless;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(ErrorCode::InvalidArgument,
                        "non-finite value at " + (start_ + static_cast<std::int64_t>(i)).to_iso());
        }
        if (non_negative && values_[i] < 0.0) {
            throw Error(ErrorCode::InvalidArgument,
                        "negative " + std::string(to_string(unit_)) + " value at " +
                            (start_ + static_cast<std::int64_t>(i)).to_iso());
        }
    }
}

double HourlySeries::at(HourlyStamp t) const {
    if (!contains(t)) {
        throw Error(ErrorCode::OutOfRange, t.to_iso() + " outside series for " + region_.code());
    }
    return values_[static_cast<std::size_t>(t - start_)];
}

ForecastBatch::ForecastBatch(RegionId region_, HourlyStamp origin_, std::vector<double> predictions_)
    : region(std::move(region_)), origin(origin_), predictions(std::move(predictions_)) {
    if (predictions.empty()) {
        throw Error(ErrorCode::InvalidArgument, "forecast batch needs horizon >= 1");
    }
    for (double v : predictions) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, "non-finite prediction in batch at " + origin.to_iso());
        }
    }
}

Interval::Interval(double lower_, double upper_, double alpha_) : lower(lower_), upper(upper_), alpha(alpha_) {
    if (!(lower <= upper)) {
        throw Error(ErrorCode::InvalidArgument, "interval lower bound exceeds upper bound");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
    }
}

IntervalSeries::IntervalSeries(RegionId region, HourlyStamp start, std::vector<Interval> intervals, double alpha)
    : region_(std::move(region)), start_(start), intervals_(std::move(intervals)), alpha_(alpha) {
    if (intervals_.empty()) {
        throw Error(ErrorCode::EmptyInput, "interval series is empty");
    }
    for (const Interval& iv : intervals_) {
        if (iv.alpha != alpha_) {
            throw Error(ErrorCode::AlphaMismatch, "interval alpha differs from series alpha");
        }
    }
}

PairedSeries align(const HourlySeries& a, const HourlySeries& b) {
    const HourlyStamp from = std::max(a.start(), b.start());
    const HourlyStamp to = std::min(a.end(), b.end());
    if (!(from < to)) {
        throw Error(ErrorCode::EmptyOverlap,
                    a.region().code() + " and " + b.region().code() + " ranges do not overlap");
    }
    PairedSeries out{from, {}, {}};
    const auto n = static_cast<std::size_t>(to - from);
    const auto oa = a.values().begin() + (from - a.start());
    const auto ob = b.values().begin() + (from - b.start());
    out.first.assign(oa, oa + static_cast<std::ptrdiff_t>(n));
    out.second.assign(ob, ob + static_cast<std::ptrdiff_t>(n));
    return out;
}

HourlySeries slice(const HourlySeries& s, HourlyStamp from, std::int64_t len) {
    if (len < 1 || from < s.start() || from + len > s.end()) {
        throw Error(ErrorCode::OutOfRange, "slice [" + from.to_iso() + ", +" + std::to_string(len) +
                                               "h) outside series for " + s.region().code());
    }
    const auto first = s.values().begin() + (from - s.start());
    return HourlySeries(s.region(), from, std::vector<double>(first, first + len), s.unit());
}

} // namespace carbonci
