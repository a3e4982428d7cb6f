#include "carbonci/shiftsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "carbonci/error.hpp"

namespace carbonci::shiftsim {

EmissionsTotal emissions(const ingest::PowerTrace& trace, const HourlySeries& ci) {
    if (trace.start != ci.start() || trace.end() != ci.end()) {
        throw Error(ErrorCode::AlignmentError, "power trace [" + trace.start.to_iso() + ", " + trace.end().to_iso() +
                                                   ") does not match carbon intensity range [" + ci.start().to_iso() +
                                                   ", " + ci.end().to_iso() + ")");
    }
    double grams = 0.0;
    for (std::size_t i = 0; i < trace.normalized.size(); ++i) {
        grams += trace.power_mw(i) * kKwhPerMwh * ci[i];
    }
    return EmissionsTotal{grams, trace.start, static_cast<std::int64_t>(trace.normalized.size()), ci.region()};
}

double tons_delta(double percent_increase, double base_grams) {
    if (!(base_grams > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "base emissions must be positive");
    }
    return percent_increase / 100.0 * base_grams / kGramsPerTon;
}

ShiftPolicy ShiftPolicy::overlap(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "overlap threshold must lie in [0,1]");
    }
    return {PolicyKind::OverlapThreshold, theta};
}

ShiftPolicy ShiftPolicy::parse(const std::string& text) {
    if (text == "point") return point();
    if (text == "dominance") return dominance();
    const std::string prefix = "overlap:";
    if (text.rfind(prefix, 0) == 0) {
        try {
            std::size_t used = 0;
            const double theta = std::stod(text.substr(prefix.size()), &used);
            if (used == text.size() - prefix.size()) return overlap(theta);
        } catch (const std::logic_error&) {
        }
    }
    throw Error(ErrorCode::ConfigError, "unknown policy '" + text + "' (expected point|dominance|overlap:THETA)");
}

std::string ShiftPolicy::to_string() const {
    switch (kind) {
    case PolicyKind::Point: return "point";
    case PolicyKind::IntervalDominance: return "dominance";
    case PolicyKind::OverlapThreshold: {
        char buf[48];
        std::snprintf(buf, sizeof buf, "overlap:%g", theta);
        return buf;
    }
    }
    return "unknown";
}

ShiftDecision decide_shift(const Option& source, const Option& target, const ShiftPolicy& policy) {
    if (source.ci.alpha != target.ci.alpha) {
        throw Error(ErrorCode::AlphaMismatch, "source and target intervals use different alpha");
    }
    ShiftDecision d;
    d.source_pred = source.pred_total;
    d.target_pred = target.pred_total;
    d.source_ci = source.ci;
    d.target_ci = target.ci;
    const bool cheaper = target.pred_total < source.pred_total;

    switch (policy.kind) {
    case PolicyKind::Point:
        d.action = cheaper ? ShiftAction::Shift : ShiftAction::Stay;
        d.reason = cheaper ? "target predicted lower" : "target not predicted lower";
        break;
    case PolicyKind::IntervalDominance:
        if (target.ci.upper < source.ci.lower) {
            d.action = ShiftAction::Shift;
            d.reason = "target interval strictly below source interval";
        } else {
            d.action = ShiftAction::Stay;
            d.reason = "intervals overlap";
        }
        break;
    case PolicyKind::OverlapThreshold: {
        if (!cheaper) {
            d.action = ShiftAction::Stay;
            d.reason = "target not predicted lower";
            break;
        }
        const double overlap =
            std::max(0.0, std::min(source.ci.upper, target.ci.upper) - std::max(source.ci.lower, target.ci.lower));
        const double narrow = std::min(source.ci.width(), target.ci.width());
        double ratio = 0.0;
        if (narrow > 0.0) {
            ratio = overlap / narrow;
        } else {
            // A zero-width interval either sits inside the other (full overlap) or apart.
            const bool touch = source.ci.lower <= target.ci.upper && target.ci.lower <= source.ci.upper;
            ratio = touch ? 1.0 : 0.0;
        }
        if (ratio <= policy.theta) {
            d.action = ShiftAction::Shift;
            d.reason = "target predicted lower with interval overlap within threshold";
        } else {
            d.action = ShiftAction::Stay;
            d.reason = "interval overlap above threshold";
        }
        break;
    }
    }
    return d;
}

ShiftReport simulate_pairs(std::string source, std::string target, std::vector<std::pair<DayOutcome, DayOutcome>> pairs,
                           const ShiftPolicy& policy, MisleadingRule rule) {
    if (pairs.empty()) {
        throw Error(ErrorCode::InsufficientDays, "no comparable pairs for " + source + " -> " + target);
    }
    ShiftReport report;
    report.source = std::move(source);
    report.target = std::move(target);
    report.policy = policy;

    std::size_t misleading = 0;
    double increase_sum = 0.0;
    double realized_sum = 0.0;
    for (auto& [s, t] : pairs) {
        if (!(s.truth > 0.0) || !(t.truth > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "true emissions must be positive on day " + format_day(s.day));
        }
        ShiftCase c;
        c.source = report.source;
        c.target = report.target;
        c.source_day = s;
        c.target_day = t;
        c.decision = decide_shift({s.pred, s.ci}, {t.pred, t.ci}, policy);

        if (rule == MisleadingRule::ShiftTriggering) {
            c.misleading = t.pred < s.pred && t.truth > s.truth;
            if (c.misleading) c.increase_percent = (t.truth - s.truth) / s.truth * 100.0;
        } else {
            c.misleading = s.pred < t.pred && s.truth > t.truth;
            if (c.misleading) c.increase_percent = (s.truth - t.truth) / t.truth * 100.0;
        }
        const bool shifted = c.decision.action == ShiftAction::Shift;
        c.realized_percent = shifted ? (t.truth - s.truth) / s.truth * 100.0 : 0.0;

        report.truth_total_stay += s.truth;
        report.truth_total_policy += shifted ? t.truth : s.truth;
        report.shifts += shifted ? 1 : 0;
        if (c.misleading) {
            ++misleading;
            increase_sum += c.increase_percent;
            realized_sum += c.realized_percent;
        }
        report.cases.push_back(std::move(c));
    }
    report.misleading_percent = 100.0 * static_cast<double>(misleading) / static_cast<double>(report.cases.size());
    if (misleading > 0) {
        report.increased_emissions_percent = increase_sum / static_cast<double>(misleading);
        report.realized_increase_percent = realized_sum / static_cast<double>(misleading);
    }
    return report;
}

ShiftReport temporal_shift_sim(const std::string& region, const std::vector<DayOutcome>& days, const ShiftPolicy& policy,
                               MisleadingRule rule) {
    std::vector<DayOutcome> sorted = days;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.day < b.day; });
    std::vector<std::pair<DayOutcome, DayOutcome>> pairs;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].day == sorted[i - 1].day) {
            throw Error(ErrorCode::InvalidArgument, "duplicate day " + format_day(sorted[i].day));
        }
        if (sorted[i].day == sorted[i - 1].day + 1) pairs.emplace_back(sorted[i - 1], sorted[i]);
    }
    if (pairs.empty()) {
        throw Error(ErrorCode::InsufficientDays, region + ": temporal shifting needs two consecutive days");
    }
    return simulate_pairs(region, region, std::move(pairs), policy, rule);
}

ShiftReport spatial_shift_sim(const std::string& source, const std::vector<DayOutcome>& source_days,
                              const std::string& target, const std::vector<DayOutcome>& target_days,
                              const ShiftPolicy& policy, MisleadingRule rule) {
    auto by_day = [](std::vector<DayOutcome> v) {
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.day < b.day; });
        return v;
    };
    const auto s = by_day(source_days);
    const auto t = by_day(target_days);
    if (s.size() != t.size()) {
        throw Error(ErrorCode::AlignmentError, source + " has " + std::to_string(s.size()) + " days, " + target +
                                                   " has " + std::to_string(t.size()));
    }
    std::vector<std::pair<DayOutcome, DayOutcome>> pairs;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].day != t[i].day) {
            throw Error(ErrorCode::AlignmentError, source + " day " + format_day(s[i].day) + " has no match in " + target);
        }
        pairs.emplace_back(s[i], t[i]);
    }
    return simulate_pairs(source, target, std::move(pairs), policy, rule);
}

std::vector<double> day_profile_mw(const ingest::PowerTrace& trace, std::int64_t day) {
    const auto len = static_cast<std::int64_t>(trace.normalized.size());
    std::vector<double> out(24);
    for (int h = 0; h < 24; ++h) {
        std::int64_t k = (day * 24 + h - trace.start.epoch_hour) % len;
        if (k < 0) k += len;
        out[static_cast<std::size_t>(h)] = trace.power_mw(static_cast<std::size_t>(k));
    }
    return out;
}

DayOutcome aggregate_day(const HourlyOutlook& outlook, std::int64_t day, std::span<const double> power_mw) {
    const HourlyStamp first{day * 24};
    const std::int64_t offset = first - outlook.start;
    if (offset < 0 || offset + 24 > static_cast<std::int64_t>(outlook.size())) {
        throw Error(ErrorCode::AlignmentError, "day " + format_day(day) + " not fully covered");
    }
    if (power_mw.size() != 24) {
        throw Error(ErrorCode::LengthMismatch, "day profile must have 24 hours");
    }
    DayOutcome d;
    d.day = day;
    double lo = 0.0, hi = 0.0;
    for (std::size_t h = 0; h < 24; ++h) {
        const auto i = static_cast<std::size_t>(offset) + h;
        const double kwh = power_mw[h] * kKwhPerMwh;
        d.pred += kwh * outlook.pred[i];
        d.truth += kwh * outlook.truth[i];
        lo += kwh * outlook.intervals[i].lower;
        hi += kwh * outlook.intervals[i].upper;
    }
    d.ci = Interval(lo, hi, outlook.intervals[static_cast<std::size_t>(offset)].alpha);
    return d;
}

std::vector<std::int64_t> full_days(const HourlyOutlook& outlook) {
    std::vector<std::int64_t> days;
    if (outlook.size() == 0) return days;
    const HourlyStamp end = outlook.start + static_cast<std::int64_t>(outlook.size());
    std::int64_t d = outlook.start.epoch_day();
    if (outlook.start.hour_of_day() != 0) ++d;
    for (; HourlyStamp{(d + 1) * 24} <= end; ++d) days.push_back(d);
    return days;
}

ShiftReport temporal_from_hourly(const std::string& region, const HourlyOutlook& outlook,
                                 const ingest::PowerTrace& trace, const ShiftPolicy& policy, MisleadingRule rule) {
    const auto days = full_days(outlook);
    std::vector<std::pair<DayOutcome, DayOutcome>> pairs;
    for (std::size_t i = 1; i < days.size(); ++i) {
        const auto profile = day_profile_mw(trace, days[i - 1]);
        pairs.emplace_back(aggregate_day(outlook, days[i - 1], profile), aggregate_day(outlook, days[i], profile));
    }
    if (pairs.empty()) {
        throw Error(ErrorCode::InsufficientDays, region + ": temporal shifting needs two full days");
    }
    return simulate_pairs(region, region, std::move(pairs), policy, rule);
}

ShiftReport spatial_from_hourly(const std::string& source, const HourlyOutlook& source_outlook,
                                const std::string& target, const HourlyOutlook& target_outlook,
                                const ingest::PowerTrace& trace, const ShiftPolicy& policy, MisleadingRule rule) {
    const auto days = full_days(source_outlook);
    if (days != full_days(target_outlook)) {
        throw Error(ErrorCode::AlignmentError, source + " and " + target + " cover different days");
    }
    std::vector<std::pair<DayOutcome, DayOutcome>> pairs;
    for (std::int64_t d : days) {
        const auto profile = day_profile_mw(trace, d);
        pairs.emplace_back(aggregate_day(source_outlook, d, profile), aggregate_day(target_outlook, d, profile));
    }
    if (pairs.empty()) {
        throw Error(ErrorCode::InsufficientDays, source + " -> " + target + ": no full days");
    }
    return simulate_pairs(source, target, std::move(pairs), policy, rule);
}

namespace {

std::string f4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string f2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace

void write_cases(std::ostream& out, const ShiftReport& report) {
    out << "source,target,source_day,target_day,source_truth,source_pred,source_lower,source_upper,"
           "target_truth,target_pred,target_lower,target_upper,misleading,increase_percent,policy,decision,reason\n";
    for (const auto& c : report.cases) {
        const double norm = c.source_day.truth;
        out << c.source << ',' << c.target << ',' << format_day(c.source_day.day) << ','
            << format_day(c.target_day.day) << ',' << f4(c.source_day.truth / norm) << ','
            << f4(c.source_day.pred / norm) << ',' << f4(c.source_day.ci.lower / norm) << ','
            << f4(c.source_day.ci.upper / norm) << ',' << f4(c.target_day.truth / norm) << ','
            << f4(c.target_day.pred / norm) << ',' << f4(c.target_day.ci.lower / norm) << ','
            << f4(c.target_day.ci.upper / norm) << ',' << (c.misleading ? "true" : "false") << ','
            << f2(c.increase_percent) << ',' << report.policy.to_string() << ','
            << (c.decision.action == ShiftAction::Shift ? "shift" : "stay") << ',' << c.decision.reason << '\n';
    }
}

void write_summary_header(std::ostream& out) { out << "source,target,misleading_percent,increased_emissions_percent\n"; }

void write_summary_row(std::ostream& out, const ShiftReport& report) {
    out << report.source << ',' << report.target << ',' << f2(report.misleading_percent) << ','
        << f2(report.increased_emissions_percent) << '\n';
}

void write_policy_header(std::ostream& out) { out << "source,target,policy,cases,shifts,realized_increase_percent\n"; }

void write_policy_row(std::ostream& out, const ShiftReport& report) {
    out << report.source << ',' << report.target << ',' << report.policy.to_string() << ',' << report.cases.size()
        << ',' << report.shifts << ',' << f2(report.realized_increase_percent) << '\n';
}

} // namespace carbonci::shiftsim
