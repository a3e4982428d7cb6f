#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "carbonci/ingest.hpp"
#include "carbonci/timeseries.hpp"

namespace carbonci::shiftsim {

inline constexpr double kGramsPerTon = 1e6;
inline constexpr double kKwhPerMwh = 1000.0;

struct EmissionsTotal {
    double grams = 0.0;
    HourlyStamp start;
    std::int64_t hours = 0;
    RegionId region;

    double tons() const { return grams / kGramsPerTon; }
};

/// grams = sum_h normalized_h * peak_mw * 1000 kWh * ci_h. Ranges must match exactly.
EmissionsTotal emissions(const ingest::PowerTrace& trace, const HourlySeries& ci);

/// percent/100 * base, in metric tons.
double tons_delta(double percent_increase, double base_grams);

enum class PolicyKind { Point, IntervalDominance, OverlapThreshold };

struct ShiftPolicy {
    PolicyKind kind = PolicyKind::IntervalDominance;
    double theta = 0.25;

    static ShiftPolicy point() { return {PolicyKind::Point, 0.0}; }
    static ShiftPolicy dominance() { return {PolicyKind::IntervalDominance, 0.0}; }
    static ShiftPolicy overlap(double theta);

    /// `point`, `dominance`, `overlap:THETA`
    static ShiftPolicy parse(const std::string& text);
    std::string to_string() const;
};

/// Predicted total and its interval for one option (a day or a region).
struct Option {
    double pred_total = 0.0;
    Interval ci;
};

enum class ShiftAction { Shift, Stay };

struct ShiftDecision {
    ShiftAction action = ShiftAction::Stay;
    std::string reason;
    double source_pred = 0.0;
    double target_pred = 0.0;
    Interval source_ci;
    Interval target_ci;
};

ShiftDecision decide_shift(const Option& source, const Option& target, const ShiftPolicy& policy);

/// Day-level totals for one option: predicted and true emissions plus the interval on
/// the predicted total.
struct DayOutcome {
    std::int64_t day = 0;
    double pred = 0.0;
    double truth = 0.0;
    Interval ci;
};

/// Which disagreement between predicted and true ordering counts as misleading.
enum class MisleadingRule {
    /// Target predicted lower but truly higher: the point policy would shift and lose.
    ShiftTriggering,
    /// Source predicted lower but truly higher.
    Inverted,
};

struct ShiftCase {
    std::string source;
    std::string target;
    DayOutcome source_day;
    DayOutcome target_day;
    bool misleading = false;
    double increase_percent = 0.0; // cost of following the point forecast; 0 unless misleading
    ShiftDecision decision;
    double realized_percent = 0.0; // (truth_target - truth_source)/truth_source if shifted, else 0
};

struct ShiftReport {
    std::string source;
    std::string target;
    ShiftPolicy policy;
    std::vector<ShiftCase> cases;
    double misleading_percent = 0.0;
    double increased_emissions_percent = 0.0; // mean over misleading cases
    double realized_increase_percent = 0.0;   // mean realized change over misleading cases under `policy`
    std::size_t shifts = 0;
    double truth_total_stay = 0.0;
    double truth_total_policy = 0.0;
};

/// Grades prepared (source, target) outcome pairs.
ShiftReport simulate_pairs(std::string source, std::string target, std::vector<std::pair<DayOutcome, DayOutcome>> pairs,
                           const ShiftPolicy& policy, MisleadingRule rule = MisleadingRule::ShiftTriggering);

/// Pairs each day d with d+1 from pre-aggregated day totals.
ShiftReport temporal_shift_sim(const std::string& region, const std::vector<DayOutcome>& days, const ShiftPolicy& policy,
                               MisleadingRule rule = MisleadingRule::ShiftTriggering);

/// Pairs source and target outcomes on the same day; day sets must match.
ShiftReport spatial_shift_sim(const std::string& source, const std::vector<DayOutcome>& source_days,
                              const std::string& target, const std::vector<DayOutcome>& target_days,
                              const ShiftPolicy& policy, MisleadingRule rule = MisleadingRule::ShiftTriggering);

/// Hourly view of one option over a set of whole UTC days.
struct HourlyOutlook {
    HourlyStamp start;
    std::vector<double> pred;
    std::vector<double> truth;
    std::vector<Interval> intervals;

    std::size_t size() const { return pred.size(); }
};

/// Cluster power for the 24 hours of `day`, read cyclically from the trace.
std::vector<double> day_profile_mw(const ingest::PowerTrace& trace, std::int64_t day);

/// Totals for `day` under the given hourly power profile. The interval sums the
/// power-weighted hourly lower and upper bounds, which is conservative.
DayOutcome aggregate_day(const HourlyOutlook& outlook, std::int64_t day, std::span<const double> power_mw);

/// Whole UTC days fully covered by the outlook.
std::vector<std::int64_t> full_days(const HourlyOutlook& outlook);

/// Temporal case study from hourly data: for each (d, d+1), the workload of day d is
/// placed on either day.
ShiftReport temporal_from_hourly(const std::string& region, const HourlyOutlook& outlook,
                                 const ingest::PowerTrace& trace, const ShiftPolicy& policy,
                                 MisleadingRule rule = MisleadingRule::ShiftTriggering);

/// Spatial case study from hourly data: each day's workload runs in source or target.
ShiftReport spatial_from_hourly(const std::string& source, const HourlyOutlook& source_outlook,
                                const std::string& target, const HourlyOutlook& target_outlook,
                                const ingest::PowerTrace& trace, const ShiftPolicy& policy,
                                MisleadingRule rule = MisleadingRule::ShiftTriggering);

/// Per-case rows, values normalized by the source option's true total.
void write_cases(std::ostream& out, const ShiftReport& report);
void write_summary_header(std::ostream& out);
/// `source,target,misleading_percent,increased_emissions_percent`
void write_summary_row(std::ostream& out, const ShiftReport& report);
void write_policy_header(std::ostream& out);
/// `source,target,policy,cases,shifts,realized_increase_percent`
void write_policy_row(std::ostream& out, const ShiftReport& report);

} // namespace carbonci::shiftsim
