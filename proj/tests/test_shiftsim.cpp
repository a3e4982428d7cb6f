#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "carbonci/error.hpp"
#include "carbonci/shiftsim.hpp"

using namespace carbonci;
using namespace carbonci::shiftsim;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::InvalidArgument;
}

ingest::PowerTrace flat_trace(std::size_t hours, double level = 1.0, double peak = 20.0) {
    return ingest::PowerTrace(RegionId("DC"), HourlyStamp{0}, std::vector<double>(hours, level), peak);
}

HourlySeries ci_series(std::vector<double> v) {
    return HourlySeries(RegionId("AAA"), HourlyStamp{0}, std::move(v), Unit::GramsPerKwh);
}

DayOutcome day(std::int64_t d, double pred, double truth, double lo, double hi) { return {d, pred, truth, Interval(lo, hi, 0.1)}; }

} // namespace

TEST_CASE("emissions arithmetic") {
    CHECK(emissions(flat_trace(24), ci_series(std::vector<double>(24, 100.0))).grams == 48'000'000.0);
    CHECK(emissions(flat_trace(24), ci_series(std::vector<double>(24, 100.0))).tons() == 48.0);
    CHECK(emissions(flat_trace(24, 0.0), ci_series(std::vector<double>(24, 100.0))).grams == 0.0);
    CHECK(emissions(flat_trace(24, 1.0, 40.0), ci_series(std::vector<double>(24, 100.0))).grams == 96'000'000.0);
    CHECK(code_of([] { emissions(flat_trace(23), ci_series(std::vector<double>(24, 1.0))); }) ==
          ErrorCode::AlignmentError);
}

TEST_CASE("tons delta") {
    CHECK(tons_delta(5.0, 42e6) == doctest::Approx(2.1).epsilon(1e-12));
    CHECK(tons_delta(0.0, 42e6) == 0.0);
    CHECK(std::abs(tons_delta(14.0, 74.3e6) - 10.4) <= 0.05);
    CHECK(code_of([] { tons_delta(5.0, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("policy strings") {
    CHECK(ShiftPolicy::parse("point").kind == PolicyKind::Point);
    CHECK(ShiftPolicy::parse("dominance").kind == PolicyKind::IntervalDominance);
    const auto o = ShiftPolicy::parse("overlap:0.4");
    CHECK(o.kind == PolicyKind::OverlapThreshold);
    CHECK(o.theta == 0.4);
    CHECK(o.to_string() == "overlap:0.4");
    CHECK(code_of([] { ShiftPolicy::parse("overlap:1.5"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { ShiftPolicy::parse("greedy"); }) == ErrorCode::ConfigError);
}

TEST_CASE("decisions on worked-example day totals") {
    const Option day1{1.13, Interval(0.83, 1.21, 0.1)};
    const Option day2{0.96, Interval(0.84, 1.20, 0.1)};
    CHECK(decide_shift(day1, day2, ShiftPolicy::point()).action == ShiftAction::Shift);
    CHECK(decide_shift(day1, day2, ShiftPolicy::dominance()).action == ShiftAction::Stay);

    const Option erco{0.86, Interval(0.86, 1.11, 0.1)};
    const Option isne{0.90, Interval(0.83, 0.93, 0.1)};
    CHECK(decide_shift(erco, isne, ShiftPolicy::point()).action == ShiftAction::Stay);
    CHECK(decide_shift(erco, isne, ShiftPolicy::dominance()).action == ShiftAction::Stay);
    CHECK(decide_shift(isne, erco, ShiftPolicy::point()).action == ShiftAction::Shift);
    CHECK(decide_shift(isne, erco, ShiftPolicy::dominance()).action == ShiftAction::Stay);

    const Option src{3.5, Interval(3, 4, 0.1)};
    const Option tgt{1.5, Interval(1, 2, 0.1)};
    for (auto p : {ShiftPolicy::point(), ShiftPolicy::dominance(), ShiftPolicy::overlap(0.25)}) {
        const auto d = decide_shift(src, tgt, p);
        CHECK(d.action == ShiftAction::Shift);
        CHECK_FALSE(d.reason.empty());
    }
    CHECK(code_of([] {
              decide_shift({1, Interval(0, 2, 0.1)}, {1, Interval(0, 2, 0.05)}, ShiftPolicy::point());
          }) == ErrorCode::AlphaMismatch);
}

TEST_CASE("overlap threshold") {
    const Option src{10, Interval(8, 12, 0.1)};
    CHECK(decide_shift(src, {9, Interval(7, 9, 0.1)}, ShiftPolicy::overlap(0.5)).action == ShiftAction::Shift);
    CHECK(decide_shift(src, {9, Interval(7, 9, 0.1)}, ShiftPolicy::overlap(0.4)).action == ShiftAction::Stay);
    CHECK(decide_shift(src, {11, Interval(5, 7, 0.1)}, ShiftPolicy::overlap(0.0)).action == ShiftAction::Stay);
}

TEST_CASE("randomized policy properties") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 10);
    for (int i = 0; i < 5000; ++i) {
        double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        const Interval s(std::min(a, b), std::max(a, b), 0.1);
        const Interval t(std::min(c, d), std::max(c, d), 0.1);
        const Option so{u(rng), s}, to{u(rng), t};
        const bool overlap = t.lower <= s.upper && s.lower <= t.upper;
        if (overlap) CHECK(decide_shift(so, to, ShiftPolicy::dominance()).action == ShiftAction::Stay);
        const Interval s2(s.lower - 1, s.upper + 3, 0.1);
        CHECK(decide_shift(so, to, ShiftPolicy::point()).action ==
              decide_shift({so.pred_total, s2}, to, ShiftPolicy::point()).action);
    }
}

TEST_CASE("temporal pair from the worked example") {
    const std::vector<DayOutcome> days{day(0, 1.13, 1.00, 0.83, 1.21), day(1, 0.96, 1.05, 0.84, 1.20)};
    const auto point = temporal_shift_sim("CISO", days, ShiftPolicy::point());
    REQUIRE(point.cases.size() == 1);
    CHECK(point.cases[0].misleading);
    CHECK(point.increased_emissions_percent == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(point.realized_increase_percent == doctest::Approx(5.0).epsilon(1e-12));
    const auto dom = temporal_shift_sim("CISO", days, ShiftPolicy::dominance());
    CHECK(dom.shifts == 0);
    CHECK(dom.realized_increase_percent == 0.0);
    CHECK(code_of([&] { temporal_shift_sim("CISO", {days[0]}, ShiftPolicy::point()); }) == ErrorCode::InsufficientDays);
}

TEST_CASE("perfect forecasts are never misleading") {
    std::vector<DayOutcome> days;
    for (int d = 0; d < 30; ++d) {
        const double v = 100 + 10 * std::sin(d);
        days.push_back(day(d, v, v, v - 5, v + 5));
    }
    const auto r = temporal_shift_sim("AAA", days, ShiftPolicy::point());
    CHECK(r.misleading_percent == 0.0);
    CHECK(r.increased_emissions_percent == 0.0);
}

namespace {

/// Ten consecutive-day pairs; pairs 2 and 7 are misleading with +4% and +6%.
std::vector<DayOutcome> ten_pair_fixture() {
    std::vector<DayOutcome> days;
    double truth = 100.0;
    double pred = 100.0;
    for (int d = 0; d <= 10; ++d) {
        days.push_back(day(d, pred, truth, pred - 50, pred + 50));
        if (d == 2) {
            pred -= 1;
            truth *= 1.04;
        } else if (d == 7) {
            pred -= 1;
            truth *= 1.06;
        } else {
            pred += 1;
            truth += 1;
        }
    }
    return days;
}

} // namespace

TEST_CASE("ten-pair temporal fixture") {
    const auto r = temporal_shift_sim("AAA", ten_pair_fixture(), ShiftPolicy::point());
    CHECK(r.cases.size() == 10);
    CHECK(r.misleading_percent == 20.0);
    CHECK(r.increased_emissions_percent == doctest::Approx(5.0).epsilon(1e-12));
    std::ostringstream out;
    write_summary_row(out, r);
    CHECK(out.str() == "AAA,AAA,20.00,5.00\n");
    const auto dom = temporal_shift_sim("AAA", ten_pair_fixture(), ShiftPolicy::dominance());
    CHECK(dom.realized_increase_percent == 0.0);
}

TEST_CASE("inverted rule flips the predicate") {
    const std::vector<DayOutcome> days{day(0, 0.96, 1.05, 0.8, 1.2), day(1, 1.13, 1.00, 0.8, 1.2)};
    CHECK(temporal_shift_sim("A", days, ShiftPolicy::point()).misleading_percent == 0.0);
    const auto inv = temporal_shift_sim("A", days, ShiftPolicy::point(), MisleadingRule::Inverted);
    CHECK(inv.misleading_percent == 100.0);
    CHECK(inv.increased_emissions_percent == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("spatial fixtures") {
    SUBCASE("identical regions") {
        std::vector<DayOutcome> a;
        for (int d = 0; d < 5; ++d) a.push_back(day(d, 10 + d, 11 + d, 5, 20));
        const auto r = spatial_shift_sim("AAA", a, "BBB", a, ShiftPolicy::point());
        CHECK(r.misleading_percent == 0.0);
        CHECK(r.shifts == 0);
    }
    SUBCASE("twenty days with one misleading") {
        std::vector<DayOutcome> s, t;
        for (int d = 0; d < 20; ++d) {
            s.push_back(day(d, 100, 100, 80, 120));
            t.push_back(d == 13 ? day(d, 90, 107.3, 70, 110) : day(d, 110, 120, 90, 130));
        }
        const auto r = spatial_shift_sim("ISNE", s, "ERCO", t, ShiftPolicy::point());
        CHECK(r.misleading_percent == 5.0);
        CHECK(r.increased_emissions_percent == doctest::Approx(7.3).epsilon(1e-12));
    }
    SUBCASE("ten-pair analogue") {
        std::vector<DayOutcome> s, t;
        for (int d = 0; d < 10; ++d) {
            s.push_back(day(d, 100, 100, 50, 150));
            if (d == 1) {
                t.push_back(day(d, 99, 104, 50, 150));
            } else if (d == 6) {
                t.push_back(day(d, 99, 106, 50, 150));
            } else {
                t.push_back(day(d, 101, 101, 50, 150));
            }
        }
        const auto r = spatial_shift_sim("AAA", s, "BBB", t, ShiftPolicy::point());
        CHECK(r.misleading_percent == 20.0);
        CHECK(r.increased_emissions_percent == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("day sets must match") {
        std::vector<DayOutcome> a{day(0, 1, 1, 0, 2)}, b{day(1, 1, 1, 0, 2)};
        CHECK(code_of([&] { spatial_shift_sim("A", a, "B", b, ShiftPolicy::point()); }) == ErrorCode::AlignmentError);
    }
}

TEST_CASE("hourly aggregation weights bounds by power") {
    HourlyOutlook o;
    o.start = HourlyStamp{0};
    for (int h = 0; h < 48; ++h) {
        o.pred.push_back(100);
        o.truth.push_back(h < 24 ? 100 : 110);
        o.intervals.emplace_back(90, 120, 0.1);
    }
    const auto trace = flat_trace(24, 0.5);
    const auto profile = day_profile_mw(trace, 1);
    CHECK(profile.size() == 24);
    CHECK(profile[0] == 10.0);
    const auto d0 = aggregate_day(o, 0, profile);
    CHECK(d0.pred == 24 * 10 * 1000 * 100.0);
    CHECK(d0.ci.lower == 24 * 10 * 1000 * 90.0);
    CHECK(d0.ci.upper == 24 * 10 * 1000 * 120.0);
    CHECK(full_days(o) == std::vector<std::int64_t>{0, 1});
    const auto r = temporal_from_hourly("AAA", o, trace, ShiftPolicy::point());
    CHECK(r.cases.size() == 1);
    CHECK(r.cases[0].target_day.truth == doctest::Approx(24 * 10 * 1000 * 110.0));
}

TEST_CASE("case rows are normalized by the source truth") {
    const std::vector<DayOutcome> days{day(0, 226, 200, 166, 242), day(1, 192, 210, 168, 240)};
    std::ostringstream out;
    write_cases(out, temporal_shift_sim("CISO", days, ShiftPolicy::point()));
    const std::string s = out.str();
    CHECK(s.find("CISO,CISO,1970-01-01,1970-01-02,1.0000,1.1300,0.8300,1.2100,1.0500,0.9600,0.8400,1.2000,true,5.00,point,shift,") !=
          std::string::npos);
}
