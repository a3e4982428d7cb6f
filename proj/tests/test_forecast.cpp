#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "carbonci/error.hpp"
#include "carbonci/forecast.hpp"
#include "support/synthetic.hpp"

using namespace carbonci;
using namespace carbonci::forecast;

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

const RegionId kRegion("AAA");

HourlySeries series_of(std::vector<double> v, HourlyStamp start = HourlyStamp::from_civil(2021, 7, 1)) {
    return HourlySeries(kRegion, start, std::move(v), Unit::GramsPerKwh);
}

} // namespace

TEST_CASE("forecaster names") {
    CHECK(ForecasterSpec::parse("seasonal_naive_24h").lookback_hours() == 24);
    CHECK(ForecasterSpec::parse("same_hour_last_week").lookback_hours() == 168);
    CHECK(ForecasterSpec::parse("moving_average:6").lookback_hours() == 6);
    CHECK(ForecasterSpec::parse("moving_average:6").to_string() == "moving_average:6");
    CHECK(code_of([] { ForecasterSpec::parse("moving_average:0"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { ForecasterSpec::parse("arima"); }) == ErrorCode::ConfigError);
}

TEST_CASE("seasonal naive reproduces a 24-periodic series exactly") {
    std::vector<double> v(24 * 10);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = 200.0 + 50.0 * std::sin(2 * M_PI * static_cast<double>(t % 24) / 24.0);
    const auto s = series_of(v);
    for (int H : {1, 24, 96}) {
        const auto b = forecast::forecast(ForecasterSpec::seasonal_naive_24h(), s, s.start() + 23, H);
        std::vector<double> truth;
        std::vector<double> pred;
        for (int h = 1; h <= H; ++h) {
            truth.push_back(s.at(b.target(h)));
            pred.push_back(b.prediction(h));
        }
        CHECK(mape(pred, truth) == 0.0);
    }
}

TEST_CASE("constant history forecasts the constant") {
    const auto s = series_of(std::vector<double>(200, 321.0));
    for (auto spec : {ForecasterSpec::seasonal_naive_24h(), ForecasterSpec::same_hour_last_week(),
                      ForecasterSpec::moving_average(5)}) {
        const auto b = forecast::forecast(spec, s, s.end() - 1, 30);
        for (double p : b.predictions) CHECK(p == 321.0);
    }
}

TEST_CASE("unit ramp gives error 24 at every horizon") {
    std::vector<double> v(100);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = static_cast<double>(t) + 1.0;
    const auto s = series_of(v);
    const HourlyStamp origin = s.start() + 50;
    const auto b = forecast::forecast(ForecasterSpec::seasonal_naive_24h(), s, origin, 24);
    for (int h = 1; h <= 24; ++h) {
        const double truth = static_cast<double>(origin - s.start() + h) + 1.0;
        CHECK(truth - b.prediction(h) == 24.0);
    }
}

TEST_CASE("same hour last week and moving average") {
    std::vector<double> v(400);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = static_cast<double>(t);
    const auto s = series_of(v);
    const HourlyStamp origin = s.start() + 300;
    const auto w = forecast::forecast(ForecasterSpec::same_hour_last_week(), s, origin, 200);
    CHECK(w.prediction(1) == 301.0 - 168.0);
    CHECK(w.prediction(168) == 300.0);
    CHECK(w.prediction(169) == 301.0 - 168.0);
    const auto m = forecast::forecast(ForecasterSpec::moving_average(4), s, origin, 3);
    for (double p : m.predictions) CHECK(p == (297.0 + 298.0 + 299.0 + 300.0) / 4.0);
}

TEST_CASE("insufficient history") {
    const auto s = series_of(std::vector<double>(30, 1.0));
    CHECK(code_of([&] { forecast::forecast(ForecasterSpec::seasonal_naive_24h(), s, s.start() + 22, 24); }) ==
          ErrorCode::InsufficientHistory);
    CHECK(code_of([&] { forecast::forecast(ForecasterSpec::same_hour_last_week(), s, s.end() - 1, 24); }) ==
          ErrorCode::InsufficientHistory);
    CHECK_NOTHROW(forecast::forecast(ForecasterSpec::seasonal_naive_24h(), s, s.start() + 23, 24));
}

TEST_CASE("forecast_range steps origins") {
    const auto s = series_of(std::vector<double>(100, 1.0));
    const auto r = forecast_range(ForecasterSpec::seasonal_naive_24h(), s, s.start() + 23, s.start() + 47, 4, 12);
    REQUIRE(r.size() == 3);
    CHECK(r[2].origin == s.start() + 47);
}

TEST_CASE("mape arithmetic") {
    CHECK(mape({110, 180}, {100, 200}) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(mape({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(code_of([] { mape({1, 2}, {1, 0}); }) == ErrorCode::ZeroTruthValue);
    CHECK(code_of([] { mape({1, 2}, {1}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { mape({}, {}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("mape is scale invariant and zero only on equality") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1.0, 500.0), c(0.1, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> p(20), t(20), ps, ts;
        for (std::size_t i = 0; i < 20; ++i) {
            p[i] = u(rng);
            t[i] = u(rng);
        }
        const double k = c(rng);
        for (std::size_t i = 0; i < 20; ++i) {
            ps.push_back(k * p[i]);
            ts.push_back(k * t[i]);
        }
        const double a = mape(p, t);
        CHECK(a > 0.0);
        CHECK(std::abs(mape(ps, ts) - a) <= 1e-12 * a);
    }
}

namespace {

/// Truth of 100 everywhere; predictions off by `err(h)` percent.
std::vector<ForecastBatch> bucket_fixture(const HourlySeries& truth, int batches, auto err) {
    std::vector<ForecastBatch> out;
    for (int b = 0; b < batches; ++b) {
        const HourlyStamp origin = truth.start() + 24 * b - 1 + 24;
        std::vector<double> p(96);
        for (int h = 1; h <= 96; ++h) p[static_cast<std::size_t>(h - 1)] = 100.0 * (1.0 + err(h) / 100.0);
        out.emplace_back(kRegion, origin, p);
    }
    return out;
}

} // namespace

TEST_CASE("horizon buckets") {
    const auto truth = series_of(std::vector<double>(24 * 10, 100.0));
    SUBCASE("equal error everywhere") {
        const auto r = horizon_bucket_mape(bucket_fixture(truth, 3, [](int) { return 2.5; }), truth);
        REQUIRE(r.size() == 4);
        CHECK(r[0].group_label == "1-24h");
        CHECK(r[3].group_label == "73-96h");
        for (const auto& b : r) {
            CHECK(b.mape_percent == doctest::Approx(r[0].mape_percent).epsilon(1e-12));
            CHECK(b.n == 72);
        }
    }
    SUBCASE("1.8x ratio in the last bucket") {
        const auto r = horizon_bucket_mape(
            bucket_fixture(truth, 2, [](int h) { return h <= 24 ? 1.0 : (h >= 73 ? 1.8 : 0.0); }), truth);
        CHECK(r[3].mape_percent / r[0].mape_percent == doctest::Approx(1.8).epsilon(1e-12));
        CHECK(r[1].mape_percent == doctest::Approx(0.0));
    }
    SUBCASE("errors") {
        std::vector<ForecastBatch> short_batch{ForecastBatch(kRegion, truth.start() + 30, std::vector<double>(24, 100.0))};
        CHECK(code_of([&] { horizon_bucket_mape(short_batch, truth); }) == ErrorCode::HorizonMismatch);
        std::vector<ForecastBatch> late{ForecastBatch(kRegion, truth.end() - 50, std::vector<double>(96, 100.0))};
        CHECK(code_of([&] { horizon_bucket_mape(late, truth); }) == ErrorCode::TruthMissing);
    }
    SUBCASE("filled hours are skipped") {
        auto batches = bucket_fixture(truth, 1, [](int) { return 1.0; });
        batches[0].predictions[0] = 1000.0;
        ingest::FillLog skip{{batches[0].target(1)}};
        const auto r = horizon_bucket_mape(batches, truth, skip);
        CHECK(r[0].n == 23);
        CHECK(r[0].mape_percent == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("daily mape uses midnight-issued batches") {
    std::vector<double> v(24 * 5);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = 100.0 + static_cast<double>(t % 24);
    const auto truth = series_of(v);
    std::vector<ForecastBatch> batches;
    for (int o = 23; o < 24 * 4; ++o) {
        batches.push_back(forecast::forecast(ForecasterSpec::moving_average(1), truth, truth.start() + o, 24));
    }
    const auto d = daily_mape(batches, truth);
    REQUIRE(d.size() == 4);
    CHECK(d[0].epoch_day == truth.start().epoch_day() + 1);
    std::vector<double> pred(24, 123.0), tr;
    for (int h = 0; h < 24; ++h) tr.push_back(100.0 + h);
    CHECK(d[0].mape_percent == doctest::Approx(mape(pred, tr)).epsilon(1e-12));
}

TEST_CASE("seasonal groups") {
    auto day = [](int m, int d) { return HourlyStamp::from_civil(2021, static_cast<unsigned>(m), static_cast<unsigned>(d)).epoch_day(); };
    SUBCASE("constant") {
        const auto r = seasonal_group_stats({{day(7, 1), 3.0}, {day(9, 5), 3.0}, {day(12, 1), 3.0}});
        REQUIRE(r.size() == 3);
        for (const auto& g : r) {
            CHECK(g.mape_percent == 3.0);
            CHECK(g.stddev() == 0.0);
        }
    }
    SUBCASE("hand arithmetic") {
        const auto r = seasonal_group_stats({{day(7, 1), 2.0}, {day(8, 2), 4.0}, {day(11, 3), 8.0}, {day(12, 4), 8.0}});
        CHECK(r.front().group_label == "summer");
        CHECK(r.front().mape_percent == 3.0);
        CHECK(r.front().stddev() == 1.0);
        CHECK(r.back().group_label == "winter");
        CHECK(r.back().mape_percent == 8.0);
    }
    SUBCASE("january is out of range") {
        CHECK(code_of([&] { seasonal_group_stats({{day(1, 15), 1.0}}); }) == ErrorCode::DateOutOfStudyRange);
    }
    SUBCASE("report text") {
        std::ostringstream out;
        write_accuracy_reports(out, seasonal_group_stats({{day(7, 1), 2.0}, {day(8, 2), 4.0}}));
        CHECK(out.str() == "group,mape_percent,stddev,n\nsummer,3.0000,1.0000,2\n");
    }
}
