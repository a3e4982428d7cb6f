#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "carbonci/error.hpp"
#include "carbonci/ingest.hpp"
#include "support/synthetic.hpp"

using namespace carbonci;
using namespace carbonci::ingest;

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

std::string error_text(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

MixTable mix_from(const std::string& text) {
    std::istringstream in(text);
    return parse_mix_table(in, "mix.csv");
}

const RegionId kRegion("AAA");

} // namespace

TEST_CASE("two-row mix table") {
    const auto mix = mix_from("timestamp,solar,gas\n2021-07-01T00:00:00Z,10,90\n2021-07-01T01:00:00Z,20,80\n");
    REQUIRE(mix.rows.size() == 2);
    CHECK(mix.sources == std::vector<std::string>{"solar", "gas"});
    CHECK(mix.rows[0].generation.size() == 2);
    CHECK(mix.rows[1].generation.at("gas") == 80.0);
    CHECK(mix.fills.filled.empty());
}

TEST_CASE("rows are sorted and short gaps forward-filled") {
    const auto mix = mix_from("timestamp,gas\n"
                              "2021-07-01T03:00:00Z,30\n"
                              "2021-07-01T00:00:00Z,10\n");
    REQUIRE(mix.rows.size() == 4);
    CHECK(mix.rows[1].filled);
    CHECK(mix.rows[2].filled);
    CHECK(mix.rows[2].generation.at("gas") == 10.0);
    CHECK_FALSE(mix.rows[3].filled);
    CHECK(mix.fills.filled.size() == 2);
    CHECK(mix.fills.contains(HourlyStamp::parse("2021-07-01T01:00Z")));
    CHECK_FALSE(mix.fills.contains(HourlyStamp::parse("2021-07-01T03:00Z")));
}

TEST_CASE("gaps of three hours fill, four do not") {
    const auto ok = mix_from("timestamp,gas\n2021-07-01T00:00Z,1\n2021-07-01T04:00Z,1\n");
    CHECK(ok.fills.filled.size() == 3);
    CHECK(code_of([] { mix_from("timestamp,gas\n2021-07-01T00:00Z,1\n2021-07-01T05:00Z,1\n"); }) ==
          ErrorCode::GapTooLarge);
}

TEST_CASE("negative generation names row and column") {
    const auto text = error_text([] { mix_from("timestamp,solar,gas\n2021-07-01T00:00Z,5,-1\n"); });
    CHECK(text.find("ParseError") != std::string::npos);
    CHECK(text.find(":2") != std::string::npos);
    CHECK(text.find("gas") != std::string::npos);
}

TEST_CASE("malformed mix rows") {
    CHECK(code_of([] { mix_from("timestamp,gas\n2021-07-01T00:00Z,abc\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { mix_from("timestamp,gas\n2021-07-01T00:00Z,1,2\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { mix_from("timestamp,gas\nnot-a-time,1\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { mix_from("timestamp,gas\n2021-07-01T00:00Z,1\n2021-07-01T00:00Z,2\n"); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { mix_from(""); }) == ErrorCode::ParseError);
}

TEST_CASE("carbon intensity from the mix") {
    const EmissionFactorTable factors({{"gas", 490.0}, {"coal", 820.0}, {"wind", 11.0}});
    SUBCASE("single source") {
        const auto ci = mix_to_carbon_intensity(mix_from("timestamp,gas\n2021-07-01T00:00Z,100\n"), factors, kRegion);
        CHECK(ci[0] == 490.0);
        CHECK(ci.unit() == Unit::GramsPerKwh);
    }
    SUBCASE("weighted average") {
        const auto ci =
            mix_to_carbon_intensity(mix_from("timestamp,coal,wind\n2021-07-01T00:00Z,50,50\n"), factors, kRegion);
        CHECK(ci[0] == 415.5);
    }
    SUBCASE("zero generation") {
        CHECK(code_of([&] {
                  mix_to_carbon_intensity(mix_from("timestamp,coal,wind\n2021-07-01T00:00Z,0,0\n"), factors, kRegion);
              }) == ErrorCode::ZeroGeneration);
    }
    SUBCASE("missing factor") {
        const auto text = error_text([&] {
            mix_to_carbon_intensity(mix_from("timestamp,coal,solar\n2021-07-01T00:00Z,1,1\n"), factors, kRegion);
        });
        CHECK(text.find("MissingFactor") != std::string::npos);
        CHECK(text.find("solar") != std::string::npos);
    }
}

TEST_CASE("carbon intensity is scale invariant and bounded by the factors") {
    const EmissionFactorTable factors({{"gas", 490.0}, {"coal", 820.0}, {"wind", 11.0}, {"solar", 48.0}});
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> gen(0.0, 500.0), scale(0.01, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        SourceMixRow row{HourlyStamp{trial}, {}, false};
        double lo = 1e9, hi = -1e9;
        for (const auto& [s, f] : factors.factors()) {
            const double g = trial % 3 == 0 && s == "coal" ? 0.0 : gen(rng);
            row.generation[s] = g;
            if (g > 0) {
                lo = std::min(lo, f);
                hi = std::max(hi, f);
            }
        }
        SourceMixRow scaled = row;
        const double c = scale(rng);
        for (auto& [s, g] : scaled.generation) g *= c;
        const double a = mix_to_carbon_intensity(std::vector<SourceMixRow>{row}, factors, kRegion)[0];
        const double b = mix_to_carbon_intensity(std::vector<SourceMixRow>{scaled}, factors, kRegion)[0];
        CHECK(std::abs(a - b) <= 1e-12 * a);
        CHECK(a >= lo - 1e-9);
        CHECK(a <= hi + 1e-9);
    }
}

TEST_CASE("emission factor file") {
    std::istringstream in("# comment\nsource,g_per_kwh\ncoal,820\n\ngas,490\n");
    const auto t = parse_emission_factors(in, "f.csv");
    CHECK(t.factor("coal") == 820.0);
    CHECK(code_of([&] { t.factor("hydro"); }) == ErrorCode::MissingFactor);
    std::istringstream dup("source,g_per_kwh\ncoal,820\ncoal,1\n");
    CHECK(code_of([&] { parse_emission_factors(dup, "f.csv"); }) == ErrorCode::ParseError);
}

TEST_CASE("forecast tables") {
    std::string two = "origin_timestamp";
    for (int h = 1; h <= 24; ++h) two += ",h" + std::to_string(h);
    two += "\n";
    for (const char* o : {"2021-07-01T01:00Z", "2021-07-01T00:00Z"}) {
        two += o;
        for (int h = 1; h <= 24; ++h) two += "," + std::to_string(100 + h);
        two += "\n";
    }
    std::istringstream in(two);
    const auto batches = parse_forecast_table(in, "f.csv", kRegion);
    REQUIRE(batches.size() == 2);
    CHECK(batches[0].horizon() == 24);
    CHECK(batches[0].origin < batches[1].origin);
    CHECK(batches[0].prediction(24) == 124.0);

    std::string mixed = two;
    mixed += "2021-07-01T02:00Z";
    for (int h = 1; h <= 96; ++h) mixed += ",1";
    mixed += "\n";
    std::istringstream bad(mixed);
    CHECK(code_of([&] { parse_forecast_table(bad, "f.csv", kRegion); }) == ErrorCode::InconsistentHorizon);

    std::string wide = "origin_timestamp";
    for (int h = 1; h <= 96; ++h) wide += ",h" + std::to_string(h);
    wide += "\n2021-07-01T00:00Z";
    for (int h = 1; h <= 96; ++h) wide += ",2";
    wide += "\n";
    std::istringstream w(wide);
    CHECK(parse_forecast_table(w, "f.csv", kRegion).front().horizon() == 96);
}

TEST_CASE("power traces") {
    std::istringstream flat("timestamp,normalized_power\n2021-07-01T00:00Z,1\n2021-07-01T01:00Z,1.0\n");
    const auto t = parse_power_trace(flat, "p.csv", RegionId("DC"), 20.0);
    CHECK(t.normalized.size() == 2);
    CHECK(t.power_mw(0) == 20.0);
    CHECK(t.power_mw(1) == 20.0);

    std::istringstream zero("timestamp,normalized_power\n2021-07-01T00:00Z,0\n");
    CHECK(parse_power_trace(zero, "p.csv", RegionId("DC"), 20.0).power_mw(0) == 0.0);

    std::istringstream over("timestamp,normalized_power\n2021-07-01T00:00Z,1.2\n");
    CHECK(code_of([&] { parse_power_trace(over, "p.csv", RegionId("DC"), 20.0); }) ==
          ErrorCode::ValueOutOfUnitRange);
}

TEST_CASE("truth table rejects long gaps") {
    const std::vector<double> v(30, 100.0);
    std::istringstream in(testsupport::truth_csv(v, HourlyStamp{0}, {10, 11, 12, 13, 14}));
    CHECK(code_of([&] { parse_truth_table(in, "t.csv", kRegion); }) == ErrorCode::GapTooLarge);
}

TEST_CASE("writers round-trip bit for bit") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    std::vector<double> values(200);
    for (auto& v : values) v = u(rng) / 3.0;
    values[5] = 1e-300;
    values[6] = 123456789.123456789;
    const HourlySeries s(kRegion, HourlyStamp::parse("2021-07-01T00:00Z"), values, Unit::GramsPerKwh);
    std::stringstream buf;
    write_series(buf, s, "carbon_intensity");
    const auto back = parse_truth_table(buf, "rt.csv", kRegion);
    CHECK(back.series.values() == values);
    CHECK(back.series.start() == s.start());

    MixTable mix = mix_from("timestamp,coal,gas\n2021-07-01T00:00Z,0.1,0.7\n2021-07-01T02:00Z,1e-5,3.3333333333333335\n");
    std::stringstream mbuf;
    write_mix_table(mbuf, mix);
    const auto mix2 = parse_mix_table(mbuf, "rt.csv");
    REQUIRE(mix2.rows.size() == mix.rows.size());
    for (std::size_t i = 0; i < mix.rows.size(); ++i) CHECK(mix2.rows[i].generation == mix.rows[i].generation);

    std::vector<ForecastBatch> batches{ForecastBatch(kRegion, HourlyStamp{5}, {0.1, 0.2, 1.0 / 3.0})};
    std::stringstream fbuf;
    write_forecast_table(fbuf, batches);
    CHECK(parse_forecast_table(fbuf, "rt.csv", kRegion).front().predictions == batches.front().predictions);
}

TEST_CASE("fill log round-trip with table filter") {
    testsupport::TempDir dir("filllog");
    FillLog a{{HourlyStamp{1}, HourlyStamp{2}}};
    FillLog b{{HourlyStamp{7}}};
    std::ostringstream out;
    out << "table,timestamp,filled\n";
    write_fill_log(out, a, "AAA_truth");
    write_fill_log(out, b, "BBB_truth");
    testsupport::write_text(dir.path() / "prov.csv", out.str());
    CHECK(parse_fill_log(dir.path() / "prov.csv").filled.size() == 3);
    const auto only_a = parse_fill_log(dir.path() / "prov.csv", "AAA_");
    CHECK(only_a.filled == a.filled);
}
