#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "support/synthetic.hpp"

namespace testsupport {

/// ISO stamp for hour `h` after 2023-01-01T00Z. Kept free of library symbols so the
/// C API test can use it while linking only the shared library.
inline std::string fixture_stamp(int h) {
    using namespace std::chrono;
    const year_month_day d{sys_days{2023y / January / 1} + days{h / 24}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00Z", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()), h % 24);
    return buf;
}

inline std::string fixture_truth(const std::vector<double>& values, const std::vector<std::size_t>& drop = {}) {
    std::string s = "timestamp,carbon_intensity\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        bool skip = false;
        for (std::size_t d : drop) skip = skip || d == i;
        if (skip) continue;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", values[i]);
        s += fixture_stamp(static_cast<int>(i)) + "," + buf + "\n";
    }
    return s;
}

/// Two regions, 40 days from 2023-01-01, a one-week cyclic power trace and a small
/// forest so a full run takes a few seconds.
struct PipelineFixture {
    static constexpr std::size_t kHours = 24 * 40;

    explicit PipelineFixture(const std::filesystem::path& root, const std::string& extra_spci = "")
        : dir(root), config(root / "carbonci.ini") {
        write_text(dir / "in" / "AAA_truth.csv", fixture_truth(periodic_ar1(kHours, 11)));
        write_text(dir / "in" / "BBB_truth.csv", fixture_truth(periodic_ar1(kHours, 12, 250.0, 60.0)));
        std::string power = "timestamp,normalized_power\n";
        for (int h = 0; h < 168; ++h) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", 0.6 + 0.3 * std::sin(2.0 * M_PI * h / 24.0));
            power += fixture_stamp(h) + "," + buf + "\n";
        }
        write_text(dir / "in" / "power.csv", power);
        write_text(config, "[workspace]\ndir = ws\n\n"
                           "[inputs]\npower_trace = in/power.csv\npeak_mw = 20\n\n"
                           "[region:AAA]\ntruth = in/AAA_truth.csv\n\n"
                           "[region:BBB]\ntruth = in/BBB_truth.csv\n\n"
                           "[split]\ntrain_end = 2023-01-13T00:00:00Z\ncalibration_end = 2023-01-26T00:00:00Z\n"
                           "test_end = 2023-02-10T00:00:00Z\n\n"
                           "[spci]\nalphas = 0.1, 0.05\nwindow = 200\nlags = 6\ntrees = 5\nseed = 7\n" +
                               extra_spci + "\n");
    }

    std::filesystem::path workspace() const { return dir / "ws"; }

    std::filesystem::path dir;
    std::filesystem::path config;
};

} // namespace testsupport
