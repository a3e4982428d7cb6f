#include "carbonci/evaluate.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <vector>

#include "carbonci/error.hpp"

namespace carbonci::evaluate {

namespace {

void require_covers(const HourlySeries& s, const IntervalSeries& intervals, const char* what) {
    if (s.start() > intervals.start() || s.end() < intervals.end()) {
        throw Error(ErrorCode::AlignmentError, std::string(what) + " series does not cover interval range [" +
                                                   intervals.start().to_iso() + ", " + intervals.end().to_iso() + ")");
    }
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

} // namespace

double coverage(const IntervalSeries& intervals, const HourlySeries& truth, const ingest::FillLog& skip) {
    require_covers(truth, intervals, "truth");
    std::size_t n = 0, hit = 0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const HourlyStamp t = intervals.start() + static_cast<std::int64_t>(i);
        if (skip.contains(t)) continue;
        ++n;
        hit += intervals[i].contains(truth.at(t)) ? 1 : 0;
    }
    if (n == 0) {
        throw Error(ErrorCode::EmptyInput, "no evaluable hours");
    }
    return 100.0 * static_cast<double>(hit) / static_cast<double>(n);
}

CoverageBreakdown breakdown(const IntervalSeries& intervals, const HourlySeries& truth, const HourlySeries& points,
                            const ingest::FillLog& skip) {
    require_covers(truth, intervals, "truth");
    require_covers(points, intervals, "point forecast");
    CoverageBreakdown b;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const HourlyStamp t = intervals.start() + static_cast<std::int64_t>(i);
        if (skip.contains(t)) continue;
        const bool tc = intervals[i].contains(truth.at(t));
        const bool pc = intervals[i].contains(points.at(t));
        ++b.n;
        if (tc) {
            ++b.covered;
            ++(pc ? b.t_cov_p_cov : b.t_cov_p_uncov);
        } else {
            ++(pc ? b.t_uncov_p_cov : b.t_uncov_p_uncov);
        }
    }
    if (b.n == 0) {
        throw Error(ErrorCode::EmptyInput, "no evaluable hours");
    }
    return b;
}

WidthStats width_stats(const IntervalSeries& intervals) {
    std::vector<double> widths;
    widths.reserve(intervals.size());
    double sum = 0.0;
    for (const Interval& iv : intervals.intervals()) {
        widths.push_back(iv.width());
        sum += iv.width();
    }
    std::sort(widths.begin(), widths.end());
    const std::size_t n = widths.size();
    WidthStats w;
    w.mean = sum / static_cast<double>(n);
    w.median = n % 2 == 1 ? widths[n / 2] : 0.5 * (widths[n / 2 - 1] + widths[n / 2]);
    w.max = widths.back();
    return w;
}

void write_breakdown_header(std::ostream& out) {
    out << "region,alpha,coverage,t_cov_p_cov,t_cov_p_uncov,t_uncov_p_cov,t_uncov_p_uncov,n\n";
}

std::array<std::int64_t, 4> rounded_cells(const CoverageBreakdown& b) {
    const std::array<std::size_t, 4> counts{b.t_cov_p_cov, b.t_cov_p_uncov, b.t_uncov_p_cov, b.t_uncov_p_uncov};
    std::array<std::int64_t, 4> cells{};
    if (b.n == 0) return cells;
    const auto n = static_cast<std::int64_t>(b.n);
    std::array<std::int64_t, 4> remainder{};
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::int64_t scaled = static_cast<std::int64_t>(counts[i]) * 10000;
        cells[i] = scaled / n;
        remainder[i] = scaled % n;
        assigned += cells[i];
    }
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return remainder[a] > remainder[c]; });
    for (std::size_t k = 0; assigned < 10000; ++k, ++assigned) ++cells[order[k]];
    return cells;
}

void write_breakdown_row(std::ostream& out, const std::string& region, double alpha, const CoverageBreakdown& b) {
    const auto c = rounded_cells(b);
    auto pct = [](std::int64_t hundredths) { return fmt("%.2f", static_cast<double>(hundredths) / 100.0); };
    out << region << ',' << fmt("%g", alpha) << ',' << pct(c[0] + c[1]) << ',' << pct(c[0]) << ',' << pct(c[1]) << ','
        << pct(c[2]) << ',' << pct(c[3]) << ',' << b.n << '\n';
}

void write_width_header(std::ostream& out) { out << "region,alpha,mean_width,median_width,max_width\n"; }

void write_width_row(std::ostream& out, const std::string& region, double alpha, const WidthStats& w) {
    out << region << ',' << fmt("%g", alpha) << ',' << fmt("%.4f", w.mean) << ',' << fmt("%.4f", w.median) << ','
        << fmt("%.4f", w.max) << '\n';
}

} // namespace carbonci::evaluate
