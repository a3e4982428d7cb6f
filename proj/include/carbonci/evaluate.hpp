#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "carbonci/ingest.hpp"
#include "carbonci/timeseries.hpp"

namespace carbonci::evaluate {

/// Four-way split of hours by whether the interval covers the truth (T) and
/// whether it covers the point forecast (P). Percentages are of `n`.
struct CoverageBreakdown {
    std::size_t n = 0;
    std::size_t covered = 0;
    std::size_t t_cov_p_cov = 0;
    std::size_t t_cov_p_uncov = 0;
    std::size_t t_uncov_p_cov = 0;
    std::size_t t_uncov_p_uncov = 0;

    double coverage_percent() const { return percent(covered); }
    double t_cov_p_cov_percent() const { return percent(t_cov_p_cov); }
    double t_cov_p_uncov_percent() const { return percent(t_cov_p_uncov); }
    double t_uncov_p_cov_percent() const { return percent(t_uncov_p_cov); }
    double t_uncov_p_uncov_percent() const { return percent(t_uncov_p_uncov); }

private:
    double percent(std::size_t k) const { return 100.0 * static_cast<double>(k) / static_cast<double>(n); }
};

struct WidthStats {
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
};

/// Closed-interval coverage in percent. Hours in `skip` are excluded.
double coverage(const IntervalSeries& intervals, const HourlySeries& truth, const ingest::FillLog& skip = {});

CoverageBreakdown breakdown(const IntervalSeries& intervals, const HourlySeries& truth, const HourlySeries& points,
                            const ingest::FillLog& skip = {});

WidthStats width_stats(const IntervalSeries& intervals);

/// Cells in hundredths of a percent, rounded by largest remainder so they sum to
/// exactly 10000. The written coverage is the sum of the first two.
std::array<std::int64_t, 4> rounded_cells(const CoverageBreakdown& b);

/// `region,alpha,coverage,t_cov_p_cov,t_cov_p_uncov,t_uncov_p_cov,t_uncov_p_uncov,n`
void write_breakdown_header(std::ostream& out);
void write_breakdown_row(std::ostream& out, const std::string& region, double alpha, const CoverageBreakdown& b);

/// `region,alpha,mean_width,median_width,max_width`
void write_width_header(std::ostream& out);
void write_width_row(std::ostream& out, const std::string& region, double alpha, const WidthStats& w);

} // namespace carbonci::evaluate
