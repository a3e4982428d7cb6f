#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "carbonci/qrf.hpp"
#include "carbonci/timeseries.hpp"

namespace carbonci::conformal {

/// Signed nonconformity score y - y_hat.
inline double residual(double y, double y_hat) { return y - y_hat; }

/// 1-based index ceil(p*n) clamped to [1, n].
std::size_t type1_rank(double p, std::size_t n);

/// Type-1 empirical quantile: sort ascending, take e[clamp(ceil(p*n), 1, n)].
double empirical_quantile(std::span<const double> values, double p);

/// Probability level of the upper tail for a lower level beta: 1 - alpha + beta.
inline double upper_level(double alpha, double beta) { return (1.0 - alpha) + beta; }

/// Fixed-capacity FIFO of recent residuals, oldest first.
class ResidualWindow {
public:
    explicit ResidualWindow(std::size_t capacity);
    ResidualWindow(std::size_t capacity, std::span<const double> initial);

    void push(double r);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    bool full() const { return values_.size() == capacity_; }

    std::vector<double> values() const { return {values_.begin(), values_.end()}; }
    std::vector<double> last(std::size_t n) const;

private:
    std::size_t capacity_;
    std::deque<double> values_;
};

Interval split_conformal_interval(double y_hat, const ResidualWindow& window, double alpha);

struct BetaChoice {
    double beta = 0.0;
    double lower_q = 0.0;
    double upper_q = 0.0;
};

/// Minimizes q(1-alpha+beta) - q(beta) over an even grid on [0, alpha]. A one-point grid is
/// {alpha/2}. Ties go to the beta nearest alpha/2, then to the smaller beta.
BetaChoice beta_search(const std::function<double(double)>& quantile_fn, double alpha, int grid_size);

struct SpciConfig {
    double alpha = 0.1;
    std::size_t window_capacity = 5000;
    int lag_window = 24;
    QrfParams qrf{};
    int beta_grid_size = 11;
    int refit_stride = 24;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One sequential stream: emit an interval, then learn the residual once the truth arrives.
class SpciStream {
public:
    SpciStream(SpciConfig config, std::span<const double> initial_residuals);

    Interval predict(double point_forecast);
    void push_residual(double r);

    const ResidualWindow& window() const { return window_; }
    const SpciConfig& config() const { return config_; }
    std::size_t refit_count() const { return refits_; }

private:
    SpciConfig config_;
    ResidualWindow window_;
    std::optional<QrfModel> model_;
    std::size_t steps_since_fit_ = 0;
    std::size_t refits_ = 0;
};

/// Sequential loop over aligned one-step forecasts and truths starting at `start`.
IntervalSeries spci_run(const SpciConfig& config, const std::vector<double>& point_forecasts,
                        const std::vector<double>& truths, std::span<const double> initial_residuals,
                        const RegionId& region = RegionId("SYN"), HourlyStamp start = HourlyStamp{0});

/// One SPCI stream per horizon offset over hourly-issued batches (consecutive origins).
/// The residual for a target hour is fed back only once that hour has been observed,
/// i.e. at the first origin >= target.
///
/// Intervals are emitted for origins >= `emit_from`; `initial_residuals[h]` must hold the
/// horizon-h residuals of targets up to and including `emit_from`. Earlier batches only
/// queue their still-unobserved predictions so that feedback stays contiguous.
/// When `emit_from` is unset it is the first origin. Result is keyed by horizon.
std::map<int, IntervalSeries> spci_run_horizons(const SpciConfig& config, const std::vector<ForecastBatch>& batches,
                                                const HourlySeries& truth, const std::vector<int>& horizons,
                                                const std::map<int, std::vector<double>>& initial_residuals,
                                                std::optional<HourlyStamp> emit_from = std::nullopt);

} // namespace carbonci::conformal
