#include "carbonci/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "carbonci/error.hpp"

namespace carbonci::conformal {

std::size_t type1_rank(double p, std::size_t n) {
    // p*n within 1e-9 of an integer is that integer: 0.03*100 must rank 3, not 4.
    const double x = p * static_cast<double>(n);
    const double nearest = std::round(x);
    const double r = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
    if (!(r >= 1.0)) return 1;
    if (r >= static_cast<double>(n)) return n;
    return static_cast<std::size_t>(r);
}

double empirical_quantile(std::span<const double> values, double p) {
    if (values.empty()) {
        throw Error(ErrorCode::EmptyInput, "quantile of an empty set");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "quantile level must lie in [0,1]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    const std::size_t k = type1_rank(p, sorted.size()) - 1;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
    return sorted[k];
}

ResidualWindow::ResidualWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 2) {
        throw Error(ErrorCode::InvalidArgument, "residual window capacity must be >= 2");
    }
}

ResidualWindow::ResidualWindow(std::size_t capacity, std::span<const double> initial) : ResidualWindow(capacity) {
    for (double r : initial) push(r);
}

void ResidualWindow::push(double r) {
    if (!std::isfinite(r)) {
        throw Error(ErrorCode::InvalidArgument, "non-finite residual");
    }
    if (values_.size() == capacity_) values_.pop_front();
    values_.push_back(r);
}

std::vector<double> ResidualWindow::last(std::size_t n) const {
    if (n > values_.size()) {
        throw Error(ErrorCode::WindowTooSmall, "window holds " + std::to_string(values_.size()) + " residuals, " +
                                                   std::to_string(n) + " requested");
    }
    return {values_.end() - static_cast<std::ptrdiff_t>(n), values_.end()};
}

Interval split_conformal_interval(double y_hat, const ResidualWindow& window, double alpha) {
    if (window.empty()) {
        throw Error(ErrorCode::EmptyWindow, "split conformal interval needs residuals");
    }
    const std::vector<double> e = window.values();
    const double beta = alpha / 2.0;
    return Interval(y_hat + empirical_quantile(e, beta), y_hat + empirical_quantile(e, upper_level(alpha, beta)), alpha);
}

BetaChoice beta_search(const std::function<double(double)>& quantile_fn, double alpha, int grid_size) {
    if (grid_size < 1) {
        throw Error(ErrorCode::InvalidArgument, "beta grid needs at least one point");
    }
    const double centre = alpha / 2.0;
    BetaChoice best;
    double best_width = 0.0;
    bool have = false;
    for (int i = 0; i < grid_size; ++i) {
        const double beta = grid_size == 1 ? centre : alpha * static_cast<double>(i) / (grid_size - 1);
        const double lo = quantile_fn(beta);
        const double hi = quantile_fn(upper_level(alpha, beta));
        const double width = hi - lo;
        const bool better = !have || width < best_width ||
                            (width == best_width && std::abs(beta - centre) < std::abs(best.beta - centre));
        if (better) {
            best = {beta, lo, hi};
            best_width = width;
            have = true;
        }
    }
    return best;
}

void SpciConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
    }
    if (window_capacity < 2) {
        throw Error(ErrorCode::InvalidArgument, "window capacity must be >= 2");
    }
    if (lag_window < 1 || static_cast<std::size_t>(lag_window) >= window_capacity) {
        throw Error(ErrorCode::InvalidArgument, "lag window must satisfy 1 <= w < window capacity");
    }
    if (window_capacity <= static_cast<std::size_t>(lag_window) + 1) {
        throw Error(ErrorCode::WindowTooSmall, "window capacity must exceed lag window + 1");
    }
    if (beta_grid_size < 1 || refit_stride < 1 || qrf.n_trees < 1) {
        throw Error(ErrorCode::InvalidArgument, "beta grid, refit stride and tree count must be >= 1");
    }
}

SpciStream::SpciStream(SpciConfig config, std::span<const double> initial_residuals)
    : config_(std::move(config)), window_(config_.window_capacity) {
    config_.validate();
    if (initial_residuals.size() < config_.window_capacity) {
        throw Error(ErrorCode::WindowTooSmall, std::to_string(initial_residuals.size()) +
                                                   " calibration residuals for a window of " +
                                                   std::to_string(config_.window_capacity));
    }
    for (double r : initial_residuals) window_.push(r);
}

Interval SpciStream::predict(double point_forecast) {
    if (!std::isfinite(point_forecast)) {
        throw Error(ErrorCode::InvalidArgument, "non-finite point forecast");
    }
    if (!model_ || steps_since_fit_ >= static_cast<std::size_t>(config_.refit_stride)) {
        const std::vector<double> residuals = window_.values();
        model_ = qrf_fit(residuals, config_.lag_window, config_.qrf, config_.seed);
        steps_since_fit_ = 0;
        ++refits_;
    }
    ++steps_since_fit_;
    const std::vector<double> recent = window_.last(static_cast<std::size_t>(config_.lag_window));
    const ConditionalDistribution dist = model_->conditional(recent);
    const BetaChoice choice =
        beta_search([&dist](double p) { return dist.quantile(p); }, config_.alpha, config_.beta_grid_size);
    return Interval(point_forecast + choice.lower_q, point_forecast + choice.upper_q, config_.alpha);
}

void SpciStream::push_residual(double r) { window_.push(r); }

IntervalSeries spci_run(const SpciConfig& config, const std::vector<double>& point_forecasts,
                        const std::vector<double>& truths, std::span<const double> initial_residuals,
                        const RegionId& region, HourlyStamp start) {
    if (point_forecasts.size() != truths.size()) {
        throw Error(ErrorCode::AlignmentError, std::to_string(point_forecasts.size()) + " forecasts vs " +
                                                   std::to_string(truths.size()) + " truths");
    }
    if (point_forecasts.empty()) {
        throw Error(ErrorCode::EmptyInput, "no test hours");
    }
    SpciStream stream(config, initial_residuals);
    std::vector<Interval> out;
    out.reserve(point_forecasts.size());
    for (std::size_t t = 0; t < point_forecasts.size(); ++t) {
        out.push_back(stream.predict(point_forecasts[t]));
        stream.push_residual(residual(truths[t], point_forecasts[t]));
    }
    return IntervalSeries(region, start, std::move(out), config.alpha);
}

std::map<int, IntervalSeries> spci_run_horizons(const SpciConfig& config, const std::vector<ForecastBatch>& batches,
                                                const HourlySeries& truth, const std::vector<int>& horizons,
                                                const std::map<int, std::vector<double>>& initial_residuals,
                                                std::optional<HourlyStamp> emit_from) {
    if (batches.empty()) {
        throw Error(ErrorCode::EmptyInput, "no forecast batches");
    }
    const HourlyStamp first_emit = emit_from.value_or(batches.front().origin);
    if (first_emit < batches.front().origin || first_emit > batches.back().origin) {
        throw Error(ErrorCode::AlignmentError, "emission start " + first_emit.to_iso() + " outside forecast origins");
    }
    for (std::size_t i = 1; i < batches.size(); ++i) {
        if (batches[i].origin != batches[i - 1].origin + 1) {
            throw Error(ErrorCode::AlignmentError, "forecast origins must be consecutive hours; break at " +
                                                       batches[i].origin.to_iso());
        }
    }

    struct Pending {
        HourlyStamp target;
        double point;
    };
    struct Lane {
        int horizon;
        SpciStream stream;
        std::deque<Pending> pending;
        std::vector<Interval> intervals;
    };
    std::vector<Lane> lanes;
    for (int h : horizons) {
        if (h < 1 || h > batches.front().horizon()) {
            throw Error(ErrorCode::HorizonMismatch, "horizon " + std::to_string(h) + " not in forecast batches");
        }
        const auto it = initial_residuals.find(h);
        if (it == initial_residuals.end()) {
            throw Error(ErrorCode::WindowTooSmall, "no calibration residuals for horizon " + std::to_string(h));
        }
        SpciConfig lane_config = config;
        lane_config.seed = config.seed + static_cast<std::uint64_t>(h);
        lanes.push_back(Lane{h, SpciStream(lane_config, it->second), {}, {}});
    }

    for (const ForecastBatch& batch : batches) {
        if (batch.horizon() != batches.front().horizon()) {
            throw Error(ErrorCode::InconsistentHorizon, "batch at " + batch.origin.to_iso() + " changes horizon");
        }
        for (Lane& lane : lanes) {
            if (batch.origin < first_emit) {
                if (batch.target(lane.horizon) > first_emit) {
                    lane.pending.push_back({batch.target(lane.horizon), batch.prediction(lane.horizon)});
                }
                continue;
            }
            // Truth for hours up to and including the origin is known at issue time.
            while (!lane.pending.empty() && lane.pending.front().target <= batch.origin) {
                const Pending p = lane.pending.front();
                lane.pending.pop_front();
                if (!truth.contains(p.target)) {
                    throw Error(ErrorCode::TruthMissing, "no ground truth for " + p.target.to_iso());
                }
                lane.stream.push_residual(residual(truth.at(p.target), p.point));
            }
            const double point = batch.prediction(lane.horizon);
            lane.intervals.push_back(lane.stream.predict(point));
            lane.pending.push_back({batch.target(lane.horizon), point});
        }
    }

    std::map<int, IntervalSeries> out;
    for (Lane& lane : lanes) {
        out.emplace(lane.horizon, IntervalSeries(batches.front().region, first_emit + lane.horizon,
                                                 std::move(lane.intervals), config.alpha));
    }
    return out;
}

} // namespace carbonci::conformal
