#include "carbonci/carbonci.h"

#include <cstdlib>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "carbonci/conformal.hpp"
#include "carbonci/error.hpp"
#include "carbonci/evaluate.hpp"
#include "carbonci/forecast.hpp"
#include "carbonci/pipeline.hpp"
#include "carbonci/shiftsim.hpp"

using namespace carbonci;

struct cci_spci {
    conformal::SpciStream stream;
    std::optional<double> awaiting; // point forecast of the hour not yet observed
};

struct cci_pipeline {
    pipeline::PipelineConfig config;
    std::string report;
};

namespace {

thread_local std::string g_last_error;

cci_status fail(cci_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

template <typename F>
cci_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return CCI_OK;
    } catch (const Error& e) {
        return fail(static_cast<cci_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return fail(CCI_INTERNAL_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return fail(CCI_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(CCI_INTERNAL_ERROR, "unknown failure");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

Interval to_interval(const cci_interval& c) { return Interval(c.lower, c.upper, c.alpha); }
cci_interval from_interval(const Interval& i) { return {i.lower, i.upper, i.alpha}; }

IntervalSeries interval_series(const cci_interval* intervals, size_t n) {
    require(n > 0, "empty input");
    std::vector<Interval> v;
    v.reserve(n);
    for (size_t i = 0; i < n; ++i) v.push_back(to_interval(intervals[i]));
    const double alpha = v.front().alpha;
    return IntervalSeries(RegionId("CAPI"), HourlyStamp{0}, std::move(v), alpha);
}

HourlySeries plain_series(const double* values, size_t n) {
    return HourlySeries(RegionId("CAPI"), HourlyStamp{0}, std::vector<double>(values, values + n), Unit::Dimensionless);
}

conformal::SpciConfig to_config(const cci_spci_config& c) {
    conformal::SpciConfig s;
    s.alpha = c.alpha;
    s.window_capacity = c.window_capacity;
    s.lag_window = c.lag_window;
    s.qrf.n_trees = c.n_trees;
    s.qrf.max_depth = c.max_depth;
    s.qrf.min_leaf_size = c.min_leaf_size;
    s.qrf.bootstrap = c.bootstrap != 0;
    s.qrf.threads = c.threads;
    s.beta_grid_size = c.beta_grid_size;
    s.refit_stride = c.refit_stride;
    s.seed = c.seed;
    return s;
}

} // namespace

extern "C" {

const char* cci_status_name(cci_status status) {
    if (status == CCI_OK) return "Ok";
    if (status == CCI_INTERNAL_ERROR) return "InternalError";
    const int v = static_cast<int>(status);
    if (v >= static_cast<int>(ErrorCode::InvalidArgument) && v <= static_cast<int>(ErrorCode::IoError)) {
        return to_string(static_cast<ErrorCode>(v));
    }
    return "Unknown";
}

const char* cci_last_error(void) { return g_last_error.c_str(); }

cci_status cci_empirical_quantile(const double* values, size_t n, double p, double* out) {
    return guarded([&] {
        require(out != nullptr && (values != nullptr || n == 0), "null pointer");
        *out = conformal::empirical_quantile(std::span<const double>(values, n), p);
    });
}

cci_status cci_split_conformal_interval(double y_hat, const double* residuals, size_t n, double alpha,
                                        cci_interval* out) {
    return guarded([&] {
        require(out != nullptr && (residuals != nullptr || n == 0), "null pointer");
        if (n == 0) throw Error(ErrorCode::EmptyWindow, "split conformal interval needs residuals");
        const conformal::ResidualWindow window(std::max<size_t>(n, 2), std::span<const double>(residuals, n));
        *out = from_interval(conformal::split_conformal_interval(y_hat, window, alpha));
    });
}

cci_status cci_mape(const double* pred, const double* truth, size_t n, double* out_percent) {
    return guarded([&] {
        require(out_percent != nullptr && ((pred && truth) || n == 0), "null pointer");
        *out_percent = forecast::mape(std::vector<double>(pred, pred + n), std::vector<double>(truth, truth + n));
    });
}

cci_status cci_coverage(const cci_interval* intervals, const double* truth, size_t n, double* out_percent) {
    return guarded([&] {
        require(out_percent != nullptr && ((intervals && truth) || n == 0), "null pointer");
        if (n == 0) throw Error(ErrorCode::EmptyInput, "no intervals");
        *out_percent = evaluate::coverage(interval_series(intervals, n), plain_series(truth, n));
    });
}

cci_status cci_breakdown_compute(const cci_interval* intervals, const double* truth, const double* points, size_t n,
                                 cci_breakdown* out) {
    return guarded([&] {
        require(out != nullptr && ((intervals && truth && points) || n == 0), "null pointer");
        if (n == 0) throw Error(ErrorCode::EmptyInput, "no intervals");
        const auto b = evaluate::breakdown(interval_series(intervals, n), plain_series(truth, n), plain_series(points, n));
        *out = {b.coverage_percent(),     b.t_cov_p_cov_percent(),     b.t_cov_p_uncov_percent(),
                b.t_uncov_p_cov_percent(), b.t_uncov_p_uncov_percent(), b.n};
    });
}

cci_status cci_emissions_grams(const double* normalized_power, const double* ci, size_t n, double peak_mw,
                               double* out_grams) {
    return guarded([&] {
        require(out_grams != nullptr && ((normalized_power && ci) || n == 0), "null pointer");
        if (n == 0) throw Error(ErrorCode::EmptyInput, "empty trace");
        const ingest::PowerTrace trace(RegionId("CAPI"), HourlyStamp{0},
                                       std::vector<double>(normalized_power, normalized_power + n), peak_mw);
        const HourlySeries series(RegionId("CAPI"), HourlyStamp{0}, std::vector<double>(ci, ci + n), Unit::GramsPerKwh);
        *out_grams = shiftsim::emissions(trace, series).grams;
    });
}

cci_status cci_tons_delta(double percent_increase, double base_grams, double* out_tons) {
    return guarded([&] {
        require(out_tons != nullptr, "null pointer");
        *out_tons = shiftsim::tons_delta(percent_increase, base_grams);
    });
}

cci_status cci_decide_shift(double source_pred, cci_interval source_ci, double target_pred, cci_interval target_ci,
                            cci_policy_kind policy, double theta, int* out_shift) {
    return guarded([&] {
        require(out_shift != nullptr, "null pointer");
        shiftsim::ShiftPolicy p;
        switch (policy) {
        case CCI_POLICY_POINT: p = shiftsim::ShiftPolicy::point(); break;
        case CCI_POLICY_DOMINANCE: p = shiftsim::ShiftPolicy::dominance(); break;
        case CCI_POLICY_OVERLAP: p = shiftsim::ShiftPolicy::overlap(theta); break;
        default: throw Error(ErrorCode::InvalidArgument, "unknown policy kind");
        }
        const auto d = shiftsim::decide_shift({source_pred, to_interval(source_ci)}, {target_pred, to_interval(target_ci)}, p);
        *out_shift = d.action == shiftsim::ShiftAction::Shift ? 1 : 0;
    });
}

cci_spci_config cci_spci_config_default(void) {
    const conformal::SpciConfig s;
    cci_spci_config c;
    c.alpha = s.alpha;
    c.window_capacity = s.window_capacity;
    c.lag_window = s.lag_window;
    c.n_trees = s.qrf.n_trees;
    c.max_depth = s.qrf.max_depth;
    c.min_leaf_size = s.qrf.min_leaf_size;
    c.bootstrap = s.qrf.bootstrap ? 1 : 0;
    c.threads = s.qrf.threads;
    c.beta_grid_size = s.beta_grid_size;
    c.refit_stride = s.refit_stride;
    c.seed = s.seed;
    return c;
}

cci_status cci_spci_create(const cci_spci_config* config, const double* initial_residuals, size_t n, cci_spci** out) {
    return guarded([&] {
        require(config != nullptr && out != nullptr && (initial_residuals || n == 0), "null pointer");
        *out = nullptr;
        *out = new cci_spci{conformal::SpciStream(to_config(*config), std::span<const double>(initial_residuals, n)),
                            std::nullopt};
    });
}

cci_status cci_spci_predict(cci_spci* spci, double point_forecast, cci_interval* out) {
    return guarded([&] {
        require(spci != nullptr && out != nullptr, "null pointer");
        if (spci->awaiting) {
            throw Error(ErrorCode::AlignmentError, "previous hour not observed yet");
        }
        *out = from_interval(spci->stream.predict(point_forecast));
        spci->awaiting = point_forecast;
    });
}

cci_status cci_spci_observe(cci_spci* spci, double truth) {
    return guarded([&] {
        require(spci != nullptr, "null pointer");
        if (!spci->awaiting) {
            throw Error(ErrorCode::AlignmentError, "no prediction awaiting an observation");
        }
        spci->stream.push_residual(conformal::residual(truth, *spci->awaiting));
        spci->awaiting.reset();
    });
}

void cci_spci_destroy(cci_spci* spci) { delete spci; }

cci_status cci_pipeline_open(const char* config_path, cci_pipeline** out) {
    return guarded([&] {
        require(config_path != nullptr && out != nullptr, "null pointer");
        *out = nullptr;
        auto config = pipeline::PipelineConfig::load(config_path);
        if (const char* env = std::getenv(pipeline::kWorkspaceEnv); env && *env) config.workspace = env;
        *out = new cci_pipeline{std::move(config), {}};
    });
}

void cci_pipeline_close(cci_pipeline* p) { delete p; }

cci_status cci_pipeline_set_workspace(cci_pipeline* p, const char* dir) {
    return guarded([&] {
        require(p != nullptr && dir != nullptr && *dir, "workspace must be a non-empty path");
        p->config.workspace = dir;
    });
}

cci_status cci_pipeline_set_region(cci_pipeline* p, const char* code) {
    return guarded([&] {
        require(p != nullptr, "null pointer");
        if (code == nullptr || *code == '\0') {
            p->config.only_region.reset();
        } else {
            p->config.only_region = std::string(code);
        }
    });
}

cci_status cci_pipeline_clear_alphas(cci_pipeline* p) {
    return guarded([&] {
        require(p != nullptr, "null pointer");
        p->config.alphas.clear();
    });
}

cci_status cci_pipeline_add_alpha(cci_pipeline* p, double alpha) {
    return guarded([&] {
        require(p != nullptr, "null pointer");
        require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
        p->config.alphas.push_back(alpha);
    });
}

cci_status cci_pipeline_set_policy(cci_pipeline* p, const char* policy) {
    return guarded([&] {
        require(p != nullptr && policy != nullptr, "null pointer");
        p->config.policy = shiftsim::ShiftPolicy::parse(policy);
    });
}

cci_status cci_pipeline_set_seed(cci_pipeline* p, uint64_t seed) {
    return guarded([&] {
        require(p != nullptr, "null pointer");
        p->config.spci.seed = seed;
    });
}

cci_status cci_pipeline_set_mode(cci_pipeline* p, cci_shift_mode mode) {
    return guarded([&] {
        require(p != nullptr, "null pointer");
        require(mode == CCI_MODE_TEMPORAL || mode == CCI_MODE_SPATIAL, "unknown mode");
        p->config.mode = mode == CCI_MODE_TEMPORAL ? pipeline::ShiftMode::Temporal : pipeline::ShiftMode::Spatial;
    });
}

cci_status cci_pipeline_ingest(cci_pipeline* p) {
    return guarded([&] {
        require(p != nullptr, "null pointer");
        pipeline::cmd_ingest(p->config);
    });
}

cci_status cci_pipeline_forecast(cci_pipeline* p) {
    return guarded([&] {
        require(p != nullptr, "null pointer");
        pipeline::cmd_forecast(p->config);
    });
}

cci_status cci_pipeline_run(cci_pipeline* p) {
    return guarded([&] {
        require(p != nullptr, "null pointer");
        pipeline::cmd_run(p->config);
    });
}

cci_status cci_pipeline_shift(cci_pipeline* p) {
    return guarded([&] {
        require(p != nullptr, "null pointer");
        pipeline::cmd_shift(p->config);
    });
}

cci_status cci_pipeline_report(cci_pipeline* p, const char** out_text) {
    return guarded([&] {
        require(p != nullptr && out_text != nullptr, "null pointer");
        p->report = pipeline::cmd_report(p->config);
        *out_text = p->report.c_str();
    });
}

} // extern "C"
