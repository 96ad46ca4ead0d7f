#pragma once

#include "mwtgc/types.hpp"

#include <vector>

namespace mwtgc {

// Forecast error metrics over N x T arrays (segments x evaluated steps),
// in km/h space. Shapes must match; mismatches throw std::invalid_argument.

double rmse(const Matrix& pred, const Matrix& actual);
double mad(const Matrix& pred, const Matrix& actual);

/// Percent error averaged over entries with actual > 0; zero-valued actuals
/// are excluded and counted. Throws NumericError when nothing remains.
struct MapeResult {
    double percent = 0.0;
    int excluded = 0;
};
MapeResult mape(const Matrix& pred, const Matrix& actual);

/// Per-segment ratio of the total absolute error to the mean absolute first
/// difference of the actual series, averaged over segments. Segments with a
/// constant actual series are excluded and counted. Requires T >= 2.
struct MaseResult {
    double value = 0.0;
    int excluded_segments = 0;
};
MaseResult mase(const Matrix& pred, const Matrix& actual);

Vector per_segment_rmse(const Matrix& pred, const Matrix& actual);

/// Errors of one model at one forecasting horizon.
struct HorizonReport {
    int horizon_steps = 0;
    double rmse_kmh = 0.0;
    double mape_percent = 0.0;
    double mad_kmh = 0.0;
    double mase = 0.0;
    int mape_excluded = 0;
    int mase_excluded_segments = 0;
    Vector segment_rmse;
};

/// Diebold-Mariano test of equal forecast accuracy between two loss series.
struct DmResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int lag = 0;
};

/// Long-run variance uses the truncated autocovariance sum with rectangular
/// weights up to `lag`. Two-sided p-value from the standard normal. Identical
/// series give statistic 0, p 1; otherwise a non-positive variance estimate
/// throws NumericError (degenerate result).
DmResult dm_test(const std::vector<double>& loss_a, const std::vector<double>& loss_b, int lag);

/// Repeats the last observed column over the whole horizon.
Matrix baseline_ha(const Matrix& window, int t_p);

} // namespace mwtgc
