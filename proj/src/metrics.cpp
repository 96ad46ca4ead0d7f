#include "mwtgc/metrics.hpp"

#include "mwtgc/error.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mwtgc {

namespace {

void require_same_shape(const Matrix& pred, const Matrix& actual, const char* op) {
    if (pred.rows() != actual.rows() || pred.cols() != actual.cols()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    std::to_string(pred.rows()) + "x" +
                                    std::to_string(pred.cols()) + " vs " +
                                    std::to_string(actual.rows()) + "x" +
                                    std::to_string(actual.cols()));
    }
    if (pred.size() == 0) {
        throw std::invalid_argument(std::string(op) + ": empty input");
    }
}

} // namespace

double rmse(const Matrix& pred, const Matrix& actual) {
    require_same_shape(pred, actual, "rmse");
    return std::sqrt((pred - actual).squaredNorm() / static_cast<double>(pred.size()));
}

double mad(const Matrix& pred, const Matrix& actual) {
    require_same_shape(pred, actual, "mad");
    return (pred - actual).cwiseAbs().sum() / static_cast<double>(pred.size());
}

MapeResult mape(const Matrix& pred, const Matrix& actual) {
    require_same_shape(pred, actual, "mape");
    double sum = 0.0;
    long long used = 0;
    int excluded = 0;
    for (Index i = 0; i < actual.rows(); ++i) {
        for (Index j = 0; j < actual.cols(); ++j) {
            if (actual(i, j) > 0.0) {
                sum += std::fabs(pred(i, j) - actual(i, j)) / actual(i, j);
                ++used;
            } else {
                ++excluded;
            }
        }
    }
    if (used == 0) {
        throw NumericError("mape: every actual value is zero, metric undefined");
    }
    return MapeResult{100.0 * sum / static_cast<double>(used), excluded};
}

MaseResult mase(const Matrix& pred, const Matrix& actual) {
    require_same_shape(pred, actual, "mase");
    const Index t = actual.cols();
    if (t < 2) {
        throw std::invalid_argument("mase: needs at least 2 steps per segment");
    }
    double sum = 0.0;
    int used = 0;
    int excluded = 0;
    for (Index i = 0; i < actual.rows(); ++i) {
        double abs_err = 0.0;
        for (Index j = 0; j < t; ++j) {
            abs_err += std::fabs(pred(i, j) - actual(i, j));
        }
        double abs_diff = 0.0;
        for (Index j = 1; j < t; ++j) {
            abs_diff += std::fabs(actual(i, j) - actual(i, j - 1));
        }
        const double denom = abs_diff / static_cast<double>(t - 1);
        if (denom > 0.0) {
            sum += abs_err / denom;
            ++used;
        } else {
            ++excluded; // constant actual series
        }
    }
    if (used == 0) {
        throw NumericError("mase: every segment has a constant actual series");
    }
    return MaseResult{sum / static_cast<double>(used), excluded};
}

Vector per_segment_rmse(const Matrix& pred, const Matrix& actual) {
    require_same_shape(pred, actual, "per_segment_rmse");
    Vector out(pred.rows());
    for (Index i = 0; i < pred.rows(); ++i) {
        out[i] = std::sqrt((pred.row(i) - actual.row(i)).squaredNorm() /
                           static_cast<double>(pred.cols()));
    }
    return out;
}

DmResult dm_test(const std::vector<double>& loss_a, const std::vector<double>& loss_b, int lag) {
    if (loss_a.size() != loss_b.size()) {
        throw std::invalid_argument("dm_test: loss series lengths differ");
    }
    const int n = static_cast<int>(loss_a.size());
    if (lag < 0 || n <= lag) {
        throw std::invalid_argument("dm_test: need series length > lag >= 0, got n=" +
                                    std::to_string(n) + " lag=" + std::to_string(lag));
    }
    std::vector<double> d(loss_a.size());
    bool all_zero = true;
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = loss_a[i] - loss_b[i];
        if (d[i] != 0.0) {
            all_zero = false;
        }
    }
    if (all_zero) {
        return DmResult{0.0, 1.0, lag};
    }
    double mean = 0.0;
    for (const double v : d) {
        mean += v;
    }
    mean /= n;

    auto autocov = [&d, mean, n](int l) {
        double acc = 0.0;
        for (int t = l; t < n; ++t) {
            acc += (d[static_cast<std::size_t>(t)] - mean) *
                   (d[static_cast<std::size_t>(t - l)] - mean);
        }
        return acc / n;
    };
    double long_run_var = autocov(0);
    for (int l = 1; l <= lag; ++l) {
        long_run_var += 2.0 * autocov(l);
    }
    if (!(long_run_var > 0.0)) {
        throw NumericError("dm_test: degenerate long-run variance (" +
                           std::to_string(long_run_var) + ")");
    }
    const double statistic = mean / std::sqrt(long_run_var / n);
    const double p = std::erfc(std::fabs(statistic) / std::sqrt(2.0));
    return DmResult{statistic, p, lag};
}

Matrix baseline_ha(const Matrix& window, int t_p) {
    if (window.cols() < 1 || t_p < 1) {
        throw std::invalid_argument("baseline_ha: empty window or horizon");
    }
    Matrix out(window.rows(), t_p);
    for (int t = 0; t < t_p; ++t) {
        out.col(t) = window.col(window.cols() - 1);
    }
    return out;
}

} // namespace mwtgc
