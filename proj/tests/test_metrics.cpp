#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mwtgc/error.hpp"
#include "mwtgc/metrics.hpp"
#include "mwtgc/rng.hpp"

#include <cmath>
#include <vector>

using namespace mwtgc;

namespace {

Matrix random_positive(SeededRng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            m(r, c) = rng.uniform(1.0, 100.0);
        }
    }
    return m;
}

// Brute-force oracle written as a direct transcription of the per-segment
// ratio definition, kept independent of the library implementation.
double brute_force_mase(const Matrix& pred, const Matrix& actual) {
    double total = 0.0;
    int segments = 0;
    for (Index i = 0; i < actual.rows(); ++i) {
        double err = 0.0;
        for (Index j = 0; j < actual.cols(); ++j) {
            err += std::fabs(pred(i, j) - actual(i, j));
        }
        double diff = 0.0;
        for (Index j = 1; j < actual.cols(); ++j) {
            diff += std::fabs(actual(i, j) - actual(i, j - 1));
        }
        const double scale = diff / static_cast<double>(actual.cols() - 1);
        if (scale > 0.0) {
            total += err / scale;
            ++segments;
        }
    }
    return total / segments;
}

struct BruteForceDm {
    double statistic;
    double p_value;
};

BruteForceDm brute_force_dm(const std::vector<double>& a, const std::vector<double>& b, int lag) {
    const int n = static_cast<int>(a.size());
    std::vector<double> d(a.size());
    for (int i = 0; i < n; ++i) {
        d[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] -
                                         b[static_cast<std::size_t>(i)];
    }
    double mean = 0.0;
    for (const double v : d) {
        mean += v;
    }
    mean /= n;
    double variance = 0.0;
    for (int l = 0; l <= lag; ++l) {
        double gamma = 0.0;
        for (int t = l; t < n; ++t) {
            gamma += (d[static_cast<std::size_t>(t)] - mean) *
                     (d[static_cast<std::size_t>(t - l)] - mean);
        }
        gamma /= n;
        variance += l == 0 ? gamma : 2.0 * gamma;
    }
    const double statistic = mean / std::sqrt(variance / n);
    return {statistic, std::erfc(std::fabs(statistic) / std::sqrt(2.0))};
}

} // namespace

TEST_CASE("hand examples for the four metrics") {
    Matrix pred(1, 2), actual(1, 2);
    pred << 3.0, 4.0;
    actual << 2.0, 6.0;
    CHECK(rmse(pred, actual) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-9));
    CHECK(mad(pred, actual) == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(mape(pred, actual).percent ==
          doctest::Approx((0.5 + 1.0 / 3.0) / 2.0 * 100.0).epsilon(1e-9));
    CHECK(mase(pred, actual).value == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("perfect prediction scores zero") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    CHECK(rmse(m, m) == 0.0);
    CHECK(mad(m, m) == 0.0);
    CHECK(mape(m, m).percent == 0.0);
    CHECK(mase(m, m).value == 0.0);
}

TEST_CASE("single entry metrics") {
    Matrix pred(1, 1), actual(1, 1);
    pred << 5.0;
    actual << 4.0;
    CHECK(rmse(pred, actual) == doctest::Approx(1.0));
    CHECK(mad(pred, actual) == doctest::Approx(1.0));
    CHECK(mape(pred, actual).percent == doctest::Approx(25.0));
}

TEST_CASE("rmse dominates mad on random arrays") {
    SeededRng rng(2718);
    for (int trial = 0; trial < 1000; ++trial) {
        const Index rows = 1 + static_cast<Index>(rng.next_below(6));
        const Index cols = 1 + static_cast<Index>(rng.next_below(8));
        const Matrix pred = random_positive(rng, rows, cols);
        const Matrix actual = random_positive(rng, rows, cols);
        CHECK(rmse(pred, actual) >= mad(pred, actual) - 1e-12);
    }
}

TEST_CASE("metrics are invariant under segment permutation") {
    SeededRng rng(13);
    const Matrix pred = random_positive(rng, 5, 7);
    const Matrix actual = random_positive(rng, 5, 7);
    std::vector<Index> perm{4, 2, 0, 1, 3};
    Matrix pred_p(5, 7), actual_p(5, 7);
    for (Index i = 0; i < 5; ++i) {
        pred_p.row(perm[static_cast<std::size_t>(i)]) = pred.row(i);
        actual_p.row(perm[static_cast<std::size_t>(i)]) = actual.row(i);
    }
    CHECK(rmse(pred, actual) == doctest::Approx(rmse(pred_p, actual_p)).epsilon(1e-12));
    CHECK(mad(pred, actual) == doctest::Approx(mad(pred_p, actual_p)).epsilon(1e-12));
    CHECK(mape(pred, actual).percent ==
          doctest::Approx(mape(pred_p, actual_p).percent).epsilon(1e-12));
    CHECK(mase(pred, actual).value ==
          doctest::Approx(mase(pred_p, actual_p).value).epsilon(1e-12));
}

TEST_CASE("mape excludes zero actuals and reports the count") {
    Matrix pred(1, 3), actual(1, 3);
    pred << 1.0, 5.0, 2.0;
    actual << 0.0, 4.0, 4.0;
    const MapeResult r = mape(pred, actual);
    CHECK(r.excluded == 1);
    CHECK(r.percent == doctest::Approx((0.25 + 0.5) / 2.0 * 100.0));

    CHECK_THROWS_AS(mape(Matrix::Ones(2, 2), Matrix::Zero(2, 2)), NumericError);
}

TEST_CASE("mase excludes constant segments and reports the count") {
    Matrix pred(2, 3), actual(2, 3);
    pred << 1, 2, 3, 4, 5, 6;
    actual << 2, 2, 2, 1, 2, 4; // first row constant
    const MaseResult r = mase(pred, actual);
    CHECK(r.excluded_segments == 1);
    Matrix pred1 = pred.bottomRows(1);
    Matrix actual1 = actual.bottomRows(1);
    CHECK(r.value == doctest::Approx(brute_force_mase(pred1, actual1)));

    CHECK_THROWS_AS(mase(pred, Matrix::Ones(2, 3)), NumericError);
    CHECK_THROWS_AS(mase(Matrix::Ones(1, 1), Matrix::Ones(1, 1)), std::invalid_argument);
}

TEST_CASE("mase matches the brute-force oracle on random series") {
    SeededRng rng(31415);
    for (int trial = 0; trial < 200; ++trial) {
        const Index rows = 1 + static_cast<Index>(rng.next_below(5));
        const Index cols = 2 + static_cast<Index>(rng.next_below(10));
        const Matrix pred = random_positive(rng, rows, cols);
        const Matrix actual = random_positive(rng, rows, cols);
        CHECK(mase(pred, actual).value ==
              doctest::Approx(brute_force_mase(pred, actual)).epsilon(1e-12));
    }
    // random-walk naive forecast: predict the previous actual
    const Matrix actual = random_positive(rng, 3, 12);
    Matrix naive(3, 12);
    naive.col(0) = actual.col(0);
    for (Index j = 1; j < 12; ++j) {
        naive.col(j) = actual.col(j - 1);
    }
    CHECK(mase(naive, actual).value ==
          doctest::Approx(brute_force_mase(naive, actual)).epsilon(1e-12));
}

TEST_CASE("dm_test on identical series") {
    const std::vector<double> losses{1.0, 2.0, 3.0, 4.0};
    const DmResult r = dm_test(losses, losses, 1);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("dm_test rejects a constant nonzero differential") {
    const std::vector<double> a{2.0, 2.0, 2.0, 2.0};
    const std::vector<double> b{1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(dm_test(a, b, 0), NumericError);
}

TEST_CASE("dm_test antisymmetry is exact") {
    SeededRng rng(777);
    std::vector<double> a, b;
    for (int i = 0; i < 50; ++i) {
        a.push_back(rng.uniform(0.0, 10.0));
        b.push_back(rng.uniform(0.0, 10.0));
    }
    for (int lag : {0, 3, 11}) {
        const DmResult ab = dm_test(a, b, lag);
        const DmResult ba = dm_test(b, a, lag);
        CHECK(ab.statistic == -ba.statistic);
        CHECK(ab.p_value == ba.p_value);
    }
}

TEST_CASE("dm_test matches the brute-force evaluation") {
    SeededRng rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a, b;
        const int n = 20 + static_cast<int>(rng.next_below(60));
        for (int i = 0; i < n; ++i) {
            a.push_back(rng.uniform(0.0, 5.0) + 0.05 * i);
            b.push_back(rng.uniform(0.0, 5.0));
        }
        for (int lag : {0, 2, 5}) {
            const DmResult mine = dm_test(a, b, lag);
            const BruteForceDm ref = brute_force_dm(a, b, lag);
            CHECK(std::fabs(mine.statistic - ref.statistic) <= 1e-10);
            CHECK(std::fabs(mine.p_value - ref.p_value) <= 1e-10);
        }
    }
    CHECK_THROWS_AS(dm_test({1.0, 2.0}, {1.0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(dm_test({1.0, 2.0}, {1.0, 2.0}, 2), std::invalid_argument);
}

TEST_CASE("historical average baseline") {
    Matrix window(2, 3);
    window << 1, 2, 4, 10, 10, 10;
    const Matrix pred = baseline_ha(window, 4);
    REQUIRE(pred.cols() == 4);
    for (Index t = 0; t < 4; ++t) {
        CHECK(pred(0, t) == 4.0);
        CHECK(pred(1, t) == 10.0);
    }

    // constant series: zero error at every horizon
    const Matrix constant = Matrix::Constant(2, 5, 7.0);
    const Matrix ha = baseline_ha(constant.leftCols(3), 2);
    CHECK(rmse(ha, constant.rightCols(2)) == 0.0);

    // hand series [1, 2, 4]: window [1], actuals [2, 4]
    Matrix w(1, 1), actual(1, 2);
    w << 1.0;
    actual << 2.0, 4.0;
    const Matrix ha2 = baseline_ha(w, 2);
    CHECK(mase(ha2, actual).value == doctest::Approx(2.0));
}
