#include <gtest/gtest.h>

#include <cmath>

#include "hcvml/svm.hpp"

using namespace hcvml;

namespace {

const Matrix kXor = Matrix::from_rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
const std::vector<int> kXorPm = {1, 1, -1, -1};

double train_accuracy(const SvmModel& m, const Matrix& x, const std::vector<int>& y) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) ok += predict_sign(m, x.row(i)) == y[i];
    return static_cast<double>(ok) / static_cast<double>(x.rows());
}

// Two blobs separated along u = (0.6, 0.8) with a gap of width 2 around the
// hyperplane u.x = 0.5.
void separable_blobs(std::size_t n, RngStream rng, Matrix& x, std::vector<int>& y) {
    x = Matrix(n, 2);
    y.resize(n);
    const double ux = 0.6, uy = 0.8;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        const double along = label * (1.0 + std::abs(rng.normal()) * 1.5) + 0.5;
        const double across = rng.normal() * 3.0;
        x(i, 0) = along * ux - across * uy;
        x(i, 1) = along * uy + across * ux;
        y[i] = label;
    }
}

void check_dual_feasibility(const SvmModel& m, const Matrix& x, const std::vector<int>& y) {
    double eq = 0.0;
    for (std::size_t i = 0; i < m.alpha.size(); ++i) {
        EXPECT_GE(m.alpha[i], 0.0);
        EXPECT_LE(m.alpha[i], m.C);
        eq += m.alpha[i] * y[i];
    }
    EXPECT_NEAR(eq, 0.0, 1e-8);
    if (m.kernel.type == KernelType::Linear) {
        for (std::size_t k = 0; k < x.cols(); ++k) {
            double wk = 0.0;
            for (std::size_t i = 0; i < x.rows(); ++i) wk += m.alpha[i] * y[i] * x(i, k);
            EXPECT_NEAR(m.w[k], wk, 1e-8);
        }
    }
}

}  // namespace

TEST(PmLabels, MapAndRoundTrip) {
    EXPECT_EQ(to_pm_label(0), 1);
    EXPECT_EQ(to_pm_label(1), -1);
    const std::vector<int> labels = {0, 1, 1, 0};
    const auto pm = to_pm_labels(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(from_pm_label(pm[i]), labels[i]);
}

TEST(TrainSvm, SymmetricPairInOneDimension) {
    const Matrix x = Matrix::from_rows({{-1}, {1}});
    const std::vector<int> y = {-1, 1};
    SvmParams p;
    p.C = 10;
    const SvmModel m = train_svm(x, y, p);
    EXPECT_TRUE(m.converged);
    ASSERT_NE(m.w[0], 0.0);
    EXPECT_NEAR(-m.bias / m.w[0], 0.0, 0.1);
    EXPECT_EQ(train_accuracy(m, x, y), 1.0);
    check_dual_feasibility(m, x, y);
}

// Brute force over linear separators of the XOR points: directions on a fine
// grid, thresholds at every projection midpoint, both orientations.
TEST(TrainSvm, XorLinearBoundedByBruteForce) {
    double best = 0.0;
    for (int a = 0; a < 3600; ++a) {
        const double th = a * 3.14159265358979323846 / 1800.0;
        std::vector<double> proj(4);
        for (std::size_t i = 0; i < 4; ++i) proj[i] = std::cos(th) * kXor(i, 0) + std::sin(th) * kXor(i, 1);
        std::vector<double> cuts = {-10.0};
        for (double u : proj)
            for (double v : proj) cuts.push_back((u + v) / 2.0);
        for (double c : cuts)
            for (int s : {1, -1}) {
                int ok = 0;
                for (std::size_t i = 0; i < 4; ++i) ok += (s * (proj[i] - c) > 0 ? 1 : -1) == kXorPm[i];
                best = std::max(best, ok / 4.0);
            }
    }
    EXPECT_EQ(best, 0.75);

    const SvmModel m = train_svm(kXor, kXorPm);
    EXPECT_LE(train_accuracy(m, kXor, kXorPm), best);
    check_dual_feasibility(m, kXor, kXorPm);
}

TEST(TrainSvm, RbfKernelSolvesXor) {
    SvmParams p;
    p.C = 10;
    p.kernel = {KernelType::Rbf, 2.0};
    const SvmModel m = train_svm(kXor, kXorPm, p);
    EXPECT_EQ(train_accuracy(m, kXor, kXorPm), 1.0);
    check_dual_feasibility(m, kXor, kXorPm);
}

TEST(TrainSvm, SeparableBlobsMarginVectors) {
    Matrix x;
    std::vector<int> y;
    separable_blobs(200, RngStream(31), x, y);
    SvmParams p;
    p.C = 100;
    const SvmModel m = train_svm(x, y, p);
    EXPECT_TRUE(m.converged);
    EXPECT_EQ(train_accuracy(m, x, y), 1.0);
    check_dual_feasibility(m, x, y);
    std::size_t free = 0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (m.alpha[i] > 0.0 && m.alpha[i] < m.C) {
            ++free;
            EXPECT_NEAR(y[i] * decision_value(m, x.row(i)), 1.0, 1e-2);
        }
    EXPECT_GE(free, 2u);
}

TEST(TrainSvm, DeterministicAndFeaturePermutationInvariant) {
    Matrix x;
    std::vector<int> y;
    separable_blobs(60, RngStream(32), x, y);
    x(0, 0) += 3.0;  // a little overlap
    const SvmModel a = train_svm(x, y), b = train_svm(x, y);
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.bias, b.bias);

    const std::vector<std::size_t> perm = {1, 0};
    const Matrix xp = x.select_cols(perm);
    const SvmModel c = train_svm(xp, y);
    RngStream rng(33);
    for (int t = 0; t < 50; ++t) {
        const std::vector<double> q = {rng.normal() * 3, rng.normal() * 3};
        const std::vector<double> qp = {q[1], q[0]};
        EXPECT_EQ(predict_sign(a, q), predict_sign(c, qp));
    }
}

TEST(TrainSvm, Errors) {
    const Matrix x = Matrix::from_rows({{1}, {2}});
    EXPECT_THROW(train_svm(x, std::vector<int>{1, 1}), Error);
    EXPECT_THROW(train_svm(x, std::vector<int>{1, 0}), Error);
    SvmParams p;
    p.C = 0.0;
    EXPECT_THROW(train_svm(x, std::vector<int>{1, -1}, p), Error);
    EXPECT_THROW(train_svm(Matrix::from_rows({{1}, {std::nan("")}}), std::vector<int>{1, -1}), Error);
}

TEST(DecisionValue, HyperplaneScalingAndDotOracle) {
    SvmModel m;
    m.w = {2.0, -1.0, 0.5};
    m.bias = -1.5;
    m.support_vectors = Matrix(0, 3);
    const std::vector<double> on = {1.0, 0.5, 0.0};  // 2 - 0.5 - 1.5 = 0
    EXPECT_NEAR(decision_value(m, on), 0.0, 1e-9);

    RngStream rng(34);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> x = {rng.normal(), rng.normal(), rng.normal()};
        const double v = decision_value(m, x);
        EXPECT_NEAR(v, m.w[0] * x[0] + m.w[1] * x[1] + m.w[2] * x[2] + m.bias, 1e-12);
        SvmModel doubled = m;
        for (double& w : doubled.w) w *= 2;
        doubled.bias *= 2;
        EXPECT_NEAR(decision_value(doubled, x), 2 * v, 1e-12);
        EXPECT_EQ(predict_sign(doubled, x), predict_sign(m, x));
    }
    EXPECT_THROW(decision_value(m, std::vector<double>{1.0}), Error);
}

TEST(PredictSign, TieRule) {
    EXPECT_EQ(sign_of(3.2), 1);
    EXPECT_EQ(sign_of(-0.001), -1);
    EXPECT_EQ(sign_of(0.0), 1);
    EXPECT_EQ(sign_of(-0.0), 1);
}
