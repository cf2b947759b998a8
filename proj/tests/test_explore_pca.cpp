#include <gtest/gtest.h>

#include <cmath>

#include "hcvml/explore.hpp"
#include "hcvml/pca.hpp"

using namespace hcvml;

namespace {

FeatureTable table_of(const Matrix& x, std::vector<int> labels) {
    FeatureTable t;
    for (std::size_t j = 0; j < x.cols(); ++j) t.columns.push_back("c" + std::to_string(j));
    t.values = x;
    t.missing = Mask(x.rows(), x.cols());
    t.labels = std::move(labels);
    return t;
}

}  // namespace

TEST(BoxStats, ConstantColumn) {
    const std::vector<double> xs(6, 3.0);
    const BoxStats b = box_stats_column("k", xs);
    EXPECT_EQ(b.q1, 3.0);
    EXPECT_EQ(b.q3, 3.0);
    EXPECT_EQ(b.min, 3.0);
    EXPECT_TRUE(b.outliers.empty());
}

TEST(BoxStats, FlagsFarOutlier) {
    const std::vector<double> xs = {1, 2, 3, 4, 100};
    const BoxStats b = box_stats_column("v", xs);
    EXPECT_EQ(b.q1, 2.0);
    EXPECT_EQ(b.median, 3.0);
    EXPECT_EQ(b.q3, 4.0);
    ASSERT_EQ(b.outliers.size(), 1u);
    EXPECT_EQ(b.outliers[0].row, 4u);
    EXPECT_EQ(b.outliers[0].value, 100.0);
    EXPECT_EQ(b.whisker_high, 4.0);
    EXPECT_EQ(b.whisker_low, 1.0);
}

TEST(BoxStats, InvariantsAndPermutationInvariance) {
    RngStream rng(8);
    std::vector<double> xs(200);
    for (double& v : xs) v = std::exp(rng.normal());
    const BoxStats a = box_stats_column("x", xs);
    EXPECT_LE(a.min, a.q1);
    EXPECT_LE(a.q1, a.median);
    EXPECT_LE(a.median, a.q3);
    EXPECT_LE(a.q3, a.max);
    for (const auto& o : a.outliers) EXPECT_TRUE(o.value < a.lower_fence() || o.value > a.upper_fence());

    std::vector<double> shuffled = xs;
    rng.shuffle(shuffled);
    const BoxStats b = box_stats_column("x", shuffled);
    EXPECT_EQ(a.q1, b.q1);
    EXPECT_EQ(a.median, b.median);
    EXPECT_EQ(a.q3, b.q3);
    EXPECT_EQ(a.outliers.size(), b.outliers.size());
}

TEST(BoxStats, RejectsIncompleteTable) {
    FeatureTable t = table_of(Matrix::from_rows({{1}, {2}}), {0, 1});
    t.missing.set(0, 0, true);
    EXPECT_THROW(box_stats(t), Error);
}

TEST(CorrReport, LabelPseudoColumn) {
    const Matrix x = Matrix::from_rows({{1, 2, 0.5}, {2, 4, 0.1}, {3, 6, 0.9}, {4, 8, 0.2}});
    const CorrReport r = corr_report(table_of(x, {0, 0, 1, 1}));
    ASSERT_EQ(r.names.back(), "label");
    ASSERT_EQ(r.corr.rows(), 4u);
    EXPECT_NEAR(r.corr(0, 1), 1.0, 1e-15);
    EXPECT_EQ(r.corr(3, 3), 1.0);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(r.corr(i, j), r.corr(j, i));
    EXPECT_THROW(corr_report(table_of(Matrix::from_rows({{1, 5}, {2, 5}}), {0, 1})), Error);
}

TEST(Pca, LineHasOneComponent) {
    Matrix x(10, 2);
    for (int i = 0; i < 10; ++i) x(i, 0) = x(i, 1) = i * 0.7 - 2;
    const PcaModel m = fit_pca(x, false);
    EXPECT_NEAR(m.ratios[0], 1.0, 1e-9);
    EXPECT_EQ(select_dimension(m, 0.9), 1u);
    EXPECT_EQ(select_dimension(m, 1.0), 1u);
}

TEST(Pca, IsotropicCloudSplitsEvenly) {
    RngStream rng(21);
    Matrix x(20000, 2);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
    }
    const PcaModel m = fit_pca(x, true);
    EXPECT_NEAR(m.ratios[0], 0.5, 0.05);
    EXPECT_NEAR(m.ratios[1], 0.5, 0.05);
}

TEST(Pca, ModelInvariants) {
    RngStream rng(22);
    Matrix x(50, 5);
    for (std::size_t i = 0; i < 50; ++i) {
        const double z = rng.normal();
        for (std::size_t j = 0; j < 5; ++j) x(i, j) = (j + 1) * z + rng.normal() * (j + 0.5) + 10.0 * j;
    }
    for (bool standardize : {true, false}) {
        const PcaModel m = fit_pca(x, standardize);
        double sum = 0;
        for (double r : m.ratios) sum += r;
        EXPECT_NEAR(sum, 1.0, 1e-9);
        EXPECT_TRUE(std::is_sorted(m.ratios.rbegin(), m.ratios.rend()));
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b = 0; b < 5; ++b) {
                double d = 0;
                for (std::size_t i = 0; i < 5; ++i) d += m.components(i, a) * m.components(i, b);
                EXPECT_NEAR(d, a == b ? 1.0 : 0.0, 1e-9);
            }
        // eigenvalue sum equals the total variance of the transformed data
        double trace = 0, lsum = 0;
        for (std::size_t j = 0; j < 5; ++j) {
            double ss = 0;
            for (std::size_t i = 0; i < 50; ++i) {
                const double z = (x(i, j) - m.mean[j]) / m.scale[j];
                ss += z * z;
            }
            trace += ss / 50.0;
        }
        for (double l : m.eigenvalues) lsum += l;
        EXPECT_NEAR(lsum, trace, 1e-9);
    }
}

TEST(Pca, RowPermutationInvariance) {
    RngStream rng(24);
    Matrix x(30, 3);
    for (std::size_t i = 0; i < 30; ++i)
        for (double& v : x.row(i)) v = rng.normal();
    std::vector<std::size_t> perm(30);
    for (std::size_t i = 0; i < 30; ++i) perm[i] = i;
    rng.shuffle(perm);
    const PcaModel a = fit_pca(x), b = fit_pca(x.select_rows(perm));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.eigenvalues[k], b.eigenvalues[k], 1e-12);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.components(i, k), b.components(i, k), 1e-9);
}

TEST(Pca, Errors) {
    EXPECT_THROW(fit_pca(Matrix(1, 2)), Error);
    EXPECT_THROW(fit_pca(Matrix::from_rows({{1, 2}, {1, 3}}), true), Error);
    EXPECT_NO_THROW(fit_pca(Matrix::from_rows({{1, 2}, {1, 3}}), false));
}

TEST(Project, MeanMapsToZeroAndFullBasisReconstructs) {
    RngStream rng(25);
    Matrix x(40, 4);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 4; ++j) x(i, j) = rng.normal() * (j + 1) + j;
    const PcaModel m = fit_pca(x, true);
    for (double v : project(m, m.mean, 4)) EXPECT_NEAR(v, 0.0, 1e-12);

    const std::vector<double> q = {0.3, -1.0, 2.5, 4.0};
    const auto z = project(m, q, 4);
    for (std::size_t j = 0; j < 4; ++j) {
        double rec = m.mean[j];
        for (std::size_t k = 0; k < 4; ++k) rec += z[k] * m.components(j, k) * m.scale[j];
        EXPECT_NEAR(rec, q[j], 1e-9);
    }
    // two explicit dot products
    const auto z2 = project(m, q, 2);
    for (std::size_t k = 0; k < 2; ++k) {
        double d = 0;
        for (std::size_t j = 0; j < 4; ++j) d += m.components(j, k) * (q[j] - m.mean[j]) / m.scale[j];
        EXPECT_NEAR(z2[k], d, 1e-12);
    }
    EXPECT_THROW(project(m, q, 0), Error);
    EXPECT_THROW(project(m, q, 5), Error);
}

TEST(SelectDimension, CumulativeThreshold) {
    PcaModel m;
    m.ratios = {0.6, 0.3, 0.1};
    EXPECT_EQ(select_dimension(m, 0.9), 2u);
    EXPECT_EQ(select_dimension(m, 0.5), 1u);
    EXPECT_EQ(select_dimension(m, 1.0), 3u);
    m.ratios = {0.7, 0.3, 0.0};
    EXPECT_EQ(select_dimension(m, 1.0), 2u);  // trailing zero eigenvalue
    EXPECT_THROW(select_dimension(m, 0.0), Error);
}

TEST(FeatureShortlist, IntersectionAndFallback) {
    // Components are the axes, in order c0, c1, c2, c3, c4.
    PcaModel m;
    m.mean.assign(5, 0.0);
    m.scale.assign(5, 1.0);
    m.components = Matrix::identity(5);
    m.ratios = {0.3, 0.25, 0.2, 0.15, 0.1};
    const std::vector<std::string> names = {"A", "B", "C", "D", "E"};

    const Shortlist same = feature_shortlist(m, 4, names, {"D", "A", "C", "B", "E"});
    EXPECT_EQ(same.features, (std::vector<std::string>{"D", "A", "C", "B"}));
    EXPECT_FALSE(same.fell_back);

    const Shortlist disjoint = feature_shortlist(m, 1, names, {"E", "D", "C", "B"});
    EXPECT_TRUE(disjoint.fell_back);
    EXPECT_EQ(disjoint.features, (std::vector<std::string>{"E", "D", "C", "B"}));
    EXPECT_EQ(disjoint.pca_side, (std::vector<std::string>{"A"}));
}
