#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "hcvml/forest.hpp"

using namespace hcvml;

namespace {

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = i;
    return r;
}

// Feature 0 carries the label, the rest are noise.
void signal_data(std::size_t n, std::size_t p, RngStream rng, Matrix& x, std::vector<int>& y) {
    x = Matrix(n, p);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = rng.uniform() < 0.4 ? 1 : 0;
        x(i, 0) = (y[i] ? 1.5 : -1.5) + rng.normal();
        for (std::size_t j = 1; j < p; ++j) x(i, j) = rng.normal();
    }
}

// Exhaustive split oracle: every feature, every midpoint of distinct sorted
// values, weighted child Gini computed from scratch.
std::optional<std::pair<std::size_t, double>> oracle_split(const Matrix& x, const std::vector<int>& y,
                                                           const std::vector<std::size_t>& rows) {
    auto gini = [&](const std::vector<std::size_t>& rs) {
        double ones = 0;
        for (std::size_t r : rs) ones += y[r];
        const double p1 = ones / rs.size();
        return 1 - p1 * p1 - (1 - p1) * (1 - p1);
    };
    double best = gini(rows) - 1e-15;
    std::optional<std::pair<std::size_t, double>> out;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        std::set<double> vals;
        for (std::size_t r : rows) vals.insert(x(r, f));
        for (auto it = vals.begin(); std::next(it) != vals.end(); ++it) {
            const double t = (*it + *std::next(it)) / 2;
            std::vector<std::size_t> l, rr;
            for (std::size_t r : rows) (x(r, f) <= t ? l : rr).push_back(r);
            const double score = (l.size() * gini(l) + rr.size() * gini(rr)) / rows.size();
            if (score < best - 1e-12) {
                best = score;
                out = {{f, t}};
            }
        }
    }
    return out;
}

}  // namespace

TEST(GiniImpurity, KnownValues) {
    EXPECT_EQ(gini_impurity({5, 0}), 0.0);
    EXPECT_EQ(gini_impurity({0, 3}), 0.0);
    EXPECT_DOUBLE_EQ(gini_impurity({4, 4}), 0.5);
    EXPECT_DOUBLE_EQ(gini_impurity({3, 1}), 0.375);
    EXPECT_THROW(gini_impurity({0, 0}), Error);
}

TEST(BestSplit, PureNodeAndOneDimensionalExample) {
    const Matrix x = Matrix::from_rows({{1}, {2}, {3}, {10}, {11}, {12}});
    const std::vector<int> y = {0, 0, 0, 1, 1, 1};
    const auto rows = iota_rows(6);
    const auto s = best_split(x, y, rows, {0});
    ASSERT_TRUE(s);
    EXPECT_EQ(s->threshold, 6.5);
    EXPECT_EQ(s->child_impurity, 0.0);
    EXPECT_EQ(s->left, (ClassCounts{3, 0}));

    const std::vector<int> pure(6, 1);
    EXPECT_FALSE(best_split(x, pure, rows, {0}));
    // a child smaller than min_child is not allowed
    EXPECT_FALSE(best_split(x, y, rows, {0}, 4));
}

TEST(BestSplit, MatchesExhaustiveOracle) {
    const RngStream root(51, "split-oracle");
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        RngStream rng = root.fork("trial", trial);
        Matrix x(30, 3);
        std::vector<int> y(30);
        for (std::size_t i = 0; i < 30; ++i) {
            for (double& v : x.row(i)) v = std::round(rng.normal() * 4);  // ties are common
            y[i] = static_cast<int>(rng.below(2));
        }
        const auto rows = iota_rows(30);
        const auto got = best_split(x, y, rows, {0, 1, 2});
        const auto want = oracle_split(x, y, rows);
        ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << trial;
        if (got) {
            EXPECT_EQ(got->feature, want->first) << "trial " << trial;
            EXPECT_EQ(got->threshold, want->second) << "trial " << trial;
        }
    }
}

TEST(Bootstrap, SingleRowAndDistinctFraction) {
    RngStream one(52);
    const Bootstrap b1 = bootstrap_sample(1, one);
    EXPECT_EQ(b1.sample, std::vector<std::size_t>{0});
    EXPECT_TRUE(b1.oob.empty());

    RngStream rng(53);
    const std::size_t n = 10000;
    const Bootstrap b = bootstrap_sample(n, rng);
    const std::set<std::size_t> distinct(b.sample.begin(), b.sample.end());
    EXPECT_NEAR(static_cast<double>(distinct.size()) / n, 1.0 - std::exp(-1.0), 0.02);
    EXPECT_EQ(distinct.size() + b.oob.size(), n);
    for (std::size_t r : b.oob) EXPECT_FALSE(distinct.count(r));

    RngStream a1(54), a2(54);
    EXPECT_EQ(bootstrap_sample(50, a1).sample, bootstrap_sample(50, a2).sample);
    EXPECT_THROW(bootstrap_sample(0, a1), Error);
}

TEST(GrowTree, SingleClassIsOneLeaf) {
    const Matrix x = Matrix::from_rows({{1}, {2}, {3}});
    const std::vector<int> y = {1, 1, 1};
    RngStream rng(55);
    const Tree t = grow_tree(x, y, iota_rows(3), {}, rng);
    ASSERT_EQ(t.nodes.size(), 1u);
    EXPECT_EQ(t.predict(x.row(0)), 1);
}

TEST(GrowTree, FitsSeparableDataAndReplaysPaths) {
    Matrix x;
    std::vector<int> y;
    signal_data(200, 4, RngStream(56), x, y);
    RngStream rng(57);
    const Tree t = grow_tree(x, y, iota_rows(200), {0, 1}, rng);
    // distinct rows and n_min = 1: the fully grown tree reproduces its training labels
    for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(t.predict(x.row(i)), y[i]);
    // path replay: each leaf's counts equal the rows routed to it
    std::vector<ClassCounts> routed(t.nodes.size());
    for (std::size_t i = 0; i < 200; ++i) (y[i] ? routed[t.leaf_index(x.row(i))].c1 : routed[t.leaf_index(x.row(i))].c0)++;
    for (std::size_t k = 0; k < t.nodes.size(); ++k)
        if (t.nodes[k].is_leaf()) {
            EXPECT_EQ(routed[k], t.nodes[k].counts);
        } else {
            const auto& nd = t.nodes[k];
            EXPECT_EQ(nd.counts.total(), t.nodes[nd.left].counts.total() + t.nodes[nd.right].counts.total());
        }
}

TEST(TrainForest, OneTreeWithoutBootstrapIsPlainCart) {
    Matrix x;
    std::vector<int> y;
    signal_data(80, 3, RngStream(58), x, y);
    ForestParams p;
    p.trees = 1;
    p.m = 3;
    p.bootstrap = false;
    const Forest f = train_forest(x, y, p, 1);
    RngStream rng(0);
    const Tree cart = grow_tree(x, y, iota_rows(80), {3, 1}, rng);
    EXPECT_EQ(f.trees[0], cart);
}

TEST(TrainForest, OutOfBagAccuracyOnSignal) {
    Matrix x;
    std::vector<int> y;
    signal_data(300, 5, RngStream(59), x, y);
    ForestParams p;
    p.trees = 100;
    const Forest f = train_forest(x, y, p, 2);
    EXPECT_EQ(f.m, 2u);
    EXPECT_GE(oob_accuracy(f, x, y), 0.9);
}

// Property suite: thread count never changes the forest.
TEST(ForestProperty, DeterministicAcrossThreadCounts) {
    Matrix x;
    std::vector<int> y;
    signal_data(150, 6, RngStream(60), x, y);
    ForestParams p;
    p.trees = 40;
    const unsigned max_threads = std::max(2u, std::thread::hardware_concurrency());
    p.threads = 1;
    const Forest base = train_forest(x, y, p, 3);
    for (unsigned th : {2u, max_threads}) {
        p.threads = th;
        const Forest f = train_forest(x, y, p, 3);
        EXPECT_EQ(f.trees, base.trees) << th << " threads";
        EXPECT_EQ(f.gini_decrease, base.gini_decrease);
        for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_EQ(predict_vote(f, x.row(i)).label, predict_vote(base, x.row(i)).label);
    }
}

TEST(PredictVote, TallyAndTieGoesToZero) {
    Forest f;
    f.features = 1;
    Tree zero, one;
    zero.nodes.push_back({-1, 0.0, -1, -1, {1, 0}});
    one.nodes.push_back({-1, 0.0, -1, -1, {0, 1}});
    const std::vector<double> x = {0.0};
    f.trees = {zero, one};
    EXPECT_EQ(predict_vote(f, x).label, 0);
    EXPECT_EQ(predict_vote(f, x).fraction_one, 0.5);
    f.trees = {zero, one, one};
    EXPECT_EQ(predict_vote(f, x).label, 1);
    EXPECT_DOUBLE_EQ(predict_vote(f, x).fraction_one, 2.0 / 3.0);
    EXPECT_THROW(predict_vote(f, std::vector<double>{1, 2}), Error);
}

TEST(Importance, GiniNonNegativeAndSignalRanksFirst) {
    int gini_first = 0, perm_first = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Matrix x;
        std::vector<int> y;
        signal_data(200, 5, RngStream(seed, "importance-data"), x, y);
        ForestParams p;
        p.trees = 60;
        const Forest f = train_forest(x, y, p, seed);
        const auto g = importance_gini(f);
        for (double v : g) EXPECT_GE(v, 0.0);
        const std::vector<std::string> names = {"s", "n1", "n2", "n3", "n4"};
        gini_first += rank_features(g, names).front().name == "s";
        perm_first += rank_features(importance_permutation(f, x, y, seed), names).front().name == "s";
    }
    EXPECT_GE(gini_first, 4);
    EXPECT_GE(perm_first, 4);
}

TEST(RankFeatures, StableDescending) {
    const auto r = rank_features({1.0, 3.0, 1.0, 2.0}, {"a", "b", "c", "d"});
    ASSERT_EQ(r.size(), 4u);
    EXPECT_EQ(r[0].name, "b");
    EXPECT_EQ(r[1].name, "d");
    EXPECT_EQ(r[2].name, "a");
    EXPECT_EQ(r[3].name, "c");
}

TEST(TrainForest, Errors) {
    const Matrix x = Matrix::from_rows({{1}, {2}});
    EXPECT_THROW(train_forest(x, std::vector<int>{0, 0}, {}, 1), Error);
    ForestParams p;
    p.trees = 0;
    EXPECT_THROW(train_forest(x, std::vector<int>{0, 1}, p, 1), Error);
}
