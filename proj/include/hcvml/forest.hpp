// hcvml: random forest of CART classification trees.
//
// Trees are grown on size-n bootstrap samples with m candidate features drawn
// at every node, split on Gini impurity at midpoints between consecutive
// distinct values, and combined by majority vote. Every tree draws from its
// own stream forked from the master seed by tree index, so the forest does
// not depend on how many worker threads grow it.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hcvml/numeric.hpp"

namespace hcvml {

struct ClassCounts {
    std::size_t c0 = 0;
    std::size_t c1 = 0;

    std::size_t total() const noexcept { return c0 + c1; }
    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

inline double gini_impurity(ClassCounts c) {
    if (c.total() == 0) throw Error("gini_impurity: empty node");
    const double n = static_cast<double>(c.total());
    const double p0 = static_cast<double>(c.c0) / n, p1 = static_cast<double>(c.c1) / n;
    return 1.0 - (p0 * p0 + p1 * p1);
}

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    ClassCounts counts;

    bool is_leaf() const noexcept { return feature < 0; }
    /// Majority class of the training rows at this node; ties go to class 0.
    int majority() const noexcept { return counts.c1 > counts.c0 ? 1 : 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Flat tree; node 0 is the root. Rows with x[feature] <= threshold go left.
struct Tree {
    std::vector<TreeNode> nodes;

    std::size_t leaf_index(std::span<const double> x) const {
        std::size_t k = 0;
        while (!nodes[k].is_leaf()) {
            const TreeNode& nd = nodes[k];
            k = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
        }
        return k;
    }
    int predict(std::span<const double> x) const { return nodes[leaf_index(x)].majority(); }

    friend bool operator==(const Tree&, const Tree&) = default;
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double child_impurity = 0.0;  // size-weighted mean of the two children's Gini
    ClassCounts left, right;
};

inline ClassCounts count_classes(std::span<const int> y, std::span<const std::size_t> rows) {
    ClassCounts c;
    for (std::size_t r : rows) (y[r] == 1 ? c.c1 : c.c0)++;
    return c;
}

/// Best Gini split over `features` (searched in ascending index order; the
/// first of equally good splits wins, so lower feature then lower threshold).
/// Empty when no split lowers the impurity or every split would leave a
/// child with fewer than `min_child` rows.
inline std::optional<Split> best_split(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                                       std::vector<std::size_t> features, std::size_t min_child = 1) {
    if (rows.size() < 2) return std::nullopt;
    const ClassCounts parent = count_classes(y, rows);
    const double parent_gini = gini_impurity(parent);
    if (parent_gini == 0.0) return std::nullopt;
    min_child = std::max<std::size_t>(min_child, 1);

    std::sort(features.begin(), features.end());
    const double n = static_cast<double>(rows.size());
    std::optional<Split> best;
    double best_score = parent_gini;

    std::vector<std::pair<double, int>> col(rows.size());
    for (std::size_t f : features) {
        for (std::size_t r = 0; r < rows.size(); ++r) col[r] = {x(rows[r], f), y[rows[r]]};
        std::sort(col.begin(), col.end());
        ClassCounts left;
        for (std::size_t k = 0; k + 1 < col.size(); ++k) {
            (col[k].second == 1 ? left.c1 : left.c0)++;
            if (!(col[k].first < col[k + 1].first)) continue;
            const ClassCounts right{parent.c0 - left.c0, parent.c1 - left.c1};
            if (left.total() < min_child || right.total() < min_child) continue;
            const double score = (static_cast<double>(left.total()) * gini_impurity(left) +
                                  static_cast<double>(right.total()) * gini_impurity(right)) / n;
            if (score < best_score) {
                double mid = 0.5 * (col[k].first + col[k + 1].first);
                if (!(mid < col[k + 1].first)) mid = col[k].first;
                best_score = score;
                best = Split{f, mid, score, left, right};
            }
        }
    }
    return best;
}

struct Bootstrap {
    std::vector<std::size_t> sample;  // n draws with replacement, in draw order
    std::vector<std::size_t> oob;     // ascending
};

inline Bootstrap bootstrap_sample(std::size_t n, RngStream& rng) {
    if (n == 0) throw Error("bootstrap_sample: n must be positive");
    Bootstrap b;
    b.sample.resize(n);
    std::vector<char> drawn(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        b.sample[i] = rng.below(n);
        drawn[b.sample[i]] = 1;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!drawn[i]) b.oob.push_back(i);
    return b;
}

struct GrowParams {
    std::size_t m = 0;      // candidate features per node; 0 means all
    std::size_t n_min = 1;  // nodes smaller than this are not split
};

namespace detail {

inline std::vector<std::size_t> draw_features(std::size_t p, std::size_t m, RngStream& rng) {
    std::vector<std::size_t> all(p);
    for (std::size_t j = 0; j < p; ++j) all[j] = j;
    if (m == 0 || m >= p) return all;
    for (std::size_t i = 0; i < m; ++i) std::swap(all[i], all[i + rng.below(p - i)]);
    all.resize(m);
    return all;
}

inline std::int32_t grow_node(Tree& tree, const Matrix& x, std::span<const int> y, std::vector<std::size_t> rows,
                              const GrowParams& gp, RngStream& rng, std::vector<double>* importance) {
    const auto index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[static_cast<std::size_t>(index)].counts = count_classes(y, rows);
    const ClassCounts counts = tree.nodes[static_cast<std::size_t>(index)].counts;

    if (counts.c0 == 0 || counts.c1 == 0 || rows.size() < std::max<std::size_t>(gp.n_min, 2)) return index;
    const auto split = best_split(x, y, rows, draw_features(x.cols(), gp.m, rng), gp.n_min);
    if (!split) return index;

    if (importance) {
        const double n = static_cast<double>(rows.size());
        (*importance)[split->feature] += n * gini_impurity(counts) - n * split->child_impurity;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (x(r, split->feature) <= split->threshold ? left : right).push_back(r);
    rows = {};
    const std::int32_t l = grow_node(tree, x, y, std::move(left), gp, rng, importance);
    const std::int32_t r = grow_node(tree, x, y, std::move(right), gp, rng, importance);
    TreeNode& nd = tree.nodes[static_cast<std::size_t>(index)];
    nd.feature = static_cast<int>(split->feature);
    nd.threshold = split->threshold;
    nd.left = l;
    nd.right = r;
    return index;
}

}  // namespace detail

/// Grows one CART tree on `rows` (duplicates allowed). When `importance` is
/// given, each split adds its node-size-weighted Gini decrease to its feature.
inline Tree grow_tree(const Matrix& x, std::span<const int> y, std::vector<std::size_t> rows, const GrowParams& gp,
                      RngStream& rng, std::vector<double>* importance = nullptr) {
    if (rows.empty()) throw Error("grow_tree: no rows");
    Tree t;
    detail::grow_node(t, x, y, std::move(rows), gp, rng, importance);
    return t;
}

struct ForestParams {
    std::size_t trees = 500;
    std::size_t m = 0;  // 0 means floor(sqrt(p))
    std::size_t n_min = 1;
    bool bootstrap = true;  // false grows every tree on the full sample
    unsigned threads = 0;   // 0 means hardware concurrency
};

struct Forest {
    std::vector<Tree> trees;
    std::size_t m = 0;
    std::size_t n_min = 1;
    std::size_t features = 0;
    std::vector<std::vector<std::size_t>> oob;  // per tree
    std::vector<double> gini_decrease;          // per feature, averaged over trees
};

inline Forest train_forest(const Matrix& x, std::span<const int> y, const ForestParams& params, std::uint64_t seed) {
    const std::size_t n = x.rows(), p = x.cols();
    if (y.size() != n) throw Error("train_forest: label count differs from row count");
    if (params.trees == 0) throw Error("train_forest: need at least one tree");
    bool has0 = false, has1 = false;
    for (int v : y) (v == 0 ? has0 : has1) = true;
    if (!has0 || !has1) throw Error("train_forest: both classes must be present");

    Forest f;
    f.features = p;
    f.n_min = params.n_min;
    f.m = params.m == 0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))))
                        : std::min(params.m, p);
    f.trees.resize(params.trees);
    f.oob.resize(params.trees);
    std::vector<std::vector<double>> per_tree(params.trees, std::vector<double>(p, 0.0));

    const RngStream master(seed, "forest");
    const GrowParams gp{f.m, f.n_min};
    auto grow_one = [&](std::size_t t) {
        RngStream rng = master.fork("tree", t);
        std::vector<std::size_t> rows;
        if (params.bootstrap) {
            Bootstrap b = bootstrap_sample(n, rng);
            rows = std::move(b.sample);
            f.oob[t] = std::move(b.oob);
        } else {
            rows.resize(n);
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        }
        f.trees[t] = grow_tree(x, y, std::move(rows), gp, rng, &per_tree[t]);
    };

    unsigned workers = params.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : params.threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, params.trees));
    if (workers <= 1) {
        for (std::size_t t = 0; t < params.trees; ++t) grow_one(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < params.trees; t = next++) grow_one(t);
            });
    }

    f.gini_decrease.assign(p, 0.0);
    for (const auto& imp : per_tree)
        for (std::size_t j = 0; j < p; ++j) f.gini_decrease[j] += imp[j];
    for (double& v : f.gini_decrease) v /= static_cast<double>(params.trees);
    return f;
}

struct Vote {
    int label = 0;
    double fraction_one = 0.0;  // share of trees voting class 1
};

inline Vote predict_vote(const Forest& f, std::span<const double> x) {
    if (x.size() != f.features) throw Error("predict_vote: dimension mismatch");
    std::size_t ones = 0;
    for (const Tree& t : f.trees) ones += static_cast<std::size_t>(t.predict(x));
    Vote v;
    v.fraction_one = static_cast<double>(ones) / static_cast<double>(f.trees.size());
    v.label = 2 * ones > f.trees.size() ? 1 : 0;
    return v;
}

/// Forest accuracy on out-of-bag rows, each row voted on only by the trees
/// that did not see it. Rows that are in every bootstrap are skipped.
inline double oob_accuracy(const Forest& f, const Matrix& x, std::span<const int> y) {
    std::vector<std::size_t> votes(x.rows(), 0), ones(x.rows(), 0);
    for (std::size_t t = 0; t < f.trees.size(); ++t)
        for (std::size_t r : f.oob[t]) {
            ++votes[r];
            ones[r] += static_cast<std::size_t>(f.trees[t].predict(x.row(r)));
        }
    std::size_t seen = 0, correct = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        if (votes[r] == 0) continue;
        ++seen;
        correct += ((2 * ones[r] > votes[r]) ? 1 : 0) == y[r];
    }
    if (seen == 0) throw Error("oob_accuracy: no out-of-bag rows");
    return static_cast<double>(correct) / static_cast<double>(seen);
}

inline std::vector<double> importance_gini(const Forest& f) { return f.gini_decrease; }

/// Mean over trees of (OOB accuracy - OOB accuracy with one feature's OOB
/// values permuted). Trees with empty OOB sets are skipped.
inline std::vector<double> importance_permutation(const Forest& f, const Matrix& x, std::span<const int> y,
                                                  std::uint64_t seed) {
    const std::size_t p = f.features;
    std::vector<double> total(p, 0.0);
    std::size_t used = 0;
    const RngStream master(seed, "permutation");
    for (std::size_t t = 0; t < f.trees.size(); ++t) {
        const auto& oob = f.oob[t];
        if (oob.empty()) continue;
        ++used;
        const Tree& tree = f.trees[t];
        std::size_t base = 0;
        for (std::size_t r : oob) base += tree.predict(x.row(r)) == y[r];
        RngStream rng = master.fork("tree", t);
        std::vector<double> row(p);
        for (std::size_t j = 0; j < p; ++j) {
            std::vector<std::size_t> perm = oob;
            rng.shuffle(perm);
            std::size_t hit = 0;
            for (std::size_t k = 0; k < oob.size(); ++k) {
                auto src = x.row(oob[k]);
                std::copy(src.begin(), src.end(), row.begin());
                row[j] = x(perm[k], j);
                hit += tree.predict(row) == y[oob[k]];
            }
            total[j] += (static_cast<double>(base) - static_cast<double>(hit)) / static_cast<double>(oob.size());
        }
    }
    if (used == 0) throw Error("importance_permutation: every out-of-bag set is empty");
    for (double& v : total) v /= static_cast<double>(used);
    return total;
}

struct RankedFeature {
    std::string name;
    double value = 0.0;
};

/// Sorts descending by value; equal values keep column order.
inline std::vector<RankedFeature> rank_features(const std::vector<double>& values,
                                                const std::vector<std::string>& names) {
    std::vector<RankedFeature> out;
    for (std::size_t j = 0; j < values.size(); ++j) out.push_back({names.at(j), values[j]});
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
    return out;
}

}  // namespace hcvml
