// hcvml: confusion matrices, metrics, ROC/AUC, Gini coefficient, 0-1 loss
// and fold assignment.
//
// The positive class is label 0 (blood donor). Confusion cells follow the
// layout rows = predicted, columns = actual:
//
//                 actual 0   actual 1
//   predicted 0      tp         fn
//   predicted 1      fp         tn
//
// The cell names follow that layout, so "fn" counts diseased rows predicted
// as donors and "fp" counts donors predicted as diseased. Rates are taken
// over actual classes (columns): sensitivity = tp / (tp + fp) is the share
// of donors recovered and specificity = tn / (tn + fn) the share of disease
// rows recovered. Precision = tp / (tp + fn) is the share of predicted
// donors that are donors.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hcvml/numeric.hpp"

namespace hcvml {

struct ConfusionMatrix {
    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;

    std::size_t total() const noexcept { return tp + fn + fp + tn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
        tp += o.tp;
        fn += o.fn;
        fp += o.fp;
        tn += o.tn;
        return *this;
    }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size()) throw Error("confusion: length mismatch");
    if (predicted.empty()) throw Error("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == 0)
            (actual[i] == 0 ? cm.tp : cm.fn)++;
        else
            (actual[i] == 0 ? cm.fp : cm.tn)++;
    }
    return cm;
}

/// Ratios with a zero denominator are left empty rather than reported as 0.
struct MetricSet {
    double accuracy = 0.0;
    std::optional<double> precision, sensitivity, specificity, f1;
};

inline MetricSet metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error("metrics: empty confusion matrix");
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    MetricSet m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    m.precision = ratio(cm.tp, cm.tp + cm.fn);
    m.sensitivity = ratio(cm.tp, cm.tp + cm.fp);
    m.specificity = ratio(cm.tn, cm.tn + cm.fn);
    if (m.precision && m.sensitivity && (*m.precision + *m.sensitivity) > 0.0)
        m.f1 = 2.0 * *m.precision * *m.sensitivity / (*m.precision + *m.sensitivity);
    return m;
}

struct RocPoint {
    double threshold = 0.0;  // rows scoring >= threshold are called class 0
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

/// `scores` grow with confidence in class 0. One point per distinct score,
/// preceded by (0, 0); the last point is (1, 1).
inline RocCurve roc_curve(std::span<const double> scores, std::span<const int> actual) {
    if (scores.size() != actual.size()) throw Error("roc_curve: length mismatch");
    std::size_t pos = 0, neg = 0;
    for (int a : actual) (a == 0 ? pos : neg)++;
    if (pos == 0 || neg == 0) throw Error("roc_curve: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < order.size();) {
        const double thr = scores[order[k]];
        while (k < order.size() && scores[order[k]] == thr) {
            (actual[order[k]] == 0 ? tp : fp)++;
            ++k;
        }
        roc.points.push_back({thr, static_cast<double>(fp) / static_cast<double>(neg),
                              static_cast<double>(tp) / static_cast<double>(pos)});
    }
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
        const RocPoint& a = roc.points[k - 1];
        const RocPoint& b = roc.points[k];
        roc.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return roc;
}

/// 2 * AUC - 1.
inline double gini_coefficient(double auc) {
    if (!(auc >= 0.0 && auc <= 1.0)) throw Error("gini_coefficient: AUC outside [0, 1]");
    return 2.0 * auc - 1.0;
}

/// Misclassification rate: mean of [predicted != actual].
inline double zero_one_error(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size()) throw Error("zero_one_error: length mismatch");
    if (predicted.empty()) throw Error("zero_one_error: empty input");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != actual[i];
    return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

using Folds = std::vector<std::vector<std::size_t>>;

/// Partitions 0..n-1 into v folds whose sizes differ by at most one. With
/// labels, each class is shuffled separately and the classes are dealt
/// round-robin one after the other, so every fold's per-class count is
/// within one of the others'.
inline Folds kfold_split(std::size_t n, std::size_t v, std::span<const int> stratify_labels, std::uint64_t seed) {
    if (v < 2) throw Error("kfold_split: need at least two folds");
    if (v > n) throw Error("kfold_split: more folds than rows");
    if (!stratify_labels.empty() && stratify_labels.size() != n) throw Error("kfold_split: label count differs from n");

    RngStream rng(seed, "folds");
    std::vector<std::size_t> deal;
    if (stratify_labels.empty()) {
        deal.resize(n);
        for (std::size_t i = 0; i < n; ++i) deal[i] = i;
        rng.shuffle(deal);
    } else {
        for (int cls : {0, 1}) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if ((stratify_labels[i] == 1 ? 1 : 0) == cls) members.push_back(i);
            rng.shuffle(members);
            deal.insert(deal.end(), members.begin(), members.end());
        }
    }
    Folds folds(v);
    for (std::size_t k = 0; k < deal.size(); ++k) folds[k % v].push_back(deal[k]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

inline Folds kfold_split(std::size_t n, std::size_t v, std::uint64_t seed) { return kfold_split(n, v, {}, seed); }

struct TrainTest {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded hold-out split with `train_size` training rows. Stratified splits
/// give each class a training share proportional to its frequency.
inline TrainTest fixed_split(std::span<const int> labels, std::size_t train_size, bool stratify, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (train_size == 0 || train_size >= n) throw Error("fixed_split: train size must be in [1, n)");
    RngStream rng(seed, "fixed-split");
    TrainTest tt;
    if (!stratify) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        rng.shuffle(all);
        tt.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(train_size));
        tt.test.assign(all.begin() + static_cast<std::ptrdiff_t>(train_size), all.end());
    } else {
        std::vector<std::size_t> c0, c1;
        for (std::size_t i = 0; i < n; ++i) (labels[i] == 1 ? c1 : c0).push_back(i);
        rng.shuffle(c0);
        rng.shuffle(c1);
        auto take0 = static_cast<std::size_t>(std::llround(static_cast<double>(train_size) *
                                                            static_cast<double>(c0.size()) / static_cast<double>(n)));
        take0 = std::min(take0, c0.size());
        std::size_t take1 = train_size - take0;
        if (take1 > c1.size()) {
            take1 = c1.size();
            take0 = train_size - take1;
        }
        tt.train.assign(c0.begin(), c0.begin() + static_cast<std::ptrdiff_t>(take0));
        tt.train.insert(tt.train.end(), c1.begin(), c1.begin() + static_cast<std::ptrdiff_t>(take1));
        tt.test.assign(c0.begin() + static_cast<std::ptrdiff_t>(take0), c0.end());
        tt.test.insert(tt.test.end(), c1.begin() + static_cast<std::ptrdiff_t>(take1), c1.end());
    }
    std::sort(tt.train.begin(), tt.train.end());
    std::sort(tt.test.begin(), tt.test.end());
    return tt;
}

}  // namespace hcvml
