// hcvml: one train/score/predict contract over the three classifiers, plus
// cross-validation built on it.
//
// Scores grow with confidence in class 0 (blood donor): the SVM decision
// value, 1 - p(disease) for the network, and the class-0 vote share for the
// forest.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "hcvml/eval.hpp"
#include "hcvml/forest.hpp"
#include "hcvml/mlp.hpp"
#include "hcvml/numeric.hpp"
#include "hcvml/svm.hpp"

namespace hcvml {

/// Column means and (divisor-n) standard deviations estimated from training
/// rows. Constant columns keep scale 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer identity(std::size_t p) { return {std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)}; }

    static Standardizer fit(const Matrix& x, std::span<const std::size_t> rows) {
        if (rows.empty()) throw Error("Standardizer::fit: no rows");
        const std::size_t p = x.cols();
        Standardizer s{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
        for (std::size_t r : rows)
            for (std::size_t j = 0; j < p; ++j) s.mean[j] += x(r, j);
        for (double& m : s.mean) m /= static_cast<double>(rows.size());
        for (std::size_t r : rows)
            for (std::size_t j = 0; j < p; ++j) s.scale[j] += (x(r, j) - s.mean[j]) * (x(r, j) - s.mean[j]);
        for (double& v : s.scale) {
            v = std::sqrt(v / static_cast<double>(rows.size()));
            if (!(v > 0.0)) v = 1.0;
        }
        return s;
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> z(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / scale[j];
        return z;
    }

    Matrix apply(const Matrix& x, std::span<const std::size_t> rows) const {
        Matrix out(rows.size(), x.cols());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t j = 0; j < x.cols(); ++j) out(r, j) = (x(rows[r], j) - mean[j]) / scale[j];
        return out;
    }

    friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

struct SvmSpec {
    SvmParams params;
};
struct AnnSpec {
    MlpParams params;
};
struct RfSpec {
    ForestParams params;
};
/// Always predicts the training majority class; a reference baseline.
struct MajoritySpec {};

using ModelSpec = std::variant<SvmSpec, AnnSpec, RfSpec, MajoritySpec>;

inline std::string model_name(const ModelSpec& s) {
    struct {
        std::string operator()(const SvmSpec&) const { return "svm"; }
        std::string operator()(const AnnSpec&) const { return "ann"; }
        std::string operator()(const RfSpec&) const { return "rf"; }
        std::string operator()(const MajoritySpec&) const { return "majority"; }
    } v;
    return std::visit(v, s);
}

struct MajorityModel {
    int label = 0;
};

struct FittedModel {
    Standardizer scaler;
    std::variant<SvmModel, MlpModel, Forest, MajorityModel> model;
    std::vector<double> loss_curve;  // network only
};

/// Fits the scaler on `rows` of `x`, then the model on the scaled rows.
inline FittedModel fit_model(const ModelSpec& spec, const Matrix& x, std::span<const int> labels,
                             std::span<const std::size_t> rows, std::uint64_t seed) {
    FittedModel fm;
    fm.scaler = Standardizer::fit(x, rows);
    const Matrix z = fm.scaler.apply(x, rows);
    std::vector<int> y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) y[r] = labels[rows[r]];

    struct {
        const Matrix& z;
        const std::vector<int>& y;
        std::uint64_t seed;
        FittedModel& fm;
        void operator()(const SvmSpec& s) const { fm.model = train_svm(z, to_pm_labels(y), s.params); }
        void operator()(const AnnSpec& s) const {
            MlpTraining t = train_mlp_traced(z, y, s.params, seed);
            fm.model = std::move(t.model);
            fm.loss_curve = std::move(t.loss_curve);
        }
        void operator()(const RfSpec& s) const { fm.model = train_forest(z, y, s.params, seed); }
        void operator()(const MajoritySpec&) const {
            std::size_t ones = 0;
            for (int v : y) ones += static_cast<std::size_t>(v);
            fm.model = MajorityModel{2 * ones > y.size() ? 1 : 0};
        }
    } visitor{z, y, seed, fm};
    std::visit(visitor, spec);
    return fm;
}

inline FittedModel fit_model(const ModelSpec& spec, const Matrix& x, std::span<const int> labels, std::uint64_t seed) {
    std::vector<std::size_t> rows(x.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return fit_model(spec, x, labels, rows, seed);
}

struct Prediction {
    int label = 0;
    double score = 0.0;  // larger means more class 0
};

inline Prediction predict(const FittedModel& fm, std::span<const double> x) {
    const auto z = fm.scaler.apply(x);
    struct {
        const std::vector<double>& z;
        Prediction operator()(const SvmModel& m) const {
            const double d = decision_value(m, z);
            return {from_pm_label(sign_of(d)), d};
        }
        Prediction operator()(const MlpModel& m) const {
            const MlpForward f = forward(m, z);
            return {f.logit > 0.0 ? 1 : 0, 1.0 - f.prob};
        }
        Prediction operator()(const Forest& f) const {
            const Vote v = predict_vote(f, z);
            return {v.label, 1.0 - v.fraction_one};
        }
        Prediction operator()(const MajorityModel& m) const { return {m.label, m.label == 0 ? 1.0 : 0.0}; }
    } visitor{z};
    return std::visit(visitor, fm.model);
}

// ---------------------------------------------------------------------------
// Cross-validation

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation over folds with a defined value
    std::size_t defined = 0;
};

struct CvResult {
    std::string model;
    Folds folds;
    std::vector<MetricSet> per_fold;
    ConfusionMatrix pooled;
    std::vector<int> predicted;   // per row, from the fold that held it out
    std::vector<double> scores;   // per row
    std::vector<std::size_t> evaluated;  // rows that received a prediction, ascending
    MetricSummary accuracy, precision, sensitivity, specificity, f1;
};

/// Seed used to fit the model of fold `k`.
inline std::uint64_t fold_seed(std::uint64_t seed, std::size_t k) {
    return RngStream(seed, "cv-model").fork("fold", k).next_u64();
}

inline std::vector<std::size_t> complement(std::size_t n, std::span<const std::size_t> held_out) {
    std::vector<char> out(n, 0);
    for (std::size_t r : held_out) out[r] = 1;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i)
        if (!out[i]) rest.push_back(i);
    return rest;
}

/// One fitted model per fold, each trained on every row outside that fold.
/// Folds are fitted concurrently into fixed slots, so the result does not
/// depend on scheduling.
inline std::vector<FittedModel> train_folds(const ModelSpec& spec, const Matrix& x, std::span<const int> labels,
                                            const Folds& folds, std::uint64_t seed, unsigned threads = 0) {
    std::vector<FittedModel> models(folds.size());
    std::vector<std::exception_ptr> errors(folds.size());
    auto fit_one = [&](std::size_t k) {
        try {
            models[k] = fit_model(spec, x, labels, complement(x.rows(), folds[k]), fold_seed(seed, k));
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, folds.size()));
    if (workers <= 1) {
        for (std::size_t k = 0; k < folds.size(); ++k) fit_one(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < folds.size(); k = next++) fit_one(k);
            });
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return models;
}

namespace detail {

inline MetricSummary summarize(const std::vector<std::optional<double>>& vals) {
    MetricSummary s;
    double sum = 0.0;
    for (const auto& v : vals)
        if (v) {
            sum += *v;
            ++s.defined;
        }
    if (s.defined == 0) return s;
    s.mean = sum / static_cast<double>(s.defined);
    double ss = 0.0;
    for (const auto& v : vals)
        if (v) ss += (*v - s.mean) * (*v - s.mean);
    s.sd = s.defined > 1 ? std::sqrt(ss / static_cast<double>(s.defined - 1)) : 0.0;
    return s;
}

}  // namespace detail

/// Scores every fold's held-out rows with that fold's model and pools them.
inline CvResult evaluate_folds(const std::string& name, const std::vector<FittedModel>& models, const Matrix& x,
                               std::span<const int> labels, const Folds& folds) {
    if (models.size() != folds.size()) throw Error("evaluate_folds: one model per fold required");
    CvResult res;
    res.model = name;
    res.folds = folds;
    res.predicted.assign(x.rows(), -1);
    res.scores.assign(x.rows(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < folds.size(); ++k) {
        std::vector<int> pred, act;
        for (std::size_t r : folds[k]) {
            const Prediction p = predict(models[k], x.row(r));
            res.predicted[r] = p.label;
            res.scores[r] = p.score;
            pred.push_back(p.label);
            act.push_back(labels[r]);
        }
        const ConfusionMatrix cm = confusion(pred, act);
        res.pooled += cm;
        res.per_fold.push_back(metrics(cm));
    }
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (res.predicted[i] >= 0) res.evaluated.push_back(i);

    std::vector<std::optional<double>> acc, pre, sen, spe, f1;
    for (const MetricSet& m : res.per_fold) {
        acc.emplace_back(m.accuracy);
        pre.push_back(m.precision);
        sen.push_back(m.sensitivity);
        spe.push_back(m.specificity);
        f1.push_back(m.f1);
    }
    res.accuracy = detail::summarize(acc);
    res.precision = detail::summarize(pre);
    res.sensitivity = detail::summarize(sen);
    res.specificity = detail::summarize(spe);
    res.f1 = detail::summarize(f1);
    return res;
}

inline CvResult cross_validate(const ModelSpec& spec, const Matrix& x, std::span<const int> labels, std::size_t v,
                               std::uint64_t seed, bool stratify = true) {
    const Folds folds = kfold_split(x.rows(), v, stratify ? labels : std::span<const int>{}, seed);
    return evaluate_folds(model_name(spec), train_folds(spec, x, labels, folds, seed), x, labels, folds);
}

}  // namespace hcvml
