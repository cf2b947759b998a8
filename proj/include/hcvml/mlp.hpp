// hcvml: one-hidden-layer network (tanh hidden units, sigmoid output)
// trained by full-batch gradient descent on mean binary cross-entropy.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcvml/numeric.hpp"

namespace hcvml {

inline double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct MlpModel {
    Matrix w1;               // hidden x inputs
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;

    MlpModel() = default;
    MlpModel(std::size_t inputs, std::size_t hidden) : w1(hidden, inputs), b1(hidden, 0.0), w2(hidden, 0.0) {}

    std::size_t inputs() const noexcept { return w1.cols(); }
    std::size_t hidden() const noexcept { return w1.rows(); }

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

struct MlpForward {
    std::vector<double> hidden;  // tanh activations
    double logit = 0.0;          // output pre-activation
    double prob = 0.5;           // sigmoid(logit)
};

inline MlpForward forward(const MlpModel& m, std::span<const double> x) {
    if (x.size() != m.inputs()) throw Error("mlp forward: dimension mismatch");
    MlpForward out;
    out.hidden.resize(m.hidden());
    out.logit = m.b2;
    for (std::size_t k = 0; k < m.hidden(); ++k) {
        const double a = std::tanh(dot(m.w1.row(k), x) + m.b1[k]);
        out.hidden[k] = a;
        out.logit += m.w2[k] * a;
    }
    out.prob = sigmoid(out.logit);
    return out;
}

struct LossAndGrad {
    double loss = 0.0;
    MlpModel grad;  // same shape as the model
};

inline constexpr double kProbClamp = 1e-12;

inline LossAndGrad loss_and_gradients(const MlpModel& m, const Matrix& x, std::span<const int> y) {
    if (x.rows() == 0) throw Error("loss_and_gradients: empty batch");
    if (y.size() != x.rows()) throw Error("loss_and_gradients: label count differs from row count");
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    LossAndGrad out;
    out.grad = MlpModel(m.inputs(), m.hidden());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        const MlpForward f = forward(m, row);
        const double p = std::clamp(f.prob, kProbClamp, 1.0 - kProbClamp);
        out.loss -= (y[i] == 1 ? std::log(p) : std::log(1.0 - p)) * inv_n;

        const double d_out = (f.prob - static_cast<double>(y[i])) * inv_n;
        out.grad.b2 += d_out;
        for (std::size_t k = 0; k < m.hidden(); ++k) {
            out.grad.w2[k] += d_out * f.hidden[k];
            const double d_hidden = d_out * m.w2[k] * (1.0 - f.hidden[k] * f.hidden[k]);
            out.grad.b1[k] += d_hidden;
            auto g_row = out.grad.w1.row(k);
            for (std::size_t j = 0; j < row.size(); ++j) g_row[j] += d_hidden * row[j];
        }
    }
    return out;
}

struct MlpParams {
    std::size_t hidden = 8;
    int epochs = 2000;
    double learning_rate = 0.05;
    double init_range = 0.5;  // weights start uniform in (-init_range, init_range)
};

struct MlpTraining {
    MlpModel model;
    std::vector<double> loss_curve;  // loss before each update, then the final loss
};

inline MlpModel init_mlp(std::size_t inputs, std::size_t hidden, double range, RngStream rng) {
    MlpModel m(inputs, hidden);
    for (std::size_t k = 0; k < hidden; ++k) {
        for (double& w : m.w1.row(k)) w = rng.uniform(-range, range);
        m.b1[k] = rng.uniform(-range, range);
        m.w2[k] = rng.uniform(-range, range);
    }
    m.b2 = rng.uniform(-range, range);
    return m;
}

inline MlpTraining train_mlp_traced(const Matrix& x, std::span<const int> y, const MlpParams& p,
                                    std::uint64_t seed) {
    bool has0 = false, has1 = false;
    for (int v : y) (v == 0 ? has0 : has1) = true;
    if (!has0 || !has1) throw Error("train_mlp: both classes must be present");
    if (p.hidden == 0) throw Error("train_mlp: hidden width must be positive");

    MlpTraining t;
    t.model = init_mlp(x.cols(), p.hidden, p.init_range, RngStream(seed, "mlp-init"));
    MlpModel& m = t.model;
    for (int epoch = 0; epoch <= p.epochs; ++epoch) {
        const LossAndGrad lg = loss_and_gradients(m, x, y);
        if (!std::isfinite(lg.loss)) throw Error("train_mlp: non-finite loss at epoch " + std::to_string(epoch));
        t.loss_curve.push_back(lg.loss);
        if (epoch == p.epochs) break;
        const double lr = p.learning_rate;
        for (std::size_t k = 0; k < m.hidden(); ++k) {
            auto w = m.w1.row(k);
            auto g = lg.grad.w1.row(k);
            for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
            m.b1[k] -= lr * lg.grad.b1[k];
            m.w2[k] -= lr * lg.grad.w2[k];
        }
        m.b2 -= lr * lg.grad.b2;
    }
    return t;
}

inline MlpModel train_mlp(const Matrix& x, std::span<const int> y, const MlpParams& p, std::uint64_t seed) {
    return train_mlp_traced(x, y, p, seed).model;
}

constexpr int class_from_probability(double prob) noexcept { return prob > 0.5 ? 1 : 0; }

/// 1 when the output probability exceeds one half. Decided on the logit so
/// that logits too small to move the sigmoid off 0.5 still count.
inline int predict_class(const MlpModel& m, std::span<const double> x) { return forward(m, x).logit > 0.0 ? 1 : 0; }

}  // namespace hcvml
