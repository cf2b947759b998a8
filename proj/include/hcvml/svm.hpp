// hcvml: soft-margin support vector classifier trained by SMO on the dual.
//
// Labels are +1 (blood donor) / -1 (disease). Working pairs are chosen by
// maximal KKT violation; the two-variable subproblem is solved analytically
// and clipped to the box [0, C].

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hcvml/numeric.hpp"

namespace hcvml {

enum class KernelType { Linear, Rbf };

struct Kernel {
    KernelType type = KernelType::Linear;
    double gamma = 0.0;  // rbf only; <= 0 means 1 / q at training time

    double operator()(std::span<const double> a, std::span<const double> b) const {
        if (type == KernelType::Linear) return dot(a, b);
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
        return std::exp(-gamma * d2);
    }
};

struct SvmParams {
    double C = 1.0;
    Kernel kernel{};
    double tolerance = 1e-3;
    // Cap on pair updates, in units of n updates.
    std::size_t max_passes_per_row = 10;
};

struct SvmModel {
    Kernel kernel{};
    double C = 1.0;
    std::vector<double> w;  // linear kernel only
    double bias = 0.0;
    std::vector<double> alpha;            // one per training row
    std::vector<std::size_t> support;     // rows with alpha > 0
    Matrix support_vectors;               // rows of X at `support`
    std::vector<double> support_coef;     // alpha_i * y_i at `support`
    std::size_t iterations = 0;
    bool converged = false;

    std::size_t dim() const noexcept { return support_vectors.cols(); }
};

/// 0 (blood donor) -> +1, 1 (disease) -> -1.
constexpr int to_pm_label(int label) noexcept { return label == 0 ? 1 : -1; }
constexpr int from_pm_label(int pm) noexcept { return pm > 0 ? 0 : 1; }

inline std::vector<int> to_pm_labels(std::span<const int> labels) {
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = to_pm_label(labels[i]);
    return out;
}

inline SvmModel train_svm(const Matrix& x, std::span<const int> y, const SvmParams& params = {}) {
    const std::size_t n = x.rows();
    if (y.size() != n) throw Error("train_svm: label count differs from row count");
    if (!(params.C > 0.0)) throw Error("train_svm: C must be positive");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw Error("train_svm: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw Error("train_svm: both classes must be present");
    for (double v : x.data())
        if (!std::isfinite(v)) throw Error("train_svm: non-finite feature value");

    SvmModel m;
    m.C = params.C;
    m.kernel = params.kernel;
    if (m.kernel.type == KernelType::Rbf && !(m.kernel.gamma > 0.0))
        m.kernel.gamma = 1.0 / static_cast<double>(std::max<std::size_t>(x.cols(), 1));

    // Q_ij = y_i y_j K(x_i, x_j)
    Matrix q(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = y[i] * y[j] * m.kernel(x.row(i), x.row(j));
            q(i, j) = v;
            q(j, i) = v;
        }

    const double c = params.C;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    constexpr double tau = 1e-12;

    auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
    auto in_low = [&](std::size_t t) { return (y[t] == -1 && alpha[t] < c) || (y[t] == 1 && alpha[t] > 0.0); };

    const std::size_t max_iter = params.max_passes_per_row * n * n;
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        std::size_t i = n, j = n;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n || gmax - gmin < params.tolerance) {
            m.converged = true;
            break;
        }

        const double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;
    }
    m.iterations = iter;

    // rho: mean of y_t * grad_t over free vectors, else the midpoint of the bounds.
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    m.bias = -rho;

    m.alpha = alpha;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > 0.0) m.support.push_back(t);
    m.support_vectors = x.select_rows(m.support);
    for (std::size_t t : m.support) m.support_coef.push_back(alpha[t] * y[t]);
    if (m.kernel.type == KernelType::Linear) {
        m.w.assign(x.cols(), 0.0);
        for (std::size_t s = 0; s < m.support.size(); ++s)
            for (std::size_t k = 0; k < x.cols(); ++k) m.w[k] += m.support_coef[s] * m.support_vectors(s, k);
    }
    return m;
}

inline double decision_value(const SvmModel& m, std::span<const double> x) {
    if (m.kernel.type == KernelType::Linear) {
        if (x.size() != m.w.size()) throw Error("decision_value: dimension mismatch");
        return dot(m.w, x) + m.bias;
    }
    if (x.size() != m.dim()) throw Error("decision_value: dimension mismatch");
    double f = m.bias;
    for (std::size_t s = 0; s < m.support_coef.size(); ++s)
        f += m.support_coef[s] * m.kernel(m.support_vectors.row(s), x);
    return f;
}

/// sign of the decision value; an exact zero counts as +1.
constexpr int sign_of(double decision) noexcept { return decision >= 0.0 ? 1 : -1; }

inline int predict_sign(const SvmModel& m, std::span<const double> x) { return sign_of(decision_value(m, x)); }

}  // namespace hcvml
