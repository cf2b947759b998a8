// hcvml: principal component analysis.

#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "hcvml/numeric.hpp"

namespace hcvml {

struct PcaModel {
    std::vector<double> mean;
    std::vector<double> scale;        // column standard deviations, or ones
    std::vector<double> eigenvalues;  // descending
    Matrix components;                // p x p, column k is component k
    std::vector<double> ratios;       // explained-variance ratios

    std::size_t dim() const noexcept { return mean.size(); }

    std::vector<double> cumulative() const {
        std::vector<double> c(ratios.size());
        double s = 0.0;
        for (std::size_t k = 0; k < ratios.size(); ++k) c[k] = (s += ratios[k]);
        return c;
    }
};

/// Centers (and with `standardize`, scales to unit variance) the columns,
/// forms the divisor-n covariance and diagonalizes it.
inline PcaModel fit_pca(const Matrix& x, bool standardize = true) {
    if (x.rows() < 2) throw Error("fit_pca: need at least two rows");
    const std::size_t n = x.rows(), p = x.cols();

    PcaModel m;
    m.mean = mean_vector(x);
    m.scale.assign(p, 1.0);
    Matrix z(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) z(i, j) = x(i, j) - m.mean[j];
    if (standardize) {
        for (std::size_t j = 0; j < p; ++j) {
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) ss += z(i, j) * z(i, j);
            const double sd = std::sqrt(ss / static_cast<double>(n));
            if (!(sd > 0.0)) throw Error("fit_pca: zero variance in column " + std::to_string(j));
            m.scale[j] = sd;
            for (std::size_t i = 0; i < n; ++i) z(i, j) /= sd;
        }
    }

    EigenDecomp eig = eigen_sym(covariance_matrix(z, /*centered=*/true));
    m.eigenvalues = eig.values;
    m.components = std::move(eig.vectors);

    double total = 0.0;
    for (double l : m.eigenvalues) total += std::max(l, 0.0);
    m.ratios.resize(p);
    for (std::size_t k = 0; k < p; ++k)
        m.ratios[k] = total > 0.0 ? std::max(m.eigenvalues[k], 0.0) / total : 0.0;
    return m;
}

/// Coordinates of `x` on the first `d` components.
inline std::vector<double> project(const PcaModel& m, std::span<const double> x, std::size_t d) {
    if (x.size() != m.dim()) throw Error("project: dimension mismatch");
    if (d < 1 || d > m.dim()) throw Error("project: d out of range");
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - m.mean[j]) / m.scale[j];
    std::vector<double> out(d, 0.0);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t j = 0; j < z.size(); ++j) out[k] += m.components(j, k) * z[j];
    return out;
}

inline Matrix project_rows(const PcaModel& m, const Matrix& x, std::size_t d) {
    Matrix out(x.rows(), d);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto z = project(m, x.row(i), d);
        std::copy(z.begin(), z.end(), out.row(i).begin());
    }
    return out;
}

/// Smallest d whose cumulative ratio reaches `threshold`.
inline std::size_t select_dimension(const PcaModel& m, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw Error("select_dimension: threshold outside (0, 1]");
    const auto cum = m.cumulative();
    // Rounding can leave the full sum a hair under 1.
    constexpr double slack = 1e-12;
    for (std::size_t k = 0; k < cum.size(); ++k)
        if (cum[k] >= threshold - slack) return k + 1;
    return cum.size();
}

/// Index of the largest-|loading| feature on each of the first `d` components.
inline std::vector<std::size_t> top_loading_features(const PcaModel& m, std::size_t d) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < d && k < m.dim(); ++k) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < m.dim(); ++j)
            if (std::abs(m.components(j, k)) > std::abs(m.components(best, k))) best = j;
        out.push_back(best);
    }
    return out;
}

struct Shortlist {
    std::vector<std::string> features;  // in importance-rank order
    std::vector<std::string> pca_side;  // union of top loaders on the retained components
    std::vector<std::string> rf_side;   // importance top-k
    bool fell_back = false;             // intersection was empty, rf_side used
};

/// Intersection of the PCA top loaders on the first `d` components with the
/// top `k` of an importance ranking. An empty intersection falls back to the
/// importance top-k.
inline Shortlist feature_shortlist(const PcaModel& m, std::size_t d, const std::vector<std::string>& names,
                                   const std::vector<std::string>& ranked_importance, std::size_t k = 4) {
    if (names.size() != m.dim()) throw Error("feature_shortlist: names do not match the PCA model");
    Shortlist s;
    std::set<std::string> pca_set;
    for (std::size_t j : top_loading_features(m, d))
        if (pca_set.insert(names[j]).second) s.pca_side.push_back(names[j]);
    for (std::size_t r = 0; r < ranked_importance.size() && r < k; ++r) s.rf_side.push_back(ranked_importance[r]);
    for (const auto& f : s.rf_side)
        if (pca_set.count(f)) s.features.push_back(f);
    if (s.features.empty()) {
        s.features = s.rf_side;
        s.fell_back = true;
    }
    return s;
}

}  // namespace hcvml
