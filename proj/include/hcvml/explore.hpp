// hcvml: box/whisker statistics and the feature/label correlation report.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hcvml/dataset.hpp"
#include "hcvml/numeric.hpp"

namespace hcvml {

inline constexpr double kWhiskerIqr = 1.5;

struct Outlier {
    std::size_t row = 0;
    double value = 0.0;
};

struct BoxStats {
    std::string column;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    double whisker_low = 0.0, whisker_high = 0.0;  // most extreme values inside the fences
    std::vector<Outlier> outliers;                  // in row order

    double lower_fence() const { return q1 - kWhiskerIqr * (q3 - q1); }
    double upper_fence() const { return q3 + kWhiskerIqr * (q3 - q1); }
};

inline BoxStats box_stats_column(std::string name, std::span<const double> xs) {
    if (xs.empty()) throw Error("box_stats: empty column " + name);
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());

    BoxStats b;
    b.column = std::move(name);
    b.min = sorted.front();
    b.max = sorted.back();
    b.q1 = quantile_sorted(sorted, 0.25);
    b.median = quantile_sorted(sorted, 0.5);
    b.q3 = quantile_sorted(sorted, 0.75);
    const double lo = b.lower_fence();
    const double hi = b.upper_fence();
    b.whisker_low = b.q1;
    b.whisker_high = b.q3;
    for (double v : sorted)
        if (v >= lo) {
            b.whisker_low = v;
            break;
        }
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it)
        if (*it <= hi) {
            b.whisker_high = *it;
            break;
        }
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] < lo || xs[i] > hi) b.outliers.push_back({i, xs[i]});
    return b;
}

inline std::vector<BoxStats> box_stats(const FeatureTable& t) {
    if (t.missing.any()) throw Error("box_stats: table still has missing cells");
    std::vector<BoxStats> out;
    for (std::size_t j = 0; j < t.cols(); ++j) out.push_back(box_stats_column(t.columns[j], t.values.column(j)));
    return out;
}

struct CorrReport {
    std::vector<std::string> names;  // features followed by "label"
    Matrix corr;
};

inline CorrReport corr_report(const FeatureTable& t) {
    if (t.missing.any()) throw Error("corr_report: table still has missing cells");
    const std::size_t p = t.cols();
    Matrix x(t.rows(), p + 1);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < p; ++j) x(i, j) = t.values(i, j);
        x(i, p) = static_cast<double>(t.labels[i]);
    }
    CorrReport r;
    r.names = t.columns;
    r.names.push_back("label");
    r.corr = pearson_corr_matrix(x, r.names);
    return r;
}

}  // namespace hcvml
