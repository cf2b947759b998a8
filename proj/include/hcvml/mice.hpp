// hcvml: chained-equation imputation with predictive mean matching.
//
// Single chain: mean fill, then a fixed number of cycles in which every
// incomplete column is regressed on all others and its missing cells are
// replaced by an observed value drawn from the k donors with the closest
// predictions. The class label never enters the imputation models.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "hcvml/dataset.hpp"
#include "hcvml/numeric.hpp"

namespace hcvml {

enum class VisitOrder { AscendingMissing, ColumnOrder };

struct MiceConfig {
    int cycles = 10;
    int donors = 5;
    std::uint64_t seed = 0;
    VisitOrder order = VisitOrder::AscendingMissing;
};

/// Value history of one imputed cell; `values[c]` is the value after cycle c+1.
struct TraceCell {
    std::size_t row = 0;
    std::size_t col = 0;
    std::vector<double> values;
};

struct MiceResult {
    Matrix completed;
    std::vector<TraceCell> trace;
    std::size_t ridge_fallbacks = 0;
};

/// Fills every missing cell with its column's observed mean.
inline Matrix init_means(const Matrix& values, const Mask& missing) {
    Matrix out = values;
    for (std::size_t j = 0; j < values.cols(); ++j) {
        double sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t i = 0; i < values.rows(); ++i)
            if (!missing(i, j)) {
                sum += values(i, j);
                ++seen;
            }
        if (seen == 0) throw Error("init_means: column " + std::to_string(j) + " has no observed values");
        if (seen == values.rows()) continue;
        const double mean = sum / static_cast<double>(seen);
        for (std::size_t i = 0; i < values.rows(); ++i)
            if (missing(i, j)) out(i, j) = mean;
    }
    return out;
}

inline Matrix init_means(const FeatureTable& t) { return init_means(t.values, t.missing); }

/// Draws uniformly among the min(k, m) donors whose predictions are closest
/// to `predicted` (distance ties go to the lower index) and returns that
/// donor's observed value.
inline double pmm_match(double predicted, std::span<const double> donor_preds,
                        std::span<const double> donor_obs, int k, RngStream& rng) {
    if (donor_preds.empty() || donor_preds.size() != donor_obs.size())
        throw Error("pmm_match: empty or mismatched donor pool");
    if (k < 1) throw Error("pmm_match: k must be at least 1");
    const std::size_t m = donor_preds.size();
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), m);

    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto closer = [&](std::size_t a, std::size_t b) {
        const double da = std::abs(donor_preds[a] - predicted);
        const double db = std::abs(donor_preds[b] - predicted);
        return da < db || (da == db && a < b);
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(), closer);
    return donor_obs[idx[rng.below(take)]];
}

namespace detail {

inline std::vector<std::size_t> visit_order(const Mask& mask, VisitOrder order) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < mask.cols(); ++j)
        if (mask.count_column(j) > 0) cols.push_back(j);
    if (order == VisitOrder::AscendingMissing)
        std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) {
            return mask.count_column(a) < mask.count_column(b);
        });
    return cols;
}

}  // namespace detail

/// One pass over every incomplete column. Updates are visible to the columns
/// visited later in the same pass. Returns the number of ridge fallbacks.
inline std::size_t impute_cycle_inplace(Matrix& completed, const Mask& mask, const MiceConfig& cfg,
                                        const RngStream& rng) {
    std::size_t fallbacks = 0;
    const std::size_t p = completed.cols();
    for (std::size_t j : detail::visit_order(mask, cfg.order)) {
        std::vector<std::size_t> obs, mis;
        for (std::size_t i = 0; i < completed.rows(); ++i) (mask(i, j) ? mis : obs).push_back(i);
        if (obs.empty()) throw Error("impute_cycle: column " + std::to_string(j) + " has no observed values");

        std::vector<std::size_t> others;
        for (std::size_t c = 0; c < p; ++c)
            if (c != j) others.push_back(c);

        const Matrix x_obs = completed.select_rows(obs).select_cols(others);
        std::vector<double> y_obs(obs.size());
        for (std::size_t r = 0; r < obs.size(); ++r) y_obs[r] = completed(obs[r], j);

        const OlsFit fit = ols_fit(x_obs, y_obs);
        fallbacks += fit.ridge_fallback ? 1 : 0;

        std::vector<double> donor_preds(obs.size());
        for (std::size_t r = 0; r < obs.size(); ++r) donor_preds[r] = fit.predict(x_obs.row(r));

        RngStream col_rng = rng.fork("column", j);
        std::vector<double> row_x(others.size());
        for (std::size_t i : mis) {
            for (std::size_t c = 0; c < others.size(); ++c) row_x[c] = completed(i, others[c]);
            completed(i, j) = pmm_match(fit.predict(row_x), donor_preds, y_obs, cfg.donors, col_rng);
        }
    }
    return fallbacks;
}

inline Matrix impute_cycle(Matrix completed, const Mask& mask, const MiceConfig& cfg, const RngStream& rng) {
    impute_cycle_inplace(completed, mask, cfg, rng);
    return completed;
}

inline MiceResult run_mice(const Matrix& values, const Mask& missing, const MiceConfig& cfg) {
    if (cfg.cycles < 1) throw Error("run_mice: cycles must be at least 1");
    if (cfg.donors < 1) throw Error("run_mice: donors must be at least 1");
    if (values.rows() != missing.rows() || values.cols() != missing.cols())
        throw Error("run_mice: mask shape differs from value shape");

    MiceResult res;
    res.completed = init_means(values, missing);
    if (!missing.any()) return res;

    for (std::size_t j = 0; j < missing.cols(); ++j)
        for (std::size_t i = 0; i < missing.rows(); ++i)
            if (missing(i, j)) res.trace.push_back({i, j, {}});
    std::sort(res.trace.begin(), res.trace.end(),
              [](const TraceCell& a, const TraceCell& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });

    const RngStream root = RngStream(cfg.seed, "mice");
    for (int c = 0; c < cfg.cycles; ++c) {
        res.ridge_fallbacks += impute_cycle_inplace(res.completed, missing, cfg,
                                                    root.fork("cycle", static_cast<std::uint64_t>(c)));
        for (TraceCell& cell : res.trace) cell.values.push_back(res.completed(cell.row, cell.col));
    }
    return res;
}

inline MiceResult run_mice(const FeatureTable& t, const MiceConfig& cfg) {
    return run_mice(t.values, t.missing, cfg);
}

}  // namespace hcvml
