// hcvml: numeric kernels shared by every stage of the pipeline.
//
// Dense row-major matrices, moments, covariance/correlation, least squares,
// a cyclic Jacobi symmetric eigensolver, quantiles and a counter-based
// random stream whose output is identical on every platform.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hcvml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw Error("Matrix::from_rows: ragged rows");
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    /// Rows `idx` in the given order.
    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix out(idx.size(), cols_);
        for (std::size_t r = 0; r < idx.size(); ++r) {
            auto src = row(idx[r]);
            std::copy(src.begin(), src.end(), out.row(r).begin());
        }
        return out;
    }

    /// Columns `idx` in the given order.
    Matrix select_cols(std::span<const std::size_t> idx) const {
        Matrix out(rows_, idx.size());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t c = 0; c < idx.size(); ++c) out(i, c) = (*this)(i, idx[c]);
        return out;
    }

    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Infinity norm (max absolute row sum).
inline double norm_inf(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (double v : m.row(i)) s += std::abs(v);
        best = std::max(best, s);
    }
    return best;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// ---------------------------------------------------------------------------
// Random streams

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a over the label bytes, then mixed.
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

}  // namespace detail

/// Counter-based random stream. A stream is a value: copying it copies the
/// position, and `fork` derives an independent child from (key, label)
/// without advancing the parent, so the order in which children are created
/// never changes what any of them produce.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::string_view label = "root")
        : key_(detail::splitmix64(seed ^ detail::hash_label(label))) {}

    RngStream fork(std::string_view label) const {
        RngStream child(0);
        child.key_ = detail::splitmix64(key_ ^ detail::hash_label(label));
        return child;
    }

    RngStream fork(std::string_view label, std::uint64_t index) const {
        RngStream child = fork(label);
        child.key_ = detail::splitmix64(child.key_ + detail::splitmix64(index + 1));
        return child;
    }

    std::uint64_t next_u64() noexcept {
        return detail::splitmix64(key_ + detail::splitmix64(++counter_));
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), unbiased (rejection on the top of the range).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw Error("RngStream::below: empty range");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (one value per call).
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238 * u2);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Moments

inline std::vector<double> mean_vector(const Matrix& x) {
    if (x.rows() == 0) throw Error("mean_vector: no rows");
    std::vector<double> mu(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) mu[j] += x(i, j);
    for (double& m : mu) m /= static_cast<double>(x.rows());
    return mu;
}

/// Covariance with divisor n. When `centered` is true the rows are taken to
/// be already centered and no mean is subtracted.
inline Matrix covariance_matrix(const Matrix& x, bool centered = false) {
    if (x.rows() == 0) throw Error("covariance_matrix: no rows");
    const std::size_t p = x.cols();
    std::vector<double> mu = centered ? std::vector<double>(p, 0.0) : mean_vector(x);
    Matrix s(p, p);
    std::vector<double> d(p);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < p; ++j) d[j] = x(i, j) - mu[j];
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b) s(a, b) += d[a] * d[b];
    }
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            s(a, b) *= inv_n;
            s(b, a) = s(a, b);
        }
    return s;
}

/// Pearson correlation. `names` (optional) is used to report the offending
/// column when one has zero variance.
inline Matrix pearson_corr_matrix(const Matrix& x, std::span<const std::string> names = {}) {
    Matrix s = covariance_matrix(x);
    const std::size_t p = s.rows();
    std::vector<double> sd(p);
    for (std::size_t j = 0; j < p; ++j) {
        if (!(s(j, j) > 0.0)) {
            const std::string name = j < names.size() ? names[j] : "column " + std::to_string(j);
            throw Error("pearson_corr_matrix: zero variance in " + name);
        }
        sd[j] = std::sqrt(s(j, j));
    }
    Matrix r(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        r(a, a) = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            const double v = std::clamp(s(a, b) / (sd[a] * sd[b]), -1.0, 1.0);
            r(a, b) = v;
            r(b, a) = v;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Least squares

struct OlsFit {
    std::vector<double> coef;  // intercept first, then one slope per column
    bool ridge_fallback = false;

    double predict(std::span<const double> x) const {
        double v = coef[0];
        for (std::size_t j = 0; j < x.size(); ++j) v += coef[j + 1] * x[j];
        return v;
    }
};

namespace detail {

// Cholesky solve of a symmetric positive definite system; false if a pivot
// is not safely positive.
inline bool cholesky_solve(Matrix a, std::vector<double>& b) {
    const std::size_t n = a.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
    const double floor = 1e-13 * std::max(max_diag, 1e-300);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > floor)) return false;
        d = std::sqrt(d);
        a(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
            a(i, j) = v / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= a(i, k) * b[k];
        b[i] = v / a(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= a(k, i) * b[k];
        b[i] = v / a(i, i);
    }
    return true;
}

}  // namespace detail

/// Ordinary least squares of y on the columns of x plus an intercept, via the
/// normal equations. A singular system is retried with a ridge term
/// 1e-8 * trace(X'X) / q on the slope block and flagged in the result.
inline OlsFit ols_fit(const Matrix& x, std::span<const double> y) {
    const std::size_t n = x.rows();
    const std::size_t q = x.cols() + 1;
    if (y.size() != n) throw Error("ols_fit: row count mismatch");
    if (n == 0) throw Error("ols_fit: no rows");

    Matrix xtx(q, q);
    std::vector<double> xty(q, 0.0);
    std::vector<double> z(q);
    for (std::size_t i = 0; i < n; ++i) {
        z[0] = 1.0;
        for (std::size_t j = 1; j < q; ++j) z[j] = x(i, j - 1);
        for (std::size_t a = 0; a < q; ++a) {
            xty[a] += z[a] * y[i];
            for (std::size_t b = a; b < q; ++b) xtx(a, b) += z[a] * z[b];
        }
    }
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = 0; b < a; ++b) xtx(a, b) = xtx(b, a);

    OlsFit fit;
    fit.coef = xty;
    if (detail::cholesky_solve(xtx, fit.coef)) return fit;

    double trace = 0.0;
    for (std::size_t a = 0; a < q; ++a) trace += xtx(a, a);
    double lambda = 1e-8 * trace / static_cast<double>(q);
    fit.ridge_fallback = true;
    for (int attempt = 0; attempt < 8; ++attempt, lambda *= 100.0) {
        Matrix reg = xtx;
        for (std::size_t a = 1; a < q; ++a) reg(a, a) += lambda;
        fit.coef = xty;
        if (detail::cholesky_solve(reg, fit.coef)) return fit;
    }
    // Degenerate beyond repair: intercept-only model.
    fit.coef.assign(q, 0.0);
    fit.coef[0] = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    return fit;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition

struct EigenDecomp {
    std::vector<double> values;  // descending
    Matrix vectors;              // column k pairs with values[k]
};

struct JacobiOptions {
    int max_sweeps = 100;
    double tolerance = 1e-12;  // off-diagonal norm relative to the Frobenius norm
};

/// Cyclic Jacobi rotations. Eigenvalues are returned in descending order and
/// each eigenvector is oriented so its largest-magnitude component is
/// positive (ties resolved toward the lowest index).
inline EigenDecomp eigen_sym(const Matrix& s, JacobiOptions opt = {}) {
    const std::size_t p = s.rows();
    if (s.cols() != p) throw Error("eigen_sym: matrix is not square");
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (s(i, j) != s(j, i)) throw Error("eigen_sym: matrix is not symmetric");

    Matrix a = s;
    Matrix v = Matrix::identity(p);
    double frob = 0.0;
    for (double x : a.data()) frob += x * x;
    frob = std::sqrt(frob);

    auto off_norm = [&] {
        double o = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) o += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(o);
    };

    bool converged = frob == 0.0 || off_norm() <= opt.tolerance * frob;
    for (int sweep = 0; sweep < opt.max_sweeps && !converged; ++sweep) {
        for (std::size_t k = 0; k + 1 < p; ++k) {
            for (std::size_t l = k + 1; l < p; ++l) {
                const double akl = a(k, l);
                if (akl == 0.0) continue;
                const double theta = (a(l, l) - a(k, k)) / (2.0 * akl);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t i = 0; i < p; ++i) {
                    const double aik = a(i, k), ail = a(i, l);
                    a(i, k) = c * aik - sn * ail;
                    a(i, l) = sn * aik + c * ail;
                }
                for (std::size_t i = 0; i < p; ++i) {
                    const double aki = a(k, i), ali = a(l, i);
                    a(k, i) = c * aki - sn * ali;
                    a(l, i) = sn * aki + c * ali;
                }
                for (std::size_t i = 0; i < p; ++i) {
                    const double vik = v(i, k), vil = v(i, l);
                    v(i, k) = c * vik - sn * vil;
                    v(i, l) = sn * vik + c * vil;
                }
            }
        }
        converged = off_norm() <= opt.tolerance * frob;
    }
    if (!converged)
        throw Error("eigen_sym: no convergence after " + std::to_string(opt.max_sweeps) +
                    " sweeps, off-diagonal residual " + std::to_string(off_norm()));

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomp out;
    out.values.resize(p);
    out.vectors = Matrix(p, p);
    for (std::size_t k = 0; k < p; ++k) {
        const std::size_t src = order[k];
        out.values[k] = a(src, src);
        std::size_t arg = 0;
        for (std::size_t i = 1; i < p; ++i)
            if (std::abs(v(i, src)) > std::abs(v(arg, src))) arg = i;
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < p; ++i) out.vectors(i, k) = sign * v(i, src);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Order statistics

/// Linear-interpolation quantile of already sorted values.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error("quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile: fraction outside [0, 1]");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> xs, double q) {
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, q);
}

}  // namespace hcvml
