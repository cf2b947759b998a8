// hcvml: ingestion of the HCV laboratory CSV and its feature table.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hcvml/numeric.hpp"

namespace hcvml {

enum class Category { BloodDonor, SuspectBloodDonor, Hepatitis, Fibrosis, Cirrhosis };
enum class Sex { Male, Female };

inline constexpr std::array<std::string_view, 10> kLabNames = {
    "ALB", "ALP", "ALT", "AST", "BIL", "CHE", "CHOL", "CREA", "GGT", "PROT"};

/// Feature columns in table order.
inline const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = {"Age", "Sex",  "ALB",  "ALP",  "ALT", "AST",
                                                   "BIL", "CHE",  "CHOL", "CREA", "GGT", "PROT"};
    return names;
}

/// Raised for malformed input; carries the 1-based data row and column name.
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::string column, const std::string& what)
        : Error("row " + std::to_string(row) + ", column '" + column + "': " + what),
          row_(row),
          column_(std::move(column)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

inline std::optional<Category> parse_category(std::string_view s) {
    if (s == "0=Blood Donor") return Category::BloodDonor;
    if (s == "0s=suspect Blood Donor") return Category::SuspectBloodDonor;
    if (s == "1=Hepatitis") return Category::Hepatitis;
    if (s == "2=Fibrosis") return Category::Fibrosis;
    if (s == "3=Cirrhosis") return Category::Cirrhosis;
    return std::nullopt;
}

/// Donors (including suspect donors) are 0, every disease stage is 1.
constexpr int binarize_target(Category c) noexcept {
    switch (c) {
        case Category::BloodDonor:
        case Category::SuspectBloodDonor:
            return 0;
        case Category::Hepatitis:
        case Category::Fibrosis:
        case Category::Cirrhosis:
            return 1;
    }
    return 1;
}

struct RawRecord {
    long id = 0;
    Category category = Category::BloodDonor;
    int age = 0;
    Sex sex = Sex::Male;
    std::array<std::optional<double>, 10> labs{};
};

/// Per-cell missingness flags, same shape as the value matrix.
class Mask {
public:
    Mask() = default;
    Mask(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool operator()(std::size_t i, std::size_t j) const noexcept { return bits_[i * cols_ + j] != 0; }
    void set(std::size_t i, std::size_t j, bool v) noexcept { bits_[i * cols_ + j] = v ? 1 : 0; }

    std::size_t count_column(std::size_t j) const noexcept {
        std::size_t c = 0;
        for (std::size_t i = 0; i < rows_; ++i) c += (*this)(i, j);
        return c;
    }
    std::size_t count() const noexcept {
        std::size_t c = 0;
        for (auto b : bits_) c += b;
        return c;
    }
    bool any() const noexcept { return count() > 0; }

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<unsigned char> bits_;
};

/// Numeric feature matrix with column names, missingness mask and binary labels.
/// Missing cells hold NaN in `values`.
struct FeatureTable {
    std::vector<std::string> columns;
    Matrix values;
    Mask missing;
    std::vector<int> labels;
    std::vector<long> ids;

    std::size_t rows() const noexcept { return values.rows(); }
    std::size_t cols() const noexcept { return values.cols(); }

    std::size_t column_index(std::string_view name) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) return j;
        throw Error("unknown column '" + std::string(name) + "'");
    }

    /// Same table with `completed` as values and an all-false mask.
    FeatureTable with_values(Matrix completed) const {
        FeatureTable out = *this;
        out.values = std::move(completed);
        out.missing = Mask(out.values.rows(), out.values.cols());
        return out;
    }
};

namespace detail {

// Splits one CSV line into fields, honouring double quotes ("" escapes a quote).
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool is_missing_token(std::string_view s) { return s.empty() || s == "NA"; }

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return v;
}

}  // namespace detail

/// Parses HCV records from CSV text. Columns are located by header name; the
/// unnamed leading column (or one called id / X) is taken as the record id.
inline std::vector<RawRecord> parse_csv_text(std::string_view text) {
    std::vector<RawRecord> out;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw Error("parse_csv: missing header row");
    const auto header = detail::split_csv_line(line);

    auto find = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (detail::trim(header[j]) == name) return j;
        return std::nullopt;
    };
    auto require = [&](std::string_view name) {
        auto j = find(name);
        if (!j) throw Error("parse_csv: header lacks column '" + std::string(name) + "'");
        return *j;
    };

    std::optional<std::size_t> id_col = find("");
    if (!id_col) id_col = find("id");
    if (!id_col) id_col = find("X");
    const std::size_t cat_col = require("Category");
    const std::size_t age_col = require("Age");
    const std::size_t sex_col = require("Sex");
    std::array<std::size_t, 10> lab_cols{};
    for (std::size_t k = 0; k < kLabNames.size(); ++k) lab_cols[k] = require(kLabNames[k]);

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        ++row;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError(row, "*", "expected " + std::to_string(header.size()) + " fields, got " +
                                           std::to_string(fields.size()));
        auto cell = [&](std::size_t j) { return detail::trim(fields[j]); };

        RawRecord rec;
        if (id_col) {
            auto v = detail::parse_double(cell(*id_col));
            if (!v || *v != std::floor(*v)) throw ParseError(row, header[*id_col], "id is not an integer");
            rec.id = static_cast<long>(*v);
        } else {
            rec.id = static_cast<long>(row);
        }

        auto cat = parse_category(cell(cat_col));
        if (!cat) throw ParseError(row, "Category", "unknown category '" + std::string(cell(cat_col)) + "'");
        rec.category = *cat;

        auto age = detail::parse_double(cell(age_col));
        if (!age || *age != std::floor(*age) || *age <= 0.0)
            throw ParseError(row, "Age", "expected a positive integer, got '" + std::string(cell(age_col)) + "'");
        rec.age = static_cast<int>(*age);

        const auto sex = cell(sex_col);
        if (sex == "m")
            rec.sex = Sex::Male;
        else if (sex == "f")
            rec.sex = Sex::Female;
        else
            throw ParseError(row, "Sex", "expected 'm' or 'f', got '" + std::string(sex) + "'");

        for (std::size_t k = 0; k < kLabNames.size(); ++k) {
            const auto s = cell(lab_cols[k]);
            if (detail::is_missing_token(s)) continue;
            auto v = detail::parse_double(s);
            if (!v) throw ParseError(row, std::string(kLabNames[k]), "non-numeric value '" + std::string(s) + "'");
            if (!std::isfinite(*v) || *v < 0.0)
                throw ParseError(row, std::string(kLabNames[k]), "value must be finite and nonnegative");
            rec.labs[k] = *v;
        }
        out.push_back(rec);
    }
    return out;
}

inline std::vector<RawRecord> parse_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("parse_csv: cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_csv_text(ss.str());
}

inline FeatureTable to_feature_table(const std::vector<RawRecord>& records) {
    if (records.empty()) throw Error("to_feature_table: no records");
    FeatureTable t;
    t.columns = feature_names();
    const std::size_t n = records.size();
    const std::size_t p = t.columns.size();
    t.values = Matrix(n, p);
    t.missing = Mask(n, p);
    t.labels.resize(n);
    t.ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const RawRecord& r = records[i];
        t.ids[i] = r.id;
        t.labels[i] = binarize_target(r.category);
        t.values(i, 0) = static_cast<double>(r.age);
        t.values(i, 1) = r.sex == Sex::Male ? 1.0 : 0.0;
        for (std::size_t k = 0; k < kLabNames.size(); ++k) {
            if (r.labs[k]) {
                t.values(i, k + 2) = *r.labs[k];
            } else {
                t.values(i, k + 2) = std::numeric_limits<double>::quiet_NaN();
                t.missing.set(i, k + 2, true);
            }
        }
    }
    return t;
}

struct ColumnMissingness {
    std::string column;
    std::size_t missing = 0;
    double observed_mean = std::numeric_limits<double>::quiet_NaN();
    double observed_min = std::numeric_limits<double>::quiet_NaN();
    double observed_max = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<ColumnMissingness> missingness_report(const FeatureTable& t) {
    std::vector<ColumnMissingness> out;
    for (std::size_t j = 0; j < t.cols(); ++j) {
        ColumnMissingness m;
        m.column = t.columns[j];
        double sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t i = 0; i < t.rows(); ++i) {
            if (t.missing(i, j)) {
                ++m.missing;
                continue;
            }
            const double v = t.values(i, j);
            sum += v;
            m.observed_min = seen == 0 ? v : std::min(m.observed_min, v);
            m.observed_max = seen == 0 ? v : std::max(m.observed_max, v);
            ++seen;
        }
        if (seen > 0) m.observed_mean = sum / static_cast<double>(seen);
        out.push_back(m);
    }
    return out;
}

}  // namespace hcvml
