// hcvml: tables (CSV or JSON) and model JSON.
//
// Floating-point values are written in the shortest form that parses back to
// the same double, so every artifact read by a later stage reproduces the
// in-memory values bit for bit.

#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hcvml/classifier.hpp"
#include "hcvml/dataset.hpp"

namespace hcvml {

using Json = nlohmann::ordered_json;

/// A stage input that is not on disk.
class MissingArtifact : public Error {
public:
    explicit MissingArtifact(const std::filesystem::path& p)
        : Error("missing artifact '" + p.string() + "'"), path_(p) {}
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

enum class TableFormat { Csv, Json };

inline const char* extension(TableFormat f) { return f == TableFormat::Csv ? ".csv" : ".json"; }

/// Shortest round-trip text; NaN is "NA", infinities are "inf" / "-inf".
inline std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Fixed four decimals; the Table 1 mirror only.
inline std::string format_fixed4(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
    return std::string(buf, r.ptr);
}

using Cell = std::variant<std::string, double, long long>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) return j;
        throw Error("table has no column '" + std::string(name) + "'");
    }

    double number(std::size_t r, std::size_t c) const {
        const Cell& v = rows.at(r).at(c);
        if (const auto* d = std::get_if<double>(&v)) return *d;
        if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
        throw Error("table cell (" + std::to_string(r) + ", " + columns.at(c) + ") is not numeric");
    }

    std::string text(std::size_t r, std::size_t c) const {
        const Cell& v = rows.at(r).at(c);
        if (const auto* s = std::get_if<std::string>(&v)) return *s;
        if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
        return std::to_string(std::get<long long>(v));
    }
};

namespace detail {

inline std::string csv_field(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

inline Json json_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return nullptr;
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        return *d;
    }
    if (const auto* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

inline Cell parse_csv_cell(const std::string& s) {
    if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    long long i = 0;
    auto ri = std::from_chars(s.data(), s.data() + s.size(), i);
    if (!s.empty() && ri.ec == std::errc() && ri.ptr == s.data() + s.size()) return i;
    double d = 0;
    auto rd = std::from_chars(s.data(), s.data() + s.size(), d);
    if (!s.empty() && rd.ec == std::errc() && rd.ptr == s.data() + s.size()) return d;
    return s;
}

inline Cell parse_json_cell(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (j.is_number_integer()) return j.get<long long>();
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "-inf") return parse_csv_cell(s);
    return s;
}

}  // namespace detail

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + detail::csv_field(t.columns[j]);
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + detail::csv_field(row[j]);
        out += '\n';
    }
    return out;
}

inline Json to_json(const Table& t) {
    Json rows = Json::array();
    for (const auto& row : t.rows) {
        Json r = Json::array();
        for (const Cell& c : row) r.push_back(detail::json_cell(c));
        rows.push_back(std::move(r));
    }
    return Json{{"columns", t.columns}, {"rows", std::move(rows)}};
}

inline Table table_from_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    Table t;
    if (!std::getline(in, line)) throw Error("empty table");
    t.columns = detail::split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != t.columns.size())
            throw Error("table row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(t.columns.size()));
        std::vector<Cell> row;
        for (const auto& f : fields) row.push_back(detail::parse_csv_cell(f));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table table_from_json(const Json& j) {
    Table t;
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
        if (r.size() != t.columns.size()) throw Error("table row has the wrong number of fields");
        std::vector<Cell> row;
        for (const auto& c : r) row.push_back(detail::parse_json_cell(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Files

inline void write_text(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + p.string() + "'");
    f << content;
    if (!f) throw Error("write failed for '" + p.string() + "'");
}

inline std::string read_text(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw MissingArtifact(p);
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_json(const std::filesystem::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

inline Json read_json(const std::filesystem::path& p) {
    const std::string text = read_text(p);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed JSON in '" + p.string() + "': " + e.what());
    }
}

/// Writes `dir/stem.csv` or `dir/stem.json`; returns the path.
inline std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& stem, const Table& t,
                                         TableFormat f) {
    const auto p = dir / (stem + extension(f));
    if (f == TableFormat::Csv)
        write_text(p, to_csv(t));
    else
        write_json(p, to_json(t));
    return p;
}

inline Table read_table(const std::filesystem::path& dir, const std::string& stem, TableFormat f) {
    const auto p = dir / (stem + extension(f));
    if (f == TableFormat::Csv) return table_from_csv(read_text(p));
    return table_from_json(read_json(p));
}

// ---------------------------------------------------------------------------
// Models

inline Json matrix_json(const Matrix& m) {
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const Json& j) {
    const auto r = j.at("rows").get<std::size_t>(), c = j.at("cols").get<std::size_t>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != r * c) throw Error("matrix JSON: data length does not match its shape");
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < c; ++k) m(i, k) = data[i * c + k];
    return m;
}

inline Json to_json(const Standardizer& s) { return Json{{"mean", s.mean}, {"scale", s.scale}}; }

inline Standardizer standardizer_from_json(const Json& j) {
    return {j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
}

inline Json to_json(const SvmModel& m) {
    return Json{{"kernel", m.kernel.type == KernelType::Linear ? "linear" : "rbf"},
                {"gamma", m.kernel.gamma},
                {"C", m.C},
                {"w", m.w},
                {"bias", m.bias},
                {"iterations", m.iterations},
                {"converged", m.converged},
                {"support_count", m.support.size()},
                {"support", m.support},
                {"support_coef", m.support_coef},
                {"support_vectors", matrix_json(m.support_vectors)}};
}

inline SvmModel svm_from_json(const Json& j) {
    SvmModel m;
    const std::string k = j.at("kernel").get<std::string>();
    if (k != "linear" && k != "rbf") throw Error("svm JSON: unknown kernel '" + k + "'");
    m.kernel.type = k == "linear" ? KernelType::Linear : KernelType::Rbf;
    m.kernel.gamma = j.at("gamma").get<double>();
    m.C = j.at("C").get<double>();
    m.w = j.at("w").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.converged = j.at("converged").get<bool>();
    m.support = j.at("support").get<std::vector<std::size_t>>();
    m.support_coef = j.at("support_coef").get<std::vector<double>>();
    m.support_vectors = matrix_from_json(j.at("support_vectors"));
    return m;
}

inline Json to_json(const MlpModel& m) {
    return Json{{"inputs", m.inputs()}, {"hidden", m.hidden()}, {"w1", matrix_json(m.w1)},
                {"b1", m.b1},         {"w2", m.w2},           {"b2", m.b2}};
}

inline MlpModel mlp_from_json(const Json& j) {
    MlpModel m;
    m.w1 = matrix_from_json(j.at("w1"));
    m.b1 = j.at("b1").get<std::vector<double>>();
    m.w2 = j.at("w2").get<std::vector<double>>();
    m.b2 = j.at("b2").get<double>();
    if (m.b1.size() != m.hidden() || m.w2.size() != m.hidden()) throw Error("mlp JSON: inconsistent layer sizes");
    return m;
}

// Trees are stored column-wise; out-of-bag sets are not persisted.
inline Json to_json(const Forest& f) {
    Json trees = Json::array();
    for (const Tree& t : f.trees) {
        std::vector<int> feature;
        std::vector<double> threshold;
        std::vector<std::int32_t> left, right;
        std::vector<std::size_t> c0, c1;
        for (const TreeNode& n : t.nodes) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            c0.push_back(n.counts.c0);
            c1.push_back(n.counts.c1);
        }
        trees.push_back(Json{{"feature", feature}, {"threshold", threshold}, {"left", left},
                             {"right", right},     {"c0", c0},               {"c1", c1}});
    }
    return Json{{"features", f.features}, {"m", f.m}, {"n_min", f.n_min},
                {"gini_decrease", f.gini_decrease}, {"trees", std::move(trees)}};
}

inline Forest forest_from_json(const Json& j) {
    Forest f;
    f.features = j.at("features").get<std::size_t>();
    f.m = j.at("m").get<std::size_t>();
    f.n_min = j.at("n_min").get<std::size_t>();
    f.gini_decrease = j.at("gini_decrease").get<std::vector<double>>();
    for (const auto& tj : j.at("trees")) {
        const auto feature = tj.at("feature").get<std::vector<int>>();
        const auto threshold = tj.at("threshold").get<std::vector<double>>();
        const auto left = tj.at("left").get<std::vector<std::int32_t>>();
        const auto right = tj.at("right").get<std::vector<std::int32_t>>();
        const auto c0 = tj.at("c0").get<std::vector<std::size_t>>();
        const auto c1 = tj.at("c1").get<std::vector<std::size_t>>();
        const std::size_t n = feature.size();
        if (threshold.size() != n || left.size() != n || right.size() != n || c0.size() != n || c1.size() != n)
            throw Error("forest JSON: ragged tree arrays");
        Tree t;
        for (std::size_t k = 0; k < n; ++k) {
            if (feature[k] >= 0 && (left[k] <= static_cast<std::int32_t>(k) || right[k] <= static_cast<std::int32_t>(k) ||
                                    static_cast<std::size_t>(std::max(left[k], right[k])) >= n ||
                                    static_cast<std::size_t>(feature[k]) >= f.features))
                throw Error("forest JSON: malformed node " + std::to_string(k));
            t.nodes.push_back({feature[k], threshold[k], left[k], right[k], {c0[k], c1[k]}});
        }
        if (t.nodes.empty()) throw Error("forest JSON: empty tree");
        f.trees.push_back(std::move(t));
    }
    f.oob.resize(f.trees.size());
    return f;
}

inline Json to_json(const FittedModel& fm) {
    Json j{{"scaler", to_json(fm.scaler)}};
    struct {
        Json& j;
        void operator()(const SvmModel& m) const {
            j["type"] = "svm";
            j["model"] = to_json(m);
        }
        void operator()(const MlpModel& m) const {
            j["type"] = "ann";
            j["model"] = to_json(m);
        }
        void operator()(const Forest& f) const {
            j["type"] = "rf";
            j["model"] = to_json(f);
        }
        void operator()(const MajorityModel& m) const {
            j["type"] = "majority";
            j["model"] = Json{{"label", m.label}};
        }
    } v{j};
    std::visit(v, fm.model);
    return j;
}

inline FittedModel fitted_from_json(const Json& j) {
    FittedModel fm;
    fm.scaler = standardizer_from_json(j.at("scaler"));
    const std::string type = j.at("type").get<std::string>();
    const Json& m = j.at("model");
    if (type == "svm")
        fm.model = svm_from_json(m);
    else if (type == "ann")
        fm.model = mlp_from_json(m);
    else if (type == "rf")
        fm.model = forest_from_json(m);
    else if (type == "majority")
        fm.model = MajorityModel{m.at("label").get<int>()};
    else
        throw Error("model JSON: unknown type '" + type + "'");
    return fm;
}

}  // namespace hcvml
