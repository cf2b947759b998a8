// hcvml: the staged analysis pipeline.
//
// ingest -> impute -> explore -> pca -> train -> evaluate. Every stage reads
// its inputs from, and writes its outputs to, one output directory, and the
// full pipeline is those six stages run in order. A staged run therefore
// produces the same bytes as a full run with the same configuration.

#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "hcvml/classifier.hpp"
#include "hcvml/dataset.hpp"
#include "hcvml/explore.hpp"
#include "hcvml/mice.hpp"
#include "hcvml/pca.hpp"
#include "hcvml/serialize.hpp"
#include "hcvml/svg.hpp"

namespace hcvml {

inline constexpr const char* kVersion = "0.1.0";

enum class SplitMode { Cv, Fixed };

struct PipelineConfig {
    std::string data;
    std::filesystem::path out = "hcvml_out";
    std::uint64_t seed = 1;
    std::size_t folds = 10;
    SplitMode split = SplitMode::Cv;
    std::size_t train_size = 564;
    std::vector<std::string> models = {"svm", "ann", "rf"};
    double pca_threshold = 0.90;
    std::string features = "shortlist";  // shortlist | all | pca | comma-separated names
    int mice_cycles = 10;
    int mice_donors = 5;
    bool standardize = true;  // PCA input scaling
    bool stratify = true;
    TableFormat format = TableFormat::Csv;
    bool svg = false;
    std::size_t shortlist_k = 4;
    SvmParams svm;
    MlpParams ann;
    ForestParams rf;
    unsigned threads = 0;  // 0 means hardware concurrency; never changes results
};

inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {"ingest", "impute", "explore", "pca", "train", "evaluate"};
    return names;
}

/// "all" or a comma-separated subset of svm, ann, rf; returned in that order.
inline std::vector<std::string> parse_model_list(const std::string& s) {
    static const std::vector<std::string> known = {"svm", "ann", "rf"};
    if (s == "all") return known;
    std::set<std::string> want;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t end = std::min(s.find(',', start), s.size());
        const std::string item(detail::trim(std::string_view(s).substr(start, end - start)));
        if (std::find(known.begin(), known.end(), item) == known.end())
            throw Error("unknown model '" + item + "' (expected svm, ann, rf or all)");
        want.insert(item);
        start = end + 1;
    }
    std::vector<std::string> out;
    for (const auto& k : known)
        if (want.count(k)) out.push_back(k);
    return out;
}

inline void validate(const PipelineConfig& c) {
    if (c.folds < 2) throw Error("--folds must be at least 2");
    if (!(c.pca_threshold > 0.0 && c.pca_threshold <= 1.0)) throw Error("--pca-threshold must be in (0, 1]");
    if (c.mice_cycles < 1) throw Error("--mice-cycles must be at least 1");
    if (c.mice_donors < 1) throw Error("--mice-donors must be at least 1");
    if (c.train_size < 1) throw Error("--train-size must be at least 1");
    if (c.models.empty()) throw Error("no models selected");
    if (c.shortlist_k < 1) throw Error("shortlist size must be at least 1");
    if (!(c.svm.C > 0.0)) throw Error("--svm-c must be positive");
    if (c.ann.hidden < 1 || c.ann.epochs < 0 || !(c.ann.learning_rate > 0.0)) throw Error("invalid network settings");
    if (c.rf.trees < 1) throw Error("--rf-trees must be at least 1");
}

/// Everything that determines the outputs. The output directory, data path
/// and thread count are excluded; the data file is identified by content.
inline Json config_echo(const PipelineConfig& c) {
    return Json{{"seed", c.seed},
                {"split", c.split == SplitMode::Cv ? "cv" : "fixed"},
                {"folds", c.folds},
                {"train_size", c.train_size},
                {"stratify", c.stratify},
                {"models", c.models},
                {"features", c.features},
                {"shortlist_k", c.shortlist_k},
                {"pca_threshold", c.pca_threshold},
                {"pca_standardize", c.standardize},
                {"mice", {{"cycles", c.mice_cycles}, {"donors", c.mice_donors}}},
                {"svm",
                 {{"C", c.svm.C},
                  {"kernel", c.svm.kernel.type == KernelType::Linear ? "linear" : "rbf"},
                  {"gamma", c.svm.kernel.gamma},
                  {"tolerance", c.svm.tolerance},
                  {"max_passes_per_row", c.svm.max_passes_per_row}}},
                {"ann",
                 {{"hidden", c.ann.hidden},
                  {"epochs", c.ann.epochs},
                  {"learning_rate", c.ann.learning_rate},
                  {"init_range", c.ann.init_range}}},
                {"rf", {{"trees", c.rf.trees}, {"m", c.rf.m}, {"n_min", c.rf.n_min}}},
                {"format", c.format == TableFormat::Csv ? "csv" : "json"},
                {"svg", c.svg}};
}

inline ModelSpec model_spec(const std::string& name, const PipelineConfig& c) {
    if (name == "svm") return SvmSpec{c.svm};
    if (name == "ann") return AnnSpec{c.ann};
    if (name == "rf") {
        ForestParams p = c.rf;
        p.threads = c.threads;
        return RfSpec{p};
    }
    throw Error("unknown model '" + name + "'");
}

namespace detail {

inline std::string category_label(Category c) {
    switch (c) {
        case Category::BloodDonor: return "0=Blood Donor";
        case Category::SuspectBloodDonor: return "0s=suspect Blood Donor";
        case Category::Hepatitis: return "1=Hepatitis";
        case Category::Fibrosis: return "2=Fibrosis";
        case Category::Cirrhosis: return "3=Cirrhosis";
    }
    return "?";
}

inline std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void write_run_meta(const PipelineConfig& c) {
    const Json summary = read_json(c.out / "summary.json");
    write_json(c.out / "run_meta.json", Json{{"tool", "hcvml"},
                                             {"version", kVersion},
                                             {"seed", c.seed},
                                             {"data", summary.at("data")},
                                             {"config", config_echo(c)}});
}

/// Rebuilds a feature table from a stage table with columns
/// id, [category,] features..., label. NaN cells are marked missing.
inline FeatureTable feature_table_from(const Table& t) {
    FeatureTable ft;
    const std::size_t id_col = t.column("id"), label_col = t.column("label");
    std::vector<std::size_t> feature_cols;
    for (std::size_t j = 0; j < t.columns.size(); ++j)
        if (j != id_col && j != label_col && t.columns[j] != "category") {
            feature_cols.push_back(j);
            ft.columns.push_back(t.columns[j]);
        }
    const std::size_t n = t.rows.size(), p = feature_cols.size();
    if (n == 0) throw Error("stage table has no rows");
    ft.values = Matrix(n, p);
    ft.missing = Mask(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        ft.ids.push_back(static_cast<long>(t.number(i, id_col)));
        const double label = t.number(i, label_col);
        if (label != 0.0 && label != 1.0) throw Error("stage table label must be 0 or 1 (row " + std::to_string(i + 1) + ")");
        ft.labels.push_back(static_cast<int>(label));
        for (std::size_t k = 0; k < p; ++k) {
            const double v = t.number(i, feature_cols[k]);
            ft.values(i, k) = v;
            if (std::isnan(v)) ft.missing.set(i, k, true);
        }
    }
    return ft;
}

inline Table feature_table_rows(const FeatureTable& ft) {
    Table t;
    t.columns.push_back("id");
    for (const auto& c : ft.columns) t.columns.push_back(c);
    t.columns.push_back("label");
    for (std::size_t i = 0; i < ft.rows(); ++i) {
        std::vector<Cell> row{static_cast<long long>(ft.ids[i])};
        for (std::size_t j = 0; j < ft.cols(); ++j) row.emplace_back(ft.values(i, j));
        row.emplace_back(static_cast<long long>(ft.labels[i]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline FeatureTable load_completed(const PipelineConfig& c) {
    FeatureTable t = feature_table_from(read_table(c.out, "completed", c.format));
    if (t.missing.any()) throw Error("completed table still has missing cells");
    return t;
}

inline Json pca_json(const PcaModel& m, std::size_t d, bool standardize, double threshold,
                     const std::vector<std::string>& names) {
    std::vector<std::string> top;
    for (std::size_t j : top_loading_features(m, d)) top.push_back(names[j]);
    return Json{{"standardize", standardize},
                {"threshold", threshold},
                {"dim", d},
                {"features", names},
                {"top_loaders", top},
                {"mean", m.mean},
                {"scale", m.scale},
                {"eigenvalues", m.eigenvalues},
                {"ratios", m.ratios},
                {"components", matrix_json(m.components)}};
}

inline PcaModel pca_from_json(const Json& j) {
    PcaModel m;
    m.mean = j.at("mean").get<std::vector<double>>();
    m.scale = j.at("scale").get<std::vector<double>>();
    m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    m.ratios = j.at("ratios").get<std::vector<double>>();
    m.components = matrix_from_json(j.at("components"));
    return m;
}

struct Design {
    std::vector<std::string> names;
    Matrix x;
};

/// Model inputs for the recorded feature selection.
inline Design design_matrix(const PipelineConfig& c, const FeatureTable& t, const Json& features) {
    Design d;
    const std::string mode = features.at("mode").get<std::string>();
    d.names = features.at("features").get<std::vector<std::string>>();
    if (mode == "pca") {
        const PcaModel m = pca_from_json(read_json(c.out / "pca.json"));
        if (m.dim() != t.cols()) throw Error("pca.json does not match the completed table");
        d.x = project_rows(m, t.values, d.names.size());
        return d;
    }
    std::vector<std::size_t> cols;
    for (const auto& n : d.names) cols.push_back(t.column_index(n));
    d.x = t.values.select_cols(cols);
    return d;
}

inline Folds make_folds(const PipelineConfig& c, const std::vector<int>& labels) {
    if (c.split == SplitMode::Cv)
        return kfold_split(labels.size(), c.folds, c.stratify ? std::span<const int>(labels) : std::span<const int>{},
                           c.seed);
    return {fixed_split(labels, c.train_size, c.stratify, c.seed).test};
}

inline Json metric_set_json(const MetricSet& m) {
    auto opt = [](const std::optional<double>& v) -> Json { return v ? Json(*v) : Json(nullptr); };
    return Json{{"accuracy", m.accuracy},
                {"precision", opt(m.precision)},
                {"sensitivity", opt(m.sensitivity)},
                {"specificity", opt(m.specificity)},
                {"f1", opt(m.f1)}};
}

inline Json summary_json(const MetricSummary& s) {
    return s.defined ? Json(s.mean) : Json(nullptr);
}

inline Json sd_json(const MetricSummary& s) { return s.defined > 1 ? Json(s.sd) : Json(nullptr); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Stages

inline void stage_ingest(const PipelineConfig& c) {
    if (c.data.empty()) throw Error("ingest needs --data");
    std::string bytes;
    try {
        bytes = read_text(c.data);
    } catch (const MissingArtifact&) {
        throw Error("cannot read data file '" + c.data + "'");
    }
    const auto records = parse_csv_text(bytes);
    const FeatureTable ft = to_feature_table(records);

    Table data;
    data.columns = {"id", "category"};
    for (const auto& n : ft.columns) data.columns.push_back(n);
    data.columns.push_back("label");
    Json categories = Json::object();
    for (Category cat : {Category::BloodDonor, Category::SuspectBloodDonor, Category::Hepatitis, Category::Fibrosis,
                         Category::Cirrhosis})
        categories[detail::category_label(cat)] = 0;
    for (std::size_t i = 0; i < ft.rows(); ++i) {
        const std::string cat = detail::category_label(records[i].category);
        categories[cat] = categories[cat].get<long long>() + 1;
        std::vector<Cell> row{static_cast<long long>(ft.ids[i]), cat};
        for (std::size_t j = 0; j < ft.cols(); ++j) row.emplace_back(ft.values(i, j));
        row.emplace_back(static_cast<long long>(ft.labels[i]));
        data.rows.push_back(std::move(row));
    }
    write_table(c.out, "dataset", data, c.format);

    Table miss;
    miss.columns = {"column", "missing", "observed_mean", "observed_min", "observed_max"};
    for (const auto& m : missingness_report(ft))
        miss.rows.push_back({m.column, static_cast<long long>(m.missing), m.observed_mean, m.observed_min, m.observed_max});
    write_table(c.out, "missingness", miss, c.format);

    std::size_t ones = 0;
    for (int l : ft.labels) ones += static_cast<std::size_t>(l);
    const std::string name = std::filesystem::path(c.data).filename().string();
    write_json(c.out / "summary.json",
               Json{{"records", ft.rows()},
                    {"class_counts", {{"0", ft.rows() - ones}, {"1", ones}}},
                    {"categories", categories},
                    {"missing_cells", ft.missing.count()},
                    {"data", {{"file", name}, {"bytes", bytes.size()}, {"fnv1a64", detail::fnv1a64_hex(bytes)}}}});
    detail::write_run_meta(c);
}

inline void stage_impute(const PipelineConfig& c) {
    const FeatureTable ft = detail::feature_table_from(read_table(c.out, "dataset", c.format));
    MiceConfig mc;
    mc.cycles = c.mice_cycles;
    mc.donors = c.mice_donors;
    mc.seed = c.seed;
    const MiceResult res = run_mice(ft, mc);
    const FeatureTable done = ft.with_values(res.completed);
    write_table(c.out, "completed", detail::feature_table_rows(done), c.format);

    Table trace;
    trace.columns = {"cell", "id", "column", "cycle", "value"};
    for (const TraceCell& tc : res.trace) {
        const std::string cell = std::to_string(ft.ids[tc.row]) + ":" + ft.columns[tc.col];
        for (std::size_t k = 0; k < tc.values.size(); ++k)
            trace.rows.push_back({cell, static_cast<long long>(ft.ids[tc.row]), ft.columns[tc.col],
                                  static_cast<long long>(k + 1), tc.values[k]});
    }
    write_table(c.out, "mice_trace", trace, c.format);
    write_json(c.out / "impute.json", Json{{"cycles", mc.cycles},
                                           {"donors", mc.donors},
                                           {"imputed_cells", res.trace.size()},
                                           {"ridge_fallbacks", res.ridge_fallbacks},
                                           {"remaining_missing", done.missing.count()}});
    detail::write_run_meta(c);
}

inline void stage_explore(const PipelineConfig& c) {
    const FeatureTable t = detail::load_completed(c);
    const auto boxes = box_stats(t);
    Table bt;
    bt.columns = {"column", "min", "q1", "median", "q3", "max", "whisker_low", "whisker_high", "lower_fence",
                  "upper_fence", "outliers"};
    for (const BoxStats& b : boxes)
        bt.rows.push_back({b.column, b.min, b.q1, b.median, b.q3, b.max, b.whisker_low, b.whisker_high, b.lower_fence(),
                           b.upper_fence(), static_cast<long long>(b.outliers.size())});
    write_table(c.out, "boxstats", bt, c.format);

    const CorrReport cr = corr_report(t);
    Table ct;
    ct.columns = {"feature"};
    for (const auto& n : cr.names) ct.columns.push_back(n);
    for (std::size_t i = 0; i < cr.names.size(); ++i) {
        std::vector<Cell> row{cr.names[i]};
        for (std::size_t j = 0; j < cr.names.size(); ++j) row.emplace_back(cr.corr(i, j));
        ct.rows.push_back(std::move(row));
    }
    write_table(c.out, "corr", ct, c.format);

    if (c.svg) {
        write_text(c.out / "boxplot.svg", svg::box_plot("Completed features", boxes));
        write_text(c.out / "corr.svg", svg::heatmap("Pearson correlation", cr.names, cr.corr));
    }
    detail::write_run_meta(c);
}

inline void stage_pca(const PipelineConfig& c) {
    const FeatureTable t = detail::load_completed(c);
    const PcaModel m = fit_pca(t.values, c.standardize);
    const std::size_t d = select_dimension(m, c.pca_threshold);

    Table scree;
    scree.columns = {"component", "eigenvalue", "ratio", "cumulative"};
    const auto cum = m.cumulative();
    for (std::size_t k = 0; k < m.ratios.size(); ++k)
        scree.rows.push_back({static_cast<long long>(k + 1), m.eigenvalues[k], m.ratios[k], cum[k]});
    write_table(c.out, "scree", scree, c.format);

    Table load;
    load.columns = {"feature"};
    for (std::size_t k = 0; k < m.dim(); ++k) load.columns.push_back("PC" + std::to_string(k + 1));
    for (std::size_t j = 0; j < m.dim(); ++j) {
        std::vector<Cell> row{t.columns[j]};
        for (std::size_t k = 0; k < m.dim(); ++k) row.emplace_back(m.components(j, k));
        load.rows.push_back(std::move(row));
    }
    write_table(c.out, "loadings", load, c.format);
    write_json(c.out / "pca.json", detail::pca_json(m, d, c.standardize, c.pca_threshold, t.columns));

    if (c.svg) {
        svg::Series ratio{"ratio", {}, {}}, cumul{"cumulative", {}, {}};
        for (std::size_t k = 0; k < m.ratios.size(); ++k) {
            ratio.x.push_back(static_cast<double>(k + 1));
            ratio.y.push_back(m.ratios[k]);
            cumul.x.push_back(static_cast<double>(k + 1));
            cumul.y.push_back(cum[k]);
        }
        write_text(c.out / "scree.svg", svg::line_chart("Scree", "component", "explained variance", {ratio, cumul}));
    }
    detail::write_run_meta(c);
}

inline void stage_train(const PipelineConfig& c) {
    const FeatureTable t = detail::load_completed(c);
    const Json pj = read_json(c.out / "pca.json");
    const PcaModel pca = detail::pca_from_json(pj);
    const std::size_t d = pj.at("dim").get<std::size_t>();
    if (pca.dim() != t.cols()) throw Error("pca.json does not match the completed table");

    // Importance from one forest on every completed row.
    ForestParams fp = c.rf;
    fp.threads = c.threads;
    const Forest forest = train_forest(t.values, t.labels, fp, c.seed);
    const auto gini = importance_gini(forest);
    const auto perm = importance_permutation(forest, t.values, t.labels, c.seed);
    const auto ranked = rank_features(gini, t.columns);
    Table imp;
    imp.columns = {"feature", "mean_decrease_gini", "mean_decrease_accuracy", "rank"};
    std::vector<std::string> ranked_names;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        const std::size_t j = t.column_index(ranked[r].name);
        imp.rows.push_back({ranked[r].name, gini[j], perm[j], static_cast<long long>(r + 1)});
        ranked_names.push_back(ranked[r].name);
    }
    write_table(c.out, "importance", imp, c.format);

    Json features{{"mode", ""}, {"features", Json::array()}};
    if (c.features == "shortlist") {
        const Shortlist s = feature_shortlist(pca, d, t.columns, ranked_names, c.shortlist_k);
        features = Json{{"mode", "shortlist"}, {"features", s.features}, {"pca_dim", d},
                        {"pca_side", s.pca_side}, {"rf_side", s.rf_side}, {"fell_back", s.fell_back}};
    } else if (c.features == "all") {
        features = Json{{"mode", "all"}, {"features", t.columns}};
    } else if (c.features == "pca") {
        std::vector<std::string> names;
        for (std::size_t k = 0; k < d; ++k) names.push_back("PC" + std::to_string(k + 1));
        features = Json{{"mode", "pca"}, {"features", names}, {"pca_dim", d}};
    } else {
        std::vector<std::string> names;
        std::set<std::string> seen;
        std::size_t start = 0;
        while (start <= c.features.size()) {
            const std::size_t end = std::min(c.features.find(',', start), c.features.size());
            const std::string n(detail::trim(std::string_view(c.features).substr(start, end - start)));
            t.column_index(n);  // throws on unknown names
            if (seen.insert(n).second) names.push_back(n);
            start = end + 1;
        }
        features = Json{{"mode", "list"}, {"features", names}};
    }
    write_json(c.out / "features.json", features);

    const detail::Design design = detail::design_matrix(c, t, features);
    const Folds folds = detail::make_folds(c, t.labels);
    write_json(c.out / "folds.json", Json{{"split", c.split == SplitMode::Cv ? "cv" : "fixed"}, {"folds", folds}});

    for (const auto& name : c.models) {
        const auto fitted = train_folds(model_spec(name, c), design.x, t.labels, folds, c.seed, c.threads);
        Json per_fold = Json::array();
        for (const auto& fm : fitted) per_fold.push_back(to_json(fm));
        write_text(c.out / "models" / (name + ".json"),
                   Json{{"model", name}, {"features", design.names}, {"folds", std::move(per_fold)}}.dump() + "\n");
        if (name == "ann") {
            Table loss;
            loss.columns = {"fold", "epoch", "loss"};
            for (std::size_t k = 0; k < fitted.size(); ++k)
                for (std::size_t e = 0; e < fitted[k].loss_curve.size(); ++e)
                    loss.rows.push_back({static_cast<long long>(k + 1), static_cast<long long>(e), fitted[k].loss_curve[e]});
            write_table(c.out, "loss_ann", loss, c.format);
            if (c.svg && !fitted.empty()) {
                svg::Series s{"fold 1", {}, {}};
                for (std::size_t e = 0; e < fitted[0].loss_curve.size(); ++e) {
                    s.x.push_back(static_cast<double>(e));
                    s.y.push_back(fitted[0].loss_curve[e]);
                }
                write_text(c.out / "loss_ann.svg", svg::line_chart("Network training loss", "epoch", "cross-entropy", {s}));
            }
        }
    }
    if (c.svg) {
        std::vector<double> vals;
        for (const auto& r : ranked) vals.push_back(r.value);
        write_text(c.out / "importance.svg", svg::bar_chart("Mean decrease Gini", "decrease", ranked_names, vals));
    }
    detail::write_run_meta(c);
}

inline void stage_evaluate(const PipelineConfig& c) {
    // Model files first: they are the artifact a skipped train stage leaves out.
    for (const auto& name : c.models) {
        const auto path = c.out / "models" / (name + ".json");
        if (!std::filesystem::exists(path)) throw MissingArtifact(path);
    }
    const FeatureTable t = detail::load_completed(c);
    const Json features = read_json(c.out / "features.json");
    const detail::Design design = detail::design_matrix(c, t, features);
    const Json fj = read_json(c.out / "folds.json");
    const Folds folds = fj.at("folds").get<Folds>();
    for (const auto& f : folds)
        for (std::size_t r : f)
            if (r >= t.rows()) throw Error("folds.json refers to row " + std::to_string(r) + " beyond the data");

    Json models = Json::object();
    Table table1, conf, preds;
    table1.columns = {"metric"};
    conf.columns = {"model", "predicted", "actual_0", "actual_1"};
    preds.columns = {"id", "label"};
    for (std::size_t i = 0; i < t.rows(); ++i)
        preds.rows.push_back({static_cast<long long>(t.ids[i]), static_cast<long long>(t.labels[i])});
    std::vector<std::vector<Cell>> t1rows = {{"Sensitivity"}, {"Specificity"}, {"Accuracy"}, {"F_1"}, {"Precision"}, {"AUC"}};
    std::vector<svg::Series> roc_series;

    for (const auto& name : c.models) {
        const auto path = c.out / "models" / (name + ".json");
        const Json mj = read_json(path);
        if (mj.at("features").get<std::vector<std::string>>() != design.names)
            throw Error("model file '" + path.string() + "' was trained on different features");
        std::vector<FittedModel> fitted;
        for (const auto& fj2 : mj.at("folds")) fitted.push_back(fitted_from_json(fj2));
        if (fitted.size() != folds.size()) throw Error("model file '" + path.string() + "' does not match folds.json");

        const CvResult r = evaluate_folds(name, fitted, design.x, t.labels, folds);
        std::vector<double> scores;
        std::vector<int> actual, predicted;
        for (std::size_t i : r.evaluated) {
            scores.push_back(r.scores[i]);
            actual.push_back(t.labels[i]);
            predicted.push_back(r.predicted[i]);
        }
        const MetricSet pooled = metrics(r.pooled);
        std::optional<RocCurve> roc;
        bool both = std::find(actual.begin(), actual.end(), 0) != actual.end() &&
                    std::find(actual.begin(), actual.end(), 1) != actual.end();
        if (both) roc = roc_curve(scores, actual);

        models[name] = Json{
            {"confusion", {{"tp", r.pooled.tp}, {"fn", r.pooled.fn}, {"fp", r.pooled.fp}, {"tn", r.pooled.tn}}},
            {"pooled", detail::metric_set_json(pooled)},
            {"fold_mean",
             {{"accuracy", detail::summary_json(r.accuracy)},
              {"precision", detail::summary_json(r.precision)},
              {"sensitivity", detail::summary_json(r.sensitivity)},
              {"specificity", detail::summary_json(r.specificity)},
              {"f1", detail::summary_json(r.f1)}}},
            {"fold_sd",
             {{"accuracy", detail::sd_json(r.accuracy)},
              {"precision", detail::sd_json(r.precision)},
              {"sensitivity", detail::sd_json(r.sensitivity)},
              {"specificity", detail::sd_json(r.specificity)},
              {"f1", detail::sd_json(r.f1)}}},
            {"auc", roc ? Json(roc->auc) : Json(nullptr)},
            {"gini", roc ? Json(gini_coefficient(roc->auc)) : Json(nullptr)},
            {"zero_one_error", zero_one_error(predicted, actual)},
            {"evaluated", r.evaluated.size()}};

        table1.columns.push_back(name);
        auto fx = [](const std::optional<double>& v) -> Cell { return v ? format_fixed4(*v) : std::string("NA"); };
        t1rows[0].push_back(fx(pooled.sensitivity));
        t1rows[1].push_back(fx(pooled.specificity));
        t1rows[2].push_back(format_fixed4(pooled.accuracy));
        t1rows[3].push_back(fx(pooled.f1));
        t1rows[4].push_back(fx(pooled.precision));
        t1rows[5].push_back(roc ? Cell(format_fixed4(roc->auc)) : Cell(std::string("NA")));

        conf.rows.push_back({name, 0LL, static_cast<long long>(r.pooled.tp), static_cast<long long>(r.pooled.fn)});
        conf.rows.push_back({name, 1LL, static_cast<long long>(r.pooled.fp), static_cast<long long>(r.pooled.tn)});

        preds.columns.push_back(name + "_pred");
        preds.columns.push_back(name + "_score");
        for (std::size_t i = 0; i < t.rows(); ++i) {
            if (r.predicted[i] >= 0) {
                preds.rows[i].emplace_back(static_cast<long long>(r.predicted[i]));
            } else {
                preds.rows[i].emplace_back(std::numeric_limits<double>::quiet_NaN());
            }
            preds.rows[i].emplace_back(r.scores[i]);
        }

        if (roc) {
            Table rt;
            rt.columns = {"threshold", "fpr", "tpr"};
            svg::Series s{name, {}, {}};
            for (const RocPoint& p : roc->points) {
                rt.rows.push_back({p.threshold, p.fpr, p.tpr});
                s.x.push_back(p.fpr);
                s.y.push_back(p.tpr);
            }
            write_table(c.out, "roc_" + name, rt, c.format);
            roc_series.push_back(std::move(s));
        }
    }
    table1.rows = std::move(t1rows);

    write_json(c.out / "metrics.json", Json{{"positive_class", 0},
                                            {"split", fj.at("split")},
                                            {"folds", folds.size()},
                                            {"features", design.names},
                                            {"models", std::move(models)}});
    write_table(c.out, "table1", table1, c.format);
    write_table(c.out, "confusion", conf, c.format);
    write_table(c.out, "predictions", preds, c.format);
    if (c.svg && !roc_series.empty())
        write_text(c.out / "roc.svg", svg::line_chart("ROC", "false positive rate", "true positive rate", roc_series, true));
    detail::write_run_meta(c);
}

inline void run_stage(const std::string& name, const PipelineConfig& c) {
    validate(c);
    std::filesystem::create_directories(c.out);
    if (name == "ingest") return stage_ingest(c);
    if (name == "impute") return stage_impute(c);
    if (name == "explore") return stage_explore(c);
    if (name == "pca") return stage_pca(c);
    if (name == "train") return stage_train(c);
    if (name == "evaluate") return stage_evaluate(c);
    throw Error("unknown stage '" + name + "'");
}

inline void run_pipeline(const PipelineConfig& c) {
    for (const auto& s : stage_names()) run_stage(s, c);
}

}  // namespace hcvml
