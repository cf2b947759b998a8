// hcvml command-line front end.
//
//   hcvml pipeline --data hcvdat0.csv --out run1
//   hcvml ingest --data hcvdat0.csv --out run1 && hcvml impute --out run1 ...
//
// Every flag can also come from HCVML_<FLAG> in the environment (dashes become
// underscores) or from a TOML/INI file given with --config. Command line wins
// over environment, which wins over the file.
//
// Failures print exactly one JSON object on stderr and exit nonzero:
//   {"error":"missing_artifact","stage":"evaluate","message":"..."}

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "hcvml/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2, kMissing = 3, kParse = 4 };

int fail(const char* kind, const std::string& stage, const std::string& message, int code) {
    const hcvml::Json j{{"error", kind}, {"stage", stage}, {"message", message}};
    std::cerr << j.dump() << '\n';
    return code;
}

std::string env_name(const std::string& flag) {
    std::string out = "HCVML_";
    for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    hcvml::PipelineConfig cfg;
    std::string split = "cv", models = "all", format = "csv", kernel = "linear", out = cfg.out.string();
    bool no_standardize = false, no_stratify = false;

    CLI::App app{"hcvml: liver-disease classification pipeline on HCV laboratory data"};
    app.set_version_flag("--version", hcvml::kVersion);
    app.set_config("--config", "", "TOML or INI file with flag values");
    app.require_subcommand(1);
    app.fallthrough();

    auto opt = [&](const std::string& flag, auto& target, const std::string& help) {
        return app.add_option("--" + flag, target, help)->envname(env_name(flag));
    };
    auto flag = [&](const std::string& name, bool& target, const std::string& help) {
        return app.add_flag("--" + name, target, help)->envname(env_name(name));
    };

    opt("data", cfg.data, "input CSV (needed by ingest and pipeline)");
    opt("out", out, "output directory")->capture_default_str();
    opt("seed", cfg.seed, "master seed")->capture_default_str();
    opt("folds", cfg.folds, "cross-validation folds")->capture_default_str();
    opt("split", split, "cv or fixed")->check(CLI::IsMember({"cv", "fixed"}))->capture_default_str();
    opt("train-size", cfg.train_size, "training rows for --split fixed")->capture_default_str();
    opt("model", models, "svm, ann, rf, all, or a comma list")->capture_default_str();
    opt("pca-threshold", cfg.pca_threshold, "cumulative variance that fixes the PCA dimension")->capture_default_str();
    opt("features", cfg.features, "shortlist, all, pca, or a comma list of columns")->capture_default_str();
    opt("shortlist-size", cfg.shortlist_k, "importance top-k intersected with the PCA loaders")->capture_default_str();
    opt("mice-cycles", cfg.mice_cycles, "chained-equation cycles")->capture_default_str();
    opt("mice-donors", cfg.mice_donors, "predictive-mean-matching donor pool size")->capture_default_str();
    flag("no-standardize", no_standardize, "run PCA on raw rather than standardized columns");
    flag("no-stratify", no_stratify, "plain rather than class-stratified splits");
    opt("format", format, "table format: csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    flag("svg", cfg.svg, "also write static SVG figures");
    opt("svm-c", cfg.svm.C, "SVM box constraint")->capture_default_str();
    opt("svm-kernel", kernel, "linear or rbf")->check(CLI::IsMember({"linear", "rbf"}))->capture_default_str();
    opt("svm-gamma", cfg.svm.kernel.gamma, "RBF gamma; <= 0 means 1/features")->capture_default_str();
    opt("ann-hidden", cfg.ann.hidden, "hidden units")->capture_default_str();
    opt("ann-epochs", cfg.ann.epochs, "full-batch gradient steps")->capture_default_str();
    opt("ann-lr", cfg.ann.learning_rate, "learning rate")->capture_default_str();
    opt("rf-trees", cfg.rf.trees, "trees per forest")->capture_default_str();
    opt("rf-mtry", cfg.rf.m, "features tried per split; 0 means floor(sqrt(p))")->capture_default_str();
    opt("rf-min-node", cfg.rf.n_min, "minimum node size")->capture_default_str();
    opt("threads", cfg.threads, "worker threads; 0 means all cores; results do not depend on it")->capture_default_str();

    app.add_subcommand("pipeline", "run every stage in order");
    app.add_subcommand("ingest", "parse the CSV, report missingness");
    app.add_subcommand("impute", "MICE with predictive mean matching");
    app.add_subcommand("explore", "box-plot statistics and correlations");
    app.add_subcommand("pca", "principal components and scree data");
    app.add_subcommand("train", "importance, feature selection, fold models");
    app.add_subcommand("evaluate", "metrics, confusion matrices, ROC");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        for (char& c : msg)
            if (c == '\n') c = ' ';
        return fail("usage", "", msg, kUsage);
    }

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        cfg.out = out;
        cfg.split = split == "cv" ? hcvml::SplitMode::Cv : hcvml::SplitMode::Fixed;
        cfg.models = hcvml::parse_model_list(models);
        cfg.format = format == "csv" ? hcvml::TableFormat::Csv : hcvml::TableFormat::Json;
        cfg.svm.kernel.type = kernel == "linear" ? hcvml::KernelType::Linear : hcvml::KernelType::Rbf;
        cfg.standardize = !no_standardize;
        cfg.stratify = !no_stratify;
        if (stage == "pipeline") {
            hcvml::run_pipeline(cfg);
        } else {
            hcvml::run_stage(stage, cfg);
        }
    } catch (const hcvml::MissingArtifact& e) {
        return fail("missing_artifact", stage, e.what(), kMissing);
    } catch (const hcvml::ParseError& e) {
        return fail("parse", stage, e.what(), kParse);
    } catch (const std::exception& e) {
        return fail("runtime", stage, e.what(), kRuntime);
    }
    return kOk;
}
