// shapekrrc: planar-shape kernel ridge-regression classification toolkit.
//
// Subcommands:
//   preshape      bulk-normalize landmark configurations
//   kernel-check  kernel positive-definiteness diagnostics as JSON
//   classify      fit on one file, predict another, emit metrics
//   metrics       score an externally produced prediction file
//   benchmark     the full replicated split/subsample/grid-search protocol
//
// Exit codes: 0 success, 1 usage, 2 I/O or parse, 3 data validation,
// 4 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "shapekrrc/classifiers.hpp"
#include "shapekrrc/data_io.hpp"
#include "shapekrrc/evaluation.hpp"
#include "shapekrrc/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shapekrrc;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SHAPEKRRC_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return static_cast<std::uint64_t>(v);
        std::cerr << "warning: ignoring malformed SHAPEKRRC_SEED='" << env << "'\n";
    }
    return 42;
}

// Shortest decimal string that parses back to the same double.
std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    for (const int precision : {15, 16, 17}) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

LandmarkDataset load_input(const std::string& path) {
    return load_landmark_csv(path);
}

// ---------------------------------------------------------------------------
// preshape
// ---------------------------------------------------------------------------

int cmd_preshape(const std::string& input, const std::string& output) {
    const LandmarkDataset dataset = load_input(input);

    LandmarkDataset normalized;
    normalized.k = dataset.k;
    normalized.class_names = dataset.class_names;
    std::vector<std::string> degenerate_ids;
    for (const LandmarkConfig& record : dataset.records) {
        try {
            const Preshape u = to_preshape(record);
            LandmarkConfig out;
            out.id = record.id;
            out.label = record.label;
            out.points = u.coords();
            normalized.records.push_back(std::move(out));
        } catch (const DegenerateConfiguration&) {
            degenerate_ids.push_back(record.id);
        }
    }

    if (!degenerate_ids.empty()) {
        std::cerr << "degenerate records (all landmarks coincide):";
        for (const std::string& id : degenerate_ids) std::cerr << ' ' << id;
        std::cerr << '\n';
        return kExitData;
    }
    save_landmark_csv(normalized, output);
    std::cout << "wrote " << normalized.size() << " preshapes to " << output << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// kernel-check
// ---------------------------------------------------------------------------

DistSqFn dist_sq_of(KernelFamily family) {
    switch (family) {
        case KernelFamily::VWG:
            return [](const Preshape& a, const Preshape& b) { return extrinsic_dist_sq(a, b); };
        case KernelFamily::FPG:
            return [](const Preshape& a, const Preshape& b) {
                const double d = full_procrustes_dist(a, b);
                return d * d;
            };
        case KernelFamily::IntrinsicGaussian:
            return [](const Preshape& a, const Preshape& b) {
                const double d = riemannian_dist(a, b);
                return d * d;
            };
        case KernelFamily::EuclideanGaussian:
            return [](const Preshape& a, const Preshape& b) {
                return (a.coords() - b.coords()).squaredNorm();
            };
    }
    throw InvalidInput("unknown kernel family");
}

int cmd_kernel_check(const std::string& input, const std::string& family_name, double sigma_sq,
                     std::vector<double> sigma_sq_grid, std::size_t subset_size, int attempts,
                     int trials, std::uint64_t seed, const std::string& output) {
    const LandmarkDataset dataset = load_input(input);
    if (dataset.size() == 0) {
        std::cerr << "error: '" << input << "' holds no records\n";
        return kExitIo;
    }
    const LabeledPreshapes shapes = dataset.to_preshapes();
    const KernelFamily family = kernel_family_from_name(family_name);

    Rng rng(seed);
    const GramMatrix g = gram(KernelSpec(family, sigma_sq), shapes.shapes);
    const double min_eig = min_eigenvalue(g);
    const double negative_type_max =
        shapes.size() >= 2 ? check_negative_type(dist_sq_of(family), shapes.shapes, trials, rng)
                           : 0.0;

    json report{{"family", kernel_family_name(family)},
                {"sigma_sq", sigma_sq},
                {"n", shapes.size()},
                {"min_eigenvalue", min_eig},
                {"negative_type_max", negative_type_max}};

    if (sigma_sq_grid.empty()) sigma_sq_grid.push_back(sigma_sq);
    if (subset_size > 0 && shapes.size() > subset_size && attempts > 0) {
        const auto witness =
            find_psd_violation(family, shapes.shapes, sigma_sq_grid, subset_size, attempts, rng);
        if (witness) {
            json ids = json::array();
            for (const std::size_t idx : witness->subset) {
                ids.push_back(shapes.ids.empty() ? std::to_string(idx) : shapes.ids[idx]);
            }
            report["witness"] = {{"subset", witness->subset},
                                 {"ids", std::move(ids)},
                                 {"sigma_sq", witness->sigma_sq},
                                 {"min_eigenvalue", witness->min_eig}};
        }
    }

    const std::string text = report.dump(2) + "\n";
    if (output.empty()) {
        std::cout << text;
    } else {
        write_file_atomic(output, text);
        std::cout << "wrote " << output << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

json metrics_to_json(const MetricsReport& report) {
    json per_class = json::array();
    for (std::size_t c = 0; c < report.class_labels.size(); ++c) {
        const ClassCounts& counts = report.per_class[c];
        per_class.push_back({{"label", report.class_labels[c]},
                             {"tp", counts.tp},
                             {"fp", counts.fp},
                             {"fn", counts.fn},
                             {"tn", counts.tn}});
    }
    return json{{"precision", report.macro_precision},
                {"recall", report.macro_recall},
                {"f1", report.f1},
                {"accuracy", report.avg_accuracy},
                {"per_class", std::move(per_class)}};
}

int cmd_classify(const std::string& train_path, const std::string& test_path,
                 const std::string& method_name_arg, const std::string& kernel_override,
                 double lambda, double sigma_sq, bool allow_indefinite,
                 const std::string& output, std::string metrics_output) {
    const LabeledPreshapes train = load_input(train_path).to_preshapes();
    const LabeledPreshapes test = load_input(test_path).to_preshapes();
    if (train.size() == 0 || test.size() == 0) {
        std::cerr << "error: empty train or test set\n";
        return kExitIo;
    }

    const EvalMethod method = method_from_name(method_name_arg);

    std::unique_ptr<KrrcModel> krrc;
    std::unique_ptr<NaiveRrcModel> rrc;
    bool warned = false;
    if (method == EvalMethod::NaiveRrc) {
        rrc = std::make_unique<NaiveRrcModel>(rrc_fit(train, lambda));
    } else {
        const KernelFamily family = kernel_override.empty()
                                        ? method_kernel_family(method)
                                        : kernel_family_from_name(kernel_override);
        krrc = std::make_unique<KrrcModel>(
            krrc_fit(train, KernelSpec(family, sigma_sq), lambda, allow_indefinite));
        warned = krrc->used_indefinite_solve;
        if (warned) {
            std::cerr << "warning: indefinite Gram, fell back to a symmetric indefinite solve\n";
        }
    }

    const std::vector<int>& labels = krrc ? krrc->class_labels : rrc->class_labels;
    std::string csv = "id,true_label,predicted_label";
    for (const int label : labels) csv += ",score_" + std::to_string(label);
    csv += '\n';

    std::vector<int> predictions;
    predictions.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Prediction p =
            krrc ? krrc_predict(*krrc, test.shapes[i]) : rrc_predict(*rrc, test.shapes[i]);
        predictions.push_back(p.label);
        csv += (test.ids.empty() ? std::to_string(i) : test.ids[i]);
        csv += ',' + std::to_string(test.labels[i]);
        csv += ',' + std::to_string(p.label);
        for (const double score : p.per_class_scores) csv += ',' + format_double(score);
        csv += '\n';
    }
    write_file_atomic(output, csv);

    std::vector<int> class_list;
    {
        std::set<int> all(train.labels.begin(), train.labels.end());
        all.insert(test.labels.begin(), test.labels.end());
        class_list.assign(all.begin(), all.end());
    }
    const MetricsReport report = compute_metrics(predictions, test.labels, class_list);
    json doc = metrics_to_json(report);
    doc["method"] = method_name_arg;
    doc["lambda"] = lambda;
    if (method != EvalMethod::NaiveRrc) doc["sigma_sq"] = sigma_sq;
    doc["warn"] = warned;

    if (metrics_output.empty()) metrics_output = output + ".metrics.json";
    write_file_atomic(metrics_output, doc.dump(2) + "\n");
    std::cout << "accuracy " << format_double(report.avg_accuracy) << ", f1 "
              << format_double(report.f1) << " -> " << output << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// metrics: score an externally produced prediction file
// ---------------------------------------------------------------------------

int cmd_metrics(const std::string& input, const std::string& output) {
    std::ifstream in(input);
    if (!in) throw ParseError("cannot open '" + input + "'", 0);

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("'" + input + "' is empty", 0);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) header.push_back(field);
    }
    if (header.size() < 3 || header[0] != "id" || header[1] != "true_label" ||
        header[2] != "predicted_label") {
        throw ParseError("line 1: expected header id,true_label,predicted_label,...", 1);
    }

    std::vector<int> truth, predictions;
    std::set<int> classes;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, true_s, pred_s;
        if (!std::getline(ss, id, ',') || !std::getline(ss, true_s, ',') ||
            !std::getline(ss, pred_s, ',')) {
            throw ParseError("line " + std::to_string(line_no) + ": malformed row", line_no);
        }
        try {
            truth.push_back(std::stoi(true_s));
            predictions.push_back(std::stoi(pred_s));
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(line_no) + ": bad label", line_no);
        }
        classes.insert(truth.back());
        classes.insert(predictions.back());
    }
    if (truth.empty()) {
        std::cerr << "error: '" << input << "' holds no predictions\n";
        return kExitIo;
    }

    const MetricsReport report = compute_metrics(
        predictions, truth, std::vector<int>(classes.begin(), classes.end()));
    const std::string text = metrics_to_json(report).dump(2) + "\n";
    if (output.empty()) {
        std::cout << text;
    } else {
        write_file_atomic(output, text);
        std::cout << "wrote " << output << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

std::string cell_csv_row(const CellResult& row) {
    std::string line = method_name(row.method);
    line += ',' + std::to_string(row.n_i);
    line += ',' + std::to_string(row.replicate);
    line += ',' + format_double(row.lambda);
    line += ',' + format_double(row.sigma_sq);
    line += ',' + format_double(row.metrics.macro_precision);
    line += ',' + format_double(row.metrics.macro_recall);
    line += ',' + format_double(row.metrics.f1);
    line += ',' + format_double(row.metrics.avg_accuracy);
    line += ',';
    line += row.warn ? '1' : '0';
    line += '\n';
    return line;
}

const char* kResultsHeader = "method,n_i,replicate,lambda,sigma_sq,precision,recall,f1,accuracy,warn\n";

// Folds the cell-relevant plan parameters into a tag; a resumed run only
// reuses fragments written under the same split fraction and grids.
std::uint64_t plan_fingerprint(const ExperimentPlan& plan) {
    std::uint64_t h = mix_seed(0x504C414E);
    const auto fold = [&h](double v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof(bits));
        h = mix_seed(h ^ bits);
    };
    fold(plan.train_fraction);
    for (const double l : plan.lambda_grid) fold(l);
    h = mix_seed(~h);
    for (const double s : plan.sigma_sq_grid) fold(s);
    return h;
}

std::string fragment_name(const CellTask& cell, std::uint64_t fingerprint) {
    char tag[40];
    std::snprintf(tag, sizeof(tag), "%016llx_%08llx",
                  static_cast<unsigned long long>(cell.seed),
                  static_cast<unsigned long long>(fingerprint & 0xffffffffULL));
    return method_name(cell.method) + "_n" + std::to_string(cell.n_i) + "_r" +
           std::to_string(cell.replicate) + "_" + tag + ".csv";
}

std::optional<CellResult> parse_fragment(const fs::path& path, const CellTask& cell) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;

    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.size() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 10) return std::nullopt;

    try {
        CellResult row;
        row.method = method_from_name(fields[0]);
        row.n_i = std::stoi(fields[1]);
        row.replicate = std::stoi(fields[2]);
        if (row.method != cell.method || row.n_i != cell.n_i || row.replicate != cell.replicate) {
            return std::nullopt;
        }
        row.lambda = std::stod(fields[3]);
        row.sigma_sq =
            fields[4].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(fields[4]);
        row.metrics.macro_precision = std::stod(fields[5]);
        row.metrics.macro_recall = std::stod(fields[6]);
        row.metrics.f1 = std::stod(fields[7]);
        row.metrics.avg_accuracy = std::stod(fields[8]);
        row.warn = fields[9] == "1";
        return row;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void write_benchmark_outputs(const fs::path& out_dir, std::vector<CellResult> rows) {
    std::sort(rows.begin(), rows.end(), [](const CellResult& a, const CellResult& b) {
        return std::tuple(static_cast<int>(a.method), a.n_i, a.replicate) <
               std::tuple(static_cast<int>(b.method), b.n_i, b.replicate);
    });

    std::string results = kResultsHeader;
    for (const CellResult& row : rows) results += cell_csv_row(row);
    write_file_atomic((out_dir / "results.csv").string(), results);

    const std::vector<SummaryRow> summary = summarize(rows);
    std::string summary_csv = "method,n_i,metric,mean,sd\n";
    for (const SummaryRow& s : summary) {
        summary_csv += method_name(s.method) + ',' + std::to_string(s.n_i) + ',' + s.metric +
                       ',' + format_double(s.mean) + ',' + format_double(s.sd) + '\n';
    }
    write_file_atomic((out_dir / "summary.csv").string(), summary_csv);

    // One boxplot-ready file per (method, n_i): the replicate-level metrics.
    const fs::path plot_dir = out_dir / "plots";
    fs::create_directories(plot_dir);
    std::map<std::pair<std::string, int>, std::string> plot_files;
    for (const CellResult& row : rows) {
        std::string& body = plot_files[{method_name(row.method), row.n_i}];
        if (body.empty()) body = "replicate,precision,recall,f1,accuracy\n";
        body += std::to_string(row.replicate) + ',' +
                format_double(row.metrics.macro_precision) + ',' +
                format_double(row.metrics.macro_recall) + ',' + format_double(row.metrics.f1) +
                ',' + format_double(row.metrics.avg_accuracy) + '\n';
    }
    for (const auto& [key, body] : plot_files) {
        write_file_atomic((plot_dir / (key.first + "_ni" + std::to_string(key.second) + ".csv"))
                              .string(),
                          body);
    }

    // Console summary.
    std::printf("%-10s %5s  %-9s %10s %10s\n", "method", "n_i", "metric", "mean", "sd");
    for (const SummaryRow& s : summary) {
        std::printf("%-10s %5d  %-9s %10.4f %10.4f\n", method_name(s.method).c_str(), s.n_i,
                    s.metric.c_str(), s.mean, s.sd);
    }
}

int cmd_benchmark(const std::string& input, const std::string& output_dir,
                  const ExperimentPlan& plan, int workers, bool resume) {
    const LabeledPreshapes data = load_input(input).to_preshapes();
    if (data.size() == 0) {
        std::cerr << "error: '" << input << "' holds no records\n";
        return kExitIo;
    }
    validate_plan(plan);

    const fs::path out_dir(output_dir);
    const fs::path cell_dir = out_dir / "cells";
    fs::create_directories(cell_dir);

    const std::uint64_t fingerprint = plan_fingerprint(plan);
    const std::vector<CellTask> cells = plan_cells(plan);
    std::vector<CellResult> done;
    std::vector<CellTask> pending;
    for (const CellTask& cell : cells) {
        if (resume) {
            if (auto cached =
                    parse_fragment(cell_dir / fragment_name(cell, fingerprint), cell)) {
                done.push_back(std::move(*cached));
                continue;
            }
        }
        pending.push_back(cell);
    }
    if (resume && !done.empty()) {
        std::cerr << "resume: reusing " << done.size() << " of " << cells.size() << " cells\n";
    }

    // Each finished cell is flushed immediately so an interrupted run can be
    // resumed; content depends only on the cell, never on scheduling.
    std::map<std::pair<int, std::pair<int, int>>, std::string> names;
    for (const CellTask& cell : pending) {
        names[{static_cast<int>(cell.method), {cell.n_i, cell.replicate}}] =
            fragment_name(cell, fingerprint);
    }
    const auto flush_cell = [&](const CellResult& row) {
        const auto it = names.find({static_cast<int>(row.method), {row.n_i, row.replicate}});
        if (it != names.end()) {
            write_file_atomic((cell_dir / it->second).string(), cell_csv_row(row));
        }
    };

    const std::vector<CellResult> fresh = run_cells(data, plan, pending, workers, flush_cell);
    done.insert(done.end(), fresh.begin(), fresh.end());
    write_benchmark_outputs(out_dir, std::move(done));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extrinsic kernel ridge-regression classification on planar shapes"};
    app.require_subcommand(1);

    const std::uint64_t seed_default = default_seed();

    // --- preshape -----------------------------------------------------------
    auto* preshape_cmd = app.add_subcommand("preshape", "Normalize landmark configurations");
    std::string pre_input, pre_output;
    preshape_cmd->add_option("--input", pre_input, "Landmark CSV")->required();
    preshape_cmd->add_option("--output", pre_output, "Output preshape CSV")->required();

    // --- kernel-check --------------------------------------------------------
    auto* check_cmd = app.add_subcommand("kernel-check", "Kernel PSD diagnostics");
    std::string chk_input, chk_kernel = "vwg", chk_output;
    double chk_sigma_sq = 1.0;
    std::vector<double> chk_sigma_grid;
    std::size_t chk_subset = 8;
    int chk_attempts = 2000;
    int chk_trials = 1000;
    std::uint64_t chk_seed = seed_default;
    check_cmd->add_option("--input", chk_input, "Landmark CSV")->required();
    check_cmd->add_option("--kernel", chk_kernel, "Kernel family")
        ->check(CLI::IsMember({"vwg", "fpg", "rie", "euclidean"}));
    check_cmd->add_option("--sigma-sq", chk_sigma_sq, "Bandwidth for the Gram diagnostic")
        ->check(CLI::PositiveNumber);
    check_cmd->add_option("--sigma-sq-grid", chk_sigma_grid, "Bandwidths for the violation search")
        ->delimiter(',');
    check_cmd->add_option("--subset-size", chk_subset, "Subset size for the violation search");
    check_cmd->add_option("--attempts", chk_attempts, "Violation search attempts");
    check_cmd->add_option("--trials", chk_trials, "Negative-type trials");
    check_cmd->add_option("--seed", chk_seed, "RNG seed");
    check_cmd->add_option("--output", chk_output, "Report path (stdout when omitted)");

    // --- classify -------------------------------------------------------------
    auto* classify_cmd = app.add_subcommand("classify", "Fit on --train, predict --test");
    std::string cls_train, cls_test, cls_method = "vwg-krrc", cls_kernel, cls_output,
                cls_metrics_output;
    double cls_lambda = 1e-3, cls_sigma_sq = 1.0;
    bool cls_allow_indefinite = false;
    classify_cmd->add_option("--train", cls_train, "Training landmark CSV")->required();
    classify_cmd->add_option("--test", cls_test, "Test landmark CSV")->required();
    classify_cmd->add_option("--method", cls_method, "Classifier")
        ->check(CLI::IsMember({"vwg-krrc", "fpg-krrc", "rie-krrc", "naive-rrc"}));
    classify_cmd->add_option("--kernel", cls_kernel, "Kernel family override for KRRC")
        ->check(CLI::IsMember({"vwg", "fpg", "rie", "euclidean"}));
    classify_cmd->add_option("--lambda", cls_lambda, "Ridge parameter")
        ->check(CLI::PositiveNumber);
    classify_cmd->add_option("--sigma-sq", cls_sigma_sq, "Kernel bandwidth (squared)")
        ->check(CLI::PositiveNumber);
    classify_cmd->add_flag("--allow-indefinite", cls_allow_indefinite,
                           "Fall back to an indefinite solve on non-PSD Grams");
    classify_cmd->add_option("--output", cls_output, "Predictions CSV")->required();
    classify_cmd->add_option("--metrics-output", cls_metrics_output,
                             "Metrics JSON (default <output>.metrics.json)");

    // --- metrics ---------------------------------------------------------------
    auto* metrics_cmd =
        app.add_subcommand("metrics", "Score an externally produced prediction CSV");
    std::string met_input, met_output;
    metrics_cmd->add_option("--input", met_input, "Prediction CSV (id,true_label,predicted_label,...)")
        ->required();
    metrics_cmd->add_option("--output", met_output, "Metrics JSON path (stdout when omitted)");

    // --- benchmark -------------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("benchmark", "Replicated evaluation protocol");
    std::string bm_input, bm_output;
    ExperimentPlan plan;
    plan.seed = seed_default;
    std::vector<std::string> bm_methods = {"vwg-krrc", "fpg-krrc", "rie-krrc", "naive-rrc"};
    int bm_workers = 1;
    bool bm_resume = false;
    bench_cmd->add_option("--input", bm_input, "Landmark CSV")->required();
    bench_cmd->add_option("--output", bm_output, "Output directory")->required();
    bench_cmd->add_option("--train-fraction", plan.train_fraction, "Training fraction")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    bench_cmd->add_option("--subsample-sizes", plan.subsample_sizes, "Per-class sizes n_i")
        ->delimiter(',');
    bench_cmd->add_option("--replicates", plan.replicates, "Replicates per n_i")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--lambda-grid", plan.lambda_grid, "Ridge grid")->delimiter(',');
    bench_cmd->add_option("--sigma-sq-grid", plan.sigma_sq_grid, "Bandwidth grid")
        ->delimiter(',');
    bench_cmd->add_option("--method", bm_methods, "Methods to run")
        ->delimiter(',')
        ->check(CLI::IsMember({"vwg-krrc", "fpg-krrc", "rie-krrc", "naive-rrc"}));
    bench_cmd->add_option("--seed", plan.seed, "Base seed (replicate r uses seed + r)");
    bench_cmd->add_option("--workers", bm_workers, "Worker threads")->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--resume", bm_resume, "Reuse completed cells from a previous run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (preshape_cmd->parsed()) {
            return cmd_preshape(pre_input, pre_output);
        }
        if (check_cmd->parsed()) {
            return cmd_kernel_check(chk_input, chk_kernel, chk_sigma_sq, chk_sigma_grid,
                                    chk_subset, chk_attempts, chk_trials, chk_seed, chk_output);
        }
        if (classify_cmd->parsed()) {
            return cmd_classify(cls_train, cls_test, cls_method, cls_kernel, cls_lambda,
                                cls_sigma_sq, cls_allow_indefinite, cls_output,
                                cls_metrics_output);
        }
        if (metrics_cmd->parsed()) {
            return cmd_metrics(met_input, met_output);
        }
        if (bench_cmd->parsed()) {
            std::vector<EvalMethod> methods;
            for (const std::string& name : bm_methods) methods.push_back(method_from_name(name));
            plan.methods = std::move(methods);
            return cmd_benchmark(bm_input, bm_output, plan, bm_workers, bm_resume);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const InconsistentLandmarkCount& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const UnknownLabel& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const FactorizationFailure& e) {
        std::cerr << "error: " << e.what() << "\n"
                  << "hint: pass --allow-indefinite to fall back to an indefinite solve\n";
        return kExitNumerical;
    } catch (const NonUniqueMean& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
