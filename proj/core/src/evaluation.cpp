#include "shapekrrc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace shapekrrc {

namespace {

constexpr std::uint64_t kSaltSubsample = 0x53554253;  // "SUBS"
constexpr std::uint64_t kSaltGridSearch = 0x47524944; // "GRID"
constexpr std::uint64_t kSaltCell = 0x43454C4C;       // "CELL"

int method_index(EvalMethod m) { return static_cast<int>(m); }

std::map<int, std::vector<std::size_t>> indices_by_class(const LabeledPreshapes& data) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        by_class[data.labels[i]].push_back(i);
    }
    return by_class;
}

void append_record(LabeledPreshapes& out, const LabeledPreshapes& src, std::size_t i) {
    out.shapes.push_back(src.shapes[i]);
    out.labels.push_back(src.labels[i]);
    if (!src.ids.empty()) out.ids.push_back(src.ids[i]);
}

std::vector<int> sorted_class_list(const LabeledPreshapes& data) {
    std::vector<int> classes;
    for (const auto& [label, idx] : indices_by_class(data)) classes.push_back(label);
    return classes;
}

}  // namespace

std::string method_name(EvalMethod method) {
    switch (method) {
        case EvalMethod::VwgKrrc: return "vwg-krrc";
        case EvalMethod::FpgKrrc: return "fpg-krrc";
        case EvalMethod::RieKrrc: return "rie-krrc";
        case EvalMethod::NaiveRrc: return "naive-rrc";
    }
    return "?";
}

EvalMethod method_from_name(const std::string& name) {
    if (name == "vwg-krrc") return EvalMethod::VwgKrrc;
    if (name == "fpg-krrc") return EvalMethod::FpgKrrc;
    if (name == "rie-krrc") return EvalMethod::RieKrrc;
    if (name == "naive-rrc") return EvalMethod::NaiveRrc;
    throw InvalidInput("unknown method: " + name);
}

bool method_uses_kernel(EvalMethod method) { return method != EvalMethod::NaiveRrc; }

KernelFamily method_kernel_family(EvalMethod method) {
    switch (method) {
        case EvalMethod::VwgKrrc: return KernelFamily::VWG;
        case EvalMethod::FpgKrrc: return KernelFamily::FPG;
        case EvalMethod::RieKrrc: return KernelFamily::IntrinsicGaussian;
        case EvalMethod::NaiveRrc: break;
    }
    throw InvalidInput("naive-rrc has no kernel family");
}

void validate_plan(const ExperimentPlan& plan) {
    if (!(plan.train_fraction > 0.0) || !(plan.train_fraction < 1.0)) {
        throw InvalidInput("train_fraction must lie in (0, 1)");
    }
    if (plan.replicates < 1) throw InvalidInput("replicates must be >= 1");
    if (plan.lambda_grid.empty()) throw InvalidInput("lambda grid must be nonempty");
    if (plan.sigma_sq_grid.empty()) throw InvalidInput("sigma_sq grid must be nonempty");
    if (plan.subsample_sizes.empty()) throw InvalidInput("subsample sizes must be nonempty");
    if (plan.methods.empty()) throw InvalidInput("methods must be nonempty");
    for (const int n : plan.subsample_sizes) {
        if (n < 1) throw InvalidInput("subsample sizes must be >= 1");
    }
    for (const double l : plan.lambda_grid) {
        if (!(l > 0.0)) throw InvalidInput("lambda grid values must be positive");
    }
    for (const double s : plan.sigma_sq_grid) {
        if (!(s > 0.0)) throw InvalidInput("sigma_sq grid values must be positive");
    }
}

SplitResult stratified_split(const LabeledPreshapes& data, double train_fraction,
                             std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw InvalidInput("train_fraction must lie in (0, 1)");
    }
    const auto by_class = indices_by_class(data);
    if (by_class.empty()) throw EmptyInput("cannot split an empty dataset");

    SplitResult out;
    Rng rng(seed);
    for (const auto& [label, indices] : by_class) {
        const std::size_t n = indices.size();
        if (n < 2) {
            throw InsufficientClassSize("class " + std::to_string(label) +
                                        " has fewer than 2 samples");
        }
        std::vector<std::size_t> order = indices;
        shuffle_in_place(order, rng);
        const std::size_t train_n =
            std::max<std::size_t>(1, static_cast<std::size_t>(
                                         std::floor(train_fraction * static_cast<double>(n))));
        for (std::size_t i = 0; i < n; ++i) {
            append_record(i < train_n ? out.train : out.test, data, order[i]);
        }
    }
    return out;
}

LabeledPreshapes subsample_per_class(const LabeledPreshapes& train, int n_i, std::uint64_t seed) {
    if (n_i < 1) throw InvalidInput("per-class subsample size must be >= 1");
    const auto by_class = indices_by_class(train);
    if (by_class.empty()) throw EmptyInput("cannot subsample an empty dataset");

    LabeledPreshapes out;
    Rng rng(seed);
    for (const auto& [label, indices] : by_class) {
        if (indices.size() < static_cast<std::size_t>(n_i)) {
            throw InsufficientClassSize("class " + std::to_string(label) + " has " +
                                        std::to_string(indices.size()) +
                                        " training samples, needs " + std::to_string(n_i));
        }
        const auto picks =
            sample_without_replacement(indices.size(), static_cast<std::size_t>(n_i), rng);
        for (const std::size_t p : picks) append_record(out, train, indices[p]);
    }
    return out;
}

MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& truth,
                              const std::vector<int>& classes) {
    if (predictions.size() != truth.size()) {
        throw LabelMismatch("predictions and truth have different lengths");
    }
    if (classes.empty()) throw LabelMismatch("class list is empty");

    std::map<int, std::size_t> class_index;
    for (std::size_t c = 0; c < classes.size(); ++c) class_index[classes[c]] = c;

    MetricsReport report;
    report.class_labels = classes;
    report.per_class.assign(classes.size(), ClassCounts{});

    const int n = static_cast<int>(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!class_index.count(truth[i])) {
            throw LabelMismatch("true label " + std::to_string(truth[i]) +
                                " is not in the class list");
        }
        if (!class_index.count(predictions[i])) {
            throw LabelMismatch("predicted label " + std::to_string(predictions[i]) +
                                " is not in the class list");
        }
        const std::size_t t = class_index[truth[i]];
        const std::size_t p = class_index[predictions[i]];
        if (t == p) {
            report.per_class[t].tp += 1;
        } else {
            report.per_class[t].fn += 1;
            report.per_class[p].fp += 1;
        }
    }

    double prec_sum = 0.0;
    double rec_sum = 0.0;
    double acc_sum = 0.0;
    for (ClassCounts& c : report.per_class) {
        c.tn = n - c.tp - c.fp - c.fn;
        if (c.tp + c.fp > 0) prec_sum += static_cast<double>(c.tp) / (c.tp + c.fp);
        if (c.tp + c.fn > 0) rec_sum += static_cast<double>(c.tp) / (c.tp + c.fn);
        acc_sum += static_cast<double>(c.tp + c.tn) / n;
    }
    const double count = static_cast<double>(classes.size());
    report.macro_precision = prec_sum / count;
    report.macro_recall = rec_sum / count;
    report.avg_accuracy = acc_sum / count;
    const double pr = report.macro_precision + report.macro_recall;
    report.f1 = pr > 0.0 ? 2.0 * report.macro_precision * report.macro_recall / pr : 0.0;
    return report;
}

Prediction FittedMethod::predict(const Preshape& u) const {
    if (krrc) return krrc_predict(*krrc, u);
    return rrc_predict(*rrc, u);
}

FittedMethod fit_method(EvalMethod method, const LabeledPreshapes& train, double lambda,
                        double sigma_sq) {
    FittedMethod fitted;
    fitted.method = method;
    if (method == EvalMethod::NaiveRrc) {
        fitted.rrc = std::make_unique<NaiveRrcModel>(rrc_fit(train, lambda));
        return fitted;
    }
    const KernelSpec kernel(method_kernel_family(method), sigma_sq);
    // RIE Grams can be indefinite; run with the fallback and surface it as a
    // warning rather than aborting the cell.
    const bool allow_indefinite = method == EvalMethod::RieKrrc;
    fitted.krrc = std::make_unique<KrrcModel>(krrc_fit(train, kernel, lambda, allow_indefinite));
    fitted.warn = fitted.krrc->used_indefinite_solve;
    return fitted;
}

namespace {

double evaluate_holdout(EvalMethod method, const LabeledPreshapes& inner_train,
                        const LabeledPreshapes& inner_val, const std::vector<int>& classes,
                        double lambda, double sigma_sq) {
    const FittedMethod fitted = fit_method(method, inner_train, lambda, sigma_sq);
    std::vector<int> preds;
    preds.reserve(inner_val.size());
    for (const Preshape& u : inner_val.shapes) preds.push_back(fitted.predict(u).label);
    return compute_metrics(preds, inner_val.labels, classes).f1;
}

}  // namespace

GridSearchResult grid_search(const LabeledPreshapes& train, const std::vector<double>& lambda_grid,
                             const std::vector<double>& sigma_sq_grid, EvalMethod method,
                             std::uint64_t inner_seed) {
    if (lambda_grid.empty()) throw InvalidInput("lambda grid must be nonempty");
    if (method_uses_kernel(method) && sigma_sq_grid.empty()) {
        throw InvalidInput("sigma_sq grid must be nonempty");
    }

    const SplitResult inner = stratified_split(train, 0.8, inner_seed);
    const std::vector<int> classes = sorted_class_list(train);

    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    GridSearchResult best{0.0, nan, -1.0};
    bool have_best = false;

    // Selection compares values, not grid positions, so reordering the grids
    // cannot change the winner.
    const auto consider = [&](double lambda, double sigma_sq, double f1) {
        const bool better =
            !have_best || f1 > best.validation_f1 ||
            (f1 == best.validation_f1 &&
             (lambda < best.lambda ||
              (lambda == best.lambda && !std::isnan(sigma_sq) && sigma_sq < best.sigma_sq)));
        if (better) {
            best = GridSearchResult{lambda, sigma_sq, f1};
            have_best = true;
        }
    };

    for (const double lambda : lambda_grid) {
        if (method == EvalMethod::NaiveRrc) {
            consider(lambda, nan,
                     evaluate_holdout(method, inner.train, inner.test, classes, lambda, nan));
        } else {
            for (const double sigma_sq : sigma_sq_grid) {
                consider(lambda, sigma_sq,
                         evaluate_holdout(method, inner.train, inner.test, classes, lambda,
                                          sigma_sq));
            }
        }
    }
    return best;
}

std::vector<CellTask> plan_cells(const ExperimentPlan& plan) {
    validate_plan(plan);
    std::vector<CellTask> cells;
    for (const EvalMethod method : plan.methods) {
        for (const int n_i : plan.subsample_sizes) {
            for (int r = 0; r < plan.replicates; ++r) {
                const std::uint64_t base = plan.seed + static_cast<std::uint64_t>(r);
                const std::uint64_t cell_seed = derive_seed(
                    base, kSaltCell,
                    static_cast<std::uint64_t>(n_i) * 16 + static_cast<std::uint64_t>(method_index(method)));
                cells.push_back(CellTask{method, n_i, r, cell_seed});
            }
        }
    }
    return cells;
}

CellResult run_cell(const LabeledPreshapes& data, const ExperimentPlan& plan,
                    const CellTask& cell) {
    const std::uint64_t base = plan.seed + static_cast<std::uint64_t>(cell.replicate);
    const std::uint64_t method_salt =
        static_cast<std::uint64_t>(cell.n_i) * 16 +
        static_cast<std::uint64_t>(method_index(cell.method));

    const SplitResult split = stratified_split(data, plan.train_fraction, base);
    const LabeledPreshapes sub = subsample_per_class(
        split.train, cell.n_i, derive_seed(base, kSaltSubsample, static_cast<std::uint64_t>(cell.n_i)));
    const GridSearchResult gs =
        grid_search(sub, plan.lambda_grid, plan.sigma_sq_grid, cell.method,
                    derive_seed(base, kSaltGridSearch, method_salt));

    const FittedMethod fitted = fit_method(cell.method, sub, gs.lambda, gs.sigma_sq);
    std::vector<int> preds;
    preds.reserve(split.test.size());
    for (const Preshape& u : split.test.shapes) preds.push_back(fitted.predict(u).label);

    CellResult result;
    result.method = cell.method;
    result.n_i = cell.n_i;
    result.replicate = cell.replicate;
    result.lambda = gs.lambda;
    result.sigma_sq = gs.sigma_sq;
    result.metrics = compute_metrics(preds, split.test.labels, sorted_class_list(data));
    result.warn = fitted.warn;
    return result;
}

std::vector<CellResult> run_cells(const LabeledPreshapes& data, const ExperimentPlan& plan,
                                  const std::vector<CellTask>& cells, int workers,
                                  const std::function<void(const CellResult&)>& on_done) {
    std::vector<CellResult> results(cells.size());
    if (cells.empty()) return results;

    const int thread_count = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
    std::atomic<std::size_t> next{0};
    std::mutex done_mutex;
    std::exception_ptr failure;

    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                CellResult r = run_cell(data, plan, cells[i]);
                if (on_done) {
                    const std::lock_guard<std::mutex> lock(done_mutex);
                    on_done(r);
                }
                results[i] = std::move(r);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(done_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cells.size());  // stop handing out work
                return;
            }
        }
    };

    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

std::vector<SummaryRow> summarize(const std::vector<CellResult>& rows) {
    struct Accum {
        std::vector<double> precision, recall, f1, accuracy;
    };
    std::map<std::pair<int, int>, Accum> groups;  // (method index, n_i)
    for (const CellResult& row : rows) {
        Accum& a = groups[{method_index(row.method), row.n_i}];
        a.precision.push_back(row.metrics.macro_precision);
        a.recall.push_back(row.metrics.macro_recall);
        a.f1.push_back(row.metrics.f1);
        a.accuracy.push_back(row.metrics.avg_accuracy);
    }

    const auto mean_sd = [](const std::vector<double>& v) {
        const double n = static_cast<double>(v.size());
        double mean = 0.0;
        for (const double x : v) mean += x;
        mean /= n;
        double ss = 0.0;
        for (const double x : v) ss += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        return std::pair<double, double>{mean, sd};
    };

    std::vector<SummaryRow> summary;
    for (const auto& [key, a] : groups) {
        const EvalMethod method = static_cast<EvalMethod>(key.first);
        const int n_i = key.second;
        for (const auto& [name, values] :
             {std::pair<const char*, const std::vector<double>*>{"precision", &a.precision},
              {"recall", &a.recall},
              {"f1", &a.f1},
              {"accuracy", &a.accuracy}}) {
            const auto [mean, sd] = mean_sd(*values);
            summary.push_back(SummaryRow{method, n_i, name, mean, sd});
        }
    }
    return summary;
}

ExperimentResults run_experiment(const LabeledPreshapes& data, const ExperimentPlan& plan,
                                 int workers, const std::function<void(const CellResult&)>& on_done) {
    const std::vector<CellTask> cells = plan_cells(plan);
    ExperimentResults results;
    results.rows = run_cells(data, plan, cells, workers, on_done);
    std::sort(results.rows.begin(), results.rows.end(),
              [](const CellResult& a, const CellResult& b) {
                  return std::tuple(method_index(a.method), a.n_i, a.replicate) <
                         std::tuple(method_index(b.method), b.n_i, b.replicate);
              });
    results.summary = summarize(results.rows);
    return results;
}

}  // namespace shapekrrc
