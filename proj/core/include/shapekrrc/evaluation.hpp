#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "shapekrrc/classifiers.hpp"

namespace shapekrrc {

enum class EvalMethod { VwgKrrc, FpgKrrc, RieKrrc, NaiveRrc };

std::string method_name(EvalMethod method);                 // "vwg-krrc", ...
EvalMethod method_from_name(const std::string& name);       // InvalidInput on unknown
bool method_uses_kernel(EvalMethod method);
KernelFamily method_kernel_family(EvalMethod method);       // InvalidInput for NaiveRrc

struct ExperimentPlan {
    double train_fraction = 0.6;
    std::vector<int> subsample_sizes = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    int replicates = 20;
    std::vector<double> lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
    std::vector<double> sigma_sq_grid = {1e-2, 1e-1, 1.0, 10.0, 100.0};
    std::uint64_t seed = 0;
    std::vector<EvalMethod> methods = {EvalMethod::VwgKrrc, EvalMethod::FpgKrrc,
                                       EvalMethod::RieKrrc, EvalMethod::NaiveRrc};
};

// Throws InvalidInput when grids are empty, replicates < 1, or the train
// fraction is outside (0, 1).
void validate_plan(const ExperimentPlan& plan);

struct ClassCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int tn = 0;
};

// Macro-averaged confusion metrics. A class with no predicted (resp. true)
// positives contributes 0 to the precision (resp. recall) sum.
struct MetricsReport {
    std::vector<int> class_labels;
    std::vector<ClassCounts> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double f1 = 0.0;
    double avg_accuracy = 0.0;
};

struct SplitResult {
    LabeledPreshapes train;
    LabeledPreshapes test;
};

// Per class, floor(fraction * n) samples go to train (clamped to >= 1), the
// rest to test. Deterministic given the seed. Every class needs >= 2 samples.
SplitResult stratified_split(const LabeledPreshapes& data, double train_fraction,
                             std::uint64_t seed);

// Exactly n_i samples per class, drawn without replacement.
// Throws InsufficientClassSize naming the first class that is too small.
LabeledPreshapes subsample_per_class(const LabeledPreshapes& train, int n_i, std::uint64_t seed);

// Exact confusion-count evaluation over the given class list.
MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& truth,
                              const std::vector<int>& classes);

struct GridSearchResult {
    double lambda;
    double sigma_sq;  // NaN for NaiveRrc (no kernel parameter)
    double validation_f1;
};

// Evaluates every (lambda, sigma_sq) pair on an inner 80/20 stratified
// holdout of `train`, scored by macro F1. Ties break toward the smaller
// lambda, then the smaller sigma_sq, so the selection does not depend on
// grid ordering. NaiveRrc searches the lambda grid only.
GridSearchResult grid_search(const LabeledPreshapes& train, const std::vector<double>& lambda_grid,
                             const std::vector<double>& sigma_sq_grid, EvalMethod method,
                             std::uint64_t inner_seed);

// Fits a method with fixed hyperparameters. RIE-KRRC runs with the indefinite
// fallback enabled so it remains usable; `warn` reports whether any class
// actually needed it.
struct FittedMethod {
    EvalMethod method;
    std::unique_ptr<KrrcModel> krrc;      // set for kernel methods
    std::unique_ptr<NaiveRrcModel> rrc;   // set for NaiveRrc
    bool warn = false;

    Prediction predict(const Preshape& u) const;
};

FittedMethod fit_method(EvalMethod method, const LabeledPreshapes& train, double lambda,
                        double sigma_sq);

// One benchmark cell: a (replicate, n_i, method) triple with its derived seed.
struct CellTask {
    EvalMethod method;
    int n_i;
    int replicate;
    std::uint64_t seed;  // derived cell seed; keys resume checkpoints
};

struct CellResult {
    EvalMethod method;
    int n_i = 0;
    int replicate = 0;
    double lambda = 0.0;
    double sigma_sq = 0.0;  // NaN for NaiveRrc
    MetricsReport metrics;
    bool warn = false;
};

// Full cell grid for a plan, ordered by (method, n_i, replicate).
std::vector<CellTask> plan_cells(const ExperimentPlan& plan);

// Runs one cell: replicate split -> subsample -> grid search -> final fit ->
// test-set metrics. Pure function of (data, plan, cell).
CellResult run_cell(const LabeledPreshapes& data, const ExperimentPlan& plan,
                    const CellTask& cell);

// Runs the given cells across `workers` threads. Results are ordered like
// `cells` regardless of scheduling; `on_done` (if set) fires once per cell
// under a lock, in completion order.
std::vector<CellResult> run_cells(const LabeledPreshapes& data, const ExperimentPlan& plan,
                                  const std::vector<CellTask>& cells, int workers,
                                  const std::function<void(const CellResult&)>& on_done = {});

struct SummaryRow {
    EvalMethod method;
    int n_i = 0;
    std::string metric;  // precision | recall | f1 | accuracy
    double mean = 0.0;
    double sd = 0.0;     // sample standard deviation; 0 for a single replicate
};

std::vector<SummaryRow> summarize(const std::vector<CellResult>& rows);

struct ExperimentResults {
    std::vector<CellResult> rows;       // sorted by (method, n_i, replicate)
    std::vector<SummaryRow> summary;
};

// plan_cells + run_cells + summarize in one call.
ExperimentResults run_experiment(const LabeledPreshapes& data, const ExperimentPlan& plan,
                                 int workers = 1,
                                 const std::function<void(const CellResult&)>& on_done = {});

}  // namespace shapekrrc
