#pragma once

#include <map>
#include <string>
#include <vector>

#include "dnfcount/dataset.hpp"
#include "dnfcount/model.hpp"

namespace dnfc {

struct EvalReport {
    std::vector<double> thresholds;
    std::vector<double> accuracy;                      // % per threshold
    std::map<int, std::vector<double>> accuracy_by_n;  // keyed by gen_n
    std::map<int, std::vector<double>> accuracy_by_w;  // keyed by gen_width
    size_t records = 0;
};

// Accuracy at threshold t = fraction of records whose predicted probability
// exp(pred mean) is within t of the label probability exp(label mean).
EvalReport evaluate_model(nn::ModelParams& params, const Dataset& ds,
                          const std::vector<double>& thresholds = {0.02, 0.05, 0.10, 0.15});

std::string eval_report_json(const EvalReport& report);

// 2-D histogram over (label probability, predicted probability) in [0,1]^2.
std::vector<std::vector<long long>> heatmap(nn::ModelParams& params, const Dataset& ds,
                                            int bins);
std::string heatmap_csv(const std::vector<std::vector<long long>>& bins);

struct BenchCell {
    int n = 0, m = 0, width = 0;
    long long edges = 0;
    long long messages_per_iteration = 0;
    double klm_seconds = 0.0;
    double gnn_seconds = 0.0;
};

struct BenchReport {
    std::vector<BenchCell> cells;
    double gnn_fit_slope = 0.0;      // least-squares fit of GNN time vs edge count
    double gnn_fit_intercept = 0.0;
    double gnn_fit_r2 = 0.0;
    std::vector<double> klm_doubling_ratios;  // time(2n)/time(n) along the sweep
};

// Median-of-repeats wall-clock comparison on a fixed-width sweep, with the
// analytic message tally per formula. A warm-up run is excluded.
BenchReport bench_sweep(const std::vector<int>& ns, int width, double m_fraction,
                        nn::ModelParams& params, const KlmParams& klm, int repeats,
                        uint64_t seed, bool run_klm = true);

std::string bench_report_json(const BenchReport& report);

// Per-iteration predicted probabilities, one row per formula, T columns.
std::vector<std::vector<double>> trace_table(nn::ModelParams& params, const Dataset& ds);
std::string trace_csv(const std::vector<std::vector<double>>& table);

}  // namespace dnfc
