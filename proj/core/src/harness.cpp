#include "dnfcount/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

namespace dnfc {

namespace {

using nlohmann::json;

std::vector<double> percent(const std::vector<long long>& hits, size_t total) {
    std::vector<double> out;
    out.reserve(hits.size());
    for (long long h : hits) out.push_back(total == 0 ? 0.0 : 100.0 * h / total);
    return out;
}

}  // namespace

EvalReport evaluate_model(nn::ModelParams& params, const Dataset& ds,
                          const std::vector<double>& thresholds) {
    EvalReport rep;
    rep.thresholds = thresholds;
    rep.records = ds.records.size();

    std::vector<long long> overall(thresholds.size(), 0);
    std::map<int, std::pair<std::vector<long long>, size_t>> by_n, by_w;

    for (const DatasetRecord& r : ds.records) {
        double pred = nn::predict_wmc(r.formula, r.weights, params);
        double label = std::exp(r.label_mean);
        double diff = std::abs(pred - label);
        auto& bn = by_n.try_emplace(r.gen_n, std::vector<long long>(thresholds.size(), 0), 0)
                       .first->second;
        auto& bw = by_w.try_emplace(r.gen_width, std::vector<long long>(thresholds.size(), 0), 0)
                       .first->second;
        bn.second += 1;
        bw.second += 1;
        for (size_t t = 0; t < thresholds.size(); ++t) {
            if (diff <= thresholds[t]) {
                overall[t] += 1;
                bn.first[t] += 1;
                bw.first[t] += 1;
            }
        }
    }

    rep.accuracy = percent(overall, rep.records);
    for (auto& [n, acc] : by_n) rep.accuracy_by_n[n] = percent(acc.first, acc.second);
    for (auto& [w, acc] : by_w) rep.accuracy_by_w[w] = percent(acc.first, acc.second);
    return rep;
}

std::string eval_report_json(const EvalReport& report) {
    json j;
    j["thresholds"] = report.thresholds;
    j["records"] = report.records;
    j["accuracy"] = report.accuracy;
    json bn = json::object(), bw = json::object();
    for (const auto& [n, acc] : report.accuracy_by_n) bn[std::to_string(n)] = acc;
    for (const auto& [w, acc] : report.accuracy_by_w) bw[std::to_string(w)] = acc;
    j["accuracy_by_n"] = bn;
    j["accuracy_by_w"] = bw;
    return j.dump(2);
}

std::vector<std::vector<long long>> heatmap(nn::ModelParams& params, const Dataset& ds,
                                            int bins) {
    if (bins < 2) throw std::invalid_argument("heatmap requires at least 2 bins");
    std::vector<std::vector<long long>> grid(bins, std::vector<long long>(bins, 0));
    auto bin_of = [bins](double p) {
        int b = static_cast<int>(p * bins);
        return std::clamp(b, 0, bins - 1);
    };
    for (const DatasetRecord& r : ds.records) {
        double pred = nn::predict_wmc(r.formula, r.weights, params);
        double label = std::exp(r.label_mean);
        grid[bin_of(label)][bin_of(pred)] += 1;
    }
    return grid;
}

std::string heatmap_csv(const std::vector<std::vector<long long>>& bins) {
    std::string out;
    for (const auto& row : bins) {
        for (size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += std::to_string(row[j]);
        }
        out += '\n';
    }
    return out;
}

namespace {

double median_seconds(std::vector<double>& xs) {
    std::sort(xs.begin(), xs.end());
    size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

template <typename Fn>
double time_median(Fn&& fn, int repeats) {
    fn();  // warm-up, excluded
    std::vector<double> times;
    times.reserve(repeats);
    for (int i = 0; i < repeats; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    return median_seconds(times);
}

}  // namespace

BenchReport bench_sweep(const std::vector<int>& ns, int width, double m_fraction,
                        nn::ModelParams& params, const KlmParams& klm, int repeats,
                        uint64_t seed, bool run_klm) {
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    BenchReport rep;

    for (size_t i = 0; i < ns.size(); ++i) {
        int n = ns[i];
        GeneratorConfig gcfg;
        gcfg.n = n;
        gcfg.m = std::max(1, static_cast<int>(std::lround(m_fraction * n)));
        gcfg.min_width = width;
        gcfg.max_width = width;
        gcfg.seed = seed + i;

        DnfFormula f = generate_formula(gcfg);
        Rng wrng = Rng::stream(seed, 1000 + i);
        WeightAssignment w = sample_base_distribution(n, wrng);
        nn::DnfGraph graph = nn::encode_graph(f);

        BenchCell cell;
        cell.n = n;
        cell.m = gcfg.m;
        cell.width = width;
        cell.edges = graph.num_edges();
        cell.messages_per_iteration = graph.messages_per_iteration();
        cell.gnn_seconds = time_median(
            [&] {
                nn::Tape t;
                nn::forward_on_tape(t, graph, w, params);
            },
            repeats);
        if (run_klm) {
            cell.klm_seconds = time_median(
                [&] {
                    KlmParams kp = klm;
                    kp.seed = seed + 7 * i;
                    (void)klm_estimate(f, w, kp);
                },
                repeats);
        }
        rep.cells.push_back(cell);
    }

    // least-squares fit of GNN time against edge count
    size_t c = rep.cells.size();
    if (c >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const BenchCell& cell : rep.cells) {
            double x = static_cast<double>(cell.edges);
            sx += x;
            sy += cell.gnn_seconds;
            sxx += x * x;
            sxy += x * cell.gnn_seconds;
        }
        double denom = c * sxx - sx * sx;
        rep.gnn_fit_slope = (c * sxy - sx * sy) / denom;
        rep.gnn_fit_intercept = (sy - rep.gnn_fit_slope * sx) / c;
        double ss_res = 0, ss_tot = 0, mean_y = sy / c;
        for (const BenchCell& cell : rep.cells) {
            double fit = rep.gnn_fit_slope * cell.edges + rep.gnn_fit_intercept;
            ss_res += (cell.gnn_seconds - fit) * (cell.gnn_seconds - fit);
            ss_tot += (cell.gnn_seconds - mean_y) * (cell.gnn_seconds - mean_y);
        }
        rep.gnn_fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    }

    if (run_klm) {
        for (size_t i = 0; i + 1 < rep.cells.size(); ++i) {
            if (rep.cells[i + 1].n == 2 * rep.cells[i].n && rep.cells[i].klm_seconds > 0.0) {
                rep.klm_doubling_ratios.push_back(rep.cells[i + 1].klm_seconds /
                                                  rep.cells[i].klm_seconds);
            }
        }
    }
    return rep;
}

std::string bench_report_json(const BenchReport& report) {
    json j;
    json cells = json::array();
    for (const BenchCell& c : report.cells) {
        cells.push_back({{"n", c.n},
                         {"m", c.m},
                         {"w", c.width},
                         {"edges", c.edges},
                         {"messages_per_iteration", c.messages_per_iteration},
                         {"klm_seconds", c.klm_seconds},
                         {"gnn_seconds", c.gnn_seconds}});
    }
    j["cells"] = cells;
    j["gnn_fit"] = {{"slope", report.gnn_fit_slope},
                    {"intercept", report.gnn_fit_intercept},
                    {"r2", report.gnn_fit_r2}};
    j["klm_doubling_ratios"] = report.klm_doubling_ratios;
    return j.dump(2);
}

std::vector<std::vector<double>> trace_table(nn::ModelParams& params, const Dataset& ds) {
    std::vector<std::vector<double>> table;
    for (const DatasetRecord& r : ds.records) {
        auto trace = nn::forward_trace(r.formula, r.weights, params);
        std::vector<double> row;
        row.reserve(trace.size());
        for (const auto& pred : trace) row.push_back(std::exp(pred.mean));
        table.push_back(std::move(row));
    }
    return table;
}

std::string trace_csv(const std::vector<std::vector<double>>& table) {
    std::string out;
    for (const auto& row : table) {
        for (size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += format_double(row[j]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace dnfc
