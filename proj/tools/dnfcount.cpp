#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnfcount/dataset.hpp"
#include "dnfcount/exact.hpp"
#include "dnfcount/formula.hpp"
#include "dnfcount/generator.hpp"
#include "dnfcount/harness.hpp"
#include "dnfcount/klm.hpp"
#include "dnfcount/model.hpp"
#include "dnfcount/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        write_text(out_path, text);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"weighted #DNF counting toolkit"};
    app.require_subcommand(1);
    int threads = 1;
    bool verbose = false;
    app.add_option("--threads", threads, "worker threads for labeling");
    app.add_flag("--verbose", verbose, "verbose progress output");

    // generate
    auto* gen = app.add_subcommand("generate", "generate random weighted DNF instances");
    dnfc::GeneratorConfig gcfg;
    int gen_count = 1;
    bool auto_qr = false;
    std::string gen_out = ".";
    gen->add_option("--n", gcfg.n, "variable count")->required();
    gen->add_option("--m", gcfg.m, "clause count")->required();
    gen->add_option("--min-width", gcfg.min_width, "minimum clause width")->required();
    gen->add_option("--max-width", gcfg.max_width, "maximum clause width")->required();
    gen->add_option("--q", gcfg.q, "privileged variable fraction");
    gen->add_option("--r", gcfg.r, "privileged excess share");
    gen->add_flag("--auto-qr", auto_qr, "sample (q, r) per formula");
    gen->add_option("--seed", gcfg.seed, "master seed");
    gen->add_option("--count", gen_count, "number of formulas");
    gen->add_option("--out", gen_out, "output directory");

    // label
    auto* label = app.add_subcommand("label", "generate and KLM-label a dataset grid");
    dnfc::GridConfig grid;
    dnfc::KlmParams label_klm;
    std::string label_out = "dataset.jsonl";
    label->add_option("--ns", grid.ns, "variable counts")->required();
    label->add_option("--widths", grid.widths, "clause widths")->required();
    label->add_option("--m-fracs", grid.m_fractions, "clause count fractions of n");
    label->add_option("--per-cell", grid.formulas_per_cell, "formulas per grid cell");
    label->add_flag("--auto-qr", grid.auto_qr, "sample (q, r) per formula");
    label->add_option("--q", grid.q, "fixed privileged fraction");
    label->add_option("--r", grid.r, "fixed privileged excess share");
    label->add_option("--epsilon", label_klm.epsilon, "KLM epsilon");
    label->add_option("--delta", label_klm.delta, "KLM delta");
    label->add_option("--seed", grid.master_seed, "master seed");
    label->add_option("--out", label_out, "output JSONL path");

    // exact
    auto* exact = app.add_subcommand("exact", "exact weighted model count");
    std::string exact_input, exact_method = "enum";
    exact->add_option("--input", exact_input, "wdnf file")->required();
    exact->add_option("--method", exact_method, "enum|ie")
        ->check(CLI::IsMember({"enum", "ie"}));

    // klm
    auto* klm_cmd = app.add_subcommand("klm", "KLM approximate count");
    std::string klm_input;
    dnfc::KlmParams klm_params;
    int klm_repeat = 1;
    klm_cmd->add_option("--input", klm_input, "wdnf file")->required();
    klm_cmd->add_option("--epsilon", klm_params.epsilon, "multiplicative error");
    klm_cmd->add_option("--delta", klm_params.delta, "confidence");
    klm_cmd->add_option("--seed", klm_params.seed, "seed");
    klm_cmd->add_option("--repeat", klm_repeat, "independent runs");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the GNN estimator");
    std::string train_dataset, train_out = "model.json";
    dnfc::nn::ModelConfig mcfg;
    dnfc::nn::TrainConfig tcfg;
    train_cmd->add_option("--dataset", train_dataset, "JSONL dataset")->required();
    train_cmd->add_option("--dim", mcfg.dim, "representation width k");
    train_cmd->add_option("--iters", mcfg.iters, "message passing iterations T");
    train_cmd->add_option("--lr", tcfg.learning_rate, "learning rate");
    train_cmd->add_option("--clip", tcfg.clip_ratio, "gradient clipping ratio");
    train_cmd->add_option("--epochs", tcfg.epochs, "epochs");
    train_cmd->add_option("--batch", tcfg.batch_size, "batch size");
    train_cmd->add_option("--seed", tcfg.seed, "seed");
    train_cmd->add_option("--out", train_out, "model checkpoint path");

    // predict
    auto* predict = app.add_subcommand("predict", "predict a weighted model count");
    std::string predict_model, predict_input;
    predict->add_option("--model", predict_model, "model checkpoint")->required();
    predict->add_option("--input", predict_input, "wdnf file")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "threshold accuracy report");
    std::string eval_model, eval_dataset, eval_out;
    std::vector<double> eval_thresholds = {0.02, 0.05, 0.10, 0.15};
    eval_cmd->add_option("--model", eval_model, "model checkpoint")->required();
    eval_cmd->add_option("--dataset", eval_dataset, "JSONL dataset")->required();
    eval_cmd->add_option("--thresholds", eval_thresholds, "additive thresholds");
    eval_cmd->add_option("--out", eval_out, "report JSON path (stdout if omitted)");

    // heatmap
    auto* heat = app.add_subcommand("heatmap", "prediction-vs-label histogram");
    std::string heat_model, heat_dataset, heat_out;
    int heat_bins = 10;
    heat->add_option("--model", heat_model, "model checkpoint")->required();
    heat->add_option("--dataset", heat_dataset, "JSONL dataset")->required();
    heat->add_option("--bins", heat_bins, "bins per axis");
    heat->add_option("--out", heat_out, "CSV path (stdout if omitted)");

    // bench
    auto* bench = app.add_subcommand("bench", "KLM vs GNN runtime sweep");
    std::string bench_model, bench_out;
    std::vector<int> bench_ns = {100, 200, 400, 800, 1600, 3200};
    int bench_width = 3, bench_repeats = 5;
    double bench_mfrac = 0.5;
    dnfc::KlmParams bench_klm;
    uint64_t bench_seed = 0;
    bool bench_no_klm = false;
    int bench_dim = 32, bench_iters = 8;
    bench->add_option("--model", bench_model, "model checkpoint (fresh params if omitted)");
    bench->add_option("--ns", bench_ns, "variable counts for the sweep");
    bench->add_option("--width", bench_width, "fixed clause width");
    bench->add_option("--m-frac", bench_mfrac, "clause count fraction of n");
    bench->add_option("--repeats", bench_repeats, "timing repeats (median reported)");
    bench->add_option("--epsilon", bench_klm.epsilon, "KLM epsilon");
    bench->add_option("--delta", bench_klm.delta, "KLM delta");
    bench->add_option("--seed", bench_seed, "seed");
    bench->add_flag("--no-klm", bench_no_klm, "skip KLM timing");
    bench->add_option("--dim", bench_dim, "k for fresh params");
    bench->add_option("--iters", bench_iters, "T for fresh params");
    bench->add_option("--out", bench_out, "report JSON path (stdout if omitted)");

    // trace
    auto* trace = app.add_subcommand("trace", "per-iteration prediction trace");
    std::string trace_model, trace_input;
    trace->add_option("--model", trace_model, "model checkpoint")->required();
    trace->add_option("--input", trace_input, "wdnf file")->required();

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();
    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        fs::create_directories(gen_out);
        json manifest;
        manifest["config"] = {{"n", gcfg.n},   {"m", gcfg.m},
                              {"min_width", gcfg.min_width}, {"max_width", gcfg.max_width},
                              {"auto_qr", auto_qr},        {"q", gcfg.q},
                              {"r", gcfg.r},                 {"seed", gcfg.seed},
                              {"count", gen_count}};
        manifest["rng"] = {{"algorithm", "splitmix64+mt19937_64"}};
        json formulas = json::array();
        for (int i = 0; i < gen_count; ++i) {
            dnfc::Rng frng = dnfc::Rng::stream(gcfg.seed, static_cast<uint64_t>(i));
            dnfc::GeneratorConfig fcfg = gcfg;
            if (auto_qr) {
                double mean_w = 0.5 * (gcfg.min_width + gcfg.max_width);
                dnfc::QrSample qr = dnfc::sample_experiment_q_r(gcfg.n, gcfg.m, mean_w, frng);
                fcfg.q = qr.q;
                fcfg.r = qr.r;
            }
            fcfg.seed = frng.next_u64();
            dnfc::DnfFormula f = dnfc::generate_formula(fcfg);
            dnfc::WeightAssignment base = dnfc::sample_base_distribution(gcfg.n, frng);
            auto shifted = dnfc::quarter_increments(base);
            std::string name = "formula_" + std::to_string(i) + ".wdnf";
            dnfc::write_formula_file((fs::path(gen_out) / name).string(), f, base);
            json dists = json::array();
            dists.push_back(base);
            for (const auto& s : shifted) dists.push_back(s);
            formulas.push_back({{"file", name},
                                {"seed", fcfg.seed},
                                {"q", fcfg.q},
                                {"r", fcfg.r},
                                {"distributions", dists}});
            if (verbose) std::cerr << "wrote " << name << "\n";
        }
        manifest["formulas"] = formulas;
        write_text((fs::path(gen_out) / "manifest.json").string(), manifest.dump(2));
        return 0;
    }

    if (label->parsed()) {
        dnfc::Dataset ds = dnfc::build_dataset(grid, label_klm, threads);
        fs::path out(label_out);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        dnfc::write_dataset(label_out, ds);
        write_text(label_out + ".manifest.json", dnfc::dataset_manifest(grid, label_klm, ds));
        if (verbose || !ds.dropped.empty()) {
            std::cerr << ds.records.size() << " records, " << ds.dropped.size()
                      << " dropped\n";
            for (const auto& d : ds.dropped)
                std::cerr << "dropped " << d.id << " (" << d.reason << ")\n";
        }
        return 0;
    }

    if (exact->parsed()) {
        auto [f, w] = dnfc::parse_formula_file(exact_input);
        double count = exact_method == "enum" ? dnfc::exact_wmc_enumeration(f, w)
                                              : dnfc::exact_wmc_inclusion_exclusion(f, w);
        std::printf("%.12g\n", count);
        return 0;
    }

    if (klm_cmd->parsed()) {
        auto [f, w] = dnfc::parse_formula_file(klm_input);
        for (int i = 0; i < klm_repeat; ++i) {
            dnfc::KlmParams p = klm_params;
            p.seed = klm_params.seed + static_cast<uint64_t>(i);
            try {
                dnfc::KlmResult r = dnfc::klm_estimate(f, w, p);
                std::printf("estimate=%.12g tau=%lld hits=%lld\n", r.estimate, r.trials,
                            r.hits);
            } catch (const dnfc::ZeroSumError&) {
                std::printf("estimate=0 tau=0 hits=0 (all clause probabilities zero)\n");
            }
        }
        return 0;
    }

    if (train_cmd->parsed()) {
        dnfc::Dataset ds = dnfc::read_dataset(train_dataset);
        dnfc::nn::ModelParams params = dnfc::nn::init_params(mcfg, tcfg.seed);
        dnfc::nn::train(params, ds, tcfg, [&](int epoch, double loss) {
            if (verbose) std::cerr << "epoch " << epoch << " mean KL " << loss << "\n";
        });
        dnfc::nn::save_checkpoint(train_out, params, tcfg.seed);
        return 0;
    }

    if (predict->parsed()) {
        dnfc::nn::ModelParams params = dnfc::nn::load_checkpoint(predict_model);
        auto [f, w] = dnfc::parse_formula_file(predict_input);
        std::printf("%.12g\n", dnfc::nn::predict_wmc(f, w, params));
        return 0;
    }

    if (eval_cmd->parsed()) {
        dnfc::nn::ModelParams params = dnfc::nn::load_checkpoint(eval_model);
        dnfc::Dataset ds = dnfc::read_dataset(eval_dataset);
        dnfc::EvalReport rep = dnfc::evaluate_model(params, ds, eval_thresholds);
        emit(eval_out, dnfc::eval_report_json(rep));
        return 0;
    }

    if (heat->parsed()) {
        dnfc::nn::ModelParams params = dnfc::nn::load_checkpoint(heat_model);
        dnfc::Dataset ds = dnfc::read_dataset(heat_dataset);
        emit(heat_out, dnfc::heatmap_csv(dnfc::heatmap(params, ds, heat_bins)));
        return 0;
    }

    if (bench->parsed()) {
        dnfc::nn::ModelParams params =
            bench_model.empty()
                ? dnfc::nn::init_params({.dim = bench_dim, .iters = bench_iters}, bench_seed)
                : dnfc::nn::load_checkpoint(bench_model);
        dnfc::BenchReport rep =
            dnfc::bench_sweep(bench_ns, bench_width, bench_mfrac, params, bench_klm,
                              bench_repeats, bench_seed, !bench_no_klm);
        emit(bench_out, dnfc::bench_report_json(rep));
        return 0;
    }

    if (trace->parsed()) {
        dnfc::nn::ModelParams params = dnfc::nn::load_checkpoint(trace_model);
        auto [f, w] = dnfc::parse_formula_file(trace_input);
        auto preds = dnfc::nn::forward_trace(f, w, params);
        for (size_t i = 0; i < preds.size(); ++i) {
            std::printf("%zu %.12g %.12g\n", i + 1, std::exp(preds[i].mean),
                        preds[i].sigma);
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
