#include "dnfcount/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace dnfc {

namespace {

using nlohmann::json;

struct PendingRecord {
    DatasetRecord rec;  // label fields filled in later
};

}  // namespace

Dataset build_dataset(const GridConfig& grid, const KlmParams& klm, int threads) {
    if (grid.formulas_per_cell < 1) throw std::invalid_argument("formulas_per_cell must be >= 1");
    std::vector<PendingRecord> pending;
    uint64_t formula_index = 0;

    for (int n : grid.ns) {
        for (int w : grid.widths) {
            for (double frac : grid.m_fractions) {
                if (w == 3 && frac == 0.25) continue;  // invalid grid cell
                int m = static_cast<int>(std::lround(frac * n));
                if (m < 1) continue;
                for (int fi = 0; fi < grid.formulas_per_cell; ++fi, ++formula_index) {
                    Rng frng = Rng::stream(grid.master_seed, formula_index);

                    GeneratorConfig gcfg;
                    gcfg.n = n;
                    gcfg.m = m;
                    gcfg.min_width = w;
                    gcfg.max_width = w;
                    gcfg.max_retries = grid.max_retries;
                    if (grid.auto_qr) {
                        QrSample qr = sample_experiment_q_r(n, m, w, frng);
                        gcfg.q = qr.q;
                        gcfg.r = qr.r;
                    } else {
                        gcfg.q = grid.q;
                        gcfg.r = grid.r;
                    }
                    gcfg.seed = frng.next_u64();

                    DnfFormula formula;
                    try {
                        formula = generate_formula(gcfg);
                    } catch (const RetryExhausted& e) {
                        throw RetryExhausted("cell n=" + std::to_string(n) + " w=" +
                                             std::to_string(w) + " m=" + std::to_string(m) +
                                             ": " + e.what());
                    }

                    WeightAssignment base = sample_base_distribution(n, frng);
                    auto shifted = quarter_increments(base);
                    std::string fid = "n" + std::to_string(n) + "_w" + std::to_string(w) +
                                      "_m" + std::to_string(m) + "_f" + std::to_string(fi);
                    for (int dist = 0; dist < 4; ++dist) {
                        DatasetRecord r;
                        r.id = fid + "_d" + std::to_string(dist);
                        r.formula = formula;
                        if (n > grid.inline_var_limit) r.formula_path = fid + ".wdnf";
                        r.distribution = dist;
                        r.weights = dist == 0 ? base : shifted[dist - 1];
                        r.epsilon = klm.epsilon;
                        r.delta = klm.delta;
                        r.seed = frng.next_u64();
                        r.gen_n = n;
                        r.gen_m = m;
                        r.gen_width = w;
                        r.gen_q = gcfg.q;
                        r.gen_r = gcfg.r;
                        pending.push_back({std::move(r)});
                    }
                }
            }
        }
    }

    // Label in parallel; each record owns an independent seeded stream, and
    // results are merged in record order so output is deterministic.
    std::vector<int> status(pending.size(), 0);  // 0 ok, 1 zero-sum, 2 zero-hits
    auto worker = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            DatasetRecord& r = pending[i].rec;
            KlmParams kp{r.epsilon, r.delta, r.seed};
            try {
                KlmResult res = klm_estimate(r.formula, r.weights, kp);
                GaussianLabel label = fit_gaussian_label(res, kp);
                r.label_mean = label.mean;
                r.label_sigma = label.sigma;
            } catch (const ZeroSumError&) {
                status[i] = 1;
            } catch (const ZeroHitsError&) {
                status[i] = 2;
            }
        }
    };
    if (threads <= 1) {
        worker(0, pending.size());
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (pending.size() + threads - 1) / threads;
        for (int ti = 0; ti < threads; ++ti) {
            size_t b = std::min(pending.size(), ti * chunk);
            size_t e = std::min(pending.size(), (ti + 1) * chunk);
            if (b < e) pool.emplace_back(worker, b, e);
        }
        for (auto& th : pool) th.join();
    }

    Dataset out;
    for (size_t i = 0; i < pending.size(); ++i) {
        if (status[i] == 0) {
            out.records.push_back(std::move(pending[i].rec));
        } else {
            out.dropped.push_back(
                {pending[i].rec.id, status[i] == 1 ? "zero-sum" : "zero-hits"});
        }
    }
    return out;
}

std::string record_to_json(const DatasetRecord& r) {
    json j;
    j["schema"] = 1;
    j["id"] = r.id;
    j["n"] = r.formula.num_vars;
    if (r.formula_path.empty()) {
        json clauses = json::array();
        for (const Clause& c : r.formula.clauses) {
            json lits = json::array();
            for (const Literal& l : c.literals) lits.push_back(l.positive ? l.var : -l.var);
            clauses.push_back(lits);
        }
        j["clauses"] = clauses;
    } else {
        j["path"] = r.formula_path;
    }
    j["dist"] = r.distribution;
    j["weights"] = r.weights;
    j["label_mean"] = r.label_mean;
    j["label_sigma"] = r.label_sigma;
    j["epsilon"] = r.epsilon;
    j["delta"] = r.delta;
    j["seed"] = r.seed;
    j["gen"] = {{"n", r.gen_n}, {"m", r.gen_m},     {"w", r.gen_width},
                {"q", r.gen_q}, {"r", r.gen_r}};
    return j.dump();
}

DatasetRecord record_from_json(const std::string& line, const std::string& base_dir) {
    json j = json::parse(line);
    if (j.at("schema") != 1) throw std::runtime_error("unsupported dataset schema");
    DatasetRecord r;
    r.id = j.at("id").get<std::string>();
    int n = j.at("n").get<int>();
    if (j.contains("path")) {
        r.formula_path = j.at("path").get<std::string>();
        std::filesystem::path p =
            base_dir.empty() ? std::filesystem::path(r.formula_path)
                             : std::filesystem::path(base_dir) / r.formula_path;
        r.formula = parse_formula_file(p.string()).formula;
    } else {
        r.formula.num_vars = n;
        for (const auto& lits : j.at("clauses")) {
            Clause c;
            for (int lit : lits) c.literals.push_back({std::abs(lit), lit > 0});
            r.formula.clauses.push_back(std::move(c));
        }
    }
    r.distribution = j.at("dist").get<int>();
    r.weights = j.at("weights").get<WeightAssignment>();
    r.label_mean = j.at("label_mean").get<double>();
    r.label_sigma = j.at("label_sigma").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    r.delta = j.at("delta").get<double>();
    r.seed = j.at("seed").get<uint64_t>();
    const json& g = j.at("gen");
    r.gen_n = g.at("n").get<int>();
    r.gen_m = g.at("m").get<int>();
    r.gen_width = g.at("w").get<int>();
    r.gen_q = g.at("q").get<double>();
    r.gen_r = g.at("r").get<double>();
    return r;
}

void write_dataset(const std::string& path, const Dataset& ds) {
    std::filesystem::path p(path);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const DatasetRecord& r : ds.records) {
        if (!r.formula_path.empty() && r.distribution == 0) {
            write_formula_file((p.parent_path() / r.formula_path).string(), r.formula,
                               r.weights);
        }
        out << record_to_json(r) << "\n";
    }
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string base_dir = std::filesystem::path(path).parent_path().string();
    Dataset ds;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ds.records.push_back(record_from_json(line, base_dir));
    }
    return ds;
}

std::string dataset_manifest(const GridConfig& grid, const KlmParams& klm, const Dataset& ds) {
    json j;
    j["schema"] = 1;
    j["grid"] = {{"ns", grid.ns},
                 {"widths", grid.widths},
                 {"m_fractions", grid.m_fractions},
                 {"formulas_per_cell", grid.formulas_per_cell},
                 {"auto_qr", grid.auto_qr},
                 {"q", grid.q},
                 {"r", grid.r},
                 {"master_seed", grid.master_seed}};
    j["klm"] = {{"epsilon", klm.epsilon}, {"delta", klm.delta}};
    j["rng"] = {{"algorithm", "splitmix64+mt19937_64"},
                {"streams", "per-formula, derived from (master_seed, formula_index)"}};
    j["records"] = ds.records.size();
    json dropped = json::array();
    for (const DroppedRecord& d : ds.dropped) dropped.push_back({{"id", d.id}, {"reason", d.reason}});
    j["dropped"] = dropped;
    return j.dump(2);
}

}  // namespace dnfc
