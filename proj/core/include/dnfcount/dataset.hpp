#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dnfcount/formula.hpp"
#include "dnfcount/generator.hpp"
#include "dnfcount/klm.hpp"

namespace dnfc {

struct DatasetRecord {
    std::string id;
    DnfFormula formula;        // inline when small
    std::string formula_path;  // set instead of inline clauses for large formulas
    int distribution = 0;      // 0 = base, 1..3 = quarter increments
    WeightAssignment weights;
    double label_mean = 0.0;  // ln of the KLM estimate
    double label_sigma = 0.0;
    double epsilon = 0.1;
    double delta = 0.05;
    uint64_t seed = 0;  // KLM stream seed for this record
    int gen_n = 0, gen_m = 0, gen_width = 0;
    double gen_q = 0.0, gen_r = 0.0;
};

struct GridConfig {
    std::vector<int> ns;
    std::vector<int> widths;
    std::vector<double> m_fractions = {0.25, 0.375, 0.5, 0.625, 0.75};
    int formulas_per_cell = 1;
    bool auto_qr = false;  // sample (q, r) per formula with the experiment rule
    double q = 0.0, r = 0.0;
    uint64_t master_seed = 0;
    int max_retries = 50;
    // formulas above this variable count are written to files next to the
    // dataset instead of inlined
    int inline_var_limit = 1000;
};

struct DroppedRecord {
    std::string id;
    std::string reason;  // "zero-sum" or "zero-hits"
};

struct Dataset {
    std::vector<DatasetRecord> records;
    std::vector<DroppedRecord> dropped;
};

// Builds the labeled dataset over the grid: per cell, formulas_per_cell
// formulas, each with 4 weight distributions labeled by KLM. The invalid
// cell (w = 3, m = 0.25 n) is skipped. Zero-sum / zero-hit records are
// dropped and logged. Deterministic for a fixed master seed.
Dataset build_dataset(const GridConfig& grid, const KlmParams& klm, int threads = 1);

// JSONL round trip. out_dir receives side files for non-inline formulas.
std::string record_to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const std::string& line, const std::string& base_dir = "");
void write_dataset(const std::string& path, const Dataset& ds);
Dataset read_dataset(const std::string& path);

// Manifest describing how a dataset was produced.
std::string dataset_manifest(const GridConfig& grid, const KlmParams& klm, const Dataset& ds);

}  // namespace dnfc
