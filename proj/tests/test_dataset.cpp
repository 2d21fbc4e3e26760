#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dnfcount/dataset.hpp"

using namespace dnfc;
namespace fs = std::filesystem;

namespace {

GridConfig small_grid() {
    GridConfig g;
    g.ns = {8, 10};
    g.widths = {3};
    g.m_fractions = {0.5, 0.75};
    g.formulas_per_cell = 2;
    g.master_seed = 77;
    return g;
}

}  // namespace

TEST_CASE("build_dataset covers the grid with four distributions per formula") {
    Dataset ds = build_dataset(small_grid(), {}, 1);
    // 2 ns x 1 width x 2 fractions x 2 formulas x 4 distributions
    CHECK(ds.records.size() + ds.dropped.size() == 32);
    int dist_counts[4] = {0, 0, 0, 0};
    for (const DatasetRecord& r : ds.records) {
        CHECK(r.distribution >= 0);
        CHECK(r.distribution <= 3);
        dist_counts[r.distribution] += 1;
        CHECK(r.weights.size() == static_cast<size_t>(r.formula.num_vars));
        CHECK(r.label_sigma > 0.0);
        CHECK(r.label_mean < 0.0);
        CHECK(r.gen_width == 3);
        CHECK((r.gen_n == 8 || r.gen_n == 10));
        CHECK_FALSE(r.id.empty());
    }
    CHECK(dist_counts[0] > 0);
}

TEST_CASE("build_dataset is deterministic and thread-count independent") {
    Dataset a = build_dataset(small_grid(), {}, 1);
    Dataset b = build_dataset(small_grid(), {}, 4);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].id == b.records[i].id);
        CHECK(a.records[i].label_mean == b.records[i].label_mean);
        CHECK(a.records[i].weights == b.records[i].weights);
    }
}

TEST_CASE("the infeasible width-3 quarter cell is skipped") {
    GridConfig g = small_grid();
    g.m_fractions = {0.25, 0.5};
    Dataset ds = build_dataset(g, {}, 1);
    for (const DatasetRecord& r : ds.records) {
        CHECK(r.gen_m != static_cast<int>(std::lround(0.25 * r.gen_n)));
    }
}

TEST_CASE("record json round trip") {
    Dataset ds = build_dataset(small_grid(), {}, 1);
    REQUIRE_FALSE(ds.records.empty());
    for (const DatasetRecord& r : ds.records) {
        DatasetRecord back = record_from_json(record_to_json(r));
        CHECK(back.id == r.id);
        CHECK(back.formula == r.formula);
        CHECK(back.weights == r.weights);
        CHECK(back.label_mean == r.label_mean);
        CHECK(back.label_sigma == r.label_sigma);
        CHECK(back.distribution == r.distribution);
        CHECK(back.seed == r.seed);
        CHECK(back.gen_n == r.gen_n);
        CHECK(back.gen_m == r.gen_m);
        CHECK(back.gen_width == r.gen_width);
    }
}

TEST_CASE("dataset file round trip") {
    fs::path dir = fs::temp_directory_path() / "dnfcount_ds_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    Dataset ds = build_dataset(small_grid(), {}, 2);
    std::string path = (dir / "ds.jsonl").string();
    write_dataset(path, ds);
    Dataset back = read_dataset(path);
    REQUIRE(back.records.size() == ds.records.size());
    for (size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(back.records[i].id == ds.records[i].id);
        CHECK(back.records[i].formula == ds.records[i].formula);
        CHECK(back.records[i].weights == ds.records[i].weights);
        CHECK(back.records[i].label_mean == ds.records[i].label_mean);
    }
    fs::remove_all(dir);
}

TEST_CASE("large formulas are stored as side files") {
    GridConfig g;
    g.ns = {30};
    g.widths = {3};
    g.m_fractions = {0.5};
    g.formulas_per_cell = 1;
    g.master_seed = 5;
    g.inline_var_limit = 10;  // force the side-file path
    Dataset ds = build_dataset(g, {}, 1);
    REQUIRE_FALSE(ds.records.empty());
    for (const DatasetRecord& r : ds.records) CHECK_FALSE(r.formula_path.empty());

    fs::path dir = fs::temp_directory_path() / "dnfcount_side_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string path = (dir / "ds.jsonl").string();
    write_dataset(path, ds);
    Dataset back = read_dataset(path);
    REQUIRE(back.records.size() == ds.records.size());
    for (size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(back.records[i].formula == ds.records[i].formula);
    }
    fs::remove_all(dir);
}

TEST_CASE("manifest describes the build") {
    Dataset ds = build_dataset(small_grid(), {}, 1);
    std::string manifest = dataset_manifest(small_grid(), {}, ds);
    CHECK(manifest.find("77") != std::string::npos);          // master seed
    CHECK(manifest.find("records") != std::string::npos);
}
