#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "dnfcount/generator.hpp"

using namespace dnfc;

namespace {

void check_invariants(const DnfFormula& f, const GeneratorConfig& cfg,
                      const SlotPlan& plan) {
    CHECK(f.num_vars == cfg.n);
    CHECK(f.num_clauses() == cfg.m);

    std::set<int> seen;
    std::map<int, std::set<bool>> polarity;
    for (int j = 0; j < cfg.m; ++j) {
        const Clause& c = f.clauses[j];
        CHECK(c.width() == plan.widths[j]);
        CHECK(c.width() >= cfg.min_width);
        CHECK(c.width() <= cfg.max_width);
        std::set<int> vars;
        for (size_t k = 0; k < c.literals.size(); ++k) {
            const Literal& l = c.literals[k];
            CHECK(l.var >= 1);
            CHECK(l.var <= cfg.n);
            if (k > 0) CHECK(c.literals[k - 1].var < l.var);  // sorted, distinct
            vars.insert(l.var);
            seen.insert(l.var);
            polarity[l.var].insert(l.positive);
        }
        CHECK(static_cast<int>(vars.size()) == c.width());
    }
    CHECK(static_cast<int>(seen.size()) == cfg.n);  // every variable appears

    // privileged variables are unanimous in polarity
    for (int v : plan.privileged) {
        CHECK(polarity[v].size() <= 1);
    }
    // occurrence counts match the slot allocation
    std::map<int, int> occ;
    for (const Clause& c : f.clauses)
        for (const Literal& l : c.literals) occ[l.var] += 1;
    for (int v = 1; v <= cfg.n; ++v) CHECK(occ[v] == plan.allocations[v - 1]);
}

}  // namespace

TEST_CASE("generation satisfies structural invariants across a grid") {
    for (int n : {12, 24}) {
        for (int w : {3, 5}) {
            for (double frac : {0.5, 0.75}) {
                for (double q : {0.0, 0.3}) {
                    GeneratorConfig cfg;
                    cfg.n = n;
                    cfg.m = static_cast<int>(std::lround(frac * n));
                    cfg.min_width = cfg.max_width = w;
                    cfg.q = q;
                    cfg.r = q > 0.0 ? 0.5 : 0.0;
                    for (uint64_t seed = 0; seed < 10; ++seed) {
                        cfg.seed = seed;
                        SlotPlan plan;
                        DnfFormula f = generate_formula(cfg, plan);
                        check_invariants(f, cfg, plan);
                    }
                }
            }
        }
    }
}

TEST_CASE("generation is deterministic in the seed") {
    GeneratorConfig cfg;
    cfg.n = 20;
    cfg.m = 12;
    cfg.min_width = 2;
    cfg.max_width = 5;
    cfg.q = 0.2;
    cfg.r = 0.4;
    cfg.seed = 31337;
    CHECK(generate_formula(cfg) == generate_formula(cfg));
    cfg.seed = 31338;
    DnfFormula other = generate_formula(cfg);
    cfg.seed = 31337;
    CHECK_FALSE(generate_formula(cfg) == other);
}

TEST_CASE("slot allocation covers every variable") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        int n = rng.uniform_int(3, 30);
        long long s = n + rng.uniform_int(0, 40);
        std::vector<int> alloc = allocate_slots(s, n, rng);
        long long total = 0;
        for (int a : alloc) {
            CHECK(a >= 1);
            total += a;
        }
        CHECK(total == s);
    }
}

TEST_CASE("privileged allocation respects q and r") {
    GeneratorConfig cfg;
    cfg.n = 20;
    cfg.q = 0.25;
    cfg.r = 0.5;
    Rng rng(9);
    PrivilegedAllocation pa = allocate_privileged(cfg, 16, rng);
    CHECK(pa.privileged.size() == 5);  // round(0.25 * 20)
    long long extra = 0;
    for (int v = 1; v <= cfg.n; ++v) {
        bool is_priv =
            std::find(pa.privileged.begin(), pa.privileged.end(), v) != pa.privileged.end();
        if (!is_priv) CHECK(pa.extra[v - 1] == 0);
        extra += pa.extra[v - 1];
    }
    CHECK(extra == 8);  // floor(0.5 * 16)
}

TEST_CASE("infeasible configurations exhaust retries") {
    GeneratorConfig cfg;
    cfg.n = 10;
    cfg.m = 2;
    cfg.min_width = cfg.max_width = 2;  // 4 slots < 10 variables
    cfg.seed = 0;
    CHECK_THROWS_AS(generate_formula(cfg), RetryExhausted);
}

TEST_CASE("quarter increments match the worked example") {
    auto shifted = quarter_increments({0.1});
    CHECK(shifted[0][0] == doctest::Approx(0.35));
    CHECK(shifted[1][0] == doctest::Approx(0.6));
    CHECK(shifted[2][0] == doctest::Approx(0.85));
    // wrap-around
    auto wrap = quarter_increments({0.9});
    CHECK(wrap[0][0] == doctest::Approx(0.15));
}

TEST_CASE("base distribution entries are uniform in [0,1)") {
    Rng rng(1);
    WeightAssignment w = sample_base_distribution(1000, rng);
    double mean = 0.0;
    for (double p : w) {
        CHECK(p >= 0.0);
        CHECK(p < 1.0);
        mean += p;
    }
    CHECK(mean / 1000.0 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("experiment q/r rule produces admissible values") {
    Rng rng(17);
    int zeros = 0;
    for (int i = 0; i < 200; ++i) {
        QrSample s = sample_experiment_q_r(50, 25, 4.0, rng);
        if (s.q == 0.0) {
            ++zeros;
            CHECK(s.r == 0.0);
        } else {
            CHECK(s.q > 0.0);
            CHECK(s.q <= 1.0);
            CHECK(s.r >= 0.0);
            CHECK(s.r <= 1.0);
            // q is a multiple of 1/n
            double scaled = s.q * 50.0;
            CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-9));
        }
    }
    // half the draws disable privileged variables
    CHECK(zeros > 60);
    CHECK(zeros < 140);
}
