#include <doctest.h>

#include <cmath>

#include "dnfcount/exact.hpp"
#include "dnfcount/klm.hpp"
#include "dnfcount/stats.hpp"

using namespace dnfc;

namespace {

DnfFormula make_formula(int n, std::vector<std::vector<int>> clauses) {
    DnfFormula f;
    f.num_vars = n;
    for (const auto& lits : clauses) {
        Clause c;
        for (int l : lits) c.literals.push_back({std::abs(l), l > 0});
        f.clauses.push_back(c);
    }
    return f;
}

}  // namespace

TEST_CASE("trial count formula") {
    CHECK(compute_trials(0.1, 0.05, 4) == 12985);
    CHECK(compute_trials(0.1, 0.05, 8) == 25970);
    CHECK(compute_trials(1.0, 2.0 / (std::exp(1.0) * std::exp(1.0)), 1) == 32);
    CHECK(compute_trials(0.1, 0.05, 8) == 2 * compute_trials(0.1, 0.05, 4));
}

TEST_CASE("inverse normal cdf") {
    CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    CHECK(inverse_normal_cdf(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(inverse_normal_cdf(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-9));
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::domain_error);
    CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::domain_error);
}

TEST_CASE("label sigma constant") {
    CHECK(label_sigma(0.1, 0.05) == doctest::Approx(0.0486285).epsilon(1e-4));
    CHECK(std::abs(label_sigma(0.1, 0.05) - 0.0486285) < 1e-5);
}

TEST_CASE("sampled assignments satisfy their clause") {
    DnfFormula f = make_formula(6, {{1, -3, 5}});
    WeightAssignment w = {0.1, 0.9, 0.5, 0.3, 0.7, 0.2};
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        Assignment a = sample_satisfying_assignment(f.clauses[0], 6, w, rng);
        CHECK(clause_satisfied(f.clauses[0], a));
        CHECK(a.size() == 6);
    }
}

TEST_CASE("estimate is deterministic for a fixed seed") {
    DnfFormula f = make_formula(5, {{1, 2}, {-3, 4}, {5}});
    WeightAssignment w = {0.3, 0.6, 0.5, 0.4, 0.2};
    KlmParams p{0.2, 0.1, 42};
    KlmResult a = klm_estimate(f, w, p);
    KlmResult b = klm_estimate(f, w, p);
    CHECK(a.estimate == b.estimate);
    CHECK(a.hits == b.hits);
    CHECK(a.trials == compute_trials(0.2, 0.1, 3));
}

TEST_CASE("estimate is close to the exact count") {
    DnfFormula f = make_formula(8, {{1, 2}, {-3, 4, 5}, {6, -7}, {8}});
    WeightAssignment w = {0.3, 0.6, 0.5, 0.4, 0.2, 0.7, 0.5, 0.1};
    double exact = exact_wmc_enumeration(f, w);
    KlmParams p{0.1, 0.05, 3};
    KlmResult r = klm_estimate(f, w, p);
    CHECK(r.estimate == doctest::Approx(exact).epsilon(0.1));
    CHECK(r.estimate > 0.0);
    CHECK(r.estimate <= r.sum_clause_probs);
}

TEST_CASE("single clause estimate is exact") {
    // with one clause every trial hits, so the estimator returns sum_probs
    DnfFormula f = make_formula(3, {{1, -2, 3}});
    WeightAssignment w = {0.25, 0.5, 0.8};
    KlmParams p{0.5, 0.2, 0};
    KlmResult r = klm_estimate(f, w, p);
    CHECK(r.hits == r.trials);
    CHECK(r.estimate == doctest::Approx(0.25 * 0.5 * 0.8).epsilon(1e-12));
}

TEST_CASE("zero-probability formulas raise ZeroSumError") {
    DnfFormula f = make_formula(2, {{1, 2}});
    CHECK_THROWS_AS(klm_estimate(f, {0.0, 0.5}, {}), ZeroSumError);
}

TEST_CASE("gaussian labels live in log space") {
    KlmResult r;
    r.estimate = 0.25;
    KlmParams p{0.1, 0.05, 0};
    GaussianLabel lbl = fit_gaussian_label(r, p);
    CHECK(lbl.mean == doctest::Approx(std::log(0.25)));
    CHECK(lbl.sigma == doctest::Approx(label_sigma(0.1, 0.05)));
    r.estimate = 0.0;
    CHECK_THROWS_AS(fit_gaussian_label(r, p), std::domain_error);
}
