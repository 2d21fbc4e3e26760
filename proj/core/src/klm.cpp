#include "dnfcount/klm.hpp"

#include <algorithm>
#include <cmath>

#include "dnfcount/stats.hpp"

namespace dnfc {

long long compute_trials(double epsilon, double delta, int m) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    if (m < 1) throw std::invalid_argument("m must be at least 1");
    double tau = 8.0 * (1.0 + epsilon) * m * std::log(2.0 / delta) / (epsilon * epsilon);
    return static_cast<long long>(std::ceil(tau));
}

Assignment sample_satisfying_assignment(const Clause& c, int num_vars,
                                        const WeightAssignment& w, Rng& rng) {
    Assignment a(num_vars);
    for (int i = 0; i < num_vars; ++i) a[i] = rng.uniform() < w[i] ? 1 : 0;
    for (const Literal& l : c.literals) a[l.var - 1] = l.positive ? 1 : 0;
    return a;
}

namespace {

// Weighted clause selection by binary search over the prefix-sum array.
int select_clause(const std::vector<double>& prefix, double total, Rng& rng) {
    double u = rng.uniform() * total;
    auto it = std::upper_bound(prefix.begin(), prefix.end(), u);
    int idx = static_cast<int>(it - prefix.begin());
    return std::min(idx, static_cast<int>(prefix.size()) - 1);
}

}  // namespace

KlmResult klm_estimate(const DnfFormula& f, const WeightAssignment& w, const KlmParams& p) {
    validate(f, w);
    const int m = f.num_clauses();
    if (m < 1) throw std::invalid_argument("klm_estimate requires at least one clause");

    std::vector<double> prefix(m);
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
        total += clause_probability(f.clauses[j], w);
        prefix[j] = total;
    }
    if (total <= 0.0) throw ZeroSumError();

    Rng rng(p.seed);
    const long long tau = compute_trials(p.epsilon, p.delta, m);

    long long hits = 0;
    int src = select_clause(prefix, total, rng);
    Assignment a = sample_satisfying_assignment(f.clauses[src], f.num_vars, w, rng);
    for (long long t = 0; t < tau; ++t) {
        int k = rng.uniform_int(0, m - 1);
        if (clause_satisfied(f.clauses[k], a)) {
            ++hits;
            src = select_clause(prefix, total, rng);
            a = sample_satisfying_assignment(f.clauses[src], f.num_vars, w, rng);
        }
    }
    if (hits == 0) throw ZeroHitsError();

    KlmResult r;
    r.trials = tau;
    r.hits = hits;
    r.sum_clause_probs = total;
    r.estimate = static_cast<double>(tau) * total / (static_cast<double>(m) * hits);
    return r;
}

double label_sigma(double epsilon, double delta) {
    return std::log(1.0 + epsilon) / inverse_normal_cdf(1.0 - delta / 2.0);
}

GaussianLabel fit_gaussian_label(const KlmResult& r, const KlmParams& p) {
    if (!(r.estimate > 0.0)) throw std::domain_error("estimate must be positive");
    return GaussianLabel{std::log(r.estimate), label_sigma(p.epsilon, p.delta)};
}

}  // namespace dnfc
