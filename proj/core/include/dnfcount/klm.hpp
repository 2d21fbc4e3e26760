#pragma once

#include <cstdint>
#include <stdexcept>

#include "dnfcount/formula.hpp"
#include "dnfcount/rng.hpp"

namespace dnfc {

struct KlmParams {
    double epsilon = 0.1;
    double delta = 0.05;
    uint64_t seed = 0;
};

struct KlmResult {
    double estimate = 0.0;
    long long trials = 0;
    long long hits = 0;
    double sum_clause_probs = 0.0;
};

struct GaussianLabel {
    double mean = 0.0;   // natural log of the estimate
    double sigma = 0.0;  // > 0
};

// All clause probabilities are zero; the true count is zero by the union
// bound and the estimator is undefined.
class ZeroSumError : public std::runtime_error {
public:
    ZeroSumError() : std::runtime_error("all clause probabilities are zero") {}
};

// No trial hit after tau rounds; log of the estimate is undefined.
class ZeroHitsError : public std::runtime_error {
public:
    ZeroHitsError() : std::runtime_error("zero hits after all trials") {}
};

// tau = ceil(8 (1+eps) m ln(2/delta) / eps^2)
long long compute_trials(double epsilon, double delta, int m);

// Fixes the clause's literals and samples every other variable from w.
Assignment sample_satisfying_assignment(const Clause& c, int num_vars,
                                        const WeightAssignment& w, Rng& rng);

// Coverage-sampling estimator for the weighted DNF count. Deterministic
// given the seed. Throws ZeroSumError / ZeroHitsError (see above); callers
// map ZeroSumError to an exact count of 0.
KlmResult klm_estimate(const DnfFormula& f, const WeightAssignment& w, const KlmParams& p);

// sigma for the multiplicative (1 +/- eps, 1-delta) bound mapped to log space.
double label_sigma(double epsilon, double delta);

// mean = ln(estimate), sigma = ln(1+eps) / Phi^{-1}(1 - delta/2).
// Throws std::domain_error when the estimate is not positive.
GaussianLabel fit_gaussian_label(const KlmResult& r, const KlmParams& p);

}  // namespace dnfc
