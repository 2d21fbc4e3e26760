#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dnfcount/formula.hpp"
#include "dnfcount/rng.hpp"

namespace dnfc {

struct GeneratorConfig {
    int n = 0;
    int m = 0;
    int min_width = 0;
    int max_width = 0;
    double q = 0.0;  // privileged fraction of variables
    double r = 0.0;  // share of excess slots reserved for privileged variables
    uint64_t seed = 0;
    int max_retries = 50;
};

struct SlotPlan {
    std::vector<int> widths;       // per clause, size m
    long long slot_count = 0;      // s = sum of widths
    long long excess = 0;          // e = s - n
    std::vector<int> allocations;  // per variable, size n, each >= 1
    std::vector<int> privileged;   // variable ids (1-based)
};

class RetryExhausted : public std::runtime_error {
public:
    explicit RetryExhausted(const std::string& what) : std::runtime_error(what) {}
};

void validate(const GeneratorConfig& cfg);

// m clause widths, each uniform on [min_width, max_width].
std::vector<int> sample_widths(const GeneratorConfig& cfg, Rng& rng);

// Puts s slots into n variables so none is empty: one slot each, then the
// remaining s - n by independent uniform variable choices.
std::vector<int> allocate_slots(long long s, int n, Rng& rng);

// Picks round(q*n) privileged variables and hands them floor(r*e) exclusive
// slots uniformly at random; returned vector holds the exclusive counts
// (size n, zero for non-privileged variables).
struct PrivilegedAllocation {
    std::vector<int> privileged;  // variable ids, 1-based
    std::vector<int> extra;       // per-variable exclusive slot counts
};
PrivilegedAllocation allocate_privileged(const GeneratorConfig& cfg, long long excess, Rng& rng);

// Assigns each variable to as many distinct clauses as it has slots,
// greatest allocation first, drawing clauses without replacement with
// probability proportional to their remaining empty slots. Returns
// per-clause variable lists; throws RetryExhausted-style failure via
// the bool result (false = stuck, caller retries generation).
bool assign_to_clauses(const SlotPlan& plan, Rng& rng,
                       std::vector<std::vector<int>>& memberships);

// Gives non-privileged occurrences independent fair-coin polarities and
// each privileged variable a single coin flip across all its occurrences.
DnfFormula randomize_signs(int n, const std::vector<std::vector<int>>& memberships,
                           const std::vector<int>& privileged, Rng& rng);

// Full generation per config; deterministic given the seed.
DnfFormula generate_formula(const GeneratorConfig& cfg);
DnfFormula generate_formula(const GeneratorConfig& cfg, SlotPlan& plan_out);

// Entries uniform on [0,1).
WeightAssignment sample_base_distribution(int n, Rng& rng);

// The three quarter-increment companions of a base distribution:
// entry -> (entry + 0.25 k) mod 1 for k = 1, 2, 3.
std::array<WeightAssignment, 3> quarter_increments(const WeightAssignment& w);

// Experiment rule for (q, r): with probability 0.5 both are 0; otherwise
// q = ceil_to_multiple(Exp(1) mod (ln(n)/n), 1/n) and r is the largest grid
// value for which a one-sided Chebyshev bound keeps generation viable with
// probability at least 0.5. mean_width fixes the expected excess e.
struct QrSample {
    double q = 0.0;
    double r = 0.0;
};
QrSample sample_experiment_q_r(int n, int m, double mean_width, Rng& rng);

}  // namespace dnfc
