#pragma once

#include "dnfcount/formula.hpp"

namespace dnfc {

struct ExactLimit {
    int max_vars_enum = 25;
    int max_clauses_ie = 22;
};

// Exact weighted model count by Gray-code enumeration of all 2^n
// assignments with incremental weight updates. Requires n <= max_vars_enum.
double exact_wmc_enumeration(const DnfFormula& f, const WeightAssignment& w,
                             const ExactLimit& limit = {});

// Exact weighted model count by inclusion-exclusion over clause subsets;
// conflicting intersections contribute 0. Requires m <= max_clauses_ie.
double exact_wmc_inclusion_exclusion(const DnfFormula& f, const WeightAssignment& w,
                                     const ExactLimit& limit = {});

}  // namespace dnfc
