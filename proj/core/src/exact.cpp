#include "dnfcount/exact.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dnfc {

double exact_wmc_enumeration(const DnfFormula& f, const WeightAssignment& w,
                             const ExactLimit& limit) {
    validate(f, w);
    if (f.num_vars > limit.max_vars_enum)
        throw std::invalid_argument("exact_wmc_enumeration: variable count over limit");
    if (f.clauses.empty()) return 0.0;

    const int n = f.num_vars;
    Assignment a(n, 0);
    std::vector<double> factor(n);
    int zero_count = 0;
    double prod = 1.0;
    for (int i = 0; i < n; ++i) {
        factor[i] = 1.0 - w[i];
        if (factor[i] == 0.0)
            ++zero_count;
        else
            prod *= factor[i];
    }

    auto recompute = [&] {
        prod = 1.0;
        zero_count = 0;
        for (int i = 0; i < n; ++i) {
            if (factor[i] == 0.0)
                ++zero_count;
            else
                prod *= factor[i];
        }
    };

    double total = 0.0;
    const uint64_t steps = 1ull << n;
    for (uint64_t g = 0;; ++g) {
        if (zero_count == 0 && evaluate(f, a)) total += prod;
        if (g + 1 == steps) break;
        // Gray code: flip the lowest set bit position of g+1
        int bit = std::countr_zero(g + 1);
        double oldf = factor[bit];
        a[bit] ^= 1;
        factor[bit] = a[bit] ? w[bit] : 1.0 - w[bit];
        if (oldf == 0.0)
            --zero_count;
        else
            prod /= oldf;
        if (factor[bit] == 0.0)
            ++zero_count;
        else
            prod *= factor[bit];
        if ((g & 0xffff) == 0xffff) recompute();  // kill division drift
    }
    return total;
}

namespace {

// 0 = unset, 1 = forced true, 2 = forced false
struct IeState {
    const DnfFormula& f;
    const WeightAssignment& w;
    std::vector<uint8_t> state;
    double total = 0.0;

    void dfs(int from, int subset_size, double prod) {
        const int m = f.num_clauses();
        for (int i = from; i < m; ++i) {
            const Clause& c = f.clauses[i];
            double new_prod = prod;
            std::vector<int> touched;
            bool conflict = false;
            for (const Literal& l : c.literals) {
                uint8_t want = l.positive ? 1 : 2;
                uint8_t cur = state[l.var - 1];
                if (cur == 0) {
                    state[l.var - 1] = want;
                    touched.push_back(l.var - 1);
                    new_prod *= l.positive ? w[l.var - 1] : 1.0 - w[l.var - 1];
                } else if (cur != want) {
                    conflict = true;
                    break;
                }
            }
            if (!conflict) {
                total += ((subset_size + 1) % 2 == 1 ? new_prod : -new_prod);
                if (new_prod != 0.0) dfs(i + 1, subset_size + 1, new_prod);
            }
            for (int v : touched) state[v] = 0;
        }
    }
};

}  // namespace

double exact_wmc_inclusion_exclusion(const DnfFormula& f, const WeightAssignment& w,
                                     const ExactLimit& limit) {
    validate(f, w);
    if (f.num_clauses() > limit.max_clauses_ie)
        throw std::invalid_argument("exact_wmc_inclusion_exclusion: clause count over limit");
    if (f.clauses.empty()) return 0.0;
    IeState st{f, w, std::vector<uint8_t>(f.num_vars, 0)};
    st.dfs(0, 0, 1.0);
    return st.total;
}

}  // namespace dnfc
