#include "dnfcount/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dnfc {

void validate(const GeneratorConfig& cfg) {
    if (cfg.n < 1) throw std::invalid_argument("n must be at least 1");
    if (cfg.m < 1) throw std::invalid_argument("m must be at least 1");
    if (cfg.min_width < 1 || cfg.min_width > cfg.max_width || cfg.max_width > cfg.n)
        throw std::invalid_argument("require 1 <= minW <= maxW <= n");
    if (!(cfg.q >= 0.0 && cfg.q <= 1.0) || !(cfg.r >= 0.0 && cfg.r <= 1.0))
        throw std::invalid_argument("q and r must be in [0,1]");
    if (cfg.q > 0.0 && std::lround(cfg.q * cfg.n) < 1)
        throw std::invalid_argument("q*n rounds to zero privileged variables");
    if (cfg.max_retries < 1) throw std::invalid_argument("max_retries must be positive");
}

std::vector<int> sample_widths(const GeneratorConfig& cfg, Rng& rng) {
    validate(cfg);
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        std::vector<int> widths(cfg.m);
        long long s = 0;
        for (int& wd : widths) {
            wd = rng.uniform_int(cfg.min_width, cfg.max_width);
            s += wd;
        }
        if (s >= cfg.n) return widths;
    }
    throw RetryExhausted("slot count below variable count after max retries");
}

std::vector<int> allocate_slots(long long s, int n, Rng& rng) {
    if (s < n) throw std::invalid_argument("allocate_slots requires s >= n");
    std::vector<int> alloc(n, 1);
    for (long long i = n; i < s; ++i) alloc[rng.uniform_int(0, n - 1)] += 1;
    return alloc;
}

PrivilegedAllocation allocate_privileged(const GeneratorConfig& cfg, long long excess, Rng& rng) {
    PrivilegedAllocation out;
    out.extra.assign(cfg.n, 0);
    long long p = std::lround(cfg.q * cfg.n);
    if (p <= 0) return out;

    // partial Fisher-Yates for a uniform p-subset of [1, n]
    std::vector<int> ids(cfg.n);
    std::iota(ids.begin(), ids.end(), 1);
    for (long long i = 0; i < p; ++i) {
        int j = rng.uniform_int(static_cast<int>(i), cfg.n - 1);
        std::swap(ids[i], ids[j]);
    }
    out.privileged.assign(ids.begin(), ids.begin() + p);
    std::sort(out.privileged.begin(), out.privileged.end());

    long long exclusive = static_cast<long long>(std::floor(cfg.r * static_cast<double>(excess)));
    for (long long i = 0; i < exclusive; ++i) {
        int pick = rng.uniform_int(0, static_cast<int>(p) - 1);
        out.extra[out.privileged[pick] - 1] += 1;
    }
    return out;
}

bool assign_to_clauses(const SlotPlan& plan, Rng& rng,
                       std::vector<std::vector<int>>& memberships) {
    const int m = static_cast<int>(plan.widths.size());
    const int n = static_cast<int>(plan.allocations.size());
    memberships.assign(m, {});
    std::vector<int> remaining(plan.widths.begin(), plan.widths.end());

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return plan.allocations[a] > plan.allocations[b];
    });

    std::vector<char> taken(m);
    for (int v : order) {
        int need = plan.allocations[v];
        std::fill(taken.begin(), taken.end(), 0);
        for (int k = 0; k < need; ++k) {
            long long total = 0;
            for (int j = 0; j < m; ++j) {
                if (!taken[j]) total += remaining[j];
            }
            if (total == 0) return false;  // stuck: fewer free clauses than slots
            // clause drawn with probability proportional to its empty slots
            double u = rng.uniform() * static_cast<double>(total);
            long long acc = 0;
            int chosen = -1;
            for (int j = 0; j < m; ++j) {
                if (taken[j]) continue;
                acc += remaining[j];
                if (u < static_cast<double>(acc)) {
                    chosen = j;
                    break;
                }
            }
            if (chosen < 0) {
                for (int j = m - 1; j >= 0; --j) {
                    if (!taken[j] && remaining[j] > 0) {
                        chosen = j;
                        break;
                    }
                }
            }
            taken[chosen] = 1;
            remaining[chosen] -= 1;
            memberships[chosen].push_back(v + 1);
        }
    }
    for (int j = 0; j < m; ++j) {
        if (remaining[j] != 0) return false;
    }
    return true;
}

DnfFormula randomize_signs(int n, const std::vector<std::vector<int>>& memberships,
                           const std::vector<int>& privileged, Rng& rng) {
    std::vector<int> priv_sign(n, 0);  // 0 = not privileged, +1/-1 = unanimous polarity
    for (int v : privileged) priv_sign[v - 1] = rng.coin() ? 1 : -1;

    DnfFormula f;
    f.num_vars = n;
    f.clauses.reserve(memberships.size());
    for (const auto& vars : memberships) {
        Clause c;
        c.literals.reserve(vars.size());
        for (int v : vars) {
            bool pos = priv_sign[v - 1] != 0 ? priv_sign[v - 1] > 0 : rng.coin();
            c.literals.push_back({v, pos});
        }
        std::sort(c.literals.begin(), c.literals.end(),
                  [](const Literal& a, const Literal& b) { return a.var < b.var; });
        f.clauses.push_back(std::move(c));
    }
    return f;
}

DnfFormula generate_formula(const GeneratorConfig& cfg, SlotPlan& plan_out) {
    validate(cfg);
    Rng rng(cfg.seed);
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        std::vector<int> widths = sample_widths(cfg, rng);
        long long s = std::accumulate(widths.begin(), widths.end(), 0ll);
        long long e = s - cfg.n;

        PrivilegedAllocation priv = allocate_privileged(cfg, e, rng);
        long long exclusive = std::accumulate(priv.extra.begin(), priv.extra.end(), 0ll);
        std::vector<int> alloc = allocate_slots(s - exclusive, cfg.n, rng);
        for (int i = 0; i < cfg.n; ++i) alloc[i] += priv.extra[i];

        bool over = false;
        for (int a : alloc) {
            if (a > cfg.m) over = true;  // cannot fit in distinct clauses
        }
        if (over) continue;

        SlotPlan plan{widths, s, e, alloc, priv.privileged};
        std::vector<std::vector<int>> memberships;
        if (!assign_to_clauses(plan, rng, memberships)) continue;

        plan_out = std::move(plan);
        return randomize_signs(cfg.n, memberships, priv.privileged, rng);
    }
    throw RetryExhausted("clause assignment failed after max retries");
}

DnfFormula generate_formula(const GeneratorConfig& cfg) {
    SlotPlan plan;
    return generate_formula(cfg, plan);
}

WeightAssignment sample_base_distribution(int n, Rng& rng) {
    WeightAssignment w(n);
    for (double& p : w) p = rng.uniform();
    return w;
}

std::array<WeightAssignment, 3> quarter_increments(const WeightAssignment& w) {
    std::array<WeightAssignment, 3> out;
    for (int k = 1; k <= 3; ++k) {
        WeightAssignment shifted(w.size());
        for (size_t i = 0; i < w.size(); ++i) {
            shifted[i] = std::fmod(w[i] + 0.25 * k, 1.0);
        }
        out[k - 1] = std::move(shifted);
    }
    return out;
}

QrSample sample_experiment_q_r(int n, int m, double mean_width, Rng& rng) {
    if (n < 2 || m < 1) throw std::invalid_argument("require n >= 2, m >= 1");
    if (rng.uniform() < 0.5) return {0.0, 0.0};

    double bound = std::log(static_cast<double>(n)) / n;
    double x = std::fmod(rng.exponential(), bound);
    double q = std::ceil(x * n) / n;
    if (q <= 0.0) q = 1.0 / n;

    double e = m * mean_width - n;
    if (e <= 0.0) return {q, 0.0};

    double pn = std::round(q * n);  // privileged variable count
    double best_r = 0.0;
    for (int g = 0; g <= 100; ++g) {
        double r = g / 100.0;
        double mu = 1.0 + r * e / pn + (1.0 - r) * e / n;
        if (!(mu < m)) continue;
        double inv = 1.0 / pn;
        double var = r * e * inv * (1.0 - inv);
        double tail = var + (m - mu) * (m - mu);
        if (tail <= 0.0) continue;
        if (var / tail <= 0.5) best_r = std::max(best_r, r);
    }
    return {q, best_r};
}

}  // namespace dnfc
