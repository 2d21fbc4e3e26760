#include "dnfcount/formula.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace dnfc {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void validate(const DnfFormula& f, const WeightAssignment& w) {
    if (f.num_vars < 1) throw std::invalid_argument("formula must have at least one variable");
    if (static_cast<int>(w.size()) != f.num_vars)
        throw std::invalid_argument("weight count does not match variable count");
    for (double p : w) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("probability outside [0,1]");
    }
    for (const Clause& c : f.clauses) {
        if (c.literals.empty()) throw std::invalid_argument("empty clause");
        int prev = 0;
        for (const Literal& l : c.literals) {
            if (l.var < 1 || l.var > f.num_vars)
                throw std::invalid_argument("variable index out of range");
            if (l.var == prev)
                throw std::invalid_argument("duplicate variable within a clause");
            prev = l.var;
        }
    }
}

namespace {

void sort_clause(Clause& c) {
    std::sort(c.literals.begin(), c.literals.end(),
              [](const Literal& a, const Literal& b) { return a.var < b.var; });
}

}  // namespace

WeightedFormula parse_formula(std::istream& in) {
    WeightedFormula out;
    int n = -1, m = -1;
    int clauses_read = 0;
    std::vector<bool> weight_seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;  // blank line
        if (tok == "c") continue;
        if (tok == "p") {
            std::string fmt;
            if (!(ls >> fmt >> n >> m) || fmt != "wdnf")
                throw ParseError(lineno, "malformed header, expected 'p wdnf <n> <m>'");
            if (n < 1 || m < 0) throw ParseError(lineno, "invalid n or m in header");
            out.formula.num_vars = n;
            out.weights.assign(n, 0.5);
            weight_seen.assign(n, false);
            continue;
        }
        if (n < 0) throw ParseError(lineno, "statement before 'p wdnf' header");
        if (tok == "w") {
            int var;
            double p;
            if (!(ls >> var >> p)) throw ParseError(lineno, "malformed weight line");
            if (var < 1 || var > n) throw ParseError(lineno, "weight variable index out of range");
            if (!(p >= 0.0 && p <= 1.0)) throw ParseError(lineno, "probability outside [0,1]");
            if (weight_seen[var - 1]) throw ParseError(lineno, "duplicate weight line");
            weight_seen[var - 1] = true;
            out.weights[var - 1] = p;
            continue;
        }
        // clause line
        Clause clause;
        int lit;
        std::istringstream cs(line);
        bool terminated = false;
        while (cs >> lit) {
            if (lit == 0) {
                terminated = true;
                break;
            }
            int var = lit > 0 ? lit : -lit;
            if (var > n) throw ParseError(lineno, "variable index out of range");
            clause.literals.push_back({var, lit > 0});
        }
        if (!terminated) throw ParseError(lineno, "clause line not terminated by 0");
        if (clause.literals.empty()) throw ParseError(lineno, "empty clause");
        sort_clause(clause);
        for (size_t i = 1; i < clause.literals.size(); ++i) {
            if (clause.literals[i].var == clause.literals[i - 1].var)
                throw ParseError(lineno, "duplicate variable within a clause");
        }
        out.formula.clauses.push_back(std::move(clause));
        ++clauses_read;
    }
    if (n < 0) throw ParseError(lineno, "missing 'p wdnf' header");
    if (clauses_read != m)
        throw ParseError(lineno, "clause count does not match header (got " +
                                     std::to_string(clauses_read) + ", expected " +
                                     std::to_string(m) + ")");
    return out;
}

WeightedFormula parse_formula(const std::string& text) {
    std::istringstream in(text);
    return parse_formula(in);
}

WeightedFormula parse_formula_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_formula(in);
}

std::string serialize_formula(const DnfFormula& f, const WeightAssignment& w) {
    if (f.clauses.empty())
        throw std::invalid_argument("cannot serialize a formula with no clauses");
    validate(f, w);
    std::string out;
    out += "p wdnf " + std::to_string(f.num_vars) + " " + std::to_string(f.num_clauses()) + "\n";
    for (const Clause& c : f.clauses) {
        for (const Literal& l : c.literals) {
            out += std::to_string(l.positive ? l.var : -l.var);
            out += ' ';
        }
        out += "0\n";
    }
    for (int i = 0; i < f.num_vars; ++i) {
        out += "w " + std::to_string(i + 1) + " " + format_double(w[i]) + "\n";
    }
    return out;
}

void write_formula_file(const std::string& path, const DnfFormula& f, const WeightAssignment& w) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << serialize_formula(f, w);
}

bool clause_satisfied(const Clause& c, const Assignment& a) {
    for (const Literal& l : c.literals) {
        if (static_cast<bool>(a[l.var - 1]) != l.positive) return false;
    }
    return true;
}

bool evaluate(const DnfFormula& f, const Assignment& a) {
    if (static_cast<int>(a.size()) != f.num_vars)
        throw std::invalid_argument("assignment length does not match variable count");
    for (const Clause& c : f.clauses) {
        if (clause_satisfied(c, a)) return true;
    }
    return false;
}

double clause_probability(const Clause& c, const WeightAssignment& w) {
    double p = 1.0;
    for (const Literal& l : c.literals) {
        p *= l.positive ? w[l.var - 1] : 1.0 - w[l.var - 1];
    }
    return p;
}

double sum_clause_probabilities(const DnfFormula& f, const WeightAssignment& w) {
    double s = 0.0;
    for (const Clause& c : f.clauses) s += clause_probability(c, w);
    return s;
}

WidthStats width_stats(const DnfFormula& f) {
    if (f.clauses.empty()) throw std::invalid_argument("width_stats requires at least one clause");
    WidthStats st;
    for (const Clause& c : f.clauses) {
        st.total_slots += c.width();
        st.max_width = std::max(st.max_width, c.width());
    }
    st.mean_width = static_cast<double>(st.total_slots) / f.num_clauses();
    return st;
}

}  // namespace dnfc
