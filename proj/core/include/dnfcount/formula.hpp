#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnfc {

// Variables are 1-based, matching the wdnf file format.
struct Literal {
    int var = 0;
    bool positive = true;

    friend bool operator==(const Literal&, const Literal&) = default;
};

// Conjunction of literals; after parsing/generation literals are kept in
// ascending variable order and no variable appears twice.
struct Clause {
    std::vector<Literal> literals;

    int width() const { return static_cast<int>(literals.size()); }

    friend bool operator==(const Clause&, const Clause&) = default;
};

struct DnfFormula {
    int num_vars = 0;
    std::vector<Clause> clauses;

    int num_clauses() const { return static_cast<int>(clauses.size()); }

    friend bool operator==(const DnfFormula&, const DnfFormula&) = default;
};

// probs[i] is the probability that variable i+1 is true.
using WeightAssignment = std::vector<double>;

// values[i] is the truth value of variable i+1.
using Assignment = std::vector<uint8_t>;

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

struct WidthStats {
    double mean_width = 0.0;
    int max_width = 0;
    long long total_slots = 0;
};

struct WeightedFormula {
    DnfFormula formula;
    WeightAssignment weights;
};

// Checks structural invariants (clause widths >= 1, variables in range,
// distinct per clause, weights in [0,1]); throws std::invalid_argument.
void validate(const DnfFormula& f, const WeightAssignment& w);

// Parses the wdnf text format:
//   c <comment>
//   p wdnf <n> <m>
//   <m clause lines, nonzero ints terminated by 0>
//   w <var> <prob>   (one per variable)
// Variables without an explicit weight line default to probability 0.5.
WeightedFormula parse_formula(std::istream& in);
WeightedFormula parse_formula(const std::string& text);
WeightedFormula parse_formula_file(const std::string& path);

// Inverse of parse_formula; probabilities are rendered with shortest
// round-trip decimals so parse(serialize(f,w)) == (f,w) exactly.
// Throws std::invalid_argument when f has no clauses.
std::string serialize_formula(const DnfFormula& f, const WeightAssignment& w);
void write_formula_file(const std::string& path, const DnfFormula& f, const WeightAssignment& w);

// True iff some clause has all its literals satisfied by a.
bool evaluate(const DnfFormula& f, const Assignment& a);

bool clause_satisfied(const Clause& c, const Assignment& a);

// Probability that an assignment drawn from w satisfies c.
double clause_probability(const Clause& c, const WeightAssignment& w);

// Sum of clause probabilities.
double sum_clause_probabilities(const DnfFormula& f, const WeightAssignment& w);

WidthStats width_stats(const DnfFormula& f);

// Shortest decimal rendering that round-trips to the same double.
std::string format_double(double x);

}  // namespace dnfc
