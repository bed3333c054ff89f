#pragma once

// 3-SAT instances, assignment evaluation and DIMACS CNF I/O.

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmm/errors.hpp"

namespace dmm {

/// Polarity of a literal, i.e. the sign q of the variable's occurrence.
enum class Polarity : std::int8_t { negative = -1, positive = 1 };

constexpr int sign_of(Polarity p) noexcept { return static_cast<int>(p); }
constexpr Polarity flipped(Polarity p) noexcept {
    return p == Polarity::positive ? Polarity::negative : Polarity::positive;
}

struct Literal {
    std::uint32_t var = 0;
    Polarity polarity = Polarity::positive;

    constexpr bool satisfied_by(bool value) const noexcept {
        return value == (polarity == Polarity::positive);
    }
    friend constexpr bool operator==(const Literal&, const Literal&) = default;
};

/// Exactly three literals over pairwise distinct variables.
struct Clause {
    std::array<Literal, 3> literals{};

    Clause() = default;
    Clause(Literal a, Literal b, Literal c) : literals{a, b, c} {
        if (a.var == b.var || a.var == c.var || b.var == c.var)
            throw ContractViolation("clause literals must reference three distinct variables");
    }

    const Literal& operator[](std::size_t slot) const noexcept { return literals[slot]; }
    friend bool operator==(const Clause&, const Clause&) = default;
};

/// (clause index, slot within the clause) for one occurrence of a variable.
struct Occurrence {
    std::uint32_t clause;
    std::uint8_t slot;
    friend constexpr bool operator==(const Occurrence&, const Occurrence&) = default;
};

/// Immutable 3-SAT formula with a precomputed variable -> occurrences index.
class Instance {
public:
    Instance() = default;

    Instance(std::size_t num_vars, std::vector<Clause> clauses)
        : num_vars_(num_vars), clauses_(std::move(clauses)) {
        if (num_vars_ < 1) throw ContractViolation("instance needs at least one variable");
        // Occurrence lists are filled in ascending clause order; dynamics relies on
        // this for its fixed accumulation order.
        occurrences_.resize(num_vars_);
        for (std::size_t m = 0; m < clauses_.size(); ++m) {
            for (std::uint8_t s = 0; s < 3; ++s) {
                const auto var = clauses_[m][s].var;
                if (var >= num_vars_)
                    throw ContractViolation("clause references variable " + std::to_string(var) +
                                            " but instance has " + std::to_string(num_vars_));
                occurrences_[var].push_back({static_cast<std::uint32_t>(m), s});
            }
        }
    }

    std::size_t num_vars() const noexcept { return num_vars_; }
    std::size_t num_clauses() const noexcept { return clauses_.size(); }
    const std::vector<Clause>& clauses() const noexcept { return clauses_; }
    const Clause& clause(std::size_t m) const noexcept { return clauses_[m]; }
    const std::vector<Occurrence>& occurrences(std::size_t var) const noexcept {
        return occurrences_[var];
    }

    friend bool operator==(const Instance& a, const Instance& b) {
        return a.num_vars_ == b.num_vars_ && a.clauses_ == b.clauses_;
    }

private:
    std::size_t num_vars_ = 0;
    std::vector<Clause> clauses_;
    std::vector<std::vector<Occurrence>> occurrences_;
};

inline bool clause_satisfied(const Clause& c, const std::vector<bool>& assignment) {
    for (const auto& lit : c.literals)
        if (lit.satisfied_by(assignment[lit.var])) return true;
    return false;
}

/// True iff every clause has at least one literal agreeing with the assignment.
inline bool evaluate(const Instance& inst, const std::vector<bool>& assignment) {
    if (assignment.size() != inst.num_vars())
        throw ContractViolation("assignment has " + std::to_string(assignment.size()) +
                                " values, instance has " + std::to_string(inst.num_vars()) +
                                " variables");
    for (const auto& c : inst.clauses())
        if (!clause_satisfied(c, assignment)) return false;
    return true;
}

inline std::size_t count_unsatisfied(const Instance& inst, const std::vector<bool>& assignment) {
    if (assignment.size() != inst.num_vars())
        throw ContractViolation("assignment length does not match instance");
    std::size_t n = 0;
    for (const auto& c : inst.clauses())
        if (!clause_satisfied(c, assignment)) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// DIMACS

class ParseError : public std::runtime_error {
public:
    enum class Kind { header, literal_range, arity, count_mismatch, syntax };

    ParseError(Kind kind, std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what),
          kind_(kind), line_(line) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

namespace detail {

inline bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

} // namespace detail

/// Reads a 3-SAT DIMACS CNF stream. Clauses may span lines; each must hold
/// exactly three literals and end with 0.
inline Instance parse_dimacs(std::istream& in) {
    using Kind = ParseError::Kind;
    std::string line;
    std::size_t lineno = 0;
    long long num_vars = -1, num_clauses = -1;

    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line) || line[line.find_first_not_of(" \t")] == 'c') continue;
        std::istringstream ss(line);
        std::string p, fmt;
        ss >> p >> fmt >> num_vars >> num_clauses;
        std::string extra;
        if (p != "p" || fmt != "cnf" || ss.fail() || (ss >> extra) || num_vars < 1 ||
            num_clauses < 0)
            throw ParseError(Kind::header, lineno, "malformed header, expected 'p cnf N M'");
        break;
    }
    if (num_vars < 0) throw ParseError(Kind::header, lineno, "missing 'p cnf' header");

    std::vector<Clause> clauses;
    clauses.reserve(static_cast<std::size_t>(num_clauses));
    std::vector<Literal> pending;
    std::size_t clause_line = lineno + 1;

    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) continue;
        const auto first = line.find_first_not_of(" \t");
        if (line[first] == 'c') continue;
        if (line[first] == '%') break;  // SATLIB trailer
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) {
            long long k = 0;
            try {
                std::size_t used = 0;
                k = std::stoll(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError(Kind::syntax, lineno, "not an integer: '" + tok + "'");
            }
            if (pending.empty()) clause_line = lineno;
            if (k == 0) {
                if (pending.size() != 3)
                    throw ParseError(Kind::arity, clause_line,
                                     "clause has " + std::to_string(pending.size()) +
                                         " literals, only 3-SAT is supported");
                if (static_cast<long long>(clauses.size()) == num_clauses)
                    throw ParseError(Kind::count_mismatch, lineno,
                                     "more clauses than the header declares (" +
                                         std::to_string(num_clauses) + ")");
                try {
                    clauses.emplace_back(pending[0], pending[1], pending[2]);
                } catch (const ContractViolation& e) {
                    throw ParseError(Kind::literal_range, clause_line, e.what());
                }
                pending.clear();
                continue;
            }
            const long long var = k > 0 ? k : -k;
            if (var > num_vars)
                throw ParseError(Kind::literal_range, lineno,
                                 "literal " + tok + " exceeds variable count " +
                                     std::to_string(num_vars));
            if (pending.size() == 3)
                throw ParseError(Kind::arity, clause_line,
                                 "clause has more than 3 literals, only 3-SAT is supported");
            pending.push_back({static_cast<std::uint32_t>(var - 1),
                               k > 0 ? Polarity::positive : Polarity::negative});
        }
    }
    if (!pending.empty())
        throw ParseError(Kind::syntax, clause_line, "last clause is not terminated by 0");
    if (static_cast<long long>(clauses.size()) != num_clauses)
        throw ParseError(Kind::count_mismatch, lineno,
                         "header declares " + std::to_string(num_clauses) + " clauses, found " +
                             std::to_string(clauses.size()));
    return Instance(static_cast<std::size_t>(num_vars), std::move(clauses));
}

inline Instance parse_dimacs(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_dimacs(in);
}

inline void serialize_dimacs(const Instance& inst, std::ostream& out) {
    out << "p cnf " << inst.num_vars() << ' ' << inst.num_clauses() << '\n';
    for (const auto& c : inst.clauses()) {
        for (const auto& lit : c.literals)
            out << (lit.polarity == Polarity::positive ? "" : "-") << lit.var + 1 << ' ';
        out << "0\n";
    }
}

inline std::string serialize_dimacs(const Instance& inst) {
    std::ostringstream out;
    serialize_dimacs(inst, out);
    return out.str();
}

/// FNV-1a 64 over the canonical DIMACS text, as 16 hex digits.
inline std::string instance_digest(const Instance& inst) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_dimacs(inst)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = hex[h & 0xf];
    return s;
}

} // namespace dmm
