#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace pia::pctl {

enum class Cmp { Lt, Le, Gt, Ge, Eq, Ne };
enum class QueryKind { P, Pmax, Pmin };

std::string to_string(Cmp op);
std::string to_string(QueryKind kind);
bool compare(double lhs, Cmp op, double rhs);

struct StateFormula;
struct PathFormula;
using StatePtr = std::shared_ptr<const StateFormula>;
using PathPtr = std::shared_ptr<const PathFormula>;

struct ProbBound {
    Cmp op = Cmp::Ge;
    double threshold = 0.0;
};

struct StateFormula {
    enum class Kind { True, False, Label, Compare, Not, And, Or, Prob };

    Kind kind = Kind::True;
    std::string name;            // Label name or compared feature
    Cmp cmp = Cmp::Eq;           // Compare
    int value = 0;               // Compare
    StatePtr left, right;        // Not uses left; And/Or use both
    QueryKind query = QueryKind::P;
    std::optional<ProbBound> bound;  // Prob; absent means "=?"
    PathPtr path;                // Prob
};

/// Path formulas. Operands are path formulas; a plain state formula appears
/// as a Kind::State leaf. Until and Eventually carry an optional step bound.
struct PathFormula {
    enum class Kind { State, Not, And, Or, Next, Until, Eventually, Globally };

    Kind kind = Kind::State;
    StatePtr state;         // State leaf
    PathPtr left, right;    // unary operators use left
    std::optional<std::uint64_t> bound;
};

/// Top-level query: a probability operator with optional threshold.
struct Query {
    QueryKind kind = QueryKind::P;
    std::optional<ProbBound> bound;
    PathPtr path;
};

// Construction helpers.
StatePtr s_true();
StatePtr s_false();
StatePtr s_label(std::string name);
StatePtr s_compare(std::string feature, Cmp op, int value);
StatePtr s_not(StatePtr f);
StatePtr s_and(StatePtr a, StatePtr b);
StatePtr s_or(StatePtr a, StatePtr b);
StatePtr s_prob(QueryKind kind, std::optional<ProbBound> bound, PathPtr path);

PathPtr p_state(StatePtr f);
PathPtr p_not(PathPtr f);
PathPtr p_and(PathPtr a, PathPtr b);
PathPtr p_or(PathPtr a, PathPtr b);
PathPtr p_next(PathPtr f);
PathPtr p_until(PathPtr a, PathPtr b, std::optional<std::uint64_t> bound = std::nullopt);
PathPtr p_eventually(PathPtr f, std::optional<std::uint64_t> bound = std::nullopt);
PathPtr p_globally(PathPtr f);

bool equal(const StateFormula& a, const StateFormula& b);
bool equal(const PathFormula& a, const PathFormula& b);
bool equal(const Query& a, const Query& b);

/// Fully parenthesized concrete syntax; parse_formula(to_string(q)) == q.
std::string to_string(const StateFormula& f);
std::string to_string(const PathFormula& f);
std::string to_string(const Query& q);

enum class FragmentClass { ExactCore, ExactPatternUntilGlobally, Statistical };

std::string to_string(FragmentClass c);

/// ExactCore: every path operator has state-formula operands (recursively
/// for nested probability operators). ExactPatternUntilGlobally: the shape
/// Phi1 U (G Phi2) with state formulas Phi1, Phi2 and no step bound.
/// Statistical: anything else.
FragmentClass classify(const Query& q);

/// True when the state formula contains no probability operator.
bool is_propositional(const StateFormula& f);

}  // namespace pia::pctl
