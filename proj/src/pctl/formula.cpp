#include "pia/pctl/formula.hpp"

#include <sstream>

namespace pia::pctl {

std::string to_string(Cmp op) {
    switch (op) {
        case Cmp::Lt: return "<";
        case Cmp::Le: return "<=";
        case Cmp::Gt: return ">";
        case Cmp::Ge: return ">=";
        case Cmp::Eq: return "=";
        case Cmp::Ne: return "!=";
    }
    return "?";
}

std::string to_string(QueryKind kind) {
    switch (kind) {
        case QueryKind::P: return "P";
        case QueryKind::Pmax: return "Pmax";
        case QueryKind::Pmin: return "Pmin";
    }
    return "?";
}

std::string to_string(FragmentClass c) {
    switch (c) {
        case FragmentClass::ExactCore: return "exact-core";
        case FragmentClass::ExactPatternUntilGlobally: return "exact-pattern-until-globally";
        case FragmentClass::Statistical: return "statistical";
    }
    return "?";
}

bool compare(double lhs, Cmp op, double rhs) {
    switch (op) {
        case Cmp::Lt: return lhs < rhs;
        case Cmp::Le: return lhs <= rhs;
        case Cmp::Gt: return lhs > rhs;
        case Cmp::Ge: return lhs >= rhs;
        case Cmp::Eq: return lhs == rhs;
        case Cmp::Ne: return lhs != rhs;
    }
    return false;
}

namespace {

StatePtr make_state(StateFormula f) { return std::make_shared<const StateFormula>(std::move(f)); }
PathPtr make_path(PathFormula f) { return std::make_shared<const PathFormula>(std::move(f)); }

std::string format_threshold(double p) {
    std::ostringstream os;
    os.precision(17);
    os << p;
    return os.str();
}

std::string query_head(QueryKind kind, const std::optional<ProbBound>& bound) {
    std::string out = to_string(kind);
    if (bound) {
        out += to_string(bound->op) + format_threshold(bound->threshold);
    } else {
        out += "=?";
    }
    return out;
}

std::string step_bound(const std::optional<std::uint64_t>& bound) {
    return bound ? "<=" + std::to_string(*bound) : "";
}

bool same_bound(const std::optional<ProbBound>& a, const std::optional<ProbBound>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->op == b->op && a->threshold == b->threshold);
}

bool path_is_exact_core(const PathFormula& p);

bool state_is_exact(const StateFormula& f) {
    switch (f.kind) {
        case StateFormula::Kind::Not: return state_is_exact(*f.left);
        case StateFormula::Kind::And:
        case StateFormula::Kind::Or: return state_is_exact(*f.left) && state_is_exact(*f.right);
        case StateFormula::Kind::Prob: return path_is_exact_core(*f.path);
        default: return true;
    }
}

bool is_leaf(const PathPtr& p) { return p && p->kind == PathFormula::Kind::State; }

bool path_is_exact_core(const PathFormula& p) {
    switch (p.kind) {
        case PathFormula::Kind::Next:
        case PathFormula::Kind::Eventually:
        case PathFormula::Kind::Globally: return is_leaf(p.left) && state_is_exact(*p.left->state);
        case PathFormula::Kind::Until:
            return is_leaf(p.left) && is_leaf(p.right) && state_is_exact(*p.left->state) &&
                   state_is_exact(*p.right->state);
        default: return false;
    }
}

}  // namespace

StatePtr s_true() { return make_state(StateFormula{}); }
StatePtr s_false() {
    StateFormula f;
    f.kind = StateFormula::Kind::False;
    return make_state(std::move(f));
}
StatePtr s_label(std::string name) {
    StateFormula f;
    f.kind = StateFormula::Kind::Label;
    f.name = std::move(name);
    return make_state(std::move(f));
}
StatePtr s_compare(std::string feature, Cmp op, int value) {
    StateFormula f;
    f.kind = StateFormula::Kind::Compare;
    f.name = std::move(feature);
    f.cmp = op;
    f.value = value;
    return make_state(std::move(f));
}
StatePtr s_not(StatePtr a) {
    StateFormula f;
    f.kind = StateFormula::Kind::Not;
    f.left = std::move(a);
    return make_state(std::move(f));
}
StatePtr s_and(StatePtr a, StatePtr b) {
    StateFormula f;
    f.kind = StateFormula::Kind::And;
    f.left = std::move(a);
    f.right = std::move(b);
    return make_state(std::move(f));
}
StatePtr s_or(StatePtr a, StatePtr b) {
    StateFormula f;
    f.kind = StateFormula::Kind::Or;
    f.left = std::move(a);
    f.right = std::move(b);
    return make_state(std::move(f));
}
StatePtr s_prob(QueryKind kind, std::optional<ProbBound> bound, PathPtr path) {
    StateFormula f;
    f.kind = StateFormula::Kind::Prob;
    f.query = kind;
    f.bound = bound;
    f.path = std::move(path);
    return make_state(std::move(f));
}

PathPtr p_state(StatePtr s) {
    PathFormula f;
    f.kind = PathFormula::Kind::State;
    f.state = std::move(s);
    return make_path(std::move(f));
}
PathPtr p_not(PathPtr a) {
    PathFormula f;
    f.kind = PathFormula::Kind::Not;
    f.left = std::move(a);
    return make_path(std::move(f));
}
PathPtr p_and(PathPtr a, PathPtr b) {
    PathFormula f;
    f.kind = PathFormula::Kind::And;
    f.left = std::move(a);
    f.right = std::move(b);
    return make_path(std::move(f));
}
PathPtr p_or(PathPtr a, PathPtr b) {
    PathFormula f;
    f.kind = PathFormula::Kind::Or;
    f.left = std::move(a);
    f.right = std::move(b);
    return make_path(std::move(f));
}
PathPtr p_next(PathPtr a) {
    PathFormula f;
    f.kind = PathFormula::Kind::Next;
    f.left = std::move(a);
    return make_path(std::move(f));
}
PathPtr p_until(PathPtr a, PathPtr b, std::optional<std::uint64_t> bound) {
    PathFormula f;
    f.kind = PathFormula::Kind::Until;
    f.left = std::move(a);
    f.right = std::move(b);
    f.bound = bound;
    return make_path(std::move(f));
}
PathPtr p_eventually(PathPtr a, std::optional<std::uint64_t> bound) {
    PathFormula f;
    f.kind = PathFormula::Kind::Eventually;
    f.left = std::move(a);
    f.bound = bound;
    return make_path(std::move(f));
}
PathPtr p_globally(PathPtr a) {
    PathFormula f;
    f.kind = PathFormula::Kind::Globally;
    f.left = std::move(a);
    return make_path(std::move(f));
}

bool equal(const StateFormula& a, const StateFormula& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case StateFormula::Kind::True:
        case StateFormula::Kind::False: return true;
        case StateFormula::Kind::Label: return a.name == b.name;
        case StateFormula::Kind::Compare: return a.name == b.name && a.cmp == b.cmp && a.value == b.value;
        case StateFormula::Kind::Not: return equal(*a.left, *b.left);
        case StateFormula::Kind::And:
        case StateFormula::Kind::Or: return equal(*a.left, *b.left) && equal(*a.right, *b.right);
        case StateFormula::Kind::Prob:
            return a.query == b.query && same_bound(a.bound, b.bound) && equal(*a.path, *b.path);
    }
    return false;
}

bool equal(const PathFormula& a, const PathFormula& b) {
    if (a.kind != b.kind || a.bound != b.bound) return false;
    switch (a.kind) {
        case PathFormula::Kind::State: return equal(*a.state, *b.state);
        case PathFormula::Kind::Not:
        case PathFormula::Kind::Next:
        case PathFormula::Kind::Eventually:
        case PathFormula::Kind::Globally: return equal(*a.left, *b.left);
        case PathFormula::Kind::And:
        case PathFormula::Kind::Or:
        case PathFormula::Kind::Until: return equal(*a.left, *b.left) && equal(*a.right, *b.right);
    }
    return false;
}

bool equal(const Query& a, const Query& b) {
    return a.kind == b.kind && same_bound(a.bound, b.bound) && equal(*a.path, *b.path);
}

std::string to_string(const StateFormula& f) {
    switch (f.kind) {
        case StateFormula::Kind::True: return "true";
        case StateFormula::Kind::False: return "false";
        case StateFormula::Kind::Label: return "\"" + f.name + "\"";
        case StateFormula::Kind::Compare: return f.name + to_string(f.cmp) + std::to_string(f.value);
        case StateFormula::Kind::Not: return "!(" + to_string(*f.left) + ")";
        case StateFormula::Kind::And: return "(" + to_string(*f.left) + " & " + to_string(*f.right) + ")";
        case StateFormula::Kind::Or: return "(" + to_string(*f.left) + " | " + to_string(*f.right) + ")";
        case StateFormula::Kind::Prob: return query_head(f.query, f.bound) + " [ " + to_string(*f.path) + " ]";
    }
    return "?";
}

std::string to_string(const PathFormula& f) {
    switch (f.kind) {
        case PathFormula::Kind::State: return to_string(*f.state);
        case PathFormula::Kind::Not: return "!(" + to_string(*f.left) + ")";
        case PathFormula::Kind::And: return "(" + to_string(*f.left) + " & " + to_string(*f.right) + ")";
        case PathFormula::Kind::Or: return "(" + to_string(*f.left) + " | " + to_string(*f.right) + ")";
        case PathFormula::Kind::Next: return "(X " + to_string(*f.left) + ")";
        case PathFormula::Kind::Until:
            return "(" + to_string(*f.left) + " U" + step_bound(f.bound) + " " + to_string(*f.right) + ")";
        case PathFormula::Kind::Eventually: return "(F" + step_bound(f.bound) + " " + to_string(*f.left) + ")";
        case PathFormula::Kind::Globally: return "(G " + to_string(*f.left) + ")";
    }
    return "?";
}

std::string to_string(const Query& q) { return query_head(q.kind, q.bound) + " [ " + to_string(*q.path) + " ]"; }

FragmentClass classify(const Query& q) {
    const PathFormula& p = *q.path;
    if (path_is_exact_core(p)) return FragmentClass::ExactCore;
    if (p.kind == PathFormula::Kind::Until && !p.bound && is_leaf(p.left) && p.right &&
        p.right->kind == PathFormula::Kind::Globally && is_leaf(p.right->left) && state_is_exact(*p.left->state) &&
        state_is_exact(*p.right->left->state)) {
        return FragmentClass::ExactPatternUntilGlobally;
    }
    return FragmentClass::Statistical;
}

bool is_propositional(const StateFormula& f) {
    switch (f.kind) {
        case StateFormula::Kind::Prob: return false;
        case StateFormula::Kind::Not: return is_propositional(*f.left);
        case StateFormula::Kind::And:
        case StateFormula::Kind::Or: return is_propositional(*f.left) && is_propositional(*f.right);
        default: return true;
    }
}

}  // namespace pia::pctl
