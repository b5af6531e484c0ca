#include "pia/pctl/parser.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "pia/common/error.hpp"

namespace pia::pctl {

namespace {

enum class Tok { Ident, String, Number, Op, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

[[noreturn]] void fail(std::size_t pos, const std::string& msg) {
    throw SyntaxError("at position " + std::to_string(pos) + ": " + msg);
}

std::vector<Token> tokenize(std::string_view in) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < in.size()) {
        const char c = in[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < in.size() && (std::isalnum(static_cast<unsigned char>(in[i])) || in[i] == '_')) ++i;
            out.push_back({Tok::Ident, std::string(in.substr(start, i - start)), start});
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                   (c == '-' && i + 1 < in.size() && std::isdigit(static_cast<unsigned char>(in[i + 1])))) {
            ++i;
            while (i < in.size() && (std::isdigit(static_cast<unsigned char>(in[i])) || in[i] == '.' ||
                                     in[i] == 'e' || in[i] == 'E' ||
                                     ((in[i] == '-' || in[i] == '+') && (in[i - 1] == 'e' || in[i - 1] == 'E')))) {
                ++i;
            }
            out.push_back({Tok::Number, std::string(in.substr(start, i - start)), start});
        } else if (c == '"') {
            ++i;
            while (i < in.size() && in[i] != '"') ++i;
            if (i == in.size()) fail(start, "unterminated string");
            out.push_back({Tok::String, std::string(in.substr(start + 1, i - start - 1)), start});
            ++i;
        } else {
            static const char* two[] = {"<=", ">=", "!=", "==", "&&", "||"};
            bool matched = false;
            for (const char* op : two) {
                if (in.substr(i, 2) == op) {
                    std::string t(op);
                    if (t == "==") t = "=";
                    if (t == "&&") t = "&";
                    if (t == "||") t = "|";
                    out.push_back({Tok::Op, t, start});
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (std::string_view("<>=!&|()[]?").find(c) == std::string_view::npos) {
                    fail(start, std::string("unexpected character '") + c + "'");
                }
                out.push_back({Tok::Op, std::string(1, c), start});
                ++i;
            }
        }
    }
    out.push_back({Tok::End, "", in.size()});
    return out;
}

std::optional<Cmp> cmp_of(const Token& t) {
    if (t.kind != Tok::Op) return std::nullopt;
    if (t.text == "<") return Cmp::Lt;
    if (t.text == "<=") return Cmp::Le;
    if (t.text == ">") return Cmp::Gt;
    if (t.text == ">=") return Cmp::Ge;
    if (t.text == "=") return Cmp::Eq;
    if (t.text == "!=") return Cmp::Ne;
    return std::nullopt;
}

bool is_leaf(const PathPtr& p) { return p->kind == PathFormula::Kind::State; }

PathPtr make_not(PathPtr a) { return is_leaf(a) ? p_state(s_not(a->state)) : p_not(std::move(a)); }
PathPtr make_and(PathPtr a, PathPtr b) {
    return is_leaf(a) && is_leaf(b) ? p_state(s_and(a->state, b->state)) : p_and(std::move(a), std::move(b));
}
PathPtr make_or(PathPtr a, PathPtr b) {
    return is_leaf(a) && is_leaf(b) ? p_state(s_or(a->state, b->state)) : p_or(std::move(a), std::move(b));
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Query query() {
        Query q;
        const Token head = next();
        q.kind = query_kind(head);
        q.bound = prob_bound();
        q.path = bracketed_path();
        expect_end();
        return q;
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    Token next() {
        Token t = peek();
        if (i_ < toks_.size() - 1) ++i_;
        return t;
    }
    bool accept_op(const char* op) {
        if (peek().kind == Tok::Op && peek().text == op) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect_op(const char* op) {
        if (!accept_op(op)) fail(peek().pos, std::string("expected '") + op + "'");
    }
    void expect_end() {
        if (peek().kind != Tok::End) fail(peek().pos, "unexpected trailing input '" + peek().text + "'");
    }
    bool peek_ident(const char* word, std::size_t k = 0) const {
        return peek(k).kind == Tok::Ident && peek(k).text == word;
    }
    bool at_query() const { return peek_ident("P") || peek_ident("Pmax") || peek_ident("Pmin"); }

    static QueryKind query_kind(const Token& t) {
        if (t.kind == Tok::Ident) {
            if (t.text == "P") return QueryKind::P;
            if (t.text == "Pmax") return QueryKind::Pmax;
            if (t.text == "Pmin") return QueryKind::Pmin;
        }
        fail(t.pos, "expected P, Pmax or Pmin");
    }

    std::optional<ProbBound> prob_bound() {
        const Token t = next();
        auto op = cmp_of(t);
        if (!op) fail(t.pos, "expected '=?' or a probability bound");
        if (*op == Cmp::Eq && accept_op("?")) return std::nullopt;
        const Token num = next();
        if (num.kind != Tok::Number) fail(num.pos, "expected probability threshold");
        const double p = to_double(num);
        if (p < 0.0 || p > 1.0) fail(num.pos, "threshold outside [0, 1]");
        return ProbBound{*op, p};
    }

    PathPtr bracketed_path() {
        const std::size_t pos = peek().pos;
        expect_op("[");
        PathPtr p = path();
        expect_op("]");
        if (is_leaf(p)) fail(pos, "a path operator is required inside the probability operator");
        return p;
    }

    PathPtr path() {
        PathPtr lhs = path_or();
        if (peek_ident("U")) {
            next();
            auto bound = step_bound();
            PathPtr rhs = path();
            return p_until(std::move(lhs), std::move(rhs), bound);
        }
        return lhs;
    }

    PathPtr path_or() {
        PathPtr lhs = path_and();
        while (accept_op("|")) lhs = make_or(std::move(lhs), path_and());
        return lhs;
    }

    PathPtr path_and() {
        PathPtr lhs = path_unary();
        while (accept_op("&")) lhs = make_and(std::move(lhs), path_unary());
        return lhs;
    }

    PathPtr path_unary() {
        if (accept_op("!")) return make_not(path_unary());
        if (peek_ident("X")) {
            next();
            return p_next(path_unary());
        }
        if (peek_ident("F")) {
            next();
            auto bound = step_bound();
            return p_eventually(path_unary(), bound);
        }
        if (peek_ident("G")) {
            next();
            return p_globally(path_unary());
        }
        return primary();
    }

    std::optional<std::uint64_t> step_bound() {
        if (!(peek().kind == Tok::Op && (peek().text == "<=" || peek().text == "<"))) return std::nullopt;
        const bool strict = next().text == "<";
        const Token num = next();
        if (num.kind != Tok::Number) fail(num.pos, "expected step bound");
        const long long t = to_int(num);
        if (t < 0 || (strict && t == 0)) fail(num.pos, "step bound must be nonnegative");
        return static_cast<std::uint64_t>(strict ? t - 1 : t);
    }

    PathPtr primary() {
        const Token t = peek();
        if (accept_op("(")) {
            PathPtr inner = path();
            expect_op(")");
            return inner;
        }
        if (at_query()) {
            const Token head = next();
            QueryKind kind = query_kind(head);
            auto bound = prob_bound();
            PathPtr p = bracketed_path();
            return p_state(s_prob(kind, bound, std::move(p)));
        }
        if (t.kind == Tok::String) {
            next();
            return p_state(s_label(t.text));
        }
        if (t.kind == Tok::Ident) {
            next();
            if (t.text == "U" || t.text == "F" || t.text == "G" || t.text == "X") {
                fail(t.pos, "operator '" + t.text + "' is missing its operand");
            }
            if (t.text == "true") return p_state(s_true());
            if (t.text == "false") return p_state(s_false());
            if (auto op = cmp_of(peek())) {
                next();
                const Token num = next();
                if (num.kind != Tok::Number) fail(num.pos, "expected integer after comparison");
                return p_state(s_compare(t.text, *op, static_cast<int>(to_int(num))));
            }
            return p_state(s_label(t.text));
        }
        if (t.kind == Tok::End) fail(t.pos, "unexpected end of input");
        fail(t.pos, "unexpected token '" + t.text + "'");
    }

    static double to_double(const Token& t) {
        try {
            std::size_t used = 0;
            double v = std::stod(t.text, &used);
            if (used != t.text.size()) fail(t.pos, "malformed number '" + t.text + "'");
            return v;
        } catch (const std::logic_error&) {
            fail(t.pos, "malformed number '" + t.text + "'");
        }
    }

    static long long to_int(const Token& t) {
        long long v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size()) fail(t.pos, "expected integer, got '" + t.text + "'");
        return v;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

}  // namespace

Query parse_formula(std::string_view text) { return Parser(tokenize(text)).query(); }

}  // namespace pia::pctl
