// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Expression DSL over chart coordinates. Grammar (precedence low to high):
//
//   expr    := term (('+' | '-') term)*
//   term    := factor (('*' | '/') factor)*
//   factor  := '-' factor | power
//   power   := primary ('^' factor)?        right-associative
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// '^' binds tighter than unary minus: -x^2 is -(x^2), and x^-2 is legal.
// Functions: exp, ln, sin, cos, sqrt. Identifiers resolve against the chart's
// coordinate names at parse time; 't' resolves to the time binding when the
// chart does not declare it as a coordinate. Evaluation is generic over the
// scalar tower, so derivatives of any expression come from dual seeding.
// There is no symbolic simplification anywhere: operations on expressions
// are lazy closures over eval.

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lcskit/errors.hpp"
#include "lcskit/eval.hpp"

namespace lcskit::dsl {

enum class Func { Exp, Ln, Sin, Cos, Sqrt };

inline const char* funcName(Func f) {
    switch (f) {
        case Func::Exp: return "exp";
        case Func::Ln: return "ln";
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Sqrt: return "sqrt";
    }
    return "?";
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { Literal, Coord, Time, Neg, Add, Sub, Mul, Div, Pow, Call };
    Kind kind;
    double lit = 0.0;                     // Literal
    std::size_t coord = 0;                // Coord
    Func func = Func::Exp;                // Call
    NodePtr a, b;                         // operands
    std::optional<long long> intExp;      // Pow with integral literal exponent
};

class Expression {
  public:
    Expression() = default;
    Expression(NodePtr root, std::shared_ptr<const std::vector<std::string>> names)
        : root_(std::move(root)), names_(std::move(names)) {}

    bool valid() const { return root_ != nullptr; }
    const NodePtr& root() const { return root_; }
    const std::vector<std::string>& names() const { return *names_; }

    template <ad::Scalar S>
    S eval(const EvalCtx<S>& ctx) const {
        if (!root_) throw Error("evaluating an empty expression");
        if (ctx.coords.size() != names_->size())
            throw ChartMismatchError("expression evaluated with " +
                                     std::to_string(ctx.coords.size()) +
                                     " coordinates, chart has " +
                                     std::to_string(names_->size()));
        return evalNode(*root_, ctx);
    }

    std::string render() const;

    friend bool structurallyEqual(const Expression& x, const Expression& y);

  private:
    template <ad::Scalar S>
    static S evalNode(const Node& n, const EvalCtx<S>& ctx) {
        using Kind = Node::Kind;
        switch (n.kind) {
            case Kind::Literal: return S(n.lit);
            case Kind::Coord: return ctx.coords[n.coord];
            case Kind::Time:
                if (!ctx.t) throw Error("time-dependent expression evaluated without t");
                return *ctx.t;
            case Kind::Neg: return -evalNode(*n.a, ctx);
            case Kind::Add: return evalNode(*n.a, ctx) + evalNode(*n.b, ctx);
            case Kind::Sub: return evalNode(*n.a, ctx) - evalNode(*n.b, ctx);
            case Kind::Mul: return evalNode(*n.a, ctx) * evalNode(*n.b, ctx);
            case Kind::Div:
                return ad::checkedDiv(evalNode(*n.a, ctx), evalNode(*n.b, ctx));
            case Kind::Pow: {
                S base = evalNode(*n.a, ctx);
                if (n.intExp) return ad::ipow(base, *n.intExp);
                return ad::powGeneral(base, evalNode(*n.b, ctx));
            }
            case Kind::Call: {
                S arg = evalNode(*n.a, ctx);
                switch (n.func) {
                    case Func::Exp: {
                        using std::exp;
                        return exp(arg);
                    }
                    case Func::Ln: return ad::checkedLog(arg);
                    case Func::Sin: {
                        using std::sin;
                        return sin(arg);
                    }
                    case Func::Cos: {
                        using std::cos;
                        return cos(arg);
                    }
                    case Func::Sqrt: return ad::checkedSqrt(arg);
                }
                throw Error("unreachable call kind");
            }
        }
        throw Error("unreachable node kind");
    }

    NodePtr root_;
    std::shared_ptr<const std::vector<std::string>> names_;
};

// Directional derivative of an expression along one coordinate (or the time
// slot), one dual level above the context.
template <ad::Scalar S>
S partial(const Expression& e, std::size_t dir, const EvalCtx<S>& ctx) {
    if constexpr (Lift<S>::capped) {
        throw NestingOverflowError();
    } else {
        return e.eval(seedDirection(ctx, dir)).dot;
    }
}

// ---- parsing ---------------------------------------------------------------

namespace detail {

struct Token {
    enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Kind kind = Kind::End;
    double num = 0.0;
    std::string text;
    std::size_t line = 1, col = 1;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skipSpace();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) {
            t.kind = Token::Kind::End;
            return t;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lexNumber(t);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lexIdent(t);
        advance();
        switch (c) {
            case '+': t.kind = Token::Kind::Plus; return t;
            case '-': t.kind = Token::Kind::Minus; return t;
            case '*': t.kind = Token::Kind::Star; return t;
            case '/': t.kind = Token::Kind::Slash; return t;
            case '^': t.kind = Token::Kind::Caret; return t;
            case '(': t.kind = Token::Kind::LParen; return t;
            case ')': t.kind = Token::Kind::RParen; return t;
            default:
                throw SyntaxError(t.line, t.col, std::string("unexpected character '") + c + "'");
        }
    }

  private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skipSpace() {
        while (pos_ < src_.size() &&
               std::isspace(static_cast<unsigned char>(src_[pos_])))
            advance();
    }

    Token lexNumber(Token t) {
        std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                advance();
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                digits();
            } else {
                // 'e' belonged to a following identifier, not this number
                while (pos_ > mark) {
                    --pos_;
                    --col_;
                }
            }
        }
        std::string_view text = src_.substr(start, pos_ - start);
        double v = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
            throw SyntaxError(t.line, t.col, "malformed number '" + std::string(text) + "'");
        t.kind = Token::Kind::Number;
        t.num = v;
        t.text = std::string(text);
        return t;
    }

    Token lexIdent(Token t) {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            advance();
        t.kind = Token::Kind::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

class Parser {
  public:
    Parser(std::string_view src, std::shared_ptr<const std::vector<std::string>> names,
           bool allowTime)
        : lex_(src), names_(std::move(names)), allowTime_(allowTime) {
        cur_ = lex_.next();
    }

    Expression parseAll() {
        NodePtr e = parseExpr();
        expect(Token::Kind::End, "end of input");
        return Expression(e, names_);
    }

  private:
    using Kind = Token::Kind;

    void bump() { cur_ = lex_.next(); }

    void expect(Kind k, const char* what) {
        if (cur_.kind != k)
            throw SyntaxError(cur_.line, cur_.col, std::string("expected ") + what);
        if (k != Kind::End) bump();
    }

    NodePtr parseExpr() {
        NodePtr lhs = parseTerm();
        while (cur_.kind == Kind::Plus || cur_.kind == Kind::Minus) {
            Node::Kind op = cur_.kind == Kind::Plus ? Node::Kind::Add : Node::Kind::Sub;
            bump();
            NodePtr rhs = parseTerm();
            lhs = makeBinary(op, lhs, rhs);
        }
        return lhs;
    }

    NodePtr parseTerm() {
        NodePtr lhs = parseFactor();
        while (cur_.kind == Kind::Star || cur_.kind == Kind::Slash) {
            Node::Kind op = cur_.kind == Kind::Star ? Node::Kind::Mul : Node::Kind::Div;
            bump();
            NodePtr rhs = parseFactor();
            lhs = makeBinary(op, lhs, rhs);
        }
        return lhs;
    }

    NodePtr parseFactor() {
        if (cur_.kind == Kind::Minus) {
            bump();
            NodePtr inner = parseFactor();
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Neg;
            n->a = inner;
            return n;
        }
        return parsePower();
    }

    NodePtr parsePower() {
        NodePtr base = parsePrimary();
        if (cur_.kind == Kind::Caret) {
            bump();
            NodePtr expo = parseFactor();
            return makeBinary(Node::Kind::Pow, base, expo);
        }
        return base;
    }

    NodePtr parsePrimary() {
        if (cur_.kind == Kind::Number) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Literal;
            n->lit = cur_.num;
            bump();
            return n;
        }
        if (cur_.kind == Kind::LParen) {
            bump();
            NodePtr e = parseExpr();
            expect(Kind::RParen, "')'");
            return e;
        }
        if (cur_.kind == Kind::Ident) {
            Token id = cur_;
            bump();
            if (cur_.kind == Kind::LParen) {
                std::optional<Func> f = lookupFunc(id.text);
                if (!f) throw UnknownIdentifierError(id.text, id.line, id.col);
                bump();
                NodePtr arg = parseExpr();
                expect(Kind::RParen, "')'");
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::Call;
                n->func = *f;
                n->a = arg;
                return n;
            }
            for (std::size_t i = 0; i < names_->size(); ++i) {
                if ((*names_)[i] == id.text) {
                    auto n = std::make_shared<Node>();
                    n->kind = Node::Kind::Coord;
                    n->coord = i;
                    return n;
                }
            }
            if (id.text == "t" && allowTime_) {
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::Time;
                return n;
            }
            throw UnknownIdentifierError(id.text, id.line, id.col);
        }
        throw SyntaxError(cur_.line, cur_.col, "expected a number, name, or '('");
    }

    static std::optional<Func> lookupFunc(const std::string& s) {
        if (s == "exp") return Func::Exp;
        if (s == "ln") return Func::Ln;
        if (s == "sin") return Func::Sin;
        if (s == "cos") return Func::Cos;
        if (s == "sqrt") return Func::Sqrt;
        return std::nullopt;
    }

    static NodePtr makeBinary(Node::Kind op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = op;
        n->a = std::move(a);
        n->b = std::move(b);
        if (op == Node::Kind::Pow) {
            // Freeze integral literal exponents (including a leading minus) so
            // negative bases stay in-domain and derivatives use the power rule.
            const Node* e = n->b.get();
            double sign = 1.0;
            if (e->kind == Node::Kind::Neg) {
                sign = -1.0;
                e = e->a.get();
            }
            if (e->kind == Node::Kind::Literal) {
                double v = sign * e->lit;
                if (v == std::floor(v) && std::abs(v) <= 64.0)
                    n->intExp = static_cast<long long>(v);
            }
        }
        return n;
    }

    Lexer lex_;
    Token cur_;
    std::shared_ptr<const std::vector<std::string>> names_;
    bool allowTime_;
};

inline int precedence(Node::Kind k) {
    switch (k) {
        case Node::Kind::Add:
        case Node::Kind::Sub: return 1;
        case Node::Kind::Mul:
        case Node::Kind::Div: return 2;
        case Node::Kind::Neg: return 3;
        case Node::Kind::Pow: return 4;
        default: return 5;
    }
}

inline std::string renderNumber(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void renderNode(const Node& n, const std::vector<std::string>& names,
                       std::string& out) {
    auto child = [&](const Node& c, bool parens) {
        if (parens) out += '(';
        renderNode(c, names, out);
        if (parens) out += ')';
    };
    switch (n.kind) {
        case Node::Kind::Literal: out += renderNumber(n.lit); return;
        case Node::Kind::Coord: out += names[n.coord]; return;
        case Node::Kind::Time: out += 't'; return;
        case Node::Kind::Neg:
            out += '-';
            child(*n.a, precedence(n.a->kind) < 4);
            return;
        case Node::Kind::Add:
        case Node::Kind::Sub: {
            // Right children of equal precedence need parens: the grammar is
            // left-associative, so a + (b - c) must not render as a + b - c.
            child(*n.a, precedence(n.a->kind) < 1);
            out += n.kind == Node::Kind::Add ? " + " : " - ";
            child(*n.b, precedence(n.b->kind) < 2);
            return;
        }
        case Node::Kind::Mul:
        case Node::Kind::Div: {
            child(*n.a, precedence(n.a->kind) < 2);
            out += n.kind == Node::Kind::Mul ? "*" : "/";
            child(*n.b, precedence(n.b->kind) < 3);
            return;
        }
        case Node::Kind::Pow: {
            child(*n.a, precedence(n.a->kind) < 5);
            out += '^';
            child(*n.b, precedence(n.b->kind) < 3);
            return;
        }
        case Node::Kind::Call: {
            out += funcName(n.func);
            out += '(';
            renderNode(*n.a, names, out);
            out += ')';
            return;
        }
    }
}

inline bool nodesEqual(const Node& x, const Node& y) {
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case Node::Kind::Literal: return x.lit == y.lit;
        case Node::Kind::Coord: return x.coord == y.coord;
        case Node::Kind::Time: return true;
        case Node::Kind::Neg: return nodesEqual(*x.a, *y.a);
        case Node::Kind::Call: return x.func == y.func && nodesEqual(*x.a, *y.a);
        default: return nodesEqual(*x.a, *y.a) && nodesEqual(*x.b, *y.b);
    }
}

}  // namespace detail

inline std::string Expression::render() const {
    if (!root_) return "";
    std::string out;
    detail::renderNode(*root_, *names_, out);
    return out;
}

inline bool structurallyEqual(const Expression& x, const Expression& y) {
    if (!x.root_ || !y.root_) return x.root_ == y.root_;
    return detail::nodesEqual(*x.root_, *y.root_);
}

// Parses against a fixed list of coordinate names; 't' is the time binding
// unless declared as a coordinate.
inline Expression parse(std::string_view text,
                        std::shared_ptr<const std::vector<std::string>> names,
                        bool allowTime = true) {
    return detail::Parser(text, std::move(names), allowTime).parseAll();
}

inline Expression parse(std::string_view text, const std::vector<std::string>& names,
                        bool allowTime = true) {
    return parse(text, std::make_shared<const std::vector<std::string>>(names), allowTime);
}

}  // namespace lcskit::dsl
