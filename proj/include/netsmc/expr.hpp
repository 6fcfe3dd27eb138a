/*
 * Copyright 2026 The netsmc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Expression language shared by state-machine conditions/assignments, MDP
// guards, and verification properties. Deliberately small: booleans, bounded
// integers, reals, fixed-size integer arrays, and the usual arithmetic,
// comparison and logic operators. Every construct has a direct counterpart in
// the emitted model format.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netsmc/diag.hpp"

namespace netsmc {

constexpr std::int64_t kDefaultIntLo = -32768;
constexpr std::int64_t kDefaultIntHi = 32767;

enum class TypeKind { Bool, Int, Real, IntArray };

struct Type {
    TypeKind kind = TypeKind::Int;
    std::int64_t lo = kDefaultIntLo;  // Int bounds, or element bounds for IntArray
    std::int64_t hi = kDefaultIntHi;
    std::size_t size = 0;  // IntArray length

    static Type boolean() { return Type{TypeKind::Bool, 0, 1, 0}; }
    static Type integer(std::int64_t lo = kDefaultIntLo, std::int64_t hi = kDefaultIntHi) {
        return Type{TypeKind::Int, lo, hi, 0};
    }
    static Type real() { return Type{TypeKind::Real, 0, 0, 0}; }
    static Type intArray(std::size_t n, std::int64_t lo = kDefaultIntLo,
                         std::int64_t hi = kDefaultIntHi) {
        return Type{TypeKind::IntArray, lo, hi, n};
    }

    bool isNumeric() const { return kind == TypeKind::Int || kind == TypeKind::Real; }
    bool isScalar() const { return kind != TypeKind::IntArray; }

    friend bool operator==(const Type& a, const Type& b) {
        if (a.kind != b.kind) {
            return false;
        }
        switch (a.kind) {
            case TypeKind::Bool:
            case TypeKind::Real: return true;
            case TypeKind::Int: return a.lo == b.lo && a.hi == b.hi;
            case TypeKind::IntArray: return a.lo == b.lo && a.hi == b.hi && a.size == b.size;
        }
        return false;
    }
    friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }

    std::string str() const {
        switch (kind) {
            case TypeKind::Bool: return "bool";
            case TypeKind::Real: return "real";
            case TypeKind::Int:
                return "int[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
            case TypeKind::IntArray:
                return "array[" + std::to_string(size) + "] of int[" + std::to_string(lo) + "," +
                       std::to_string(hi) + "]";
        }
        return "?";
    }
};

/// Runtime value of a scalar expression.
struct Value {
    TypeKind kind = TypeKind::Int;
    std::int64_t i = 0;
    double d = 0.0;

    static Value boolean(bool b) { return Value{TypeKind::Bool, b ? 1 : 0, 0.0}; }
    static Value integer(std::int64_t v) { return Value{TypeKind::Int, v, 0.0}; }
    static Value real(double v) { return Value{TypeKind::Real, 0, v}; }

    bool asBool() const { return i != 0; }
    std::int64_t asInt() const { return i; }
    double asNumber() const { return kind == TypeKind::Real ? d : static_cast<double>(i); }

    friend bool operator==(const Value& a, const Value& b) {
        if (a.kind == TypeKind::Real || b.kind == TypeKind::Real) {
            return a.asNumber() == b.asNumber();
        }
        return a.kind == b.kind && a.i == b.i;
    }

    std::string str() const {
        switch (kind) {
            case TypeKind::Bool: return i != 0 ? "true" : "false";
            case TypeKind::Real: {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.17g", d);
                return buf;
            }
            default: return std::to_string(i);
        }
    }
};

class EvalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::optional<Type> scalarTypeOfValue(const Value& v) {
    switch (v.kind) {
        case TypeKind::Bool: return Type::boolean();
        case TypeKind::Real: return Type::real();
        case TypeKind::Int: return Type::integer();
        default: return std::nullopt;
    }
}

enum class ExprOp {
    Lit,
    Var,
    EventField,  // `_event.<name>` inside a triggered transition
    ArrayLit,    // only valid as an array initializer
    Not,
    Neg,
    And,
    Or,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Index,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprOp op = ExprOp::Lit;
    Value lit;
    std::string name;           // Var / EventField
    std::vector<ExprPtr> args;  // operands, or ArrayLit elements
    SourcePos pos;

    static ExprPtr literal(Value v, SourcePos pos = {}) {
        auto e = std::make_shared<Expr>();
        e->op = ExprOp::Lit;
        e->lit = v;
        e->pos = std::move(pos);
        return e;
    }
    static ExprPtr boolean(bool b) { return literal(Value::boolean(b)); }
    static ExprPtr integer(std::int64_t v) { return literal(Value::integer(v)); }
    static ExprPtr var(std::string name, SourcePos pos = {}) {
        auto e = std::make_shared<Expr>();
        e->op = ExprOp::Var;
        e->name = std::move(name);
        e->pos = std::move(pos);
        return e;
    }
    static ExprPtr eventField(std::string name, SourcePos pos = {}) {
        auto e = std::make_shared<Expr>();
        e->op = ExprOp::EventField;
        e->name = std::move(name);
        e->pos = std::move(pos);
        return e;
    }
    static ExprPtr unary(ExprOp op, ExprPtr a, SourcePos pos = {}) {
        auto e = std::make_shared<Expr>();
        e->op = op;
        e->args = {std::move(a)};
        e->pos = std::move(pos);
        return e;
    }
    static ExprPtr binary(ExprOp op, ExprPtr a, ExprPtr b, SourcePos pos = {}) {
        auto e = std::make_shared<Expr>();
        e->op = op;
        e->args = {std::move(a), std::move(b)};
        e->pos = std::move(pos);
        return e;
    }
    static ExprPtr arrayLit(std::vector<ExprPtr> elems, SourcePos pos = {}) {
        auto e = std::make_shared<Expr>();
        e->op = ExprOp::ArrayLit;
        e->args = std::move(elems);
        e->pos = std::move(pos);
        return e;
    }

    bool isTrueLiteral() const { return op == ExprOp::Lit && lit.kind == TypeKind::Bool && lit.i == 1; }
    bool isFalseLiteral() const { return op == ExprOp::Lit && lit.kind == TypeKind::Bool && lit.i == 0; }
};

/// Structural equality, used by round-trip tests and model comparison.
inline bool exprEquals(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) {
        return true;
    }
    if (!a || !b || a->op != b->op || a->name != b->name || a->args.size() != b->args.size()) {
        return false;
    }
    if (a->op == ExprOp::Lit && !(a->lit == b->lit && a->lit.kind == b->lit.kind)) {
        return false;
    }
    for (std::size_t i = 0; i < a->args.size(); ++i) {
        if (!exprEquals(a->args[i], b->args[i])) {
            return false;
        }
    }
    return true;
}

namespace detail {

inline int precedence(ExprOp op) {
    switch (op) {
        case ExprOp::Or: return 1;
        case ExprOp::And: return 2;
        case ExprOp::Eq:
        case ExprOp::Ne: return 3;
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge: return 4;
        case ExprOp::Add:
        case ExprOp::Sub: return 5;
        case ExprOp::Mul:
        case ExprOp::Div:
        case ExprOp::Mod: return 6;
        case ExprOp::Not:
        case ExprOp::Neg: return 7;
        default: return 8;
    }
}

inline const char* opToken(ExprOp op) {
    switch (op) {
        case ExprOp::Or: return "||";
        case ExprOp::And: return "&&";
        case ExprOp::Eq: return "==";
        case ExprOp::Ne: return "!=";
        case ExprOp::Lt: return "<";
        case ExprOp::Le: return "<=";
        case ExprOp::Gt: return ">";
        case ExprOp::Ge: return ">=";
        case ExprOp::Add: return "+";
        case ExprOp::Sub: return "-";
        case ExprOp::Mul: return "*";
        case ExprOp::Div: return "/";
        case ExprOp::Mod: return "%";
        default: return "?";
    }
}

}  // namespace detail

/// Prints an expression in the concrete syntax accepted by parseExpr, adding
/// parentheses only where precedence requires them.
inline std::string exprToString(const ExprPtr& e) {
    using detail::precedence;
    if (!e) {
        return "";
    }
    switch (e->op) {
        case ExprOp::Lit: return e->lit.str();
        case ExprOp::Var: return e->name;
        case ExprOp::EventField: return "_event." + e->name;
        case ExprOp::ArrayLit: {
            std::string out = "[";
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i > 0) {
                    out += ", ";
                }
                out += exprToString(e->args[i]);
            }
            return out + "]";
        }
        case ExprOp::Not:
        case ExprOp::Neg: {
            const auto& a = e->args[0];
            std::string inner = exprToString(a);
            bool paren = precedence(a->op) < precedence(e->op) && a->op != ExprOp::Lit &&
                         a->op != ExprOp::Var && a->op != ExprOp::EventField;
            std::string tok = e->op == ExprOp::Not ? "!" : "-";
            return paren ? tok + "(" + inner + ")" : tok + inner;
        }
        case ExprOp::Index: {
            return exprToString(e->args[0]) + "[" + exprToString(e->args[1]) + "]";
        }
        default: {
            const auto& a = e->args[0];
            const auto& b = e->args[1];
            int p = precedence(e->op);
            std::string lhs = exprToString(a);
            std::string rhs = exprToString(b);
            if (precedence(a->op) < p) {
                lhs = "(" + lhs + ")";
            }
            // Left-associative operators: right operand needs parens at equal precedence.
            if (precedence(b->op) <= p) {
                rhs = "(" + rhs + ")";
            }
            return lhs + " " + detail::opToken(e->op) + " " + rhs;
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class ExprParser {
  public:
    ExprParser(std::string_view text, SourcePos base, bool allowArrayLit)
        : text_(text), base_(std::move(base)), allowArrayLit_(allowArrayLit) {}

    ExprPtr parse() {
        auto e = parseImplies();
        skipWs();
        if (pos_ < text_.size()) {
            fail("unexpected trailing input in expression");
        }
        return e;
    }

  private:
    std::string_view text_;
    SourcePos base_;
    bool allowArrayLit_;
    std::size_t pos_ = 0;

    SourcePos here() const {
        SourcePos p = base_;
        p.col += pos_;
        return p;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw InputError(here(), msg); }

    void skipWs() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                       text_[pos_] == '\n' || text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool match(std::string_view tok) {
        skipWs();
        if (text_.compare(pos_, tok.size(), tok) != 0) {
            return false;
        }
        // Do not split multi-char operators: "<" must not match in "<=".
        if ((tok == "<" || tok == ">" || tok == "!" || tok == "=") && pos_ + tok.size() < text_.size()) {
            char next = text_[pos_ + tok.size()];
            if (next == '=') {
                return false;
            }
        }
        pos_ += tok.size();
        return true;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    ExprPtr parseImplies() {
        auto lhs = parseOr();
        skipWs();
        if (match("=>")) {
            auto rhs = parseImplies();  // right associative
            // Sugar only: stored as !lhs || rhs.
            return Expr::binary(ExprOp::Or, Expr::unary(ExprOp::Not, lhs, lhs->pos), rhs, lhs->pos);
        }
        return lhs;
    }

    ExprPtr parseOr() {
        auto lhs = parseAnd();
        while (match("||")) {
            lhs = Expr::binary(ExprOp::Or, lhs, parseAnd(), lhs->pos);
        }
        return lhs;
    }

    ExprPtr parseAnd() {
        auto lhs = parseEq();
        while (match("&&")) {
            lhs = Expr::binary(ExprOp::And, lhs, parseEq(), lhs->pos);
        }
        return lhs;
    }

    ExprPtr parseEq() {
        auto lhs = parseCmp();
        for (;;) {
            if (match("==")) {
                lhs = Expr::binary(ExprOp::Eq, lhs, parseCmp(), lhs->pos);
            } else if (match("!=")) {
                lhs = Expr::binary(ExprOp::Ne, lhs, parseCmp(), lhs->pos);
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parseCmp() {
        auto lhs = parseAdd();
        for (;;) {
            if (match("<=")) {
                lhs = Expr::binary(ExprOp::Le, lhs, parseAdd(), lhs->pos);
            } else if (match(">=")) {
                lhs = Expr::binary(ExprOp::Ge, lhs, parseAdd(), lhs->pos);
            } else if (match("<")) {
                lhs = Expr::binary(ExprOp::Lt, lhs, parseAdd(), lhs->pos);
            } else if (match(">")) {
                lhs = Expr::binary(ExprOp::Gt, lhs, parseAdd(), lhs->pos);
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parseAdd() {
        auto lhs = parseMul();
        for (;;) {
            skipWs();
            if (match("+")) {
                lhs = Expr::binary(ExprOp::Add, lhs, parseMul(), lhs->pos);
            } else if (peekMinusBinary()) {
                match("-");
                lhs = Expr::binary(ExprOp::Sub, lhs, parseMul(), lhs->pos);
            } else {
                return lhs;
            }
        }
    }

    bool peekMinusBinary() {
        skipWs();
        return peek() == '-' && text_.compare(pos_, 2, "->") != 0;
    }

    ExprPtr parseMul() {
        auto lhs = parseUnary();
        for (;;) {
            skipWs();
            if (match("*")) {
                lhs = Expr::binary(ExprOp::Mul, lhs, parseUnary(), lhs->pos);
            } else if (match("/")) {
                lhs = makeDiv(ExprOp::Div, lhs, parseUnary());
            } else if (match("%")) {
                lhs = makeDiv(ExprOp::Mod, lhs, parseUnary());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr makeDiv(ExprOp op, ExprPtr lhs, ExprPtr rhs);  // defined after constFold

    ExprPtr parseUnary() {
        skipWs();
        SourcePos p = here();
        if (match("!")) {
            return Expr::unary(ExprOp::Not, parseUnary(), p);
        }
        if (peek() == '-') {
            ++pos_;
            return Expr::unary(ExprOp::Neg, parseUnary(), p);
        }
        return parsePostfix();
    }

    ExprPtr parsePostfix() {
        auto e = parsePrimary();
        for (;;) {
            skipWs();
            if (match("[")) {
                auto idx = parseImplies();
                skipWs();
                if (!match("]")) {
                    fail("expected ']' after array index");
                }
                e = Expr::binary(ExprOp::Index, e, idx, e->pos);
            } else {
                return e;
            }
        }
    }

    ExprPtr parsePrimary() {
        skipWs();
        SourcePos p = here();
        if (match("(")) {
            auto e = parseImplies();
            skipWs();
            if (!match(")")) {
                fail("expected ')'");
            }
            return e;
        }
        if (allowArrayLit_ && peek() == '[') {
            ++pos_;
            std::vector<ExprPtr> elems;
            skipWs();
            if (!match("]")) {
                for (;;) {
                    elems.push_back(parseImplies());
                    skipWs();
                    if (match(",")) {
                        continue;
                    }
                    if (match("]")) {
                        break;
                    }
                    fail("expected ',' or ']' in array literal");
                }
            }
            return Expr::arrayLit(std::move(elems), p);
        }
        char c = peek();
        if (c >= '0' && c <= '9') {
            return parseNumber(p);
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::string name;
            while (pos_ < text_.size()) {
                char k = text_[pos_];
                if ((k >= 'a' && k <= 'z') || (k >= 'A' && k <= 'Z') || (k >= '0' && k <= '9') ||
                    k == '_') {
                    name += k;
                    ++pos_;
                } else {
                    break;
                }
            }
            if (name == "true") {
                return Expr::literal(Value::boolean(true), p);
            }
            if (name == "false") {
                return Expr::literal(Value::boolean(false), p);
            }
            if (name == "_event") {
                if (peek() != '.') {
                    fail("expected '.' after _event");
                }
                ++pos_;
                std::string field;
                while (pos_ < text_.size()) {
                    char k = text_[pos_];
                    if ((k >= 'a' && k <= 'z') || (k >= 'A' && k <= 'Z') || (k >= '0' && k <= '9') ||
                        k == '_') {
                        field += k;
                        ++pos_;
                    } else {
                        break;
                    }
                }
                if (field.empty()) {
                    fail("expected field name after _event.");
                }
                return Expr::eventField(field, p);
            }
            return Expr::var(name, p);
        }
        fail(pos_ >= text_.size() ? "unexpected end of expression"
                                  : std::string("unexpected character '") + c + "' in expression");
    }

    ExprPtr parseNumber(const SourcePos& p) {
        std::string digits;
        bool isReal = false;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
            digits += text_[pos_++];
        }
        if (pos_ + 1 < text_.size() && text_[pos_] == '.' && text_[pos_ + 1] >= '0' &&
            text_[pos_ + 1] <= '9') {
            isReal = true;
            digits += text_[pos_++];
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                digits += text_[pos_++];
            }
        }
        if (isReal) {
            return Expr::literal(Value::real(std::stod(digits)), p);
        }
        return Expr::literal(Value::integer(std::stoll(digits)), p);
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Evaluation

/// Binds names during evaluation. All lookups throw EvalError when unbound.
struct EvalEnv {
    std::function<Value(const std::string&)> var;
    std::function<Value(const std::string&)> eventField;
    std::function<Value(const std::string&, std::int64_t)> arrayElem;
};

inline Value evalExpr(const ExprPtr& e, const EvalEnv& env) {
    switch (e->op) {
        case ExprOp::Lit: return e->lit;
        case ExprOp::Var:
            if (!env.var) {
                throw EvalError("unbound variable reference: " + e->name);
            }
            return env.var(e->name);
        case ExprOp::EventField:
            if (!env.eventField) {
                throw EvalError("event payload not available here: _event." + e->name);
            }
            return env.eventField(e->name);
        case ExprOp::ArrayLit: throw EvalError("array literal cannot be evaluated as a scalar");
        case ExprOp::Not: return Value::boolean(!evalExpr(e->args[0], env).asBool());
        case ExprOp::Neg: {
            Value v = evalExpr(e->args[0], env);
            return v.kind == TypeKind::Real ? Value::real(-v.d) : Value::integer(-v.i);
        }
        case ExprOp::And:
            // Short-circuit, so guards like `i < n && a[i] > 0` are safe.
            if (!evalExpr(e->args[0], env).asBool()) {
                return Value::boolean(false);
            }
            return Value::boolean(evalExpr(e->args[1], env).asBool());
        case ExprOp::Or:
            if (evalExpr(e->args[0], env).asBool()) {
                return Value::boolean(true);
            }
            return Value::boolean(evalExpr(e->args[1], env).asBool());
        case ExprOp::Index: {
            if (e->args[0]->op != ExprOp::Var) {
                throw EvalError("array index on non-variable expression");
            }
            if (!env.arrayElem) {
                throw EvalError("array access not available here");
            }
            Value idx = evalExpr(e->args[1], env);
            return env.arrayElem(e->args[0]->name, idx.asInt());
        }
        default: break;
    }
    Value a = evalExpr(e->args[0], env);
    Value b = evalExpr(e->args[1], env);
    bool anyReal = a.kind == TypeKind::Real || b.kind == TypeKind::Real;
    switch (e->op) {
        case ExprOp::Add:
            return anyReal ? Value::real(a.asNumber() + b.asNumber()) : Value::integer(a.i + b.i);
        case ExprOp::Sub:
            return anyReal ? Value::real(a.asNumber() - b.asNumber()) : Value::integer(a.i - b.i);
        case ExprOp::Mul:
            return anyReal ? Value::real(a.asNumber() * b.asNumber()) : Value::integer(a.i * b.i);
        case ExprOp::Div:
            if (anyReal) {
                if (b.asNumber() == 0.0) {
                    throw EvalError("division by zero");
                }
                return Value::real(a.asNumber() / b.asNumber());
            }
            if (b.i == 0) {
                throw EvalError("division by zero");
            }
            return Value::integer(a.i / b.i);
        case ExprOp::Mod:
            if (anyReal) {
                throw EvalError("modulo on real operands");
            }
            if (b.i == 0) {
                throw EvalError("modulo by zero");
            }
            return Value::integer(a.i % b.i);
        case ExprOp::Lt: return Value::boolean(a.asNumber() < b.asNumber());
        case ExprOp::Le: return Value::boolean(a.asNumber() <= b.asNumber());
        case ExprOp::Gt: return Value::boolean(a.asNumber() > b.asNumber());
        case ExprOp::Ge: return Value::boolean(a.asNumber() >= b.asNumber());
        case ExprOp::Eq: return Value::boolean(a == b);
        case ExprOp::Ne: return Value::boolean(!(a == b));
        default: throw EvalError("unhandled operator");
    }
}

/// Evaluates to a constant when the expression references no names.
inline std::optional<Value> constFold(const ExprPtr& e) {
    switch (e->op) {
        case ExprOp::Var:
        case ExprOp::EventField:
        case ExprOp::ArrayLit:
        case ExprOp::Index: return std::nullopt;
        default: break;
    }
    try {
        EvalEnv noEnv;
        for (const auto& a : e->args) {
            if (!constFold(a)) {
                return std::nullopt;
            }
        }
        return evalExpr(e, noEnv);
    } catch (const EvalError&) {
        return std::nullopt;
    }
}

namespace detail {

inline ExprPtr ExprParser::makeDiv(ExprOp op, ExprPtr lhs, ExprPtr rhs) {
    if (auto v = constFold(rhs); v && v->kind != TypeKind::Real && v->i == 0) {
        throw InputError(rhs->pos, op == ExprOp::Div ? "division by constant zero"
                                                     : "modulo by constant zero");
    }
    if (auto v = constFold(rhs); v && v->kind == TypeKind::Real && v->d == 0.0) {
        throw InputError(rhs->pos, "division by constant zero");
    }
    return Expr::binary(op, std::move(lhs), std::move(rhs), lhs ? lhs->pos : SourcePos{});
}

}  // namespace detail

/// Parses the textual expression syntax. `base` positions diagnostics at the
/// attribute that held the text. Array literals are only meaningful in
/// variable initializers, so they are opt-in.
inline ExprPtr parseExpr(std::string_view text, SourcePos base = {}, bool allowArrayLit = false) {
    return detail::ExprParser(text, std::move(base), allowArrayLit).parse();
}

// ---------------------------------------------------------------------------
// Type checking

/// Resolves names to declared types during checking. Returning nullopt means
/// the name is unknown in this scope.
struct TypeScope {
    std::function<std::optional<Type>(const std::string&)> var;
    std::function<std::optional<Type>(const std::string&)> eventField;
};

/// Returns the static type, or records a diagnostic and returns nullopt.
inline std::optional<Type> typeCheck(const ExprPtr& e, const TypeScope& scope,
                                     DiagnosticList& diags) {
    auto err = [&](const std::string& msg) -> std::optional<Type> {
        diags.error(e->pos, msg);
        return std::nullopt;
    };
    switch (e->op) {
        case ExprOp::Lit:
            switch (e->lit.kind) {
                case TypeKind::Bool: return Type::boolean();
                case TypeKind::Real: return Type::real();
                default: return Type::integer();
            }
        case ExprOp::Var: {
            if (!scope.var) {
                return err("variable references not allowed here: " + e->name);
            }
            auto t = scope.var(e->name);
            if (!t) {
                return err("reference to undeclared variable '" + e->name + "'");
            }
            return t;
        }
        case ExprOp::EventField: {
            if (!scope.eventField) {
                return err("event payload reference '_event." + e->name +
                           "' outside an event-triggered transition");
            }
            auto t = scope.eventField(e->name);
            if (!t) {
                return err("event has no payload field '" + e->name + "'");
            }
            return t;
        }
        case ExprOp::ArrayLit: return err("array literal outside a variable initializer");
        case ExprOp::Not: {
            auto t = typeCheck(e->args[0], scope, diags);
            if (t && t->kind != TypeKind::Bool) {
                return err("operand of '!' must be bool, got " + t->str());
            }
            return t ? std::optional<Type>(Type::boolean()) : std::nullopt;
        }
        case ExprOp::Neg: {
            auto t = typeCheck(e->args[0], scope, diags);
            if (t && !t->isNumeric()) {
                return err("operand of unary '-' must be numeric, got " + t->str());
            }
            return t;
        }
        case ExprOp::Index: {
            if (e->args[0]->op != ExprOp::Var) {
                return err("array index requires a variable on the left");
            }
            auto at = typeCheck(e->args[0], scope, diags);
            auto it = typeCheck(e->args[1], scope, diags);
            if (at && at->kind != TypeKind::IntArray) {
                return err("indexed variable '" + e->args[0]->name + "' is not an array");
            }
            if (it && it->kind != TypeKind::Int) {
                return err("array index must be an integer");
            }
            if (!at) {
                return std::nullopt;
            }
            return Type::integer(at->lo, at->hi);
        }
        default: break;
    }
    auto ta = typeCheck(e->args[0], scope, diags);
    auto tb = typeCheck(e->args[1], scope, diags);
    if (!ta || !tb) {
        return std::nullopt;
    }
    switch (e->op) {
        case ExprOp::And:
        case ExprOp::Or:
            if (ta->kind != TypeKind::Bool || tb->kind != TypeKind::Bool) {
                return err("logical operator needs bool operands");
            }
            return Type::boolean();
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
        case ExprOp::Div:
            if (!ta->isNumeric() || !tb->isNumeric()) {
                return err("arithmetic needs numeric operands");
            }
            if (ta->kind == TypeKind::Real || tb->kind == TypeKind::Real) {
                return Type::real();
            }
            return Type::integer();
        case ExprOp::Mod:
            if (ta->kind != TypeKind::Int || tb->kind != TypeKind::Int) {
                return err("'%' needs integer operands");
            }
            return Type::integer();
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge:
            if (!ta->isNumeric() || !tb->isNumeric()) {
                return err("comparison needs numeric operands");
            }
            return Type::boolean();
        case ExprOp::Eq:
        case ExprOp::Ne:
            if (ta->isNumeric() != tb->isNumeric()) {
                return err("'==' operands must both be numeric or both bool");
            }
            if (!ta->isNumeric() && (ta->kind != TypeKind::Bool || tb->kind != TypeKind::Bool)) {
                return err("'==' is not defined for " + ta->str());
            }
            return Type::boolean();
        default: return err("unhandled operator");
    }
}

/// Parses a declared-type string: bool, real, int, int[lo,hi],
/// array[n] of int, array[n] of int[lo,hi]. Bounds may be constant
/// expressions over `consts`.
inline Type parseTypeString(const std::string& text, const SourcePos& pos,
                            const std::function<std::optional<Value>(const std::string&)>& consts) {
    auto evalBound = [&](const std::string& s) -> std::int64_t {
        ExprPtr e = parseExpr(s, pos);
        EvalEnv env;
        env.var = [&](const std::string& n) -> Value {
            if (consts) {
                if (auto v = consts(n)) {
                    return *v;
                }
            }
            throw EvalError("unknown constant '" + n + "' in type bound");
        };
        try {
            Value v = evalExpr(e, env);
            if (v.kind == TypeKind::Real) {
                throw InputError(pos, "type bound must be an integer");
            }
            return v.asInt();
        } catch (const EvalError& err) {
            throw InputError(pos, std::string("bad type bound: ") + err.what());
        }
    };

    auto trim = [](std::string s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
            s.erase(s.begin());
        }
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
            s.pop_back();
        }
        return s;
    };

    std::string t = trim(text);
    if (t == "bool") {
        return Type::boolean();
    }
    if (t == "real") {
        return Type::real();
    }
    auto parseIntType = [&](const std::string& s) -> Type {
        if (s == "int") {
            return Type::integer();
        }
        if (s.rfind("int[", 0) == 0 && s.back() == ']') {
            std::string inner = s.substr(4, s.size() - 5);
            auto comma = inner.find(',');
            // The bounds may themselves contain commas only inside brackets,
            // which the grammar does not produce; a single split suffices.
            if (comma == std::string::npos) {
                throw InputError(pos, "int bounds need the form int[lo,hi]");
            }
            std::int64_t lo = evalBound(trim(inner.substr(0, comma)));
            std::int64_t hi = evalBound(trim(inner.substr(comma + 1)));
            if (lo > hi) {
                throw InputError(pos, "empty integer range [" + std::to_string(lo) + "," +
                                          std::to_string(hi) + "]");
            }
            return Type::integer(lo, hi);
        }
        throw InputError(pos, "unknown type '" + s + "'");
    };
    if (t.rfind("array[", 0) == 0) {
        auto close = t.find(']');
        if (close == std::string::npos) {
            throw InputError(pos, "bad array type '" + t + "'");
        }
        std::int64_t n = evalBound(trim(t.substr(6, close - 6)));
        if (n <= 0) {
            throw InputError(pos, "array size must be positive");
        }
        std::string rest = trim(t.substr(close + 1));
        if (rest.rfind("of ", 0) != 0) {
            throw InputError(pos, "array type needs the form array[n] of int[lo,hi]");
        }
        Type elem = parseIntType(trim(rest.substr(3)));
        return Type::intArray(static_cast<std::size_t>(n), elem.lo, elem.hi);
    }
    return parseIntType(t);
}

}  // namespace netsmc
