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

#include <gtest/gtest.h>

#include <map>

#include "netsmc/expr.hpp"
#include "netsmc/rational.hpp"
#include "netsmc/scxml.hpp"

using namespace netsmc;

namespace {

Value evalWith(const std::string& text, const std::map<std::string, Value>& env,
               const std::map<std::string, Value>& payload = {}) {
    return evalExpression(parseExpr(text), env, payload);
}

}  // namespace

TEST(Expr, BasicArithmetic) {
    EXPECT_EQ(evalWith("a + 1", {{"a", Value::integer(2)}}).asInt(), 3);
    EXPECT_EQ(evalWith("2 * 3 + 4", {}).asInt(), 10);
    EXPECT_EQ(evalWith("2 + 3 * 4", {}).asInt(), 14);
    EXPECT_EQ(evalWith("(2 + 3) * 4", {}).asInt(), 20);
    EXPECT_EQ(evalWith("7 / 2", {}).asInt(), 3);
    EXPECT_EQ(evalWith("7 % 2", {}).asInt(), 1);
    EXPECT_EQ(evalWith("-3 + 5", {}).asInt(), 2);
    EXPECT_DOUBLE_EQ(evalWith("1.5 * 2", {}).asNumber(), 3.0);
}

TEST(Expr, BoundaryComparison) {
    // true && (x < 5) with x = 5 is false.
    EXPECT_FALSE(evalWith("true && (x < 5)", {{"x", Value::integer(5)}}).asBool());
    EXPECT_TRUE(evalWith("true && (x < 5)", {{"x", Value::integer(4)}}).asBool());
}

TEST(Expr, TimeoutGuardShape) {
    // t_curr < t_abort + t_timeout with t_curr=3, t_abort=1, t_timeout=2:
    // 3 < 3 is false (hand-checked arithmetic).
    std::map<std::string, Value> env{{"t_curr", Value::integer(3)},
                                     {"t_abort", Value::integer(1)},
                                     {"t_timeout", Value::integer(2)}};
    EXPECT_FALSE(evalWith("t_curr < t_abort + t_timeout", env).asBool());
    env["t_curr"] = Value::integer(2);
    EXPECT_TRUE(evalWith("t_curr < t_abort + t_timeout", env).asBool());
}

TEST(Expr, LogicAndImplicationSugar) {
    EXPECT_TRUE(evalWith("!false || false", {}).asBool());
    // `a => b` parses as `!a || b`.
    auto e = parseExpr("abort => t < 5");
    EXPECT_EQ(e->op, ExprOp::Or);
    EXPECT_EQ(e->args[0]->op, ExprOp::Not);
    std::map<std::string, Value> env{{"abort", Value::boolean(false)}, {"t", Value::integer(99)}};
    EXPECT_TRUE(evalExpression(e, env).asBool());
}

TEST(Expr, ShortCircuit) {
    // The right side would divide by zero; && must not evaluate it.
    EXPECT_FALSE(evalWith("false && (1 / n > 0)", {{"n", Value::integer(0)}}).asBool());
    EXPECT_TRUE(evalWith("true || (1 / n > 0)", {{"n", Value::integer(0)}}).asBool());
}

TEST(Expr, EventPayloadReferences) {
    EXPECT_EQ(evalWith("_event.data + 1", {}, {{"data", Value::integer(9)}}).asInt(), 10);
    EXPECT_THROW(evalWith("_event.missing", {}, {}), EvalError);
}

TEST(Expr, RuntimeErrors) {
    EXPECT_THROW(evalWith("x + 1", {}), EvalError);
    EXPECT_THROW(evalWith("1 / n", {{"n", Value::integer(0)}}), EvalError);
    EXPECT_THROW(evalWith("1 % n", {{"n", Value::integer(0)}}), EvalError);
}

TEST(Expr, ConstantZeroDivisorRejectedAtParse) {
    EXPECT_THROW(parseExpr("x / 0"), InputError);
    EXPECT_THROW(parseExpr("x % (1 - 1)"), InputError);
    EXPECT_NO_THROW(parseExpr("x / 2"));
}

TEST(Expr, EvaluationIsPure) {
    std::map<std::string, Value> env{{"a", Value::integer(4)}};
    auto e = parseExpr("a * a - 1");
    Value v1 = evalExpression(e, env);
    Value v2 = evalExpression(e, env);
    EXPECT_EQ(v1.asInt(), 15);
    EXPECT_EQ(v2.asInt(), 15);
    EXPECT_EQ(env.at("a").asInt(), 4);
}

TEST(Expr, PrintParseRoundTrip) {
    const char* samples[] = {
        "a + b * c",
        "(a + b) * c",
        "!(a < 3) && b || c",
        "-x + 4",
        "x - (y - z)",
        "_event.v >= 2",
        "arr[i + 1] == 0",
        "a / b % 5",
        "1 <= x && x <= 10",
    };
    for (const char* s : samples) {
        auto e1 = parseExpr(s);
        std::string printed = exprToString(e1);
        auto e2 = parseExpr(printed);
        EXPECT_TRUE(exprEquals(e1, e2)) << s << " -> " << printed;
        EXPECT_EQ(printed, exprToString(e2));
    }
}

TEST(Expr, TypeChecking) {
    TypeScope scope;
    scope.var = [](const std::string& n) -> std::optional<Type> {
        if (n == "b") return Type::boolean();
        if (n == "i") return Type::integer(0, 10);
        if (n == "r") return Type::real();
        if (n == "arr") return Type::intArray(4, 0, 7);
        return std::nullopt;
    };
    DiagnosticList d1;
    auto t = typeCheck(parseExpr("i + 1 < 5 && b"), scope, d1);
    ASSERT_TRUE(t.has_value());
    EXPECT_EQ(t->kind, TypeKind::Bool);
    EXPECT_FALSE(d1.hasErrors());

    DiagnosticList d2;
    EXPECT_FALSE(typeCheck(parseExpr("b + 1"), scope, d2).has_value());
    EXPECT_TRUE(d2.hasErrors());

    DiagnosticList d3;
    auto ti = typeCheck(parseExpr("arr[i]"), scope, d3);
    ASSERT_TRUE(ti.has_value());
    EXPECT_EQ(ti->kind, TypeKind::Int);
    EXPECT_EQ(ti->lo, 0);
    EXPECT_EQ(ti->hi, 7);

    DiagnosticList d4;
    EXPECT_FALSE(typeCheck(parseExpr("unknown + 1"), scope, d4).has_value());
    EXPECT_NE(d4.all().front().message.find("undeclared"), std::string::npos);

    DiagnosticList d5;
    auto tr = typeCheck(parseExpr("i / 2"), scope, d5);
    ASSERT_TRUE(tr.has_value());
    EXPECT_EQ(tr->kind, TypeKind::Int);
    auto tr2 = typeCheck(parseExpr("r / 2"), scope, d5);
    ASSERT_TRUE(tr2.has_value());
    EXPECT_EQ(tr2->kind, TypeKind::Real);
}

TEST(Expr, TypeStrings) {
    auto none = [](const std::string&) { return std::optional<Value>{}; };
    EXPECT_EQ(parseTypeString("bool", {}, none), Type::boolean());
    EXPECT_EQ(parseTypeString("int", {}, none), Type::integer());
    EXPECT_EQ(parseTypeString("int[0,5]", {}, none), Type::integer(0, 5));
    EXPECT_EQ(parseTypeString("real", {}, none), Type::real());
    EXPECT_EQ(parseTypeString("array[3] of int[0,9]", {}, none), Type::intArray(3, 0, 9));
    EXPECT_THROW(parseTypeString("int[5,0]", {}, none), InputError);
    EXPECT_THROW(parseTypeString("string", {}, none), InputError);

    auto consts = [](const std::string& n) -> std::optional<Value> {
        if (n == "N") return Value::integer(8);
        return std::nullopt;
    };
    EXPECT_EQ(parseTypeString("int[0, N - 1]", {}, consts), Type::integer(0, 7));
}

TEST(Expr, ConstFold) {
    EXPECT_EQ(constFold(parseExpr("2 + 3 * 4"))->asInt(), 14);
    EXPECT_FALSE(constFold(parseExpr("x + 1")).has_value());
    EXPECT_TRUE(constFold(parseExpr("true || false"))->asBool());
}

TEST(Rational, ArithmeticAndParsing) {
    EXPECT_EQ(Rational::parse("1/2"), Rational(1, 2));
    EXPECT_EQ(Rational::parse("0.25"), Rational(1, 4));
    EXPECT_EQ(Rational::parse("-3"), Rational(-3));
    EXPECT_EQ(Rational(1, 2) + Rational(1, 3), Rational(5, 6));
    EXPECT_EQ(Rational(2, 4), Rational(1, 2));
    EXPECT_EQ(Rational::gcd(Rational(1, 10), Rational(1, 5)), Rational(1, 10));
    EXPECT_EQ(Rational::gcd(Rational(3, 10), Rational(1, 4)), Rational(1, 20));
    EXPECT_EQ(Rational(1, 2).str(), "1/2");
    EXPECT_EQ(Rational(4).str(), "4");
}

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    return RUN_ALL_TESTS();
}
