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

// Network-of-MDPs data model and its JSON serialization (jani-version 1,
// model type "mdp"). Each automaton has named locations and guarded,
// action-labeled edges with probabilistic destinations; automata compose via
// synchronization vectors that fire all named actions simultaneously.
//
// Notes on the emitted subset:
//  - probabilities are written as exact division expressions, never floats;
//  - the "derived-operators" feature covers >, >= and the "arrays" feature
//    the fixed-size integer arrays;
//  - generated intermediate locations carry "x-transient": true, which the
//    simulation engine drains with priority so that a source-level transition
//    body stays atomic relative to other automata;
//  - edges whose action takes part in no sync vector interleave freely.
// The loader accepts exactly what the emitter produces.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "netsmc/expr.hpp"
#include "netsmc/rational.hpp"

namespace netsmc::jani {

using Json = nlohmann::ordered_json;

struct VarDecl {
    std::string name;
    Type type;
    Value init;                              // scalar initial value
    std::vector<std::int64_t> arrayInit;     // array initial values (size == type.size)
};

struct Assignment {
    std::string var;
    ExprPtr index;  // non-null for array element targets
    ExprPtr value;
};

struct Destination {
    Rational probability{1};
    std::string target;
    std::vector<Assignment> assignments;
};

struct Edge {
    std::string source;
    std::string action;
    ExprPtr guard;  // null means true
    std::vector<Destination> destinations;
};

struct Location {
    std::string name;
    bool transient = false;
};

struct Automaton {
    std::string name;
    std::vector<VarDecl> locals;
    std::vector<Location> locations;
    std::string initial;
    std::vector<std::string> actions;
    std::vector<Edge> edges;

    const Location* findLocation(const std::string& n) const {
        for (const auto& l : locations) {
            if (l.name == n) {
                return &l;
            }
        }
        return nullptr;
    }
    bool hasAction(const std::string& a) const {
        for (const auto& x : actions) {
            if (x == a) {
                return true;
            }
        }
        return false;
    }
};

struct SyncVector {
    /// One slot per automaton, in network order; nullopt means the automaton
    /// does not take part.
    std::vector<std::optional<std::string>> participants;
    std::string result;

    std::size_t arity() const {
        std::size_t n = 0;
        for (const auto& p : participants) {
            if (p.has_value()) {
                ++n;
            }
        }
        return n;
    }
};

struct ConstantDecl {
    std::string name;
    Value value;
};

/// Step-bounded probability query: P(lhs U rhs) within stepBound moves.
/// "eventually rhs" is represented as lhs == literal true.
struct Property {
    std::string name;
    ExprPtr lhs;
    ExprPtr rhs;
    std::int64_t stepBound = 10000;

    static Property until(std::string name, ExprPtr lhs, ExprPtr rhs, std::int64_t bound) {
        return Property{std::move(name), std::move(lhs), std::move(rhs), bound};
    }
    static Property eventually(std::string name, ExprPtr rhs, std::int64_t bound) {
        return Property{std::move(name), Expr::boolean(true), std::move(rhs), bound};
    }
};

struct Network {
    std::string name;
    std::vector<ConstantDecl> constants;
    std::vector<VarDecl> globals;
    std::vector<Automaton> automata;
    std::vector<SyncVector> syncs;
    std::vector<Property> properties;

    const Automaton* findAutomaton(const std::string& n) const {
        for (const auto& a : automata) {
            if (a.name == n) {
                return &a;
            }
        }
        return nullptr;
    }
    const Property* findProperty(const std::string& n) const {
        for (const auto& p : properties) {
            if (p.name == n) {
                return &p;
            }
        }
        return nullptr;
    }
    bool usesArrays() const {
        for (const auto& v : globals) {
            if (v.type.kind == TypeKind::IntArray) {
                return true;
            }
        }
        for (const auto& a : automata) {
            for (const auto& v : a.locals) {
                if (v.type.kind == TypeKind::IntArray) {
                    return true;
                }
            }
        }
        return false;
    }
};

// ---------------------------------------------------------------------------
// Structural equality (round-trip tests)

inline bool operator==(const VarDecl& a, const VarDecl& b) {
    return a.name == b.name && a.type == b.type && a.arrayInit == b.arrayInit &&
           (a.type.kind == TypeKind::IntArray || (a.init == b.init && a.init.kind == b.init.kind));
}
inline bool operator==(const Assignment& a, const Assignment& b) {
    return a.var == b.var && exprEquals(a.index, b.index) && exprEquals(a.value, b.value);
}
inline bool operator==(const Destination& a, const Destination& b) {
    return a.probability == b.probability && a.target == b.target && a.assignments == b.assignments;
}
inline bool operator==(const Edge& a, const Edge& b) {
    bool guardEq = (a.guard == nullptr) == (b.guard == nullptr) &&
                   (a.guard == nullptr || exprEquals(a.guard, b.guard));
    return a.source == b.source && a.action == b.action && guardEq &&
           a.destinations == b.destinations;
}
inline bool operator==(const Location& a, const Location& b) {
    return a.name == b.name && a.transient == b.transient;
}
inline bool operator==(const Automaton& a, const Automaton& b) {
    return a.name == b.name && a.locals == b.locals && a.locations == b.locations &&
           a.initial == b.initial && a.actions == b.actions && a.edges == b.edges;
}
inline bool operator==(const SyncVector& a, const SyncVector& b) {
    return a.participants == b.participants && a.result == b.result;
}
inline bool operator==(const ConstantDecl& a, const ConstantDecl& b) {
    return a.name == b.name && a.value == b.value && a.value.kind == b.value.kind;
}
inline bool operator==(const Property& a, const Property& b) {
    return a.name == b.name && exprEquals(a.lhs, b.lhs) && exprEquals(a.rhs, b.rhs) &&
           a.stepBound == b.stepBound;
}
inline bool operator==(const Network& a, const Network& b) {
    return a.name == b.name && a.constants == b.constants && a.globals == b.globals &&
           a.automata == b.automata && a.syncs == b.syncs && a.properties == b.properties;
}

/// Rebuilds every automaton's action list in first-use-by-edge order. The
/// serialized form has no per-automaton action list, so loaders derive it
/// from the edges; builders call this to keep round-trips structurally
/// identical.
inline void rebuildActionLists(Network& net) {
    for (auto& a : net.automata) {
        a.actions.clear();
        for (const auto& e : a.edges) {
            if (!a.hasAction(e.action)) {
                a.actions.push_back(e.action);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Validation

/// Network-level invariants: unique names, resolvable locations/actions,
/// exactly-once variable declarations, destination probabilities summing to
/// one, and write-conflict freedom of globals within each sync vector.
inline DiagnosticList validateNetwork(const Network& net) {
    DiagnosticList diags;
    SourcePos nowhere;

    std::set<std::string> automatonNames;
    std::set<std::string> globalNames;
    for (const auto& c : net.constants) {
        globalNames.insert(c.name);
    }
    for (const auto& g : net.globals) {
        if (!globalNames.insert(g.name).second) {
            diags.error(nowhere, "duplicate global declaration '" + g.name + "'");
        }
    }

    for (const auto& a : net.automata) {
        if (!automatonNames.insert(a.name).second) {
            diags.error(nowhere, "duplicate automaton name '" + a.name + "'");
        }
        std::set<std::string> localNames;
        for (const auto& v : a.locals) {
            if (globalNames.count(v.name) > 0 || !localNames.insert(v.name).second) {
                diags.error(nowhere, "variable '" + v.name + "' declared more than once (automaton '" +
                                         a.name + "')");
            }
        }
        if (a.findLocation(a.initial) == nullptr) {
            diags.error(nowhere,
                        "automaton '" + a.name + "': initial location '" + a.initial + "' missing");
        }

        TypeScope scope;
        scope.var = [&](const std::string& n) -> std::optional<Type> {
            for (const auto& v : a.locals) {
                if (v.name == n) {
                    return v.type;
                }
            }
            for (const auto& v : net.globals) {
                if (v.name == n) {
                    return v.type;
                }
            }
            for (const auto& c : net.constants) {
                if (c.name == n) {
                    return scalarTypeOfValue(c.value);
                }
            }
            return std::nullopt;
        };

        for (const auto& e : a.edges) {
            if (a.findLocation(e.source) == nullptr) {
                diags.error(nowhere, "automaton '" + a.name + "': edge source '" + e.source +
                                         "' is not a location");
            }
            if (!a.hasAction(e.action)) {
                diags.error(nowhere, "automaton '" + a.name + "': edge action '" + e.action +
                                         "' is not declared");
            }
            if (e.guard) {
                auto t = typeCheck(e.guard, scope, diags);
                if (t && t->kind != TypeKind::Bool) {
                    diags.error(nowhere, "automaton '" + a.name + "': edge guard is not boolean");
                }
            }
            if (e.destinations.empty()) {
                diags.error(nowhere, "automaton '" + a.name + "': edge without destinations");
                continue;
            }
            Rational sum{0};
            for (const auto& d : e.destinations) {
                sum = sum + d.probability;
                if (a.findLocation(d.target) == nullptr) {
                    diags.error(nowhere, "automaton '" + a.name + "': destination '" + d.target +
                                             "' is not a location");
                }
                for (const auto& asg : d.assignments) {
                    typeCheck(asg.value, scope, diags);
                    if (!scope.var(asg.var)) {
                        diags.error(nowhere, "automaton '" + a.name + "': assignment to undeclared '" +
                                                 asg.var + "'");
                    }
                }
            }
            if (sum != Rational(1)) {
                diags.error(nowhere, "automaton '" + a.name + "': destination probabilities sum to " +
                                         sum.str() + " on an edge from '" + e.source + "'");
            }
        }
    }

    // Globals assigned by edges labeled with a given action, per automaton.
    auto globalsWritten = [&](const Automaton& a, const std::string& action) {
        std::set<std::string> written;
        for (const auto& e : a.edges) {
            if (e.action != action) {
                continue;
            }
            for (const auto& d : e.destinations) {
                for (const auto& asg : d.assignments) {
                    bool isLocal = false;
                    for (const auto& v : a.locals) {
                        if (v.name == asg.var) {
                            isLocal = true;
                            break;
                        }
                    }
                    if (!isLocal) {
                        written.insert(asg.var);
                    }
                }
            }
        }
        return written;
    };

    for (std::size_t si = 0; si < net.syncs.size(); ++si) {
        const auto& sync = net.syncs[si];
        if (sync.participants.size() != net.automata.size()) {
            diags.error(nowhere, "sync vector " + std::to_string(si) +
                                     " has wrong arity for the automaton list");
            continue;
        }
        if (sync.arity() == 0) {
            diags.error(nowhere, "sync vector " + std::to_string(si) + " names no participants");
        }
        std::map<std::string, std::string> writers;  // global -> automaton
        for (std::size_t ai = 0; ai < sync.participants.size(); ++ai) {
            if (!sync.participants[ai].has_value()) {
                continue;
            }
            const Automaton& a = net.automata[ai];
            const std::string& action = *sync.participants[ai];
            if (!a.hasAction(action)) {
                diags.error(nowhere, "sync vector " + std::to_string(si) + " names action '" + action +
                                         "' absent from automaton '" + a.name + "'");
                continue;
            }
            for (const auto& g : globalsWritten(a, action)) {
                auto [it, fresh] = writers.emplace(g, a.name);
                if (!fresh) {
                    diags.error(nowhere, "global '" + g + "' is written by both '" + it->second +
                                             "' and '" + a.name + "' within sync vector " +
                                             std::to_string(si));
                }
            }
        }
    }

    return diags;
}

// ---------------------------------------------------------------------------
// Expression <-> JSON

namespace detail {

inline Json valueToJson(const Value& v) {
    switch (v.kind) {
        case TypeKind::Bool: return v.i != 0;
        case TypeKind::Real: return v.d;
        default: return v.i;
    }
}

inline Json exprToJson(const ExprPtr& e) {
    switch (e->op) {
        case ExprOp::Lit: return valueToJson(e->lit);
        case ExprOp::Var: return e->name;
        case ExprOp::EventField:
            throw EngineError("event payload reference survived translation: _event." + e->name);
        case ExprOp::ArrayLit: {
            Json j;
            j["op"] = "av";
            j["elements"] = Json::array();
            for (const auto& el : e->args) {
                j["elements"].push_back(exprToJson(el));
            }
            return j;
        }
        case ExprOp::Not: {
            Json j;
            j["op"] = "¬";
            j["exp"] = exprToJson(e->args[0]);
            return j;
        }
        case ExprOp::Neg: {
            Json j;
            j["op"] = "-";
            j["left"] = 0;
            j["right"] = exprToJson(e->args[0]);
            return j;
        }
        case ExprOp::Index: {
            Json j;
            j["op"] = "aa";
            j["exp"] = exprToJson(e->args[0]);
            j["index"] = exprToJson(e->args[1]);
            return j;
        }
        default: break;
    }
    const char* op = nullptr;
    switch (e->op) {
        case ExprOp::And: op = "∧"; break;
        case ExprOp::Or: op = "∨"; break;
        case ExprOp::Eq: op = "="; break;
        case ExprOp::Ne: op = "≠"; break;
        case ExprOp::Lt: op = "<"; break;
        case ExprOp::Le: op = "≤"; break;
        case ExprOp::Gt: op = ">"; break;
        case ExprOp::Ge: op = "≥"; break;
        case ExprOp::Add: op = "+"; break;
        case ExprOp::Sub: op = "-"; break;
        case ExprOp::Mul: op = "*"; break;
        case ExprOp::Div: op = "/"; break;
        case ExprOp::Mod: op = "%"; break;
        default: throw EngineError("unserializable expression construct");
    }
    Json j;
    j["op"] = op;
    j["left"] = exprToJson(e->args[0]);
    j["right"] = exprToJson(e->args[1]);
    return j;
}

inline ExprPtr exprFromJson(const Json& j) {
    if (j.is_boolean()) {
        return Expr::boolean(j.get<bool>());
    }
    if (j.is_number_integer()) {
        return Expr::integer(j.get<std::int64_t>());
    }
    if (j.is_number_float()) {
        return Expr::literal(Value::real(j.get<double>()));
    }
    if (j.is_string()) {
        return Expr::var(j.get<std::string>());
    }
    if (!j.is_object() || !j.contains("op")) {
        throw InputError("unsupported expression in model file: " + j.dump());
    }
    const std::string op = j.at("op").get<std::string>();
    if (op == "av") {
        std::vector<ExprPtr> elems;
        for (const auto& el : j.at("elements")) {
            elems.push_back(exprFromJson(el));
        }
        return Expr::arrayLit(std::move(elems));
    }
    if (op == "aa") {
        return Expr::binary(ExprOp::Index, exprFromJson(j.at("exp")), exprFromJson(j.at("index")));
    }
    if (op == "¬") {
        return Expr::unary(ExprOp::Not, exprFromJson(j.at("exp")));
    }
    static const std::map<std::string, ExprOp> binOps = {
        {"∧", ExprOp::And}, {"∨", ExprOp::Or},  {"=", ExprOp::Eq},  {"≠", ExprOp::Ne},
        {"<", ExprOp::Lt},  {"≤", ExprOp::Le},  {">", ExprOp::Gt},  {"≥", ExprOp::Ge},
        {"+", ExprOp::Add}, {"-", ExprOp::Sub}, {"*", ExprOp::Mul}, {"/", ExprOp::Div},
        {"%", ExprOp::Mod}};
    auto it = binOps.find(op);
    if (it == binOps.end()) {
        throw InputError("unsupported operator '" + op + "' in model file");
    }
    ExprPtr left = exprFromJson(j.at("left"));
    ExprPtr right = exprFromJson(j.at("right"));
    // Unary minus is emitted as 0 - x.
    if (it->second == ExprOp::Sub && left->op == ExprOp::Lit && left->lit.kind == TypeKind::Int &&
        left->lit.i == 0) {
        return Expr::unary(ExprOp::Neg, right);
    }
    return Expr::binary(it->second, left, right);
}

inline Json typeToJson(const Type& t) {
    switch (t.kind) {
        case TypeKind::Bool: return "bool";
        case TypeKind::Real: return "real";
        case TypeKind::Int: {
            Json j;
            j["kind"] = "bounded";
            j["base"] = "int";
            j["lower-bound"] = t.lo;
            j["upper-bound"] = t.hi;
            return j;
        }
        case TypeKind::IntArray: {
            Json j;
            j["kind"] = "array";
            Json base;
            base["kind"] = "bounded";
            base["base"] = "int";
            base["lower-bound"] = t.lo;
            base["upper-bound"] = t.hi;
            j["base"] = base;
            return j;
        }
    }
    throw EngineError("unhandled type");
}

inline Json varToJson(const VarDecl& v) {
    Json j;
    j["name"] = v.name;
    j["type"] = typeToJson(v.type);
    if (v.type.kind == TypeKind::IntArray) {
        Json init;
        init["op"] = "av";
        init["elements"] = Json::array();
        for (std::int64_t x : v.arrayInit) {
            init["elements"].push_back(x);
        }
        j["initial-value"] = init;
    } else {
        j["initial-value"] = valueToJson(v.init);
    }
    return j;
}

inline Json probabilityToJson(const Rational& p) {
    if (p.isInteger()) {
        return p.num;
    }
    Json j;
    j["op"] = "/";
    j["left"] = p.num;
    j["right"] = p.den;
    return j;
}

inline Rational probabilityFromJson(const Json& j) {
    if (j.is_number_integer()) {
        return Rational(j.get<std::int64_t>());
    }
    if (j.is_object() && j.value("op", "") == "/") {
        return Rational(j.at("left").get<std::int64_t>(), j.at("right").get<std::int64_t>());
    }
    if (j.is_number_float()) {
        return Rational::parse(std::to_string(j.get<double>()));
    }
    throw InputError("unsupported probability expression: " + j.dump());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Emission

/// Serializes the network. Output is deterministic: fixed key order, fixed
/// list orders, 2-space indentation, LF newlines. Re-emission of the loaded
/// document is byte-identical.
inline std::string emitJani(const Network& net) {
    using detail::exprToJson;
    Json j;
    j["jani-version"] = 1;
    j["name"] = net.name;
    j["type"] = "mdp";
    Json features = Json::array();
    features.push_back("derived-operators");
    if (net.usesArrays()) {
        features.push_back("arrays");
    }
    j["features"] = features;

    j["actions"] = Json::array();
    std::set<std::string> seenActions;
    for (const auto& a : net.automata) {
        for (const auto& act : a.actions) {
            if (seenActions.insert(act).second) {
                Json e;
                e["name"] = act;
                j["actions"].push_back(e);
            }
        }
    }

    j["constants"] = Json::array();
    for (const auto& c : net.constants) {
        Json e;
        e["name"] = c.name;
        e["type"] = c.value.kind == TypeKind::Bool ? "bool"
                    : c.value.kind == TypeKind::Real ? "real"
                                                     : "int";
        e["value"] = detail::valueToJson(c.value);
        j["constants"].push_back(e);
    }

    j["variables"] = Json::array();
    for (const auto& v : net.globals) {
        j["variables"].push_back(detail::varToJson(v));
    }

    j["properties"] = Json::array();
    for (const auto& p : net.properties) {
        Json path;
        path["op"] = "U";
        path["left"] = exprToJson(p.lhs);
        path["right"] = exprToJson(p.rhs);
        Json bounds;
        bounds["upper"] = p.stepBound;
        path["step-bounds"] = bounds;
        Json pmin;
        pmin["op"] = "Pmin";
        pmin["exp"] = path;
        Json filter;
        filter["op"] = "filter";
        filter["fun"] = "values";
        filter["values"] = pmin;
        Json states;
        states["op"] = "initial";
        filter["states"] = states;
        Json prop;
        prop["name"] = p.name;
        prop["expression"] = filter;
        j["properties"].push_back(prop);
    }

    j["automata"] = Json::array();
    for (const auto& a : net.automata) {
        Json ja;
        ja["name"] = a.name;
        ja["variables"] = Json::array();
        for (const auto& v : a.locals) {
            ja["variables"].push_back(detail::varToJson(v));
        }
        ja["locations"] = Json::array();
        for (const auto& l : a.locations) {
            Json jl;
            jl["name"] = l.name;
            if (l.transient) {
                jl["x-transient"] = true;
            }
            ja["locations"].push_back(jl);
        }
        ja["initial-locations"] = Json::array({a.initial});
        ja["edges"] = Json::array();
        for (const auto& e : a.edges) {
            Json je;
            je["location"] = e.source;
            je["action"] = e.action;
            if (e.guard) {
                Json g;
                g["exp"] = exprToJson(e.guard);
                je["guard"] = g;
            }
            je["destinations"] = Json::array();
            for (const auto& d : e.destinations) {
                Json jd;
                jd["location"] = d.target;
                if (!(d.probability == Rational(1))) {
                    Json p;
                    p["exp"] = detail::probabilityToJson(d.probability);
                    jd["probability"] = p;
                }
                if (!d.assignments.empty()) {
                    jd["assignments"] = Json::array();
                    for (const auto& asg : d.assignments) {
                        Json jasg;
                        if (asg.index) {
                            Json ref;
                            ref["op"] = "aa";
                            ref["exp"] = asg.var;
                            ref["index"] = exprToJson(asg.index);
                            jasg["ref"] = ref;
                        } else {
                            jasg["ref"] = asg.var;
                        }
                        jasg["value"] = exprToJson(asg.value);
                        jd["assignments"].push_back(jasg);
                    }
                }
                je["destinations"].push_back(jd);
            }
            ja["edges"].push_back(je);
        }
        j["automata"].push_back(ja);
    }

    Json system;
    system["elements"] = Json::array();
    for (const auto& a : net.automata) {
        Json e;
        e["automaton"] = a.name;
        system["elements"].push_back(e);
    }
    system["syncs"] = Json::array();
    for (const auto& s : net.syncs) {
        Json js;
        js["synchronise"] = Json::array();
        for (const auto& p : s.participants) {
            if (p.has_value()) {
                js["synchronise"].push_back(*p);
            } else {
                js["synchronise"].push_back(nullptr);
            }
        }
        js["result"] = s.result;
        system["syncs"].push_back(js);
    }
    j["system"] = system;

    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Loading

namespace detail {

inline Type typeFromJson(const Json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "bool") {
            return Type::boolean();
        }
        if (s == "real") {
            return Type::real();
        }
        if (s == "int") {
            return Type::integer();
        }
        throw InputError("unsupported variable type '" + s + "' in model file");
    }
    std::string kind = j.value("kind", "");
    if (kind == "bounded") {
        return Type::integer(j.at("lower-bound").get<std::int64_t>(),
                             j.at("upper-bound").get<std::int64_t>());
    }
    if (kind == "array") {
        Type base = typeFromJson(j.at("base"));
        return Type::intArray(0, base.lo, base.hi);  // size set from the initializer
    }
    throw InputError("unsupported variable type in model file: " + j.dump());
}

inline VarDecl varFromJson(const Json& j) {
    VarDecl v;
    v.name = j.at("name").get<std::string>();
    v.type = typeFromJson(j.at("type"));
    const Json& init = j.at("initial-value");
    if (v.type.kind == TypeKind::IntArray) {
        for (const auto& el : init.at("elements")) {
            v.arrayInit.push_back(el.get<std::int64_t>());
        }
        v.type.size = v.arrayInit.size();
    } else if (v.type.kind == TypeKind::Bool) {
        v.init = Value::boolean(init.get<bool>());
    } else if (v.type.kind == TypeKind::Real) {
        v.init = Value::real(init.get<double>());
    } else {
        v.init = Value::integer(init.get<std::int64_t>());
    }
    return v;
}

}  // namespace detail

/// Parses a model document previously produced by emitJani (or handwritten in
/// the same subset).
inline Network loadJani(const std::string& text, const std::string& filename = "<jani>") {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(filename + ": not valid JSON: " + e.what());
    }
    try {
        if (j.value("type", "") != "mdp") {
            throw InputError(filename + ": model type must be \"mdp\"");
        }
        Network net;
        net.name = j.value("name", "model");
        for (const auto& c : j.value("constants", Json::array())) {
            ConstantDecl decl;
            decl.name = c.at("name").get<std::string>();
            const Json& v = c.at("value");
            if (v.is_boolean()) {
                decl.value = Value::boolean(v.get<bool>());
            } else if (v.is_number_float()) {
                decl.value = Value::real(v.get<double>());
            } else {
                decl.value = Value::integer(v.get<std::int64_t>());
            }
            net.constants.push_back(std::move(decl));
        }
        for (const auto& v : j.value("variables", Json::array())) {
            net.globals.push_back(detail::varFromJson(v));
        }
        for (const auto& p : j.value("properties", Json::array())) {
            Property prop;
            prop.name = p.at("name").get<std::string>();
            const Json* inner = &p.at("expression");
            if (inner->value("op", "") == "filter") {
                inner = &inner->at("values");
            }
            if (inner->value("op", "") == "Pmin" || inner->value("op", "") == "Pmax") {
                inner = &inner->at("exp");
            }
            if (inner->value("op", "") != "U") {
                throw InputError(filename + ": property '" + prop.name +
                                 "' is not a step-bounded until query");
            }
            prop.lhs = detail::exprFromJson(inner->at("left"));
            prop.rhs = detail::exprFromJson(inner->at("right"));
            prop.stepBound = inner->contains("step-bounds")
                                 ? inner->at("step-bounds").value("upper", std::int64_t{10000})
                                 : 10000;
            net.properties.push_back(std::move(prop));
        }
        for (const auto& ja : j.value("automata", Json::array())) {
            Automaton a;
            a.name = ja.at("name").get<std::string>();
            for (const auto& v : ja.value("variables", Json::array())) {
                a.locals.push_back(detail::varFromJson(v));
            }
            for (const auto& l : ja.at("locations")) {
                Location loc;
                loc.name = l.at("name").get<std::string>();
                loc.transient = l.value("x-transient", false);
                a.locations.push_back(std::move(loc));
            }
            a.initial = ja.at("initial-locations").at(0).get<std::string>();
            for (const auto& je : ja.value("edges", Json::array())) {
                Edge e;
                e.source = je.at("location").get<std::string>();
                e.action = je.value("action", "");
                if (je.contains("guard")) {
                    e.guard = detail::exprFromJson(je.at("guard").at("exp"));
                }
                for (const auto& jd : je.at("destinations")) {
                    Destination d;
                    d.target = jd.at("location").get<std::string>();
                    if (jd.contains("probability")) {
                        d.probability = detail::probabilityFromJson(jd.at("probability").at("exp"));
                    }
                    for (const auto& jasg : jd.value("assignments", Json::array())) {
                        Assignment asg;
                        const Json& ref = jasg.at("ref");
                        if (ref.is_string()) {
                            asg.var = ref.get<std::string>();
                        } else {
                            asg.var = ref.at("exp").get<std::string>();
                            asg.index = detail::exprFromJson(ref.at("index"));
                        }
                        asg.value = detail::exprFromJson(jasg.at("value"));
                        d.assignments.push_back(std::move(asg));
                    }
                    e.destinations.push_back(std::move(d));
                }
                if (e.action.empty()) {
                    throw InputError(filename + ": automaton '" + a.name +
                                     "' has an edge without an action label");
                }
                if (!a.hasAction(e.action)) {
                    a.actions.push_back(e.action);
                }
                a.edges.push_back(std::move(e));
            }
            net.automata.push_back(std::move(a));
        }
        if (j.contains("system")) {
            const Json& system = j.at("system");
            std::vector<std::string> order;
            for (const auto& el : system.value("elements", Json::array())) {
                order.push_back(el.at("automaton").get<std::string>());
            }
            for (std::size_t i = 0; i < order.size() && i < net.automata.size(); ++i) {
                if (order[i] != net.automata[i].name) {
                    throw InputError(filename + ": system element order differs from automata order");
                }
            }
            for (const auto& js : system.value("syncs", Json::array())) {
                SyncVector s;
                for (const auto& p : js.at("synchronise")) {
                    if (p.is_null()) {
                        s.participants.push_back(std::nullopt);
                    } else {
                        s.participants.push_back(p.get<std::string>());
                    }
                }
                s.result = js.value("result", "");
                net.syncs.push_back(std::move(s));
            }
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(filename + ": malformed model document: " + std::string(e.what()));
    }
}

}  // namespace netsmc::jani
