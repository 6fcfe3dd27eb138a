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

// State machine representation and the SCXML front end. Machines are flat:
// named states, typed data variables, and transitions carrying an optional
// trigger event, a boolean condition, executable content (assignments and
// event sends) and optional probability-weighted branches.
//
// The same structures also carry the extended declarations (ROS-style
// interfaces, behavior-tree hooks) of the high-level dialect; those must be
// rewritten away by the lowering passes before translation. A machine with
// none of them left is called "plain".

#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netsmc/expr.hpp"
#include "netsmc/rational.hpp"
#include "netsmc/xml.hpp"

namespace netsmc {

inline constexpr const char* kScxmlNs = "http://www.w3.org/2005/07/scxml";
inline constexpr const char* kRosNs = "urn:netsmc:ros";
inline constexpr const char* kBtNs = "urn:netsmc:bt";

using ConstTable = std::map<std::string, Value>;

struct DataDecl {
    std::string id;
    Type type;
    ExprPtr init;  // may be null: zero/false/lo default
    bool global = false;
    SourcePos pos;
};

enum class OpKind {
    Assign,
    Send,
    // High-level operations, rewritten by lowering:
    RosPublish,
    RosCall,
    RosReply,
    RosSendGoal,
    RosFeedback,
    RosResult,
    BtRespond,
    BtBbGet,
    BtBbSet,
};

struct SendParam {
    std::string name;
    ExprPtr expr;
    SourcePos pos;
};

struct Operation {
    OpKind kind = OpKind::Assign;
    // Assign / BtBbSet
    std::string lhsVar;
    ExprPtr lhsIndex;  // non-null for array element assignment
    ExprPtr rhs;
    // Send and high-level send-like operations
    std::string target;  // event / topic / service / action / blackboard port
    std::vector<SendParam> params;
    std::string status;  // RosResult and BtRespond status keyword
    SourcePos pos;

    static Operation assign(std::string var, ExprPtr value, SourcePos pos = {}) {
        Operation op;
        op.kind = OpKind::Assign;
        op.lhsVar = std::move(var);
        op.rhs = std::move(value);
        op.pos = std::move(pos);
        return op;
    }
    static Operation send(std::string event, std::vector<SendParam> params = {},
                          SourcePos pos = {}) {
        Operation op;
        op.kind = OpKind::Send;
        op.target = std::move(event);
        op.params = std::move(params);
        op.pos = std::move(pos);
        return op;
    }

    bool isPlain() const { return kind == OpKind::Assign || kind == OpKind::Send; }
    bool isBlocking() const {
        return kind == OpKind::RosCall || kind == OpKind::BtBbGet || kind == OpKind::BtBbSet;
    }
};

struct Trigger {
    enum class Kind {
        None,
        Event,  // plain event name
        RosTopic,
        RosTimer,
        RosSrvReq,         // service server handler
        RosActionGoal,     // action server handler
        RosActionFeedback, // action client handler
        RosActionResult,   // action client handler
        BtTick,            // plugin placeholder
    };
    Kind kind = Kind::None;
    std::string name;

    bool none() const { return kind == Kind::None; }
    static Trigger event(std::string name) { return Trigger{Kind::Event, std::move(name)}; }

    friend bool operator==(const Trigger& a, const Trigger& b) {
        return a.kind == b.kind && a.name == b.name;
    }
};

struct ProbBranch {
    Rational weight;
    std::string target;
    std::vector<Operation> body;
    SourcePos pos;
};

struct Transition {
    Trigger trigger;
    ExprPtr cond;        // null means true
    std::string target;  // empty when branches carry the targets
    std::vector<Operation> body;
    std::vector<ProbBranch> branches;
    SourcePos pos;

    bool probabilistic() const { return !branches.empty(); }
};

struct State {
    std::string id;
    std::vector<Operation> onentry;
    std::vector<Operation> onexit;
    std::vector<Transition> transitions;  // document order is the priority order
    SourcePos pos;
};

struct RosInterfaceDecl {
    enum class Kind {
        TopicPub,
        TopicSub,
        ServiceClient,
        ServiceServer,
        ActionClient,
        ActionServer,
        Timer,
    };
    Kind kind = Kind::Timer;
    std::string name;
    std::vector<std::pair<std::string, Type>> fields;    // topic payload
    std::vector<std::pair<std::string, Type>> request;   // service
    std::vector<std::pair<std::string, Type>> response;  // service
    std::vector<std::pair<std::string, Type>> goal;      // action
    std::vector<std::pair<std::string, Type>> feedback;  // action
    std::vector<std::pair<std::string, Type>> result;    // action (status added implicitly)
    Rational rateHz{0};
    SourcePos pos;
};

struct StateMachine {
    std::string name;
    std::string file;
    std::vector<DataDecl> data;
    std::vector<State> states;
    std::string initial;
    std::vector<RosInterfaceDecl> interfaces;
    SourcePos pos;

    const State* findState(const std::string& id) const {
        for (const auto& s : states) {
            if (s.id == id) {
                return &s;
            }
        }
        return nullptr;
    }
    State* findState(const std::string& id) {
        for (auto& s : states) {
            if (s.id == id) {
                return &s;
            }
        }
        return nullptr;
    }
    const DataDecl* findData(const std::string& id) const {
        for (const auto& d : data) {
            if (d.id == id) {
                return &d;
            }
        }
        return nullptr;
    }

    bool isPlain() const {
        if (!interfaces.empty()) {
            return false;
        }
        for (const auto& s : states) {
            for (const auto& t : s.transitions) {
                if (!t.trigger.none() && t.trigger.kind != Trigger::Kind::Event) {
                    return false;
                }
                auto plainOps = [](const std::vector<Operation>& ops) {
                    return std::all_of(ops.begin(), ops.end(),
                                       [](const Operation& o) { return o.isPlain(); });
                };
                if (!plainOps(t.body)) {
                    return false;
                }
                for (const auto& b : t.branches) {
                    if (!plainOps(b.body)) {
                        return false;
                    }
                }
            }
            for (const auto& ops : {&s.onentry, &s.onexit}) {
                for (const auto& o : *ops) {
                    if (!o.isPlain()) {
                        return false;
                    }
                }
            }
        }
        return true;
    }

    std::size_t transitionCount() const {
        std::size_t n = 0;
        for (const auto& s : states) {
            n += s.transitions.size();
        }
        return n;
    }
};

// ---------------------------------------------------------------------------
// Structural equality (round-trip checks)

inline bool operator==(const SendParam& a, const SendParam& b) {
    return a.name == b.name && exprEquals(a.expr, b.expr);
}
inline bool operator==(const Operation& a, const Operation& b) {
    return a.kind == b.kind && a.lhsVar == b.lhsVar && exprEquals(a.lhsIndex, b.lhsIndex) &&
           exprEquals(a.rhs, b.rhs) && a.target == b.target && a.params == b.params &&
           a.status == b.status;
}
inline bool operator==(const ProbBranch& a, const ProbBranch& b) {
    return a.weight == b.weight && a.target == b.target && a.body == b.body;
}
inline bool operator==(const Transition& a, const Transition& b) {
    bool condEq = (a.cond == nullptr) == (b.cond == nullptr) &&
                  (a.cond == nullptr || exprEquals(a.cond, b.cond));
    return a.trigger == b.trigger && condEq && a.target == b.target && a.body == b.body &&
           a.branches == b.branches;
}
inline bool operator==(const State& a, const State& b) {
    return a.id == b.id && a.onentry == b.onentry && a.onexit == b.onexit &&
           a.transitions == b.transitions;
}
inline bool operator==(const DataDecl& a, const DataDecl& b) {
    return a.id == b.id && a.type == b.type && a.global == b.global &&
           (a.init == nullptr) == (b.init == nullptr) &&
           (a.init == nullptr || exprEquals(a.init, b.init));
}
inline bool operator==(const StateMachine& a, const StateMachine& b) {
    return a.name == b.name && a.initial == b.initial && a.data == b.data && a.states == b.states;
}

// ---------------------------------------------------------------------------
// Parsing

struct ParseOptions {
    /// Accept the extended (ROS / BT) dialect. Plain mode reports extended
    /// constructs as unknown elements.
    bool allowExtensions = false;
    /// Known constants for type bounds and initializers.
    ConstTable consts;
    /// Names resolvable outside the machine (hoisted globals of other
    /// machines, generated counters). When unset, unresolved-name checking is
    /// deferred to validateSystem.
    std::optional<std::set<std::string>> externalNames = std::set<std::string>{};
    /// Reject user events with generated-name prefixes. Generated machines
    /// are parsed with this off.
    bool reservedPrefixCheck = true;
};

namespace scxml_detail {

inline bool isScxmlNs(const std::string& ns) { return ns.empty() || ns == kScxmlNs; }

class MachineParser {
  public:
    MachineParser(const xml::Element& root, std::string file, const ParseOptions& opts)
        : root_(root), file_(std::move(file)), opts_(opts) {}

    StateMachine parse() {
        if (!isScxmlNs(root_.ns) || root_.name != "scxml") {
            throw InputError(root_.pos, "expected an <scxml> root element");
        }
        m_.file = file_;
        m_.pos = root_.pos;
        m_.name = root_.attr("name");
        if (m_.name.empty()) {
            throw InputError(root_.pos, "<scxml> needs a name attribute");
        }
        m_.initial = root_.attr("initial");

        for (const auto& child : root_.children) {
            if (isScxmlNs(child->ns)) {
                if (child->name == "datamodel") {
                    parseDatamodel(*child);
                } else if (child->name == "state" || child->name == "final") {
                    parseState(*child);
                } else {
                    unknown(*child);
                }
            } else if (child->ns == kRosNs) {
                requireExtensions(*child);
                parseRosDecl(*child);
            } else {
                unknown(*child);
            }
        }

        if (m_.initial.empty() && !m_.states.empty()) {
            m_.initial = m_.states.front().id;
        }
        if (m_.states.empty()) {
            throw InputError(root_.pos, "machine '" + m_.name + "' has no states");
        }
        if (m_.findState(m_.initial) == nullptr) {
            throw InputError(root_.pos,
                             "initial state '" + m_.initial + "' is not a state of the machine");
        }
        checkLocalNames();
        return std::move(m_);
    }

  private:
    const xml::Element& root_;
    std::string file_;
    const ParseOptions& opts_;
    StateMachine m_;

    [[noreturn]] void unknown(const xml::Element& e) const {
        std::string tag = e.ns == kRosNs ? "ros:" + e.name : e.ns == kBtNs ? "bt:" + e.name : e.name;
        if (isScxmlNs(e.ns) &&
            (e.name == "parallel" || e.name == "history" || e.name == "invoke" || e.name == "raise")) {
            throw InputError(e.pos, "<" + tag + "> is outside the supported flat-machine subset");
        }
        throw InputError(e.pos, "unknown element <" + tag + ">");
    }

    void requireExtensions(const xml::Element& e) const {
        if (!opts_.allowExtensions) {
            unknown(e);
        }
    }

    std::optional<Value> constLookup(const std::string& name) const {
        auto it = opts_.consts.find(name);
        if (it == opts_.consts.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    Type parseTypeAttr(const xml::Element& e, const std::string& fallback = "") const {
        const xml::Attr* a = e.findAttr("type");
        std::string text = a != nullptr ? a->value : fallback;
        if (text.empty()) {
            throw InputError(e.pos, "<" + e.name + "> needs a type attribute");
        }
        return parseTypeString(text, a != nullptr ? a->pos : e.pos,
                               [this](const std::string& n) { return constLookup(n); });
    }

    void parseDatamodel(const xml::Element& dm) {
        for (const auto& child : dm.children) {
            if (!isScxmlNs(child->ns) || child->name != "data") {
                unknown(*child);
            }
            DataDecl d;
            d.id = child->attr("id");
            if (d.id.empty()) {
                throw InputError(child->pos, "<data> needs an id attribute");
            }
            if (m_.findData(d.id) != nullptr) {
                throw InputError(child->pos, "duplicate data id '" + d.id + "'");
            }
            d.pos = child->pos;
            d.type = parseTypeAttr(*child, "int");
            d.global = child->attr("global") == "true";
            if (const xml::Attr* expr = child->findAttr("expr")) {
                d.init = parseExpr(expr->value, expr->pos, d.type.kind == TypeKind::IntArray);
            }
            m_.data.push_back(std::move(d));
        }
    }

    void parseRosDecl(const xml::Element& e) {
        using Kind = RosInterfaceDecl::Kind;
        RosInterfaceDecl decl;
        decl.pos = e.pos;
        auto fieldsOf = [&](const xml::Element& holder) {
            std::vector<std::pair<std::string, Type>> fields;
            for (const auto& f : holder.children) {
                if (f->ns != kRosNs || f->name != "field") {
                    unknown(*f);
                }
                std::string fname = f->attr("name");
                if (fname.empty()) {
                    throw InputError(f->pos, "<ros:field> needs a name");
                }
                fields.emplace_back(fname, parseTypeAttr(*f));
            }
            return fields;
        };
        auto group = [&](const char* tag) {
            for (const auto& c : e.children) {
                if (c->ns == kRosNs && c->name == tag) {
                    return fieldsOf(*c);
                }
            }
            return std::vector<std::pair<std::string, Type>>{};
        };

        if (e.name == "timer") {
            decl.kind = Kind::Timer;
            decl.name = e.attr("name");
            std::string rate = e.attr("rate_hz");
            if (decl.name.empty() || rate.empty()) {
                throw InputError(e.pos, "<ros:timer> needs name and rate_hz");
            }
            decl.rateHz = Rational::parse(rate);
            if (!(Rational(0) < decl.rateHz)) {
                throw InputError(e.pos, "timer rate must be positive");
            }
        } else if (e.name == "publisher" || e.name == "subscriber") {
            decl.kind = e.name == "publisher" ? Kind::TopicPub : Kind::TopicSub;
            decl.name = e.attr("topic");
            if (decl.name.empty()) {
                throw InputError(e.pos, "<ros:" + e.name + "> needs a topic");
            }
            decl.fields = fieldsOf(e);
        } else if (e.name == "service-client" || e.name == "service-server") {
            decl.kind = e.name == "service-client" ? Kind::ServiceClient : Kind::ServiceServer;
            decl.name = e.attr("name");
            if (decl.name.empty()) {
                throw InputError(e.pos, "<ros:" + e.name + "> needs a name");
            }
            decl.request = group("request");
            decl.response = group("response");
        } else if (e.name == "action-client" || e.name == "action-server") {
            decl.kind = e.name == "action-client" ? Kind::ActionClient : Kind::ActionServer;
            decl.name = e.attr("name");
            if (decl.name.empty()) {
                throw InputError(e.pos, "<ros:" + e.name + "> needs a name");
            }
            decl.goal = group("goal");
            decl.feedback = group("feedback");
            decl.result = group("result");
        } else {
            unknown(e);
        }

        for (const auto& other : m_.interfaces) {
            if (other.kind == decl.kind && other.name == decl.name) {
                throw InputError(e.pos, "duplicate interface declaration '" + decl.name + "'");
            }
        }
        m_.interfaces.push_back(std::move(decl));
    }

    void parseState(const xml::Element& e) {
        State s;
        s.id = e.attr("id");
        s.pos = e.pos;
        if (s.id.empty()) {
            throw InputError(e.pos, "<state> needs an id attribute");
        }
        if (m_.findState(s.id) != nullptr) {
            throw InputError(e.pos, "duplicate state id '" + s.id + "'");
        }
        for (const auto& child : e.children) {
            if (isScxmlNs(child->ns) && child->name == "onentry") {
                parseOps(*child, s.onentry);
            } else if (isScxmlNs(child->ns) && child->name == "onexit") {
                parseOps(*child, s.onexit);
            } else if (isScxmlNs(child->ns) && child->name == "transition") {
                s.transitions.push_back(parseTransition(*child));
            } else {
                unknown(*child);
            }
        }
        m_.states.push_back(std::move(s));
    }

    void checkReservedEvent(const std::string& name, const SourcePos& pos) const {
        if (opts_.reservedPrefixCheck &&
            (name.rfind("ros_", 0) == 0 || name.rfind("bt_", 0) == 0)) {
            throw InputError(pos, "event name '" + name +
                                      "' uses a reserved prefix (ros_/bt_ are generated names)");
        }
    }

    Trigger parseTrigger(const xml::Element& e) const {
        Trigger t;
        int found = 0;
        if (const xml::Attr* a = e.findAttr("event")) {
            checkReservedEvent(a->value, a->pos);
            t = Trigger{Trigger::Kind::Event, a->value};
            ++found;
        }
        struct HlAttr {
            const char* ns;
            const char* name;
            Trigger::Kind kind;
        };
        static const HlAttr hlAttrs[] = {
            {kRosNs, "topic", Trigger::Kind::RosTopic},
            {kRosNs, "timer", Trigger::Kind::RosTimer},
            {kRosNs, "service", Trigger::Kind::RosSrvReq},
            {kRosNs, "action-goal", Trigger::Kind::RosActionGoal},
            {kRosNs, "action-feedback", Trigger::Kind::RosActionFeedback},
            {kRosNs, "action-result", Trigger::Kind::RosActionResult},
            {kBtNs, "trigger", Trigger::Kind::BtTick},
        };
        for (const auto& h : hlAttrs) {
            if (const xml::Attr* a = e.findAttr(h.name, h.ns)) {
                requireExtensions(e);
                t = Trigger{h.kind, a->value};
                ++found;
            }
        }
        if (found > 1) {
            throw InputError(e.pos, "transition has more than one trigger attribute");
        }
        return t;
    }

    Transition parseTransition(const xml::Element& e) {
        Transition t;
        t.pos = e.pos;
        t.trigger = parseTrigger(e);
        if (const xml::Attr* cond = e.findAttr("cond")) {
            t.cond = parseExpr(cond->value, cond->pos);
        }
        t.target = e.attr("target");

        bool hasBranch = false;
        for (const auto& child : e.children) {
            if (isScxmlNs(child->ns) && child->name == "branch") {
                hasBranch = true;
                ProbBranch b;
                b.pos = child->pos;
                const xml::Attr* prob = child->findAttr("prob");
                if (prob == nullptr) {
                    throw InputError(child->pos, "<branch> needs a prob attribute");
                }
                b.weight = Rational::parse(prob->value);
                b.target = child->attr("target");
                if (b.target.empty()) {
                    throw InputError(child->pos, "<branch> needs a target");
                }
                parseOps(*child, b.body);
                t.branches.push_back(std::move(b));
            }
        }
        if (hasBranch) {
            if (!t.target.empty()) {
                throw InputError(e.pos, "probabilistic transition must not also carry a target");
            }
            for (const auto& child : e.children) {
                if (!(isScxmlNs(child->ns) && child->name == "branch")) {
                    throw InputError(child->pos,
                                     "probabilistic transition content must live inside <branch>");
                }
            }
        } else {
            if (t.target.empty()) {
                throw InputError(e.pos, "transition needs a target (or probabilistic branches)");
            }
            parseOps(e, t.body);
        }
        return t;
    }

    void parseParams(const xml::Element& e, std::vector<SendParam>& out) {
        for (const auto& child : e.children) {
            if (!isScxmlNs(child->ns) || child->name != "param") {
                unknown(*child);
            }
            SendParam p;
            p.name = child->attr("name");
            const xml::Attr* expr = child->findAttr("expr");
            if (p.name.empty() || expr == nullptr) {
                throw InputError(child->pos, "<param> needs name and expr");
            }
            p.expr = parseExpr(expr->value, expr->pos);
            p.pos = child->pos;
            out.push_back(std::move(p));
        }
    }

    void parseOps(const xml::Element& container, std::vector<Operation>& out) {
        for (const auto& child : container.children) {
            if (isScxmlNs(child->ns) && child->name == "branch") {
                continue;  // handled by parseTransition
            }
            out.push_back(parseOp(*child));
        }
    }

    Operation parseOp(const xml::Element& e) {
        Operation op;
        op.pos = e.pos;
        if (isScxmlNs(e.ns) && e.name == "assign") {
            const xml::Attr* loc = e.findAttr("location");
            const xml::Attr* expr = e.findAttr("expr");
            if (loc == nullptr || expr == nullptr) {
                throw InputError(e.pos, "<assign> needs location and expr");
            }
            ExprPtr lhs = parseExpr(loc->value, loc->pos);
            if (lhs->op == ExprOp::Var) {
                op.lhsVar = lhs->name;
            } else if (lhs->op == ExprOp::Index && lhs->args[0]->op == ExprOp::Var) {
                op.lhsVar = lhs->args[0]->name;
                op.lhsIndex = lhs->args[1];
            } else {
                throw InputError(loc->pos, "assign location must be a variable or array element");
            }
            op.rhs = parseExpr(expr->value, expr->pos);
            return op;
        }
        if (isScxmlNs(e.ns) && e.name == "send") {
            const xml::Attr* ev = e.findAttr("event");
            if (ev == nullptr) {
                throw InputError(e.pos, "<send> needs an event attribute");
            }
            checkReservedEvent(ev->value, ev->pos);
            op.kind = OpKind::Send;
            op.target = ev->value;
            parseParams(e, op.params);
            return op;
        }
        if (e.ns == kRosNs) {
            requireExtensions(e);
            if (e.name == "publish") {
                op.kind = OpKind::RosPublish;
                op.target = e.attr("topic");
            } else if (e.name == "call") {
                op.kind = OpKind::RosCall;
                op.target = e.attr("service");
            } else if (e.name == "reply") {
                op.kind = OpKind::RosReply;
                op.target = e.attr("service");
            } else if (e.name == "send-goal") {
                op.kind = OpKind::RosSendGoal;
                op.target = e.attr("action");
            } else if (e.name == "feedback") {
                op.kind = OpKind::RosFeedback;
                op.target = e.attr("action");
            } else if (e.name == "result") {
                op.kind = OpKind::RosResult;
                op.target = e.attr("action");
                op.status = e.attr("status");
                if (op.status != "SUCCESS" && op.status != "ABORTED") {
                    throw InputError(e.pos, "<ros:result> status must be SUCCESS or ABORTED");
                }
            } else {
                unknown(e);
            }
            if (op.target.empty()) {
                throw InputError(e.pos, "<ros:" + e.name + "> needs its interface name");
            }
            parseParams(e, op.params);
            return op;
        }
        if (e.ns == kBtNs) {
            requireExtensions(e);
            if (e.name == "respond") {
                op.kind = OpKind::BtRespond;
                op.status = e.attr("status");
                if (op.status != "SUCCESS" && op.status != "FAILURE" && op.status != "RUNNING") {
                    throw InputError(e.pos, "<bt:respond> status must be SUCCESS, FAILURE or RUNNING");
                }
            } else if (e.name == "bb-get") {
                op.kind = OpKind::BtBbGet;
                op.target = e.attr("port");
                if (op.target.empty()) {
                    throw InputError(e.pos, "<bt:bb-get> needs a port");
                }
            } else if (e.name == "bb-set") {
                op.kind = OpKind::BtBbSet;
                op.target = e.attr("port");
                const xml::Attr* expr = e.findAttr("expr");
                if (op.target.empty() || expr == nullptr) {
                    throw InputError(e.pos, "<bt:bb-set> needs port and expr");
                }
                op.rhs = parseExpr(expr->value, expr->pos);
            } else {
                unknown(e);
            }
            return op;
        }
        unknown(e);
    }

    // Local name resolution: every Var must name machine data, a constant, or
    // a known external global. Deferred entirely when externalNames is unset.
    void checkLocalNames() const {
        if (!opts_.externalNames.has_value()) {
            return;
        }
        auto known = [&](const std::string& n) {
            return m_.findData(n) != nullptr || opts_.consts.count(n) > 0 ||
                   opts_.externalNames->count(n) > 0;
        };
        auto walkExpr = [&](const ExprPtr& e, auto&& self) -> void {
            if (!e) {
                return;
            }
            if (e->op == ExprOp::Var && !known(e->name)) {
                throw InputError(e->pos, "reference to undeclared variable '" + e->name + "'");
            }
            for (const auto& a : e->args) {
                self(a, self);
            }
        };
        auto walkOps = [&](const std::vector<Operation>& ops) {
            for (const auto& o : ops) {
                if (!o.lhsVar.empty() && o.kind == OpKind::Assign && !known(o.lhsVar)) {
                    throw InputError(o.pos, "assignment to undeclared variable '" + o.lhsVar + "'");
                }
                walkExpr(o.lhsIndex, walkExpr);
                walkExpr(o.rhs, walkExpr);
                for (const auto& p : o.params) {
                    walkExpr(p.expr, walkExpr);
                }
            }
        };
        for (const auto& d : m_.data) {
            walkExpr(d.init, walkExpr);
        }
        for (const auto& s : m_.states) {
            walkOps(s.onentry);
            walkOps(s.onexit);
            for (const auto& t : s.transitions) {
                walkExpr(t.cond, walkExpr);
                walkOps(t.body);
                for (const auto& b : t.branches) {
                    walkOps(b.body);
                }
            }
        }
    }
};

}  // namespace scxml_detail

/// Parses one SCXML document into a StateMachine. Throws InputError with
/// file/line/column on the first problem.
inline StateMachine parseScxml(std::string_view text, const std::string& filename,
                               const ParseOptions& opts = {}) {
    auto root = xml::parse(text, filename);
    return scxml_detail::MachineParser(*root, filename, opts).parse();
}

// ---------------------------------------------------------------------------
// Serialization (plain machines)

namespace scxml_detail {

inline void writeOps(std::string& out, const std::vector<Operation>& ops, int indent);

inline std::string ind(int n) { return std::string(static_cast<std::size_t>(n) * 2, ' '); }

inline void writeOp(std::string& out, const Operation& op, int indent) {
    if (op.kind == OpKind::Assign) {
        std::string loc = op.lhsVar;
        if (op.lhsIndex) {
            loc += "[" + exprToString(op.lhsIndex) + "]";
        }
        out += ind(indent) + "<assign location=\"" + xml::escape(loc) + "\" expr=\"" +
               xml::escape(exprToString(op.rhs)) + "\"/>\n";
        return;
    }
    if (op.kind == OpKind::Send) {
        out += ind(indent) + "<send event=\"" + xml::escape(op.target) + "\"";
        if (op.params.empty()) {
            out += "/>\n";
            return;
        }
        out += ">\n";
        for (const auto& p : op.params) {
            out += ind(indent + 1) + "<param name=\"" + xml::escape(p.name) + "\" expr=\"" +
                   xml::escape(exprToString(p.expr)) + "\"/>\n";
        }
        out += ind(indent) + "</send>\n";
        return;
    }
    throw EngineError("cannot serialize a machine that still contains high-level operations");
}

inline void writeOps(std::string& out, const std::vector<Operation>& ops, int indent) {
    for (const auto& op : ops) {
        writeOp(out, op, indent);
    }
}

}  // namespace scxml_detail

/// Serializes a plain machine back to SCXML. parse(serialize(m)) is
/// structurally identical to m, and the output is byte-stable.
inline std::string serializeScxml(const StateMachine& m) {
    using scxml_detail::ind;
    using scxml_detail::writeOps;
    std::string out = "<scxml xmlns=\"" + std::string(kScxmlNs) + "\" version=\"1.0\" name=\"" +
                      xml::escape(m.name) + "\" initial=\"" + xml::escape(m.initial) + "\">\n";
    if (!m.data.empty()) {
        out += ind(1) + "<datamodel>\n";
        for (const auto& d : m.data) {
            out += ind(2) + "<data id=\"" + xml::escape(d.id) + "\" type=\"" +
                   xml::escape(d.type.str()) + "\"";
            if (d.init) {
                out += " expr=\"" + xml::escape(exprToString(d.init)) + "\"";
            }
            if (d.global) {
                out += " global=\"true\"";
            }
            out += "/>\n";
        }
        out += ind(1) + "</datamodel>\n";
    }
    for (const auto& s : m.states) {
        out += ind(1) + "<state id=\"" + xml::escape(s.id) + "\">\n";
        if (!s.onentry.empty()) {
            out += ind(2) + "<onentry>\n";
            writeOps(out, s.onentry, 3);
            out += ind(2) + "</onentry>\n";
        }
        if (!s.onexit.empty()) {
            out += ind(2) + "<onexit>\n";
            writeOps(out, s.onexit, 3);
            out += ind(2) + "</onexit>\n";
        }
        for (const auto& t : s.transitions) {
            out += ind(2) + "<transition";
            if (t.trigger.kind == Trigger::Kind::Event) {
                out += " event=\"" + xml::escape(t.trigger.name) + "\"";
            } else if (!t.trigger.none()) {
                throw EngineError("cannot serialize a machine with high-level triggers");
            }
            if (t.cond) {
                out += " cond=\"" + xml::escape(exprToString(t.cond)) + "\"";
            }
            if (!t.target.empty()) {
                out += " target=\"" + xml::escape(t.target) + "\"";
            }
            if (t.body.empty() && t.branches.empty()) {
                out += "/>\n";
                continue;
            }
            out += ">\n";
            writeOps(out, t.body, 3);
            for (const auto& b : t.branches) {
                out += ind(3) + "<branch prob=\"" + b.weight.str() + "\" target=\"" +
                       xml::escape(b.target) + "\"";
                if (b.body.empty()) {
                    out += "/>\n";
                } else {
                    out += ">\n";
                    writeOps(out, b.body, 4);
                    out += ind(3) + "</branch>\n";
                }
            }
            out += ind(2) + "</transition>\n";
        }
        out += ind(1) + "</state>\n";
    }
    out += "</scxml>\n";
    return out;
}

// ---------------------------------------------------------------------------
// System-level validation

namespace scxml_detail {

/// Payload schema of one event, inferred from senders or declared by a
/// lowering pass.
struct EventFieldTypes {
    std::vector<std::pair<std::string, Type>> fields;
    std::string declaredBy;  // machine of the first sender, for messages

    const Type* find(const std::string& n) const {
        for (const auto& [fn, ft] : fields) {
            if (fn == n) {
                return &ft;
            }
        }
        return nullptr;
    }
};

}  // namespace scxml_detail

/// Declared payload schema for generated events (attached by lowering).
struct EventSchema {
    std::string event;
    std::vector<std::pair<std::string, Type>> fields;
};

/// Checks every machine invariant plus the cross-machine rules: unique
/// machine names, single global owner, and consistent event payload schemas
/// across all senders. Returns diagnostics; empty means the system is valid.
inline DiagnosticList validateSystem(const std::vector<StateMachine>& machines,
                                     const ConstTable& consts = {},
                                     const std::vector<EventSchema>& declared = {}) {
    DiagnosticList diags;

    // Global variables: name -> (machine, type)
    std::map<std::string, std::pair<std::string, Type>> globals;
    std::set<std::string> machineNames;
    for (const auto& m : machines) {
        if (!machineNames.insert(m.name).second) {
            diags.error(m.pos, "duplicate machine name '" + m.name + "'");
        }
        for (const auto& d : m.data) {
            if (d.global) {
                auto [it, fresh] = globals.emplace(d.id, std::make_pair(m.name, d.type));
                if (!fresh) {
                    diags.error(d.pos, "global variable '" + d.id + "' is declared by both '" +
                                           it->second.first + "' and '" + m.name + "'");
                }
            }
        }
    }

    // Event schemas: declared ones win, sender payloads must agree.
    std::map<std::string, scxml_detail::EventFieldTypes> schemas;
    for (const auto& d : declared) {
        schemas[d.event] = scxml_detail::EventFieldTypes{d.fields, "<declared>"};
    }

    auto typeOfExprIn = [&](const StateMachine& m, const ExprPtr& e, const Transition* trans,
                            const scxml_detail::EventFieldTypes* payload) -> std::optional<Type> {
        TypeScope scope;
        scope.var = [&](const std::string& n) -> std::optional<Type> {
            if (const DataDecl* d = m.findData(n)) {
                return d->type;
            }
            auto git = globals.find(n);
            if (git != globals.end()) {
                return git->second.second;
            }
            auto cit = consts.find(n);
            if (cit != consts.end()) {
                return scalarTypeOfValue(cit->second);
            }
            return std::nullopt;
        };
        if (trans != nullptr && trans->trigger.kind == Trigger::Kind::Event && payload != nullptr) {
            scope.eventField = [payload](const std::string& n) -> std::optional<Type> {
                const Type* t = payload->find(n);
                return t != nullptr ? std::optional<Type>(*t) : std::nullopt;
            };
        }
        return typeCheck(e, scope, diags);
    };

    // Pass 1: collect sender schemas (inferred field types).
    for (const auto& m : machines) {
        auto scanOps = [&](const std::vector<Operation>& ops) {
            for (const auto& op : ops) {
                if (op.kind != OpKind::Send) {
                    continue;
                }
                scxml_detail::EventFieldTypes inferred;
                inferred.declaredBy = m.name;
                bool ok = true;
                std::set<std::string> placeholderFields;
                for (const auto& p : op.params) {
                    // Infer from the static type; payload scope is not
                    // available inside sends on untriggered transitions, so
                    // failures here defer to pass 2 diagnostics. Params whose
                    // value comes from _event cannot be typed in this pass
                    // and only take part in the field-name comparison.
                    DiagnosticList scratch;
                    bool placeholderUsed = false;
                    TypeScope scope;
                    scope.var = [&](const std::string& n) -> std::optional<Type> {
                        if (const DataDecl* d = m.findData(n)) {
                            return d->type;
                        }
                        auto git = globals.find(n);
                        if (git != globals.end()) {
                            return git->second.second;
                        }
                        auto cit = consts.find(n);
                        if (cit != consts.end()) {
                            return scalarTypeOfValue(cit->second);
                        }
                        return std::nullopt;
                    };
                    scope.eventField = [&placeholderUsed](const std::string&) -> std::optional<Type> {
                        placeholderUsed = true;
                        return Type::integer();
                    };
                    auto t = typeCheck(p.expr, scope, scratch);
                    if (!t) {
                        ok = false;
                        break;
                    }
                    if (placeholderUsed) {
                        placeholderFields.insert(p.name);
                    }
                    inferred.fields.emplace_back(p.name, *t);
                }
                if (!ok) {
                    continue;
                }
                auto it = schemas.find(op.target);
                if (it == schemas.end()) {
                    if (placeholderFields.empty()) {
                        schemas.emplace(op.target, std::move(inferred));
                    }
                    continue;
                }
                // Compare field sets, and kinds where reliably inferred.
                const auto& ref = it->second;
                bool mismatch = ref.fields.size() != inferred.fields.size();
                if (!mismatch) {
                    for (const auto& [fn, ft] : inferred.fields) {
                        const Type* rt = ref.find(fn);
                        if (rt == nullptr ||
                            (rt->kind != ft.kind && placeholderFields.count(fn) == 0)) {
                            mismatch = true;
                            break;
                        }
                    }
                }
                if (mismatch) {
                    diags.error(op.pos, "event '" + op.target + "' is sent by '" + m.name +
                                            "' with a payload schema conflicting with '" +
                                            ref.declaredBy + "'");
                }
            }
        };
        for (const auto& s : m.states) {
            scanOps(s.onentry);
            scanOps(s.onexit);
            for (const auto& t : s.transitions) {
                scanOps(t.body);
                for (const auto& b : t.branches) {
                    scanOps(b.body);
                }
            }
        }
    }

    // Pass 2: per-machine structural and typing checks.
    for (const auto& m : machines) {
        std::set<std::string> stateIds;
        for (const auto& s : m.states) {
            if (!stateIds.insert(s.id).second) {
                diags.error(s.pos, "duplicate state id '" + s.id + "' in machine '" + m.name + "'");
            }
        }
        if (m.findState(m.initial) == nullptr) {
            diags.error(m.pos, "machine '" + m.name + "': initial state '" + m.initial +
                                   "' does not exist");
        }
        if (!m.interfaces.empty()) {
            diags.error(m.pos, "machine '" + m.name + "' still has unlowered interface declarations");
        }

        for (const auto& d : m.data) {
            if (!d.init) {
                continue;
            }
            if (d.type.kind == TypeKind::IntArray) {
                if (d.init->op != ExprOp::ArrayLit) {
                    diags.error(d.pos, "array variable '" + d.id + "' needs an array initializer");
                    continue;
                }
                if (d.init->args.size() != d.type.size) {
                    diags.error(d.pos, "array initializer for '" + d.id + "' has " +
                                           std::to_string(d.init->args.size()) + " elements, need " +
                                           std::to_string(d.type.size));
                    continue;
                }
                for (const auto& el : d.init->args) {
                    auto v = constFold(el);
                    if (!v || v->kind == TypeKind::Real) {
                        diags.error(el->pos, "array initializer elements must be integer constants");
                    } else if (v->i < d.type.lo || v->i > d.type.hi) {
                        diags.error(el->pos, "initializer " + v->str() + " outside bounds of '" +
                                                 d.id + "'");
                    }
                }
                continue;
            }
            auto v = constFold(d.init);
            if (!v) {
                diags.error(d.pos, "initializer of '" + d.id +
                                       "' must be constant (no variable references)");
                continue;
            }
            if (d.type.kind == TypeKind::Bool && v->kind != TypeKind::Bool) {
                diags.error(d.pos, "initializer of bool variable '" + d.id + "' is not a bool");
            } else if (d.type.kind == TypeKind::Int) {
                if (v->kind != TypeKind::Int) {
                    diags.error(d.pos, "initializer of int variable '" + d.id + "' is not an int");
                } else if (v->i < d.type.lo || v->i > d.type.hi) {
                    diags.error(d.pos, "initializer " + v->str() + " outside declared bounds " +
                                           d.type.str());
                }
            } else if (d.type.kind == TypeKind::Real && !(v->kind == TypeKind::Real ||
                                                          v->kind == TypeKind::Int)) {
                diags.error(d.pos, "initializer of real variable '" + d.id + "' is not numeric");
            }
        }

        auto checkAssignTarget = [&](const Operation& op) {
            const DataDecl* local = m.findData(op.lhsVar);
            std::optional<Type> lt;
            if (local != nullptr) {
                lt = local->type;
            } else {
                auto git = globals.find(op.lhsVar);
                if (git != globals.end()) {
                    if (git->second.first != m.name) {
                        diags.error(op.pos, "machine '" + m.name + "' assigns global '" + op.lhsVar +
                                                "' owned by '" + git->second.first + "'");
                        return;
                    }
                    lt = git->second.second;
                } else if (consts.count(op.lhsVar) > 0) {
                    diags.error(op.pos, "assignment to constant '" + op.lhsVar + "'");
                    return;
                } else {
                    diags.error(op.pos, "assignment to undeclared variable '" + op.lhsVar + "'");
                    return;
                }
            }
            if (op.lhsIndex && lt->kind != TypeKind::IntArray) {
                diags.error(op.pos, "indexed assignment to non-array '" + op.lhsVar + "'");
            }
            if (!op.lhsIndex && lt->kind == TypeKind::IntArray) {
                diags.error(op.pos, "whole-array assignment is not supported");
            }
        };

        auto checkOps = [&](const std::vector<Operation>& ops, const Transition* trans,
                            bool allowEventRefs) {
            const scxml_detail::EventFieldTypes* payload = nullptr;
            if (trans != nullptr && trans->trigger.kind == Trigger::Kind::Event) {
                auto it = schemas.find(trans->trigger.name);
                if (it != schemas.end()) {
                    payload = &it->second;
                }
            }
            for (const auto& op : ops) {
                if (!op.isPlain()) {
                    diags.error(op.pos, "machine '" + m.name + "' contains an unlowered operation");
                    continue;
                }
                if (op.kind == OpKind::Assign) {
                    checkAssignTarget(op);
                    if (op.lhsIndex) {
                        typeOfExprIn(m, op.lhsIndex, allowEventRefs ? trans : nullptr, payload);
                    }
                    auto rt = typeOfExprIn(m, op.rhs, allowEventRefs ? trans : nullptr, payload);
                    const DataDecl* local = m.findData(op.lhsVar);
                    std::optional<Type> lt;
                    if (local != nullptr) {
                        lt = local->type;
                    } else if (auto git = globals.find(op.lhsVar); git != globals.end()) {
                        lt = git->second.second;
                    }
                    if (rt && lt) {
                        bool lhsNumeric = lt->kind == TypeKind::Int || lt->kind == TypeKind::Real ||
                                          lt->kind == TypeKind::IntArray;
                        bool rhsNumeric = rt->isNumeric();
                        if (lt->kind == TypeKind::Bool && rt->kind != TypeKind::Bool) {
                            diags.error(op.pos, "assigning non-bool to bool '" + op.lhsVar + "'");
                        } else if (lhsNumeric && !rhsNumeric && lt->kind != TypeKind::Bool) {
                            diags.error(op.pos, "assigning non-numeric to '" + op.lhsVar + "'");
                        } else if ((lt->kind == TypeKind::Int || lt->kind == TypeKind::IntArray) &&
                                   rt->kind == TypeKind::Real) {
                            diags.error(op.pos, "assigning real to integer '" + op.lhsVar + "'");
                        }
                    }
                } else {
                    for (const auto& p : op.params) {
                        typeOfExprIn(m, p.expr, allowEventRefs ? trans : nullptr, payload);
                    }
                }
            }
        };

        for (const auto& s : m.states) {
            // onentry/onexit run outside any triggering event, so payload
            // references there are rejected.
            checkOps(s.onentry, nullptr, false);
            checkOps(s.onexit, nullptr, false);
            for (const auto& t : s.transitions) {
                if (!t.target.empty() && m.findState(t.target) == nullptr) {
                    diags.error(t.pos, "transition target '" + t.target + "' does not exist in '" +
                                           m.name + "'");
                }
                const scxml_detail::EventFieldTypes* payload = nullptr;
                if (t.trigger.kind == Trigger::Kind::Event) {
                    auto it = schemas.find(t.trigger.name);
                    if (it != schemas.end()) {
                        payload = &it->second;
                    }
                }
                if (t.cond) {
                    auto ct = typeOfExprIn(m, t.cond, &t, payload);
                    if (ct && ct->kind != TypeKind::Bool) {
                        diags.error(t.cond->pos, "transition condition must be bool, got " +
                                                     ct->str());
                    }
                }
                checkOps(t.body, &t, true);
                if (!t.branches.empty()) {
                    double sum = 0.0;
                    for (const auto& b : t.branches) {
                        if (!(Rational(0) < b.weight)) {
                            diags.error(b.pos, "branch weight must be positive");
                        }
                        sum += b.weight.toDouble();
                        if (m.findState(b.target) == nullptr) {
                            diags.error(b.pos, "branch target '" + b.target + "' does not exist");
                        }
                        checkOps(b.body, &t, true);
                    }
                    if (std::abs(sum - 1.0) > 1e-9) {
                        diags.error(t.pos, "branch weights of a probabilistic transition sum to " +
                                               std::to_string(sum) + ", expected 1");
                    }
                }
            }
        }
    }

    return diags;
}

/// Convenience entry matching the single-expression evaluation contract:
/// `env` maps names to values, `payload` the triggering event's fields.
inline Value evalExpression(const ExprPtr& expr, const std::map<std::string, Value>& env,
                            const std::map<std::string, Value>& payload = {}) {
    EvalEnv e;
    e.var = [&](const std::string& n) -> Value {
        auto it = env.find(n);
        if (it == env.end()) {
            throw EvalError("unbound variable '" + n + "'");
        }
        return it->second;
    };
    e.eventField = [&](const std::string& n) -> Value {
        auto it = payload.find(n);
        if (it == payload.end()) {
            throw EvalError("unbound event field '_event." + n + "'");
        }
        return it->second;
    };
    return evalExpr(expr, e);
}

}  // namespace netsmc
