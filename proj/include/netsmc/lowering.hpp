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

// Lowering of the extended dialect onto plain event machines.
//
//   topics    -> one event `ros_topic.<name>` per topic; publish becomes a
//                send, subscription callbacks become event triggers. Delivery
//                is a single-slot rendezvous: a topic with several consumers
//                hands each message to ONE of them, so models fan out
//                explicitly when broadcast is intended.
//   services  -> `ros_srv.<name>.req` / `.res`. A call is blocking: the
//                transition is split at the call, a generated wait state
//                parks the client, and the remaining operations run on the
//                response (whose payload is _event.<field> there). One client
//                machine and one server machine per service.
//   actions   -> `ros_action.<name>.goal` / `.feedback` / `.result`; the
//                result event carries a `status` field (ACTION_SUCCESS = 1,
//                ACTION_ABORTED = 2). Single-goal handling: one client, one
//                server.
//   timers    -> a generated `global_clock` machine owning the tick counter
//                `t_curr`. The tick period is the gcd of all timer periods;
//                each timer fires its event `ros_time.<machine>.<timer>`
//                every period/tick ticks, in declaration order within a
//                tick. Event back-pressure paces the clock: a send blocks
//                while the previous occurrence is still undelivered.

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "netsmc/scxml.hpp"
#include "netsmc/translate.hpp"

namespace netsmc {

inline constexpr std::int64_t kActionStatusSuccess = 1;
inline constexpr std::int64_t kActionStatusAborted = 2;
inline constexpr std::int64_t kBtSuccess = 1;
inline constexpr std::int64_t kBtFailure = 2;
inline constexpr std::int64_t kBtRunning = 3;

/// Constants every lowered system can rely on in expressions.
inline void addBuiltinConstants(ConstTable& consts) {
    consts.emplace("ACTION_SUCCESS", Value::integer(kActionStatusSuccess));
    consts.emplace("ACTION_ABORTED", Value::integer(kActionStatusAborted));
    consts.emplace("BT_SUCCESS", Value::integer(kBtSuccess));
    consts.emplace("BT_FAILURE", Value::integer(kBtFailure));
    consts.emplace("BT_RUNNING", Value::integer(kBtRunning));
}

// ---------------------------------------------------------------------------
// Blocking-operation splitting

/// How one blocking operation lowers: the request to send now and the reply
/// event that resumes the transition.
struct BlockingLowering {
    Operation request;       // a plain Send
    std::string replyEvent;  // trigger of the generated continuation
};

/// Splits every transition at its blocking operations (request/response
/// round trips). Operations after the blocking one move to a continuation
/// transition out of a generated wait state, triggered by the reply event;
/// `_event` refers to the reply payload there. Blocking operations inside
/// onentry/onexit are rejected: they have no transition to split.
template <typename Resolver>
void splitBlockingOps(StateMachine& m, Resolver&& resolve, DiagnosticList& diags) {
    struct Splitter {
        StateMachine& m;
        Resolver& resolve;
        IdGenerator waitIds;
        std::vector<State> generated;

        // Splits `ops` headed toward `target`; returns the trimmed operation
        // list and the (possibly generated) immediate target.
        std::pair<std::vector<Operation>, std::string> run(std::vector<Operation> ops,
                                                           std::string target) {
            std::size_t split = ops.size();
            for (std::size_t i = 0; i < ops.size(); ++i) {
                if (ops[i].isBlocking()) {
                    split = i;
                    break;
                }
            }
            if (split == ops.size()) {
                return {std::move(ops), std::move(target)};
            }
            BlockingLowering low = resolve(ops[split]);
            std::vector<Operation> rest(ops.begin() + static_cast<std::ptrdiff_t>(split) + 1,
                                        ops.end());
            ops.resize(split);
            ops.push_back(low.request);

            State wait;
            wait.id = waitIds.fresh("wait_");
            Transition cont;
            cont.trigger = Trigger::event(low.replyEvent);
            cont.pos = ops.back().pos;
            auto [contOps, contTarget] = run(std::move(rest), std::move(target));
            cont.body = std::move(contOps);
            cont.target = std::move(contTarget);
            wait.transitions.push_back(std::move(cont));
            std::string waitId = wait.id;
            generated.push_back(std::move(wait));
            return {std::move(ops), std::move(waitId)};
        }
    };

    for (auto& s : m.states) {
        for (const auto* lifecycle : {&s.onentry, &s.onexit}) {
            for (const auto& op : *lifecycle) {
                if (op.isBlocking()) {
                    diags.error(op.pos, "blocking operation inside onentry/onexit of '" + s.id +
                                            "'; round trips need a transition to split");
                }
            }
        }
    }
    if (diags.hasErrors()) {
        return;
    }

    Splitter splitter{m, resolve, {}, {}};
    for (const auto& s : m.states) {
        splitter.waitIds.reserve(s.id);
    }
    for (auto& s : m.states) {
        for (auto& t : s.transitions) {
            if (!t.branches.empty()) {
                for (auto& b : t.branches) {
                    auto [ops, target] = splitter.run(std::move(b.body), std::move(b.target));
                    b.body = std::move(ops);
                    b.target = std::move(target);
                }
            } else {
                auto [ops, target] = splitter.run(std::move(t.body), std::move(t.target));
                t.body = std::move(ops);
                t.target = std::move(target);
            }
        }
    }
    for (auto& w : splitter.generated) {
        m.states.push_back(std::move(w));
    }
}

// ---------------------------------------------------------------------------
// Interface lowering passes

struct LoweringResult {
    std::vector<EventSchema> schemas;
    DiagnosticList diags;

    void merge(LoweringResult&& other) {
        for (auto& s : other.schemas) {
            schemas.push_back(std::move(s));
        }
        for (const auto& d : other.diags.all()) {
            if (d.severity == Severity::Error) {
                diags.error(d.pos, d.message);
            } else {
                diags.warning(d.pos, d.message);
            }
        }
    }
};

namespace lowering_detail {

using FieldList = std::vector<std::pair<std::string, Type>>;

inline void declareSchema(LoweringResult& out, const std::string& event, const FieldList& fields) {
    for (const auto& s : out.schemas) {
        if (s.event == event) {
            return;
        }
    }
    out.schemas.push_back(EventSchema{event, fields});
}

inline bool fieldsCompatible(const FieldList& a, const FieldList& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].first != b[i].first || a[i].second.kind != b[i].second.kind) {
            return false;
        }
    }
    return true;
}

inline void checkParamsAgainst(const Operation& op, const FieldList& fields,
                               DiagnosticList& diags, const std::string& what) {
    for (const auto& p : op.params) {
        bool found = false;
        for (const auto& [fn, _] : fields) {
            if (fn == p.name) {
                found = true;
                break;
            }
        }
        if (!found) {
            diags.error(p.pos, what + " has no field '" + p.name + "'");
        }
    }
}

template <typename Fn>
void forEachOperation(StateMachine& m, Fn&& fn) {
    for (auto& s : m.states) {
        for (auto& op : s.onentry) {
            fn(op);
        }
        for (auto& op : s.onexit) {
            fn(op);
        }
        for (auto& t : s.transitions) {
            for (auto& op : t.body) {
                fn(op);
            }
            for (auto& b : t.branches) {
                for (auto& op : b.body) {
                    fn(op);
                }
            }
        }
    }
}

template <typename Fn>
void forEachTrigger(StateMachine& m, Fn&& fn) {
    for (auto& s : m.states) {
        for (auto& t : s.transitions) {
            fn(t.trigger);
        }
    }
}

}  // namespace lowering_detail

inline std::string topicEventName(const std::string& topic) { return "ros_topic." + topic; }
inline std::string serviceRequestEvent(const std::string& s) { return "ros_srv." + s + ".req"; }
inline std::string serviceResponseEvent(const std::string& s) { return "ros_srv." + s + ".res"; }
inline std::string actionGoalEvent(const std::string& a) { return "ros_action." + a + ".goal"; }
inline std::string actionFeedbackEvent(const std::string& a) {
    return "ros_action." + a + ".feedback";
}
inline std::string actionResultEvent(const std::string& a) { return "ros_action." + a + ".result"; }
inline std::string timerEventName(const std::string& machine, const std::string& timer) {
    return "ros_time." + machine + "." + timer;
}

/// Topic publications become sends, subscriptions become event triggers.
inline LoweringResult lowerTopics(std::vector<StateMachine>& machines) {
    using namespace lowering_detail;
    LoweringResult out;

    // Collect declared field lists per topic; publishers and subscribers
    // must agree.
    std::map<std::string, std::pair<FieldList, std::string>> topics;  // fields, declaring machine
    for (const auto& m : machines) {
        for (const auto& decl : m.interfaces) {
            if (decl.kind != RosInterfaceDecl::Kind::TopicPub &&
                decl.kind != RosInterfaceDecl::Kind::TopicSub) {
                continue;
            }
            auto it = topics.find(decl.name);
            if (it == topics.end()) {
                topics.emplace(decl.name, std::make_pair(decl.fields, m.name));
            } else if (!fieldsCompatible(it->second.first, decl.fields)) {
                out.diags.error(decl.pos, "topic '" + decl.name + "' declared with a message type "
                                              "conflicting with machine '" +
                                              it->second.second + "'");
            }
        }
    }

    for (auto& m : machines) {
        std::set<std::string> pubs;
        std::set<std::string> subs;
        std::vector<RosInterfaceDecl> keep;
        for (auto& decl : m.interfaces) {
            if (decl.kind == RosInterfaceDecl::Kind::TopicPub) {
                pubs.insert(decl.name);
            } else if (decl.kind == RosInterfaceDecl::Kind::TopicSub) {
                if (decl.fields.empty() && topics.at(decl.name).first.empty()) {
                    out.diags.error(decl.pos,
                                    "subscription to topic '" + decl.name + "' with no declared type");
                }
                subs.insert(decl.name);
            } else {
                keep.push_back(decl);
                continue;
            }
            declareSchema(out, topicEventName(decl.name), topics.at(decl.name).first);
        }
        m.interfaces = std::move(keep);

        forEachOperation(m, [&](Operation& op) {
            if (op.kind != OpKind::RosPublish) {
                return;
            }
            if (pubs.count(op.target) == 0) {
                out.diags.error(op.pos, "machine '" + m.name + "' publishes to undeclared topic '" +
                                            op.target + "'");
                return;
            }
            checkParamsAgainst(op, topics.at(op.target).first, out.diags,
                               "topic '" + op.target + "'");
            op.kind = OpKind::Send;
            op.target = topicEventName(op.target);
        });
        forEachTrigger(m, [&](Trigger& t) {
            if (t.kind != Trigger::Kind::RosTopic) {
                return;
            }
            if (subs.count(t.name) == 0) {
                out.diags.error(m.pos, "machine '" + m.name +
                                           "' has a callback for unsubscribed topic '" + t.name + "'");
            }
            t = Trigger::event(topicEventName(t.name));
        });
    }
    return out;
}

/// Service calls become blocking request/response round trips.
inline LoweringResult lowerServices(std::vector<StateMachine>& machines) {
    using namespace lowering_detail;
    LoweringResult out;

    struct ServiceInfo {
        FieldList request;
        FieldList response;
        std::string server;
        std::string client;
        SourcePos pos;
    };
    std::map<std::string, ServiceInfo> services;
    for (const auto& m : machines) {
        for (const auto& decl : m.interfaces) {
            if (decl.kind == RosInterfaceDecl::Kind::ServiceServer) {
                ServiceInfo& info = services[decl.name];
                if (!info.server.empty()) {
                    out.diags.error(decl.pos, "two servers declared for service '" + decl.name +
                                                  "' ('" + info.server + "' and '" + m.name + "')");
                }
                info.server = m.name;
                info.request = decl.request;
                info.response = decl.response;
                info.pos = decl.pos;
            } else if (decl.kind == RosInterfaceDecl::Kind::ServiceClient) {
                ServiceInfo& info = services[decl.name];
                if (!info.client.empty()) {
                    out.diags.error(decl.pos,
                                    "service '" + decl.name + "' has more than one client machine ('" +
                                        info.client + "' and '" + m.name +
                                        "'); response routing needs a single client");
                }
                info.client = m.name;
                if (info.server.empty()) {
                    info.request = decl.request;
                    info.response = decl.response;
                }
                info.pos = decl.pos;
            }
        }
    }
    for (const auto& [name, info] : services) {
        declareSchema(out, serviceRequestEvent(name), info.request);
        declareSchema(out, serviceResponseEvent(name), info.response);
    }

    for (auto& m : machines) {
        std::set<std::string> clientOf;
        std::set<std::string> serverOf;
        std::vector<RosInterfaceDecl> keep;
        for (auto& decl : m.interfaces) {
            if (decl.kind == RosInterfaceDecl::Kind::ServiceClient) {
                clientOf.insert(decl.name);
            } else if (decl.kind == RosInterfaceDecl::Kind::ServiceServer) {
                serverOf.insert(decl.name);
            } else {
                keep.push_back(decl);
            }
        }
        m.interfaces = std::move(keep);

        forEachTrigger(m, [&](Trigger& t) {
            if (t.kind != Trigger::Kind::RosSrvReq) {
                return;
            }
            if (serverOf.count(t.name) == 0) {
                out.diags.error(m.pos, "machine '" + m.name + "' handles requests of service '" +
                                           t.name + "' without declaring its server");
            }
            t = Trigger::event(serviceRequestEvent(t.name));
        });
        forEachOperation(m, [&](Operation& op) {
            if (op.kind != OpKind::RosReply) {
                return;
            }
            if (serverOf.count(op.target) == 0) {
                out.diags.error(op.pos, "reply to service '" + op.target +
                                            "' outside its server machine");
                return;
            }
            checkParamsAgainst(op, services.at(op.target).response, out.diags,
                               "service response '" + op.target + "'");
            op.kind = OpKind::Send;
            op.target = serviceResponseEvent(op.target);
        });

        // Calls: validated here, split below.
        forEachOperation(m, [&](Operation& op) {
            if (op.kind != OpKind::RosCall) {
                return;
            }
            if (clientOf.count(op.target) == 0) {
                out.diags.error(op.pos, "call to service '" + op.target +
                                            "' without declaring a client for it");
                return;
            }
            checkParamsAgainst(op, services.at(op.target).request, out.diags,
                               "service request '" + op.target + "'");
        });
        if (out.diags.hasErrors()) {
            continue;
        }
        splitBlockingOps(
            m,
            [&](const Operation& op) {
                BlockingLowering low;
                low.request = Operation::send(serviceRequestEvent(op.target), op.params, op.pos);
                low.replyEvent = serviceResponseEvent(op.target);
                return low;
            },
            out.diags);
    }
    return out;
}

/// Goal, feedback and result become separate events; results always carry a
/// status field.
inline LoweringResult lowerActions(std::vector<StateMachine>& machines) {
    using namespace lowering_detail;
    LoweringResult out;

    struct ActionInfo {
        FieldList goal;
        FieldList feedback;
        FieldList result;  // user fields; status appended to the schema
        std::string server;
        std::string client;
        bool clientDeclaresFeedback = false;
        SourcePos pos;
    };
    std::map<std::string, ActionInfo> actions;
    for (const auto& m : machines) {
        for (const auto& decl : m.interfaces) {
            if (decl.kind == RosInterfaceDecl::Kind::ActionServer) {
                ActionInfo& info = actions[decl.name];
                if (!info.server.empty()) {
                    out.diags.error(decl.pos, "two servers declared for action '" + decl.name + "'");
                }
                info.server = m.name;
                info.goal = decl.goal;
                info.feedback = decl.feedback;
                info.result = decl.result;
                info.pos = decl.pos;
            } else if (decl.kind == RosInterfaceDecl::Kind::ActionClient) {
                ActionInfo& info = actions[decl.name];
                if (!info.client.empty()) {
                    out.diags.error(decl.pos, "action '" + decl.name +
                                                  "' has more than one client machine");
                }
                info.client = m.name;
                info.clientDeclaresFeedback = !decl.feedback.empty();
                if (info.server.empty()) {
                    info.goal = decl.goal;
                    info.feedback = decl.feedback;
                    info.result = decl.result;
                }
                info.pos = decl.pos;
            }
        }
    }
    for (const auto& [name, info] : actions) {
        if (info.server.empty() && (info.clientDeclaresFeedback || !info.feedback.empty())) {
            out.diags.error(info.pos, "action '" + name + "' declares feedback without a server");
        }
        declareSchema(out, actionGoalEvent(name), info.goal);
        if (!info.feedback.empty()) {
            declareSchema(out, actionFeedbackEvent(name), info.feedback);
        }
        FieldList resultFields = info.result;
        resultFields.emplace_back("status", Type::integer(0, 3));
        declareSchema(out, actionResultEvent(name), resultFields);
    }

    for (auto& m : machines) {
        std::set<std::string> clientOf;
        std::set<std::string> serverOf;
        std::vector<RosInterfaceDecl> keep;
        for (auto& decl : m.interfaces) {
            if (decl.kind == RosInterfaceDecl::Kind::ActionClient) {
                clientOf.insert(decl.name);
            } else if (decl.kind == RosInterfaceDecl::Kind::ActionServer) {
                serverOf.insert(decl.name);
            } else {
                keep.push_back(decl);
            }
        }
        m.interfaces = std::move(keep);

        forEachTrigger(m, [&](Trigger& t) {
            if (t.kind == Trigger::Kind::RosActionGoal) {
                if (serverOf.count(t.name) == 0) {
                    out.diags.error(m.pos, "goal handler for action '" + t.name +
                                               "' outside its server machine");
                }
                t = Trigger::event(actionGoalEvent(t.name));
            } else if (t.kind == Trigger::Kind::RosActionFeedback) {
                if (clientOf.count(t.name) == 0) {
                    out.diags.error(m.pos, "feedback handler for action '" + t.name +
                                               "' outside its client machine");
                }
                t = Trigger::event(actionFeedbackEvent(t.name));
            } else if (t.kind == Trigger::Kind::RosActionResult) {
                if (clientOf.count(t.name) == 0) {
                    out.diags.error(m.pos, "result handler for action '" + t.name +
                                               "' outside its client machine");
                }
                t = Trigger::event(actionResultEvent(t.name));
            }
        });
        forEachOperation(m, [&](Operation& op) {
            switch (op.kind) {
                case OpKind::RosSendGoal:
                    if (clientOf.count(op.target) == 0) {
                        out.diags.error(op.pos, "goal sent to action '" + op.target +
                                                    "' without declaring a client");
                        return;
                    }
                    checkParamsAgainst(op, actions.at(op.target).goal, out.diags,
                                       "action goal '" + op.target + "'");
                    op.kind = OpKind::Send;
                    op.target = actionGoalEvent(op.target);
                    return;
                case OpKind::RosFeedback:
                    if (serverOf.count(op.target) == 0) {
                        out.diags.error(op.pos, "feedback for action '" + op.target +
                                                    "' outside its server machine");
                        return;
                    }
                    op.kind = OpKind::Send;
                    op.target = actionFeedbackEvent(op.target);
                    return;
                case OpKind::RosResult: {
                    if (serverOf.count(op.target) == 0) {
                        out.diags.error(op.pos, "result for action '" + op.target +
                                                    "' outside its server machine");
                        return;
                    }
                    checkParamsAgainst(op, actions.at(op.target).result, out.diags,
                                       "action result '" + op.target + "'");
                    std::int64_t status = op.status == "ABORTED" ? kActionStatusAborted
                                                                 : kActionStatusSuccess;
                    op.kind = OpKind::Send;
                    op.params.push_back(
                        SendParam{"status", Expr::integer(status), op.pos});
                    op.target = actionResultEvent(op.target);
                    op.status.clear();
                    return;
                }
                default: return;
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Global clock

struct ClockConfig {
    Rational tickPeriod{0};
    struct Binding {
        std::string machine;
        std::string timer;
        Rational rateHz{0};
        std::int64_t periodTicks = 0;
    };
    std::vector<Binding> bindings;
};

struct ClockBuild {
    StateMachine clock;
    ClockConfig config;
};

inline constexpr std::int64_t kMaxTickCount = 1000000;
inline constexpr std::int64_t kMaxTimerPeriodTicks = 1000000;

/// Collects every timer declaration, rewrites the timer triggers into events
/// and builds the clock machine. The tick period is the gcd of all timer
/// periods; each timer's event fires every period/tick ticks, in declaration
/// order. Fails when a timer's period exceeds kMaxTimerPeriodTicks ticks
/// (rates too far apart to share an exact grid).
inline ClockBuild buildGlobalClock(std::vector<StateMachine>& machines, DiagnosticList& diags) {
    ClockBuild out;
    ClockConfig& cfg = out.config;

    for (auto& m : machines) {
        std::vector<RosInterfaceDecl> keep;
        for (auto& decl : m.interfaces) {
            if (decl.kind != RosInterfaceDecl::Kind::Timer) {
                keep.push_back(decl);
                continue;
            }
            ClockConfig::Binding b;
            b.machine = m.name;
            b.timer = decl.name;
            b.rateHz = decl.rateHz;
            cfg.bindings.push_back(std::move(b));
        }
        m.interfaces = std::move(keep);

        std::set<std::string> timers;
        for (const auto& b : cfg.bindings) {
            if (b.machine == m.name) {
                timers.insert(b.timer);
            }
        }
        lowering_detail::forEachTrigger(m, [&](Trigger& t) {
            if (t.kind != Trigger::Kind::RosTimer) {
                return;
            }
            if (timers.count(t.name) == 0) {
                diags.error(m.pos, "machine '" + m.name + "' reacts to undeclared timer '" +
                                       t.name + "'");
            }
            t = Trigger::event(timerEventName(m.name, t.name));
        });
    }

    if (cfg.bindings.empty()) {
        throw InputError("the system declares no timers; a global clock needs at least one");
    }

    Rational tick = Rational(1) / cfg.bindings[0].rateHz;
    for (const auto& b : cfg.bindings) {
        tick = Rational::gcd(tick, Rational(1) / b.rateHz);
    }
    cfg.tickPeriod = tick;
    for (auto& b : cfg.bindings) {
        Rational ratio = (Rational(1) / b.rateHz) / tick;
        if (!ratio.isInteger()) {
            throw InputError("timer period is not an integer multiple of the tick period");
        }
        b.periodTicks = ratio.num;
        if (b.periodTicks > kMaxTimerPeriodTicks) {
            diags.error({}, "timer '" + b.machine + "." + b.timer +
                                "' needs " + std::to_string(b.periodTicks) +
                                " ticks per period; declared rates are too far apart for an "
                                "exact common grid");
        }
    }
    if (diags.hasErrors()) {
        return out;
    }

    // The machine: one pass per tick. c0 advances time and decrements every
    // countdown, then one checkpoint state per timer either fires its event
    // and reloads the countdown or passes through.
    StateMachine clock;
    clock.name = "global_clock";
    clock.initial = "c0";

    DataDecl tcurr;
    tcurr.id = "t_curr";
    tcurr.type = Type::integer(0, kMaxTickCount);
    tcurr.init = Expr::integer(0);
    tcurr.global = true;
    clock.data.push_back(std::move(tcurr));
    for (std::size_t k = 0; k < cfg.bindings.size(); ++k) {
        DataDecl d;
        d.id = "cd" + std::to_string(k);
        d.type = Type::integer(0, cfg.bindings[k].periodTicks);
        d.init = Expr::integer(cfg.bindings[k].periodTicks);
        clock.data.push_back(std::move(d));
    }

    auto stateName = [&](std::size_t k) {
        return k == 0 ? std::string("c0") : "q" + std::to_string(k - 1);
    };

    State c0;
    c0.id = "c0";
    Transition advance;
    advance.target = stateName(1);
    advance.body.push_back(Operation::assign("t_curr", parseExpr("t_curr + 1")));
    for (std::size_t k = 0; k < cfg.bindings.size(); ++k) {
        std::string cd = "cd" + std::to_string(k);
        advance.body.push_back(Operation::assign(cd, parseExpr(cd + " - 1")));
    }
    c0.transitions.push_back(std::move(advance));
    clock.states.push_back(std::move(c0));

    for (std::size_t k = 0; k < cfg.bindings.size(); ++k) {
        const auto& b = cfg.bindings[k];
        std::string cd = "cd" + std::to_string(k);
        State q;
        q.id = stateName(k + 1);
        std::string next = k + 1 == cfg.bindings.size() ? "c0" : stateName(k + 2);

        Transition fire;
        fire.cond = parseExpr(cd + " == 0");
        fire.target = next;
        fire.body.push_back(Operation::send(timerEventName(b.machine, b.timer)));
        fire.body.push_back(
            Operation::assign(cd, Expr::integer(b.periodTicks)));
        q.transitions.push_back(std::move(fire));

        Transition pass;
        pass.cond = parseExpr(cd + " > 0");
        pass.target = next;
        q.transitions.push_back(std::move(pass));

        clock.states.push_back(std::move(q));
    }

    out.clock = std::move(clock);
    return out;
}

/// Runs all interface lowering passes in order and appends the clock machine
/// when any timer is declared. Returns the declared event schemas for the
/// registry.
inline LoweringResult lowerSystem(std::vector<StateMachine>& machines) {
    LoweringResult out;
    out.merge(lowerTopics(machines));
    out.merge(lowerServices(machines));
    out.merge(lowerActions(machines));

    bool anyTimer = false;
    for (const auto& m : machines) {
        for (const auto& d : m.interfaces) {
            anyTimer = anyTimer || d.kind == RosInterfaceDecl::Kind::Timer;
        }
    }
    if (anyTimer) {
        ClockBuild clock = buildGlobalClock(machines, out.diags);
        if (!out.diags.hasErrors()) {
            machines.push_back(std::move(clock.clock));
        }
    }
    return out;
}

}  // namespace netsmc
