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

// Compilation of plain state machines into a network of MDPs.
//
// Per machine, states become locations and each transition expands into a
// linear chain: one edge per operation plus a tail edge, with every fresh
// chain location marked transient. The guard sits on the first edge only.
// For an event-triggered transition the first edge is the receive edge
// (synchronized with the event automaton) and the operations shift one edge
// down the chain; this keeps one role per action, since every
// synchronization vector pairs exactly one machine action with one event
// automaton action.
//
// Per event that is both sent and received, a two-location automaton
// (idle/pending) is added; senders synchronize with its idle->pending edge
// and receivers with pending->idle. Event payload fields become global
// variables written by the send edges and read wherever the receiving
// machine used _event.<field>. A send to an event nobody receives stays a
// plain local edge. Receivers of an event nobody sends produce no edges at
// all.
//
// addDismissEdges completes the picture: wherever a receiver machine sits in
// an original location without an enabled receive for a pending event, a
// guarded self-loop consumes and discards it, so event automata cannot get
// stuck in pending.

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "netsmc/jani.hpp"
#include "netsmc/scxml.hpp"

namespace netsmc {

/// Deterministic fresh-name source: one counter per prefix, collision-checked
/// against a reserved set.
class IdGenerator {
  public:
    std::string fresh(const std::string& prefix) {
        for (;;) {
            std::string name = prefix + std::to_string(counters_[prefix]++);
            if (reserved_.count(name) == 0) {
                return name;
            }
        }
    }

    void reserve(const std::string& name) { reserved_.insert(name); }

  private:
    std::map<std::string, int> counters_;
    std::set<std::string> reserved_;
};

struct EventReceiverBinding {
    std::string machine;
    std::string action;    // machine action of the receive edge
    std::string location;  // original source state
    ExprPtr guard;         // rewritten condition, null for true
};

struct EventInfo {
    std::string name;
    std::vector<std::pair<std::string, Type>> fields;
    std::set<std::string> senderMachines;
    std::set<std::string> receiverMachines;
    // Filled during translation:
    std::vector<std::pair<std::string, std::string>> senderActions;  // (machine, action)
    std::vector<EventReceiverBinding> receiverBindings;
    std::string sanitized;

    bool live() const { return !senderMachines.empty() && !receiverMachines.empty(); }
};

struct EventRegistry {
    std::map<std::string, EventInfo> events;  // keyed (and ordered) by event name

    EventInfo* find(const std::string& name) {
        auto it = events.find(name);
        return it == events.end() ? nullptr : &it->second;
    }
    const EventInfo* find(const std::string& name) const {
        auto it = events.find(name);
        return it == events.end() ? nullptr : &it->second;
    }

    std::size_t liveEventCount() const {
        std::size_t n = 0;
        for (const auto& [_, e] : events) {
            n += e.live() ? 1 : 0;
        }
        return n;
    }
};

namespace translate_detail {

inline std::string sanitizeSymbol(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_';
        out += ok ? c : '_';
    }
    if (out.empty() || (out[0] >= '0' && out[0] <= '9')) {
        out = "e_" + out;
    }
    return out;
}

}  // namespace translate_detail

/// Scans plain machines for senders (Send operations) and receivers
/// (event-triggered transitions) of every event. Payload schemas come from
/// declared schemas first, then from the first sender's parameter types;
/// inferred integer fields get wide bounds.
inline EventRegistry buildEventRegistry(const std::vector<StateMachine>& machines,
                                        const std::vector<EventSchema>& declared = {},
                                        const ConstTable& consts = {}) {
    EventRegistry reg;
    for (const auto& schema : declared) {
        EventInfo& info = reg.events[schema.event];
        info.name = schema.event;
        info.fields = schema.fields;
    }

    auto touch = [&](const std::string& name) -> EventInfo& {
        EventInfo& info = reg.events[name];
        info.name = name;
        return info;
    };

    for (const auto& m : machines) {
        auto scanOps = [&](const std::vector<Operation>& ops) {
            for (const auto& op : ops) {
                if (op.kind != OpKind::Send) {
                    continue;
                }
                EventInfo& info = touch(op.target);
                info.senderMachines.insert(m.name);
                if (info.fields.empty() && !op.params.empty()) {
                    for (const auto& p : op.params) {
                        DiagnosticList scratch;
                        TypeScope scope;
                        scope.var = [&](const std::string& n) -> std::optional<Type> {
                            if (const DataDecl* d = m.findData(n)) {
                                return d->type;
                            }
                            for (const auto& other : machines) {
                                if (const DataDecl* d = other.findData(n); d != nullptr && d->global) {
                                    return d->type;
                                }
                            }
                            auto it = consts.find(n);
                            if (it != consts.end()) {
                                return scalarTypeOfValue(it->second);
                            }
                            return std::nullopt;
                        };
                        scope.eventField = [](const std::string&) -> std::optional<Type> {
                            return Type::integer(-2147483648LL, 2147483647LL);
                        };
                        auto t = typeCheck(p.expr, scope, scratch);
                        Type ft = Type::integer(-2147483648LL, 2147483647LL);
                        if (t && t->kind == TypeKind::Bool) {
                            ft = Type::boolean();
                        } else if (t && t->kind == TypeKind::Real) {
                            ft = Type::real();
                        }
                        info.fields.emplace_back(p.name, ft);
                    }
                }
            }
        };
        for (const auto& s : m.states) {
            scanOps(s.onentry);
            scanOps(s.onexit);
            for (const auto& t : s.transitions) {
                if (t.trigger.kind == Trigger::Kind::Event) {
                    touch(t.trigger.name).receiverMachines.insert(m.name);
                }
                scanOps(t.body);
                for (const auto& b : t.branches) {
                    scanOps(b.body);
                }
            }
        }
    }

    // Stable sanitized symbols, deduplicated in registry order.
    std::set<std::string> taken;
    for (auto& [name, info] : reg.events) {
        std::string san = translate_detail::sanitizeSymbol(name);
        std::string candidate = san;
        int k = 2;
        while (!taken.insert(candidate).second) {
            candidate = san + "_" + std::to_string(k++);
        }
        info.sanitized = candidate;
    }
    return reg;
}

namespace translate_detail {

inline Value evalConstValue(const ExprPtr& e, const ConstTable& consts, const std::string& what) {
    EvalEnv env;
    env.var = [&](const std::string& n) -> Value {
        auto it = consts.find(n);
        if (it == consts.end()) {
            throw EvalError("non-constant reference '" + n + "'");
        }
        return it->second;
    };
    try {
        return evalExpr(e, env);
    } catch (const EvalError& err) {
        throw InputError(e->pos, what + ": " + err.what());
    }
}

inline jani::VarDecl varDeclFromData(const DataDecl& d, const ConstTable& consts) {
    jani::VarDecl v;
    v.name = d.id;
    v.type = d.type;
    if (d.type.kind == TypeKind::IntArray) {
        if (d.init) {
            for (const auto& el : d.init->args) {
                v.arrayInit.push_back(evalConstValue(el, consts, "array initializer").asInt());
            }
        } else {
            std::int64_t fill = (0 >= d.type.lo && 0 <= d.type.hi) ? 0 : d.type.lo;
            v.arrayInit.assign(d.type.size, fill);
        }
        return v;
    }
    if (d.init) {
        Value val = evalConstValue(d.init, consts, "initializer of '" + d.id + "'");
        if (d.type.kind == TypeKind::Real) {
            v.init = Value::real(val.asNumber());
        } else if (d.type.kind == TypeKind::Bool) {
            v.init = Value::boolean(val.asBool());
        } else {
            v.init = Value::integer(val.asInt());
        }
    } else {
        switch (d.type.kind) {
            case TypeKind::Bool: v.init = Value::boolean(false); break;
            case TypeKind::Real: v.init = Value::real(0.0); break;
            default:
                v.init = Value::integer((0 >= d.type.lo && 0 <= d.type.hi) ? 0 : d.type.lo);
                break;
        }
    }
    return v;
}

/// Replaces _event.<f> with the payload global of the given event and
/// inlines nothing else. Returns the original node when unchanged.
inline ExprPtr rewritePayloadRefs(const ExprPtr& e, const EventInfo* event) {
    if (!e) {
        return e;
    }
    if (e->op == ExprOp::EventField) {
        if (event == nullptr) {
            throw InputError(e->pos, "_event." + e->name + " used without a triggering event");
        }
        return Expr::var("ev_" + event->sanitized + "_" + e->name, e->pos);
    }
    bool changed = false;
    std::vector<ExprPtr> args;
    args.reserve(e->args.size());
    for (const auto& a : e->args) {
        ExprPtr r = rewritePayloadRefs(a, event);
        changed = changed || (r != a);
        args.push_back(std::move(r));
    }
    if (!changed) {
        return e;
    }
    auto out = std::make_shared<Expr>(*e);
    out->args = std::move(args);
    return out;
}

}  // namespace translate_detail

struct TranslationOptions {
    std::string modelName = "model";
    ConstTable consts;
};

/// Core translation. Machines must be plain and validated; the registry is
/// extended in place with the generated sender/receiver actions.
inline jani::Network translateMachines(const std::vector<StateMachine>& machines,
                                       EventRegistry& registry,
                                       const TranslationOptions& opts = {}) {
    using translate_detail::rewritePayloadRefs;
    using translate_detail::varDeclFromData;

    jani::Network net;
    net.name = opts.modelName;
    for (const auto& [name, value] : opts.consts) {
        net.constants.push_back(jani::ConstantDecl{name, value});
    }

    // Hoisted globals first (machine order), then event payload globals
    // (registry order).
    for (const auto& m : machines) {
        for (const auto& d : m.data) {
            if (d.global) {
                net.globals.push_back(varDeclFromData(d, opts.consts));
            }
        }
    }
    for (const auto& [name, info] : registry.events) {
        if (info.senderMachines.empty()) {
            continue;  // payload never written
        }
        for (const auto& [fname, ftype] : info.fields) {
            DataDecl d;
            d.id = "ev_" + info.sanitized + "_" + fname;
            d.type = ftype;
            net.globals.push_back(varDeclFromData(d, opts.consts));
        }
    }

    IdGenerator ids;

    for (const auto& m : machines) {
        jani::Automaton aut;
        aut.name = m.name;
        aut.initial = m.initial;
        for (const auto& d : m.data) {
            if (!d.global) {
                aut.locals.push_back(varDeclFromData(d, opts.consts));
            }
        }
        IdGenerator locIds;
        for (const auto& s : m.states) {
            aut.locations.push_back(jani::Location{s.id, false});
            locIds.reserve(s.id);
        }

        auto freshLocation = [&]() {
            std::string name = locIds.fresh("tmp_");
            aut.locations.push_back(jani::Location{name, true});
            return name;
        };
        auto freshAction = [&]() { return ids.fresh(m.name + "_a"); };

        // Assembles the edge for one operation; send edges additionally
        // register the sender action with the registry.
        auto opAssignments = [&](const Operation& op, const EventInfo* trigger,
                                 std::string& sendEvent) {
            std::vector<jani::Assignment> assigns;
            if (op.kind == OpKind::Assign) {
                jani::Assignment a;
                a.var = op.lhsVar;
                a.index = rewritePayloadRefs(op.lhsIndex, trigger);
                a.value = rewritePayloadRefs(op.rhs, trigger);
                assigns.push_back(std::move(a));
                return assigns;
            }
            if (op.kind != OpKind::Send) {
                throw InputError(op.pos, "machine '" + m.name +
                                             "' holds an unlowered operation at translation time");
            }
            const EventInfo* ev = registry.find(op.target);
            if (ev == nullptr) {
                throw InputError(op.pos, "send of unregistered event '" + op.target + "'");
            }
            sendEvent = op.target;
            for (const auto& p : op.params) {
                jani::Assignment a;
                a.var = "ev_" + ev->sanitized + "_" + p.name;
                a.value = rewritePayloadRefs(p.expr, trigger);
                assigns.push_back(std::move(a));
            }
            return assigns;
        };

        // Emits the chain for one (source, ops, target) run. When
        // opsEndAtTarget is false the shape follows the plain layout: one
        // edge per operation plus an empty tail edge into the target. When
        // true (continuations after a receive or a probabilistic split, whose
        // first edge the caller already emitted), the last operation's edge
        // goes to the target directly.
        auto emitOpChain = [&](const std::string& source, const std::vector<Operation>& ops,
                               const std::string& target, const EventInfo* trigger,
                               ExprPtr guardOnFirst, bool opsEndAtTarget) {
            std::string at = source;
            ExprPtr guard = std::move(guardOnFirst);
            for (std::size_t k = 0; k < ops.size(); ++k) {
                bool last = k + 1 == ops.size();
                std::string next = (last && opsEndAtTarget) ? target : freshLocation();
                std::string sendEvent;
                auto assigns = opAssignments(ops[k], trigger, sendEvent);
                jani::Edge e;
                e.source = at;
                e.action = freshAction();
                e.guard = guard;
                guard = nullptr;
                e.destinations.push_back(jani::Destination{Rational(1), next, std::move(assigns)});
                if (!sendEvent.empty()) {
                    registry.find(sendEvent)->senderActions.emplace_back(m.name, e.action);
                }
                aut.edges.push_back(std::move(e));
                at = next;
            }
            if (!opsEndAtTarget || ops.empty()) {
                jani::Edge e;
                e.source = at;
                e.action = freshAction();
                e.guard = guard;
                e.destinations.push_back(jani::Destination{Rational(1), target, {}});
                aut.edges.push_back(std::move(e));
            }
        };

        for (const auto& s : m.states) {
            for (const auto& t : s.transitions) {
                const EventInfo* trigger = nullptr;
                if (t.trigger.kind == Trigger::Kind::Event) {
                    trigger = registry.find(t.trigger.name);
                    if (trigger == nullptr || trigger->senderMachines.empty()) {
                        // Nothing ever sends this event; the transition can
                        // never fire, so it produces no edges.
                        continue;
                    }
                }
                ExprPtr cond = rewritePayloadRefs(t.cond, trigger);

                // Per target, the effective operation list includes the
                // source's exit content and the target's entry content.
                auto combinedOps = [&](const std::vector<Operation>& body,
                                       const std::string& target) {
                    std::vector<Operation> ops = s.onexit;
                    ops.insert(ops.end(), body.begin(), body.end());
                    if (const State* tgt = m.findState(target)) {
                        ops.insert(ops.end(), tgt->onentry.begin(), tgt->onentry.end());
                    }
                    return ops;
                };

                if (!t.probabilistic()) {
                    std::vector<Operation> ops = combinedOps(t.body, t.target);
                    if (trigger != nullptr) {
                        // Receive edge first; operations shift one edge down.
                        std::string entry = ops.empty() ? t.target : freshLocation();
                        jani::Edge recv;
                        recv.source = s.id;
                        recv.action = freshAction();
                        recv.guard = cond;
                        recv.destinations.push_back(jani::Destination{Rational(1), entry, {}});
                        registry.find(t.trigger.name)
                            ->receiverBindings.push_back(
                                EventReceiverBinding{m.name, recv.action, s.id, cond});
                        aut.edges.push_back(std::move(recv));
                        if (!ops.empty()) {
                            emitOpChain(entry, ops, t.target, trigger, nullptr, true);
                        }
                    } else {
                        emitOpChain(s.id, ops, t.target, trigger, cond, false);
                    }
                    continue;
                }

                // Probabilistic: the first edge carries the split (and the
                // receive role when triggered); branch bodies chain after it.
                jani::Edge split;
                split.source = s.id;
                split.action = freshAction();
                split.guard = cond;
                if (trigger != nullptr) {
                    registry.find(t.trigger.name)
                        ->receiverBindings.push_back(
                            EventReceiverBinding{m.name, split.action, s.id, cond});
                }
                struct PendingChain {
                    std::string entry;
                    std::vector<Operation> ops;
                    std::string target;
                };
                std::vector<PendingChain> chains;
                for (const auto& b : t.branches) {
                    std::vector<Operation> ops = combinedOps(b.body, b.target);
                    std::string entry = ops.empty() ? b.target : freshLocation();
                    split.destinations.push_back(jani::Destination{b.weight, entry, {}});
                    if (!ops.empty()) {
                        chains.push_back(PendingChain{entry, std::move(ops), b.target});
                    }
                }
                aut.edges.push_back(std::move(split));
                for (auto& c : chains) {
                    emitOpChain(c.entry, c.ops, c.target, trigger, nullptr, true);
                }
            }
        }
        net.automata.push_back(std::move(aut));
    }

    // Event automata and synchronization vectors.
    std::size_t machineCount = net.automata.size();
    std::map<std::string, std::size_t> automatonIndex;
    for (std::size_t i = 0; i < machineCount; ++i) {
        automatonIndex[net.automata[i].name] = i;
    }

    std::vector<jani::SyncVector> syncs;
    for (auto& [name, info] : registry.events) {
        if (!info.live()) {
            continue;
        }
        jani::Automaton ev;
        ev.name = "ev_" + info.sanitized;
        ev.locations = {{"idle", false}, {"pending", false}};
        ev.initial = "idle";
        std::string sendAction = info.sanitized + "_send";
        std::string recvAction = info.sanitized + "_recv";
        ev.edges.push_back(jani::Edge{"idle", sendAction, nullptr,
                                      {jani::Destination{Rational(1), "pending", {}}}});
        ev.edges.push_back(jani::Edge{"pending", recvAction, nullptr,
                                      {jani::Destination{Rational(1), "idle", {}}}});
        std::size_t evIndex = net.automata.size();
        net.automata.push_back(std::move(ev));

        auto makeSync = [&](const std::string& machine, const std::string& machineAction,
                            const std::string& evAction, const std::string& label) {
            jani::SyncVector sv;
            sv.participants.assign(net.automata.size(), std::nullopt);
            sv.participants[automatonIndex.at(machine)] = machineAction;
            sv.participants[evIndex] = evAction;
            sv.result = label;
            syncs.push_back(std::move(sv));
        };
        for (const auto& [machine, action] : info.senderActions) {
            makeSync(machine, action, sendAction, ids.fresh(info.sanitized + "_send_"));
        }
        for (const auto& binding : info.receiverBindings) {
            makeSync(binding.machine, binding.action, recvAction,
                     ids.fresh(info.sanitized + "_recv_"));
        }
    }

    // Sync vectors were created while automata were still being appended;
    // normalize their arity to the final automaton count.
    for (auto& sv : syncs) {
        sv.participants.resize(net.automata.size(), std::nullopt);
    }
    net.syncs = std::move(syncs);

    jani::rebuildActionLists(net);
    return net;
}

/// Adds the dismiss self-loops: for every live event and every receiver
/// machine, each original location either has a receive whose guard may be
/// false, or no receive at all; a self-loop synchronized with the event
/// automaton's pending->idle edge consumes the event there, guarded by the
/// negated disjunction of the location's receive guards. Locations whose
/// receive guards fold to true get no edge.
inline void addDismissEdges(jani::Network& net, EventRegistry& registry) {
    std::map<std::string, std::size_t> automatonIndex;
    for (std::size_t i = 0; i < net.automata.size(); ++i) {
        automatonIndex[net.automata[i].name] = i;
    }
    IdGenerator ids;

    for (auto& [name, info] : registry.events) {
        if (!info.live()) {
            continue;
        }
        std::string evName = "ev_" + info.sanitized;
        auto evIt = automatonIndex.find(evName);
        if (evIt == automatonIndex.end()) {
            continue;
        }
        std::string recvAction = info.sanitized + "_recv";

        for (const auto& machineName : info.receiverMachines) {
            std::size_t mi = automatonIndex.at(machineName);
            jani::Automaton& aut = net.automata[mi];

            // Receive guards per original location.
            std::map<std::string, std::vector<ExprPtr>> guardsAt;
            std::map<std::string, bool> hasUnguarded;
            for (const auto& b : info.receiverBindings) {
                if (b.machine != machineName) {
                    continue;
                }
                if (!b.guard || b.guard->isTrueLiteral()) {
                    hasUnguarded[b.location] = true;
                } else {
                    guardsAt[b.location].push_back(b.guard);
                }
            }

            for (const auto& loc : aut.locations) {
                if (loc.transient) {
                    continue;  // chains are mid-transition; events wait there
                }
                if (hasUnguarded.count(loc.name) > 0) {
                    continue;  // always receivable, nothing to dismiss
                }
                ExprPtr guard;
                auto it = guardsAt.find(loc.name);
                if (it != guardsAt.end()) {
                    ExprPtr disj = it->second.front();
                    for (std::size_t k = 1; k < it->second.size(); ++k) {
                        disj = Expr::binary(ExprOp::Or, disj, it->second[k]);
                    }
                    if (auto v = constFold(disj); v && v->asBool()) {
                        continue;
                    }
                    guard = Expr::unary(ExprOp::Not, disj);
                }
                jani::Edge e;
                e.source = loc.name;
                e.action = ids.fresh(machineName + "_dismiss_");
                e.guard = guard;
                e.destinations.push_back(jani::Destination{Rational(1), loc.name, {}});
                aut.edges.push_back(e);

                jani::SyncVector sv;
                sv.participants.assign(net.automata.size(), std::nullopt);
                sv.participants[mi] = e.action;
                sv.participants[evIt->second] = recvAction;
                sv.result = ids.fresh(info.sanitized + "_dismiss_");
                net.syncs.push_back(std::move(sv));
            }
        }
    }
    jani::rebuildActionLists(net);
}

/// Property source text as written in a manifest.
struct PropertySpec {
    std::string name;
    std::string kind = "until";  // "until" or "eventually"
    std::string lhs;             // empty for eventually
    std::string rhs;
    std::int64_t stepBound = 10000;
};

/// Parses and type-checks a property over the network's global variables and
/// constants.
inline jani::Property compileProperty(const PropertySpec& spec, const jani::Network& net) {
    ExprPtr lhs = spec.kind == "eventually" || spec.lhs.empty() ? Expr::boolean(true)
                                                                : parseExpr(spec.lhs);
    ExprPtr rhs = parseExpr(spec.rhs);

    DiagnosticList diags;
    TypeScope scope;
    scope.var = [&](const std::string& n) -> std::optional<Type> {
        for (const auto& g : net.globals) {
            if (g.name == n) {
                return g.type;
            }
        }
        for (const auto& c : net.constants) {
            if (c.name == n) {
                return scalarTypeOfValue(c.value);
            }
        }
        return std::nullopt;
    };
    for (const ExprPtr& side : {lhs, rhs}) {
        auto t = typeCheck(side, scope, diags);
        if (t && t->kind != TypeKind::Bool) {
            diags.error(side->pos, "property formula sides must be boolean");
        }
    }
    if (diags.hasErrors()) {
        throw InputError("property '" + spec.name + "' is invalid:\n" + diags.str());
    }
    return jani::Property{spec.name, lhs, rhs, spec.stepBound};
}

}  // namespace netsmc
