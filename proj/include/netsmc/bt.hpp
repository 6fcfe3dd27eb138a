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

// Behavior-tree runtime: parses BehaviorTree.CPP-style XML, instantiates one
// state machine per node, and generates the tick driver and the blackboard
// manager.
//
// The tick protocol is a synchronous event handshake per node: the parent
// sends `bt_<id>.tick`, the node eventually replies `bt_<id>.response` with a
// status payload (BT_SUCCESS / BT_FAILURE / BT_RUNNING). Control nodes tick
// one child at a time, depth first:
//   Sequence         resumes from the running child on the next tick,
//   ReactiveSequence restarts from the first child on every tick,
//   Fallback         tries children in order until one does not fail,
//   Inverter         swaps SUCCESS and FAILURE.
// Leaves are user-supplied machines; their bt:trigger / bt:respond / bb-port
// placeholders are bound to the instance id at assembly time.
//
// Blackboard keys live in a manager machine; reads and writes are
// request/acknowledge event pairs per (node, key), so each access is a
// complete round trip before the node continues.

#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "netsmc/lowering.hpp"
#include "netsmc/scxml.hpp"

namespace netsmc {

struct BTNode {
    enum class Kind { Sequence, ReactiveSequence, Fallback, Inverter, ActionLeaf, ConditionLeaf };
    Kind kind = Kind::ActionLeaf;
    std::string id;          // unique instance id
    std::string pluginName;  // leaves: key into the plugin table
    std::vector<std::size_t> children;
    std::map<std::string, std::string> ports;  // port name -> blackboard key
    SourcePos pos;

    bool isLeaf() const { return kind == Kind::ActionLeaf || kind == Kind::ConditionLeaf; }
};

struct BTree {
    std::size_t root = 0;
    std::vector<BTNode> nodes;

    const BTNode& node(std::size_t i) const { return nodes[i]; }
};

struct TickConfig {
    Rational rateHz{10};
    enum class Policy { TickWhileRunning, TickForever, TickOnce };
    Policy policy = Policy::TickWhileRunning;

    static Policy parsePolicy(const std::string& s) {
        if (s == "tick-while-running") {
            return Policy::TickWhileRunning;
        }
        if (s == "tick-forever") {
            return Policy::TickForever;
        }
        if (s == "tick-once") {
            return Policy::TickOnce;
        }
        throw InputError("unknown tick policy '" + s + "'");
    }
};

inline std::string btTickEvent(const std::string& id) { return "bt_" + id + ".tick"; }
inline std::string btResponseEvent(const std::string& id) { return "bt_" + id + ".response"; }
inline std::string btMachineName(const std::string& id) { return "bt_" + id; }

// ---------------------------------------------------------------------------
// Parsing

namespace bt_detail {

inline BTNode::Kind controlKind(const std::string& tag, bool& ok) {
    ok = true;
    if (tag == "Sequence") return BTNode::Kind::Sequence;
    if (tag == "ReactiveSequence") return BTNode::Kind::ReactiveSequence;
    if (tag == "Fallback") return BTNode::Kind::Fallback;
    if (tag == "Inverter") return BTNode::Kind::Inverter;
    ok = false;
    return BTNode::Kind::ActionLeaf;
}

}  // namespace bt_detail

/// Parses the BehaviorTree.CPP XML layout (a <root> element holding one
/// <BehaviorTree>). Leaves must name a known plugin; attributes other than
/// ID/name become port bindings, accepting both `{key}` and plain `key`.
inline BTree parseBtXml(std::string_view text, const std::string& filename,
                        const std::set<std::string>& pluginNames) {
    auto doc = xml::parse(text, filename);
    if (doc->name != "root") {
        throw InputError(doc->pos, "expected a <root> element in behavior tree XML");
    }
    const xml::Element* treeElem = nullptr;
    std::string wanted = doc->attr("main_tree_to_execute");
    for (const auto& child : doc->children) {
        if (child->name != "BehaviorTree") {
            throw InputError(child->pos, "unexpected <" + child->name + "> under <root>");
        }
        if (wanted.empty() || child->attr("ID") == wanted) {
            treeElem = child.get();
            break;
        }
    }
    if (treeElem == nullptr) {
        throw InputError(doc->pos, "no matching <BehaviorTree> element");
    }
    if (treeElem->children.size() != 1) {
        throw InputError(treeElem->pos, "<BehaviorTree> needs exactly one root node");
    }

    BTree tree;
    std::set<std::string> usedIds;
    auto uniqueId = [&](std::string base) {
        std::string id = base;
        int k = 2;
        while (!usedIds.insert(id).second) {
            id = base + "_" + std::to_string(k++);
        }
        return id;
    };
    std::map<std::string, int> kindCounters;

    auto build = [&](const xml::Element& e, auto&& self) -> std::size_t {
        BTNode node;
        node.pos = e.pos;
        bool isControl = false;
        node.kind = bt_detail::controlKind(e.name, isControl);
        if (isControl) {
            std::string base = e.attr("name");
            if (base.empty()) {
                std::string tag = e.name;
                for (auto& c : tag) {
                    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                }
                base = tag + "_" + std::to_string(kindCounters[e.name]++);
            }
            node.id = uniqueId(base);
            std::size_t index = tree.nodes.size();
            tree.nodes.push_back(node);
            for (const auto& child : e.children) {
                // Building the child may grow tree.nodes; take the index
                // before touching the parent entry again.
                std::size_t childIndex = self(*child, self);
                tree.nodes[index].children.push_back(childIndex);
            }
            if (tree.nodes[index].children.empty()) {
                throw InputError(e.pos, "<" + e.name + "> needs at least one child");
            }
            if (node.kind == BTNode::Kind::Inverter && tree.nodes[index].children.size() != 1) {
                throw InputError(e.pos, "<Inverter> needs exactly one child");
            }
            return index;
        }

        // Leaf: <Action ID="X"/>, <Condition ID="X"/> or a bare <X/>.
        std::string plugin;
        if (e.name == "Action" || e.name == "Condition") {
            plugin = e.attr("ID");
            if (plugin.empty()) {
                throw InputError(e.pos, "<" + e.name + "> needs an ID attribute");
            }
            node.kind = e.name == "Condition" ? BTNode::Kind::ConditionLeaf
                                              : BTNode::Kind::ActionLeaf;
        } else {
            plugin = e.name;
            node.kind = BTNode::Kind::ActionLeaf;
        }
        if (pluginNames.count(plugin) == 0) {
            throw InputError(e.pos, "unknown node <" + e.name + ">: no plugin named '" + plugin +
                                        "' (known: " + std::to_string(pluginNames.size()) +
                                        " plugins)");
        }
        if (!e.children.empty()) {
            throw InputError(e.pos, "leaf node '" + plugin + "' cannot have children");
        }
        node.pluginName = plugin;
        node.id = uniqueId(plugin);
        for (const auto& attr : e.attrs) {
            if (attr.name == "ID" || attr.name == "name") {
                continue;
            }
            std::string key = attr.value;
            if (key.size() >= 2 && key.front() == '{' && key.back() == '}') {
                key = key.substr(1, key.size() - 2);
            }
            node.ports[attr.name] = key;
        }
        std::size_t index = tree.nodes.size();
        tree.nodes.push_back(std::move(node));
        return index;
    };

    tree.root = build(*treeElem->children[0], build);

    // The nesting structure cannot cycle, but a programmatically assembled
    // tree can; validate anyway.
    std::vector<int> seen(tree.nodes.size(), 0);
    auto dfs = [&](std::size_t n, auto&& self) -> void {
        if (seen[n] == 1) {
            throw InputError(tree.nodes[n].pos, "behavior tree contains a cycle at '" +
                                                    tree.nodes[n].id + "'");
        }
        if (seen[n] == 2) {
            throw InputError(tree.nodes[n].pos,
                             "node '" + tree.nodes[n].id + "' is reachable twice");
        }
        seen[n] = 1;
        for (std::size_t c : tree.nodes[n].children) {
            self(c, self);
        }
        seen[n] = 2;
    };
    dfs(tree.root, dfs);
    return tree;
}

// ---------------------------------------------------------------------------
// Node machine generation

namespace bt_detail {

inline Operation respond(const std::string& id, const std::string& statusConst) {
    return Operation::send(btResponseEvent(id),
                           {SendParam{"status", parseExpr(statusConst), {}}});
}

inline Transition onTick(const std::string& id, const std::string& target) {
    Transition t;
    t.trigger = Trigger::event(btTickEvent(id));
    t.target = target;
    return t;
}

inline Transition onResponse(const std::string& childId, const std::string& statusCond,
                             const std::string& target) {
    Transition t;
    t.trigger = Trigger::event(btResponseEvent(childId));
    t.cond = parseExpr("_event.status == " + statusCond);
    t.target = target;
    return t;
}

}  // namespace bt_detail

/// Builds the machine of one standard control node. Children are addressed
/// by their instance ids.
inline StateMachine instantiateControlNode(const BTNode& node,
                                           const std::vector<std::string>& childIds) {
    using bt_detail::onResponse;
    using bt_detail::onTick;
    using bt_detail::respond;

    StateMachine m;
    m.name = btMachineName(node.id);
    m.initial = "idle";
    const std::size_t n = childIds.size();
    const std::string self = node.id;

    auto await = [&](std::size_t k) { return "await_" + std::to_string(k + 1); };

    State idle;
    idle.id = "idle";

    switch (node.kind) {
        case BTNode::Kind::Sequence:
        case BTNode::Kind::Fallback: {
            // Memory nodes: resume from the child that was last running.
            bool isSeq = node.kind == BTNode::Kind::Sequence;
            DataDecl resume;
            resume.id = "resume";
            resume.type = Type::integer(1, static_cast<std::int64_t>(n));
            resume.init = Expr::integer(1);
            m.data.push_back(std::move(resume));

            for (std::size_t k = 0; k < n; ++k) {
                Transition t = onTick(self, await(k));
                t.cond = parseExpr("resume == " + std::to_string(k + 1));
                t.body.push_back(Operation::send(btTickEvent(childIds[k])));
                idle.transitions.push_back(std::move(t));
            }
            m.states.push_back(std::move(idle));

            // `advance` is the status that moves on to the next child,
            // `cut` the one that ends the whole node immediately.
            std::string advance = isSeq ? "BT_SUCCESS" : "BT_FAILURE";
            std::string cut = isSeq ? "BT_FAILURE" : "BT_SUCCESS";
            for (std::size_t k = 0; k < n; ++k) {
                State st;
                st.id = await(k);
                if (k + 1 < n) {
                    Transition next = onResponse(childIds[k], advance, await(k + 1));
                    next.body.push_back(
                        Operation::assign("resume", Expr::integer(static_cast<std::int64_t>(k + 2))));
                    next.body.push_back(Operation::send(btTickEvent(childIds[k + 1])));
                    st.transitions.push_back(std::move(next));
                } else {
                    Transition done = onResponse(childIds[k], advance, "idle");
                    done.body.push_back(Operation::assign("resume", Expr::integer(1)));
                    done.body.push_back(respond(self, advance));
                    st.transitions.push_back(std::move(done));
                }
                Transition stop = onResponse(childIds[k], cut, "idle");
                stop.body.push_back(Operation::assign("resume", Expr::integer(1)));
                stop.body.push_back(respond(self, cut));
                st.transitions.push_back(std::move(stop));

                Transition running = onResponse(childIds[k], "BT_RUNNING", "idle");
                running.body.push_back(
                    Operation::assign("resume", Expr::integer(static_cast<std::int64_t>(k + 1))));
                running.body.push_back(respond(self, "BT_RUNNING"));
                st.transitions.push_back(std::move(running));
                m.states.push_back(std::move(st));
            }
            break;
        }
        case BTNode::Kind::ReactiveSequence: {
            Transition t = onTick(self, await(0));
            t.body.push_back(Operation::send(btTickEvent(childIds[0])));
            idle.transitions.push_back(std::move(t));
            m.states.push_back(std::move(idle));

            for (std::size_t k = 0; k < n; ++k) {
                State st;
                st.id = await(k);
                if (k + 1 < n) {
                    Transition next = onResponse(childIds[k], "BT_SUCCESS", await(k + 1));
                    next.body.push_back(Operation::send(btTickEvent(childIds[k + 1])));
                    st.transitions.push_back(std::move(next));
                } else {
                    Transition done = onResponse(childIds[k], "BT_SUCCESS", "idle");
                    done.body.push_back(respond(self, "BT_SUCCESS"));
                    st.transitions.push_back(std::move(done));
                }
                for (const char* status : {"BT_FAILURE", "BT_RUNNING"}) {
                    Transition stop = onResponse(childIds[k], status, "idle");
                    stop.body.push_back(respond(self, status));
                    st.transitions.push_back(std::move(stop));
                }
                m.states.push_back(std::move(st));
            }
            break;
        }
        case BTNode::Kind::Inverter: {
            Transition t = onTick(self, "await_1");
            t.body.push_back(Operation::send(btTickEvent(childIds[0])));
            idle.transitions.push_back(std::move(t));
            m.states.push_back(std::move(idle));

            State st;
            st.id = "await_1";
            struct Map {
                const char* in;
                const char* out;
            };
            for (const Map& s : {Map{"BT_SUCCESS", "BT_FAILURE"}, Map{"BT_FAILURE", "BT_SUCCESS"},
                                 Map{"BT_RUNNING", "BT_RUNNING"}}) {
                Transition tr = onResponse(childIds[0], s.in, "idle");
                tr.body.push_back(respond(self, s.out));
                st.transitions.push_back(std::move(tr));
            }
            m.states.push_back(std::move(st));
            break;
        }
        default:
            throw InputError(node.pos, "node '" + node.id + "' is not a standard control node");
    }
    return m;
}

/// Tick driver: on each timer event it ticks the root (policy permitting) and
/// records the root's status in the global `bt_status`.
inline StateMachine buildTickDriver(const TickConfig& cfg, const std::string& rootId) {
    StateMachine m;
    m.name = "bt_driver";
    m.initial = "active";

    DataDecl status;
    status.id = "bt_status";
    status.type = Type::integer(0, 3);
    status.init = Expr::integer(0);
    status.global = true;
    m.data.push_back(std::move(status));

    RosInterfaceDecl timer;
    timer.kind = RosInterfaceDecl::Kind::Timer;
    timer.name = "tick";
    timer.rateHz = cfg.rateHz;
    m.interfaces.push_back(std::move(timer));

    State active;
    active.id = "active";
    Transition kick;
    kick.trigger = Trigger{Trigger::Kind::RosTimer, "tick"};
    kick.target = "waiting";
    kick.body.push_back(Operation::send(btTickEvent(rootId)));
    active.transitions.push_back(std::move(kick));
    m.states.push_back(std::move(active));

    State waiting;
    waiting.id = "waiting";
    auto record = [&]() {
        return Operation::assign("bt_status", parseExpr("_event.status"));
    };
    switch (cfg.policy) {
        case TickConfig::Policy::TickWhileRunning: {
            Transition again;
            again.trigger = Trigger::event(btResponseEvent(rootId));
            again.cond = parseExpr("_event.status == BT_RUNNING");
            again.target = "active";
            waiting.transitions.push_back(std::move(again));

            Transition stop;
            stop.trigger = Trigger::event(btResponseEvent(rootId));
            stop.cond = parseExpr("_event.status != BT_RUNNING");
            stop.target = "halted";
            stop.body.push_back(record());
            waiting.transitions.push_back(std::move(stop));
            break;
        }
        case TickConfig::Policy::TickForever: {
            Transition loop;
            loop.trigger = Trigger::event(btResponseEvent(rootId));
            loop.target = "active";
            loop.body.push_back(record());
            waiting.transitions.push_back(std::move(loop));
            break;
        }
        case TickConfig::Policy::TickOnce: {
            Transition once;
            once.trigger = Trigger::event(btResponseEvent(rootId));
            once.target = "halted";
            once.body.push_back(record());
            waiting.transitions.push_back(std::move(once));
            break;
        }
    }
    m.states.push_back(std::move(waiting));

    State halted;
    halted.id = "halted";
    m.states.push_back(std::move(halted));
    return m;
}

// ---------------------------------------------------------------------------
// Blackboard

inline std::string bbGetEvent(const std::string& key, const std::string& machine) {
    return "bt_bb.get." + key + "." + machine;
}
inline std::string bbGetReplyEvent(const std::string& key, const std::string& machine) {
    return "bt_bb.get_reply." + key + "." + machine;
}
inline std::string bbSetEvent(const std::string& key, const std::string& machine) {
    return "bt_bb.set." + key + "." + machine;
}
inline std::string bbSetAckEvent(const std::string& key, const std::string& machine) {
    return "bt_bb.set_ack." + key + "." + machine;
}

struct BlackboardBuild {
    bool managerNeeded = false;
    StateMachine manager;
    std::vector<EventSchema> schemas;
};

/// Rewrites bb-get/bb-set operations (whose targets must already be key
/// names) into request/acknowledge round trips against a generated manager
/// machine. Key values are hoisted globals named bb_<key> so properties and
/// traces can observe them.
inline BlackboardBuild lowerBlackboard(const std::vector<DataDecl>& keys,
                                       std::vector<StateMachine>& machines,
                                       DiagnosticList& diags) {
    BlackboardBuild out;
    std::map<std::string, const DataDecl*> keyTable;
    for (const auto& k : keys) {
        keyTable[k.id] = &k;
    }

    // Accesses per machine, validated against the declared keys.
    struct Access {
        std::string machine;
        std::string key;
        bool write;
    };
    std::vector<Access> accesses;
    std::set<std::pair<std::string, std::string>> seenGet;
    std::set<std::pair<std::string, std::string>> seenSet;

    for (auto& m : machines) {
        bool any = false;
        lowering_detail::forEachOperation(m, [&](Operation& op) {
            if (op.kind != OpKind::BtBbGet && op.kind != OpKind::BtBbSet) {
                return;
            }
            any = true;
            if (keyTable.count(op.target) == 0) {
                diags.error(op.pos, "blackboard access to undeclared key '" + op.target + "'");
                return;
            }
            bool write = op.kind == OpKind::BtBbSet;
            auto& seen = write ? seenSet : seenGet;
            if (seen.insert({m.name, op.target}).second) {
                accesses.push_back(Access{m.name, op.target, write});
            }
        });
        if (!any || diags.hasErrors()) {
            continue;
        }
        splitBlockingOps(
            m,
            [&](const Operation& op) {
                BlockingLowering low;
                if (op.kind == OpKind::BtBbGet) {
                    low.request = Operation::send(bbGetEvent(op.target, m.name), {}, op.pos);
                    low.replyEvent = bbGetReplyEvent(op.target, m.name);
                } else {
                    low.request = Operation::send(
                        bbSetEvent(op.target, m.name),
                        {SendParam{"value", op.rhs, op.pos}}, op.pos);
                    low.replyEvent = bbSetAckEvent(op.target, m.name);
                }
                return low;
            },
            diags);
    }
    if (diags.hasErrors()) {
        return out;
    }

    if (keys.empty()) {
        return out;  // nothing to manage
    }

    StateMachine manager;
    manager.name = "bt_bb";
    manager.initial = "idle";
    State idle;
    idle.id = "idle";

    for (const auto& k : keys) {
        DataDecl store;
        store.id = "bb_" + k.id;
        store.type = k.type;
        store.init = k.init;
        store.global = true;
        manager.data.push_back(std::move(store));
    }

    for (const auto& a : accesses) {
        const DataDecl* key = keyTable.at(a.key);
        if (a.write) {
            Transition t;
            t.trigger = Trigger::event(bbSetEvent(a.key, a.machine));
            t.target = "idle";
            t.body.push_back(Operation::assign("bb_" + a.key, parseExpr("_event.value")));
            t.body.push_back(Operation::send(bbSetAckEvent(a.key, a.machine)));
            idle.transitions.push_back(std::move(t));
            out.schemas.push_back(EventSchema{bbSetEvent(a.key, a.machine),
                                              {{"value", key->type}}});
            out.schemas.push_back(EventSchema{bbSetAckEvent(a.key, a.machine), {}});
        } else {
            Transition t;
            t.trigger = Trigger::event(bbGetEvent(a.key, a.machine));
            t.target = "idle";
            t.body.push_back(Operation::send(
                bbGetReplyEvent(a.key, a.machine),
                {SendParam{"value", Expr::var("bb_" + a.key), {}}}));
            idle.transitions.push_back(std::move(t));
            out.schemas.push_back(EventSchema{bbGetEvent(a.key, a.machine), {}});
            out.schemas.push_back(EventSchema{bbGetReplyEvent(a.key, a.machine),
                                              {{"value", key->type}}});
        }
    }

    manager.states.push_back(std::move(idle));
    out.manager = std::move(manager);
    out.managerNeeded = true;
    return out;
}

// ---------------------------------------------------------------------------
// Assembly

struct BtBuild {
    std::vector<StateMachine> machines;  // node machines, driver, manager
    std::vector<EventSchema> schemas;
    std::string rootId;
};

/// Instantiates the whole tree: control-node machines, leaf plugins bound to
/// their instance ids and ports, the tick driver, and the blackboard manager.
inline BtBuild buildBtSystem(const BTree& tree, const TickConfig& cfg,
                             const std::map<std::string, StateMachine>& plugins,
                             const std::vector<DataDecl>& blackboard, DiagnosticList& diags) {
    BtBuild out;
    out.rootId = tree.nodes[tree.root].id;

    for (const auto& node : tree.nodes) {
        // Tick protocol schemas for every node.
        out.schemas.push_back(EventSchema{btTickEvent(node.id), {}});
        out.schemas.push_back(
            EventSchema{btResponseEvent(node.id), {{"status", Type::integer(1, 3)}}});

        if (!node.isLeaf()) {
            std::vector<std::string> childIds;
            for (std::size_t c : node.children) {
                childIds.push_back(tree.nodes[c].id);
            }
            out.machines.push_back(instantiateControlNode(node, childIds));
            continue;
        }

        auto it = plugins.find(node.pluginName);
        if (it == plugins.end()) {
            diags.error(node.pos, "leaf '" + node.id + "' names plugin '" + node.pluginName +
                                      "' but no such plugin machine was supplied");
            continue;
        }
        StateMachine leaf = it->second;  // instance copy
        leaf.name = btMachineName(node.id);
        lowering_detail::forEachTrigger(leaf, [&](Trigger& t) {
            if (t.kind == Trigger::Kind::BtTick) {
                t = Trigger::event(btTickEvent(node.id));
            }
        });
        lowering_detail::forEachOperation(leaf, [&](Operation& op) {
            if (op.kind == OpKind::BtRespond) {
                op.kind = OpKind::Send;
                op.target = btResponseEvent(node.id);
                op.params.push_back(SendParam{"status", parseExpr("BT_" + op.status), op.pos});
                op.status.clear();
            } else if (op.kind == OpKind::BtBbGet || op.kind == OpKind::BtBbSet) {
                auto port = node.ports.find(op.target);
                if (port == node.ports.end()) {
                    diags.error(op.pos, "plugin '" + node.pluginName + "' uses port '" + op.target +
                                            "' which leaf '" + node.id + "' does not bind");
                    return;
                }
                op.target = port->second;
            }
        });
        out.machines.push_back(std::move(leaf));
    }
    if (diags.hasErrors()) {
        return out;
    }

    out.machines.push_back(buildTickDriver(cfg, out.rootId));

    BlackboardBuild bb = lowerBlackboard(blackboard, out.machines, diags);
    for (auto& s : bb.schemas) {
        out.schemas.push_back(std::move(s));
    }
    if (bb.managerNeeded) {
        out.machines.push_back(std::move(bb.manager));
    }
    return out;
}

}  // namespace netsmc
