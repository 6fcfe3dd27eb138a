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

// Execution core shared by the statistical checker and the exhaustive
// oracle: a network compiled into flat tables (variable cells, per-location
// edge lists, resolved sync vectors) plus move enumeration and firing.
//
// Semantics of one step:
//  1. A move is either a single non-synchronized edge, or one sync vector
//     together with an enabled edge per participant.
//  2. If any automaton sits in a transient (generated intermediate) location,
//     only moves involving such an automaton are eligible; if none of those
//     is enabled, all enabled moves are. This drains transition chains before
//     unrelated automata interleave.
//  3. The scheduler picks uniformly at random among eligible moves; each
//     participating edge then samples a destination by its probabilities.
//  4. All assignment right-hand sides of the fired edges read the pre-state;
//     writes apply afterwards. Writing a bounded integer outside its range,
//     indexing outside an array, or dividing by zero aborts the run as a
//     model error.

#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "netsmc/jani.hpp"

namespace netsmc::engine {

/// Deterministic 64-bit stream; the per-trace generators are derived from
/// (seed, trace index) so results do not depend on how work is distributed
/// over threads.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift; bias is negligible for the small n used here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    static SplitMix64 forTrace(std::uint64_t seed, std::uint64_t traceIndex) {
        SplitMix64 mixer(seed ^ (0xA0761D6478BD642FULL * (traceIndex + 1)));
        std::uint64_t s = mixer.next();
        return SplitMix64(s);
    }
};

/// Raised when a run hits a model-level fault (range violation, bad index,
/// division by zero at runtime).
class ModelRuntimeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct StateVec {
    std::vector<std::uint32_t> locs;
    std::vector<std::int64_t> ints;
    std::vector<double> reals;

    bool operator==(const StateVec& o) const {
        return locs == o.locs && ints == o.ints && reals == o.reals;
    }
};

struct StateVecHash {
    std::size_t operator()(const StateVec& s) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 0x100000001b3ULL;
            h ^= h >> 29;
        };
        for (auto v : s.locs) {
            mix(v);
        }
        for (auto v : s.ints) {
            mix(static_cast<std::uint64_t>(v));
        }
        for (auto v : s.reals) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(v));
            std::memcpy(&bits, &v, sizeof(bits));
            mix(bits);
        }
        return static_cast<std::size_t>(h);
    }
};

// ---------------------------------------------------------------------------
// Compiled expressions

struct CExpr {
    ExprOp op = ExprOp::Lit;
    Value lit;
    // Var / Index base:
    std::size_t slot = 0;
    TypeKind varKind = TypeKind::Int;
    bool realCell = false;
    std::size_t arraySize = 0;  // Index: length of the indexed array
    std::vector<CExpr> args;
};

inline Value evalC(const CExpr& e, const StateVec& st) {
    switch (e.op) {
        case ExprOp::Lit: return e.lit;
        case ExprOp::Var:
            if (e.realCell) {
                return Value::real(st.reals[e.slot]);
            }
            return e.varKind == TypeKind::Bool ? Value::boolean(st.ints[e.slot] != 0)
                                               : Value::integer(st.ints[e.slot]);
        case ExprOp::Index: {
            Value idx = evalC(e.args[0], st);
            if (idx.i < 0 || static_cast<std::size_t>(idx.i) >= e.arraySize) {
                throw ModelRuntimeError("array index " + std::to_string(idx.i) +
                                        " outside array of size " + std::to_string(e.arraySize));
            }
            return Value::integer(st.ints[e.slot + static_cast<std::size_t>(idx.i)]);
        }
        case ExprOp::Not: return Value::boolean(!evalC(e.args[0], st).asBool());
        case ExprOp::Neg: {
            Value v = evalC(e.args[0], st);
            return v.kind == TypeKind::Real ? Value::real(-v.d) : Value::integer(-v.i);
        }
        case ExprOp::And:
            if (!evalC(e.args[0], st).asBool()) {
                return Value::boolean(false);
            }
            return Value::boolean(evalC(e.args[1], st).asBool());
        case ExprOp::Or:
            if (evalC(e.args[0], st).asBool()) {
                return Value::boolean(true);
            }
            return Value::boolean(evalC(e.args[1], st).asBool());
        default: break;
    }
    Value a = evalC(e.args[0], st);
    Value b = evalC(e.args[1], st);
    bool anyReal = a.kind == TypeKind::Real || b.kind == TypeKind::Real;
    switch (e.op) {
        case ExprOp::Add:
            return anyReal ? Value::real(a.asNumber() + b.asNumber()) : Value::integer(a.i + b.i);
        case ExprOp::Sub:
            return anyReal ? Value::real(a.asNumber() - b.asNumber()) : Value::integer(a.i - b.i);
        case ExprOp::Mul:
            return anyReal ? Value::real(a.asNumber() * b.asNumber()) : Value::integer(a.i * b.i);
        case ExprOp::Div:
            if (anyReal) {
                if (b.asNumber() == 0.0) {
                    throw ModelRuntimeError("division by zero");
                }
                return Value::real(a.asNumber() / b.asNumber());
            }
            if (b.i == 0) {
                throw ModelRuntimeError("division by zero");
            }
            return Value::integer(a.i / b.i);
        case ExprOp::Mod:
            if (b.i == 0) {
                throw ModelRuntimeError("modulo by zero");
            }
            return Value::integer(a.i % b.i);
        case ExprOp::Lt: return Value::boolean(a.asNumber() < b.asNumber());
        case ExprOp::Le: return Value::boolean(a.asNumber() <= b.asNumber());
        case ExprOp::Gt: return Value::boolean(a.asNumber() > b.asNumber());
        case ExprOp::Ge: return Value::boolean(a.asNumber() >= b.asNumber());
        case ExprOp::Eq: return Value::boolean(a == b);
        case ExprOp::Ne: return Value::boolean(!(a == b));
        default: throw ModelRuntimeError("unhandled compiled operator");
    }
}

// ---------------------------------------------------------------------------
// Compiled network

struct VarInfo {
    std::string display;  // qualified name used in trace output
    std::string name;     // declared name
    int automaton = -1;   // -1 for globals
    Type type;
    bool realCell = false;
    std::size_t offset = 0;  // cell offset (int or real table)
    std::size_t count = 1;   // cells occupied (array size or 1)
};

struct CompiledAssignment {
    std::size_t var = 0;  // VarInfo index
    CExpr index;          // for array targets
    bool hasIndex = false;
    CExpr value;
};

struct CompiledDest {
    double prob = 1.0;        // sampling path
    Rational probExact{1};    // exhaustive path
    std::size_t target = 0;
    std::vector<CompiledAssignment> assigns;
};

struct CompiledEdge {
    std::size_t automaton = 0;
    std::size_t source = 0;
    CExpr guard;  // literal true when absent
    bool guardTrivial = true;
    std::vector<CompiledDest> dests;
    std::string action;
    bool synced = false;  // action appears in some sync vector
    std::string label;    // automaton.action, used for local-move trace rows
};

struct CompiledSync {
    struct Slot {
        std::size_t automaton;
        std::vector<std::size_t> edges;  // all edges of that automaton with the action
    };
    std::vector<Slot> slots;
    std::string result;
};

/// One scheduler option: a lone edge or a sync instance (one chosen edge per
/// participant). Edge indices live in MoveBuffer's pool.
struct Move {
    int sync = -1;  // index into syncs, or -1
    std::uint32_t edgeBegin = 0;
    std::uint32_t edgeCount = 0;
    bool involvesTransient = false;
};

struct MoveBuffer {
    std::vector<Move> moves;
    std::vector<std::uint32_t> edgePool;
    std::size_t eligibleCount = 0;  // after transient filtering, eligible moves
                                    // are moves[0..eligibleCount)

    // Staged assignment effects of the move being fired. Owned by the worker
    // so one compiled network can serve several sampling threads.
    struct Write {
        std::size_t cell;
        bool real;
        std::int64_t i;
        double d;
    };
    std::vector<Write> writes;
    std::vector<std::pair<std::size_t, std::uint32_t>> locWrites;

    void clear() {
        moves.clear();
        edgePool.clear();
        eligibleCount = 0;
    }
};

class CompiledNetwork {
  public:
    explicit CompiledNetwork(const jani::Network& net) : source_(&net) { build(net); }

    const jani::Network& source() const { return *source_; }

    std::size_t automatonCount() const { return automata_.size(); }
    const std::string& automatonName(std::size_t i) const { return automata_[i].name; }
    std::size_t locationCount(std::size_t a) const { return automata_[a].locationNames.size(); }
    const std::string& locationName(std::size_t a, std::uint32_t loc) const {
        return automata_[a].locationNames[loc];
    }
    std::size_t edgeAutomaton(std::size_t edgeIdx) const { return edges_[edgeIdx].automaton; }
    const std::vector<VarInfo>& variables() const { return vars_; }

    StateVec initialState() const { return initial_; }

    bool isTransient(std::size_t automaton, std::uint32_t loc) const {
        return automata_[automaton].transient[loc];
    }

    /// Enumerates enabled moves and applies the transient-priority filter.
    /// After the call, buffer.moves[0..eligibleCount) are the scheduler's
    /// choices.
    void enumerateMoves(const StateVec& st, MoveBuffer& buf) const {
        buf.clear();

        bool anyHot = false;
        for (std::size_t a = 0; a < automata_.size(); ++a) {
            if (automata_[a].transient[st.locs[a]]) {
                anyHot = true;
                break;
            }
        }

        for (std::size_t a = 0; a < automata_.size(); ++a) {
            const auto& edges = automata_[a].edgesByLoc[st.locs[a]];
            bool hot = automata_[a].transient[st.locs[a]];
            for (std::size_t ei : edges) {
                const CompiledEdge& e = edges_[ei];
                if (e.synced) {
                    continue;  // fires only through its sync vectors
                }
                if (!e.guardTrivial && !evalC(e.guard, st).asBool()) {
                    continue;
                }
                Move m;
                m.sync = -1;
                m.edgeBegin = static_cast<std::uint32_t>(buf.edgePool.size());
                m.edgeCount = 1;
                m.involvesTransient = hot;
                buf.edgePool.push_back(static_cast<std::uint32_t>(ei));
                buf.moves.push_back(m);
            }
        }

        // Sync vectors are indexed by the source location of their first
        // slot's edges, so only the candidates at the current locations are
        // scanned (in deterministic automaton-major order).
        for (std::size_t a = 0; a < automata_.size(); ++a) {
            const auto& candidates = automata_[a].syncsByLoc[st.locs[a]];
            for (std::size_t si : candidates) {
                appendSyncMoves(st, si, buf);
            }
        }

        if (!anyHot) {
            buf.eligibleCount = buf.moves.size();
            return;
        }
        // Stable partition: transient-involving moves first.
        std::size_t k = 0;
        for (std::size_t i = 0; i < buf.moves.size(); ++i) {
            if (buf.moves[i].involvesTransient) {
                std::swap(buf.moves[i], buf.moves[k]);
                ++k;
            }
        }
        buf.eligibleCount = k > 0 ? k : buf.moves.size();
    }

    /// Label for trace rows: the sync's result, or automaton.action.
    const std::string& moveLabel(const MoveBuffer& buf, const Move& m) const {
        if (m.sync >= 0) {
            return syncs_[static_cast<std::size_t>(m.sync)].result;
        }
        return edges_[buf.edgePool[m.edgeBegin]].label;
    }

    /// Fires a move: samples one destination per participating edge, applies
    /// all assignments with pre-state reads.
    void fireMove(StateVec& st, MoveBuffer& buf, const Move& m, SplitMix64& rng) const {
        buf.writes.clear();
        buf.locWrites.clear();
        for (std::uint32_t i = 0; i < m.edgeCount; ++i) {
            const CompiledEdge& e = edges_[buf.edgePool[m.edgeBegin + i]];
            const CompiledDest* dest = &e.dests[0];
            if (e.dests.size() > 1) {
                double u = rng.unit();
                double acc = 0.0;
                for (const auto& d : e.dests) {
                    acc += d.prob;
                    if (u < acc) {
                        dest = &d;
                        break;
                    }
                    dest = &d;  // numeric slack: fall through to the last
                }
            }
            stageDestination(st, e, *dest, buf);
        }
        applyWrites(st, buf);
    }

    /// All (probability, successor) pairs of a move: the cartesian product of
    /// the participating edges' destination choices. Used by the exhaustive
    /// oracle.
    void expandMove(const StateVec& st, MoveBuffer& buf, const Move& m,
                    std::vector<std::pair<Rational, StateVec>>& out) const {
        std::vector<const CompiledEdge*> edges;
        for (std::uint32_t i = 0; i < m.edgeCount; ++i) {
            edges.push_back(&edges_[buf.edgePool[m.edgeBegin + i]]);
        }
        std::vector<std::size_t> choice(edges.size(), 0);
        for (;;) {
            Rational p{1};
            buf.writes.clear();
            buf.locWrites.clear();
            StateVec next = st;
            // Stage against the ORIGINAL state, apply to the copy.
            for (std::size_t i = 0; i < edges.size(); ++i) {
                const CompiledDest& d = edges[i]->dests[choice[i]];
                p = p * d.probExact;
                stageDestination(st, *edges[i], d, buf);
            }
            applyWrites(next, buf);
            out.emplace_back(p, std::move(next));

            std::size_t k = 0;
            while (k < edges.size()) {
                if (++choice[k] < edges[k]->dests.size()) {
                    break;
                }
                choice[k] = 0;
                ++k;
            }
            if (k == edges.size()) {
                return;
            }
        }
    }

    /// Compiles an expression over globals and constants (properties).
    CExpr compileGlobalExpr(const ExprPtr& e) const { return compileExpr(e, -1); }

    /// Compiles an expression in an automaton's scope (guards, assignments).
    CExpr compileExpr(const ExprPtr& e, int automaton) const {
        CExpr c;
        c.op = e->op;
        switch (e->op) {
            case ExprOp::Lit: c.lit = e->lit; return c;
            case ExprOp::Var: {
                if (auto v = constantValue(e->name)) {
                    c.op = ExprOp::Lit;
                    c.lit = *v;
                    return c;
                }
                const VarInfo* vi = resolveVar(e->name, automaton);
                if (vi == nullptr) {
                    throw InputError("model references undeclared variable '" + e->name + "'");
                }
                c.slot = vi->offset;
                c.varKind = vi->type.kind == TypeKind::Bool ? TypeKind::Bool : TypeKind::Int;
                c.realCell = vi->realCell;
                return c;
            }
            case ExprOp::EventField:
                throw InputError("event payload reference in a compiled model: _event." + e->name);
            case ExprOp::Index: {
                const VarInfo* vi = resolveVar(e->args[0]->name, automaton);
                if (vi == nullptr || vi->type.kind != TypeKind::IntArray) {
                    throw InputError("bad array access to '" + e->args[0]->name + "'");
                }
                c.slot = vi->offset;
                c.arraySize = vi->count;
                c.args.push_back(compileExpr(e->args[1], automaton));
                return c;
            }
            default:
                for (const auto& a : e->args) {
                    c.args.push_back(compileExpr(a, automaton));
                }
                return c;
        }
    }

    const VarInfo* resolveVar(const std::string& name, int automaton) const {
        if (automaton >= 0) {
            auto key = std::to_string(automaton) + ":" + name;
            auto it = localIndex_.find(key);
            if (it != localIndex_.end()) {
                return &vars_[it->second];
            }
        }
        auto it = globalIndex_.find(name);
        if (it != globalIndex_.end()) {
            return &vars_[it->second];
        }
        return nullptr;
    }

    std::optional<Value> constantValue(const std::string& name) const {
        auto it = constIndex_.find(name);
        if (it == constIndex_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// Renders one variable's current value (arrays as [a|b|...]).
    std::string formatVar(const VarInfo& v, const StateVec& st) const {
        if (v.type.kind == TypeKind::IntArray) {
            std::string out = "[";
            for (std::size_t i = 0; i < v.count; ++i) {
                if (i > 0) {
                    out += "|";
                }
                out += std::to_string(st.ints[v.offset + i]);
            }
            return out + "]";
        }
        if (v.realCell) {
            return Value::real(st.reals[v.offset]).str();
        }
        if (v.type.kind == TypeKind::Bool) {
            return st.ints[v.offset] != 0 ? "true" : "false";
        }
        return std::to_string(st.ints[v.offset]);
    }

  private:
    struct AutomatonTables {
        std::string name;
        std::vector<std::string> locationNames;
        std::vector<bool> transient;
        std::vector<std::vector<std::size_t>> edgesByLoc;
        // Sync vectors whose first participating slot belongs to this
        // automaton, grouped by that slot's edge source locations.
        std::vector<std::vector<std::size_t>> syncsByLoc;
    };

    const jani::Network* source_;
    std::vector<AutomatonTables> automata_;
    std::vector<CompiledEdge> edges_;
    std::vector<CompiledSync> syncs_;
    std::vector<VarInfo> vars_;
    std::unordered_map<std::string, std::size_t> globalIndex_;
    std::unordered_map<std::string, std::size_t> localIndex_;  // "autIdx:name"
    std::unordered_map<std::string, Value> constIndex_;
    StateVec initial_;

    void appendSyncMoves(const StateVec& st, std::size_t si, MoveBuffer& buf) const {
        const CompiledSync& s = syncs_[si];
        // Collect enabled edges per slot; abort early on an empty slot.
        thread_local std::vector<std::vector<std::uint32_t>> perSlot;
        perSlot.assign(s.slots.size(), {});
        bool involvesHot = false;
        for (std::size_t k = 0; k < s.slots.size(); ++k) {
            const auto& slot = s.slots[k];
            std::uint32_t loc = st.locs[slot.automaton];
            for (std::size_t ei : slot.edges) {
                const CompiledEdge& e = edges_[ei];
                if (e.source != loc) {
                    continue;
                }
                if (!e.guardTrivial && !evalC(e.guard, st).asBool()) {
                    continue;
                }
                perSlot[k].push_back(static_cast<std::uint32_t>(ei));
            }
            if (perSlot[k].empty()) {
                return;
            }
            if (automata_[slot.automaton].transient[loc]) {
                involvesHot = true;
            }
        }
        // Cartesian product over slot choices (singleton in generated models).
        std::vector<std::size_t> choice(s.slots.size(), 0);
        for (;;) {
            Move m;
            m.sync = static_cast<int>(si);
            m.edgeBegin = static_cast<std::uint32_t>(buf.edgePool.size());
            m.edgeCount = static_cast<std::uint32_t>(s.slots.size());
            m.involvesTransient = involvesHot;
            for (std::size_t k = 0; k < s.slots.size(); ++k) {
                buf.edgePool.push_back(perSlot[k][choice[k]]);
            }
            buf.moves.push_back(m);
            std::size_t k = 0;
            while (k < s.slots.size()) {
                if (++choice[k] < perSlot[k].size()) {
                    break;
                }
                choice[k] = 0;
                ++k;
            }
            if (k == s.slots.size()) {
                return;
            }
        }
    }

    void stageDestination(const StateVec& pre, const CompiledEdge& e, const CompiledDest& d,
                          MoveBuffer& buf) const {
        for (const auto& asg : d.assigns) {
            const VarInfo& v = vars_[asg.var];
            std::size_t cell = v.offset;
            if (asg.hasIndex) {
                Value idx = evalC(asg.index, pre);
                if (idx.i < 0 || static_cast<std::size_t>(idx.i) >= v.count) {
                    throw ModelRuntimeError("assignment index " + std::to_string(idx.i) +
                                            " outside '" + v.name + "'");
                }
                cell += static_cast<std::size_t>(idx.i);
            }
            Value val = evalC(asg.value, pre);
            MoveBuffer::Write w;
            w.cell = cell;
            w.real = v.realCell;
            if (v.realCell) {
                w.d = val.asNumber();
            } else if (v.type.kind == TypeKind::Bool) {
                w.i = val.asBool() ? 1 : 0;
            } else {
                if (val.kind == TypeKind::Real) {
                    throw ModelRuntimeError("real value assigned to integer '" + v.name + "'");
                }
                w.i = val.i;
                if (w.i < v.type.lo || w.i > v.type.hi) {
                    throw ModelRuntimeError("value " + std::to_string(w.i) + " outside bounds [" +
                                            std::to_string(v.type.lo) + "," +
                                            std::to_string(v.type.hi) + "] of '" + v.name + "'");
                }
            }
            buf.writes.push_back(w);
        }
        buf.locWrites.emplace_back(e.automaton, static_cast<std::uint32_t>(d.target));
    }

    void applyWrites(StateVec& st, MoveBuffer& buf) const {
        for (const auto& w : buf.writes) {
            if (w.real) {
                st.reals[w.cell] = w.d;
            } else {
                st.ints[w.cell] = w.i;
            }
        }
        for (const auto& [a, loc] : buf.locWrites) {
            st.locs[a] = loc;
        }
        buf.writes.clear();
        buf.locWrites.clear();
    }

    void build(const jani::Network& net) {
        for (const auto& c : net.constants) {
            constIndex_[c.name] = c.value;
        }

        std::size_t intCells = 0;
        std::size_t realCells = 0;
        auto addVar = [&](const jani::VarDecl& d, int automaton, const std::string& display) {
            VarInfo v;
            v.display = display;
            v.name = d.name;
            v.automaton = automaton;
            v.type = d.type;
            v.realCell = d.type.kind == TypeKind::Real;
            v.count = d.type.kind == TypeKind::IntArray ? d.type.size : 1;
            if (v.realCell) {
                v.offset = realCells;
                realCells += 1;
                initial_.reals.push_back(d.init.asNumber());
            } else {
                v.offset = intCells;
                intCells += v.count;
                if (d.type.kind == TypeKind::IntArray) {
                    for (std::int64_t x : d.arrayInit) {
                        initial_.ints.push_back(x);
                    }
                } else {
                    initial_.ints.push_back(d.init.i);
                }
            }
            vars_.push_back(std::move(v));
            return vars_.size() - 1;
        };

        for (const auto& g : net.globals) {
            globalIndex_[g.name] = addVar(g, -1, g.name);
        }
        for (std::size_t ai = 0; ai < net.automata.size(); ++ai) {
            for (const auto& l : net.automata[ai].locals) {
                std::size_t idx = addVar(l, static_cast<int>(ai),
                                         net.automata[ai].name + "." + l.name);
                localIndex_[std::to_string(ai) + ":" + l.name] = idx;
            }
        }

        // Which actions are synchronized, per automaton?
        std::vector<std::set<std::string>> syncedActions(net.automata.size());
        for (const auto& s : net.syncs) {
            for (std::size_t ai = 0; ai < s.participants.size() && ai < net.automata.size(); ++ai) {
                if (s.participants[ai].has_value()) {
                    syncedActions[ai].insert(*s.participants[ai]);
                }
            }
        }

        std::vector<std::map<std::string, std::vector<std::size_t>>> edgesByAction(
            net.automata.size());

        for (std::size_t ai = 0; ai < net.automata.size(); ++ai) {
            const jani::Automaton& src = net.automata[ai];
            AutomatonTables tables;
            tables.name = src.name;
            std::unordered_map<std::string, std::uint32_t> locIndex;
            for (const auto& l : src.locations) {
                locIndex[l.name] = static_cast<std::uint32_t>(tables.locationNames.size());
                tables.locationNames.push_back(l.name);
                tables.transient.push_back(l.transient);
            }
            tables.edgesByLoc.assign(tables.locationNames.size(), {});
            initial_.locs.push_back(locIndex.at(src.initial));

            for (std::size_t ei = 0; ei < src.edges.size(); ++ei) {
                const jani::Edge& e = src.edges[ei];
                CompiledEdge ce;
                ce.automaton = ai;
                ce.source = locIndex.at(e.source);
                if (e.guard && !e.guard->isTrueLiteral()) {
                    ce.guard = compileExpr(e.guard, static_cast<int>(ai));
                    ce.guardTrivial = false;
                }
                for (const auto& d : e.destinations) {
                    CompiledDest cd;
                    cd.prob = d.probability.toDouble();
                    cd.probExact = d.probability;
                    cd.target = locIndex.at(d.target);
                    for (const auto& asg : d.assignments) {
                        CompiledAssignment ca;
                        const VarInfo* vi = resolveVar(asg.var, static_cast<int>(ai));
                        if (vi == nullptr) {
                            throw InputError("assignment to undeclared variable '" + asg.var + "'");
                        }
                        ca.var = static_cast<std::size_t>(vi - vars_.data());
                        if (asg.index) {
                            ca.hasIndex = true;
                            ca.index = compileExpr(asg.index, static_cast<int>(ai));
                        }
                        ca.value = compileExpr(asg.value, static_cast<int>(ai));
                        cd.assigns.push_back(std::move(ca));
                    }
                    ce.dests.push_back(std::move(cd));
                }
                ce.action = e.action;
                ce.synced = syncedActions[ai].count(e.action) > 0;
                ce.label = src.name + "." + e.action;
                std::size_t idx = edges_.size();
                edges_.push_back(std::move(ce));
                tables.edgesByLoc[edges_[idx].source].push_back(idx);
                edgesByAction[ai][e.action].push_back(idx);
            }
            automata_.push_back(std::move(tables));
        }

        for (auto& a : automata_) {
            a.syncsByLoc.assign(a.locationNames.size(), {});
        }
        for (const auto& s : net.syncs) {
            CompiledSync cs;
            cs.result = s.result;
            for (std::size_t ai = 0; ai < s.participants.size(); ++ai) {
                if (!s.participants[ai].has_value()) {
                    continue;
                }
                CompiledSync::Slot slot;
                slot.automaton = ai;
                auto it = edgesByAction[ai].find(*s.participants[ai]);
                if (it != edgesByAction[ai].end()) {
                    slot.edges = it->second;
                }
                cs.slots.push_back(std::move(slot));
            }
            std::size_t si = syncs_.size();
            syncs_.push_back(std::move(cs));

            // Index by the first slot's source locations; a sync with an
            // empty first slot can never fire and is dropped from the scan.
            if (!syncs_[si].slots.empty()) {
                const auto& first = syncs_[si].slots.front();
                std::set<std::size_t> sources;
                for (std::size_t ei : first.edges) {
                    sources.insert(edges_[ei].source);
                }
                for (std::size_t loc : sources) {
                    automata_[first.automaton].syncsByLoc[loc].push_back(si);
                }
            }
        }
    }
};

}  // namespace netsmc::engine
