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

// Exhaustive companions to the sampling engine, for small models: exact
// probability by layered forward propagation of state masses, and a
// reachability check that every pending event automaton always has an
// enabled receive or dismiss synchronization.
//
// Both resolve nondeterminism by the same uniform-scheduler convention as the
// sampler (the MDP becomes a DTMC), so their results are directly comparable
// with the statistical estimates.

#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "netsmc/smc.hpp"

namespace netsmc::exact {

struct ExactResult {
    double sat = 0.0;
    double unsat = 0.0;
    double undecided = 0.0;  // terminal-undecided plus mass left at the cutoff
    std::size_t statesVisited = 0;
};

/// Exact satisfaction probability of lhs U rhs within maxSteps moves under
/// the uniform scheduler. Throws when more than stateBound states get
/// expanded.
inline ExactResult exactProbabilityFull(const engine::CompiledNetwork& net,
                                        const jani::Property& prop,
                                        std::int64_t maxSteps = 10000,
                                        std::size_t stateBound = 1000000) {
    const smc::CompiledProperty cp = smc::compileProperty(net, prop);

    using Layer = std::unordered_map<engine::StateVec, double, engine::StateVecHash>;
    Layer cur;
    cur.emplace(net.initialState(), 1.0);

    ExactResult result;
    engine::MoveBuffer buf;
    std::vector<std::pair<Rational, engine::StateVec>> successors;

    for (std::int64_t step = 0; step <= maxSteps && !cur.empty(); ++step) {
        Layer next;
        for (auto& [state, mass] : cur) {
            if (engine::evalC(cp.rhs, state).asBool()) {
                result.sat += mass;
                continue;
            }
            if (!cp.lhsAlwaysTrue && !engine::evalC(cp.lhs, state).asBool()) {
                result.unsat += mass;
                continue;
            }
            if (step == maxSteps) {
                result.undecided += mass;  // cutoff
                continue;
            }
            net.enumerateMoves(state, buf);
            if (buf.eligibleCount == 0) {
                result.undecided += mass;  // terminal, can never decide
                continue;
            }
            double moveWeight = mass / static_cast<double>(buf.eligibleCount);
            for (std::size_t mi = 0; mi < buf.eligibleCount; ++mi) {
                successors.clear();
                net.expandMove(state, buf, buf.moves[mi], successors);
                for (auto& [p, succ] : successors) {
                    next[std::move(succ)] += moveWeight * p.toDouble();
                }
            }
        }
        result.statesVisited += cur.size();
        if (result.statesVisited > stateBound) {
            throw EngineError("exact exploration exceeded the state bound of " +
                              std::to_string(stateBound) + " states");
        }
        cur.swap(next);
        double remaining = 0.0;
        for (const auto& [_, m] : cur) {
            remaining += m;
        }
        if (remaining < 1e-15) {
            break;
        }
    }
    for (const auto& [_, m] : cur) {
        result.undecided += m;
    }
    return result;
}

inline double exactProbability(const engine::CompiledNetwork& net, const jani::Property& prop,
                               std::int64_t maxSteps = 10000, std::size_t stateBound = 1000000) {
    return exactProbabilityFull(net, prop, maxSteps, stateBound).sat;
}

// ---------------------------------------------------------------------------
// Event-automaton liveness

struct LivenessResult {
    bool ok = true;
    std::string message;
    std::size_t statesVisited = 0;
};

/// Explores every reachable state (under the same scheduler semantics) and
/// checks: whenever no automaton sits in a transient location, every event
/// automaton whose current location is its pending one has at least one
/// enabled synchronization that moves it (a receive or a dismiss). Event
/// automata are recognized by the generated naming convention: automaton name
/// prefix "ev_", locations "idle"/"pending".
inline LivenessResult checkEventAutomatonLiveness(const engine::CompiledNetwork& net,
                                                  std::size_t stateBound = 1000000) {
    std::vector<std::pair<std::size_t, std::uint32_t>> pendingLocs;  // (automaton, pending index)
    for (std::size_t a = 0; a < net.automatonCount(); ++a) {
        if (net.automatonName(a).rfind("ev_", 0) != 0) {
            continue;
        }
        for (std::uint32_t l = 0; l < net.locationCount(a); ++l) {
            if (net.locationName(a, l) == "pending") {
                pendingLocs.emplace_back(a, l);
                break;
            }
        }
    }

    LivenessResult result;
    std::unordered_set<engine::StateVec, engine::StateVecHash> seen;
    std::deque<engine::StateVec> frontier;
    frontier.push_back(net.initialState());
    seen.insert(frontier.back());

    engine::MoveBuffer buf;
    std::vector<std::pair<Rational, engine::StateVec>> successors;

    while (!frontier.empty()) {
        engine::StateVec state = std::move(frontier.front());
        frontier.pop_front();

        net.enumerateMoves(state, buf);

        bool anyTransient = false;
        for (std::size_t a = 0; a < net.automatonCount(); ++a) {
            if (net.isTransient(a, state.locs[a])) {
                anyTransient = true;
                break;
            }
        }
        if (!anyTransient) {
            for (const auto& [evAut, pendingLoc] : pendingLocs) {
                if (state.locs[evAut] != pendingLoc) {
                    continue;
                }
                bool movable = false;
                for (std::size_t mi = 0; mi < buf.eligibleCount && !movable; ++mi) {
                    const engine::Move& m = buf.moves[mi];
                    for (std::uint32_t k = 0; k < m.edgeCount; ++k) {
                        if (net.edgeAutomaton(buf.edgePool[m.edgeBegin + k]) == evAut) {
                            movable = true;
                            break;
                        }
                    }
                }
                if (!movable) {
                    result.ok = false;
                    result.message = "event automaton '" + net.automatonName(evAut) +
                                     "' is pending with no enabled receive or dismiss sync";
                    result.statesVisited = seen.size();
                    return result;
                }
            }
        }

        for (std::size_t mi = 0; mi < buf.eligibleCount; ++mi) {
            successors.clear();
            net.expandMove(state, buf, buf.moves[mi], successors);
            for (auto& [p, succ] : successors) {
                (void)p;
                if (seen.insert(succ).second) {
                    if (seen.size() > stateBound) {
                        throw EngineError("liveness exploration exceeded the state bound");
                    }
                    frontier.push_back(std::move(succ));
                }
            }
        }
    }
    result.statesVisited = seen.size();
    return result;
}

}  // namespace netsmc::exact
