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

// Statistical verification by Monte Carlo trace sampling. The sample count
// for a (confidence, max-error) target comes from the fixed-sample
// Chernoff-Hoeffding bound ceil(ln(2/(1-confidence)) / (2*error^2)); there is
// no early stopping. Nondeterminism between enabled moves is resolved by a
// uniform random scheduler, so the reported value is the satisfaction
// probability under that scheduler, not a min/max over schedulers.
//
// Every trace owns an rng stream derived from (seed, trace index), which
// makes verdicts reproducible and independent of the worker count.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "netsmc/engine.hpp"

namespace netsmc::smc {

struct SmcConfig {
    double confidence = 0.95;
    double maxError = 0.01;
    std::int64_t maxSteps = 10000;
    std::uint64_t seed = 1;
    std::size_t batchSize = 64;
    unsigned jobs = 1;

    void validate() const {
        if (!(confidence > 0.0 && confidence < 1.0)) {
            throw EngineError("confidence must be in (0,1)");
        }
        if (!(maxError > 0.0 && maxError < 1.0)) {
            throw EngineError("max error must be in (0,1)");
        }
        if (maxSteps <= 0) {
            throw EngineError("max steps must be positive");
        }
        if (batchSize == 0) {
            throw EngineError("batch size must be positive");
        }
    }
};

/// Fixed sample count: ceil(ln(2/(1-confidence)) / (2*eps^2)), at least 1.
inline std::int64_t requiredSamples(double confidence, double maxError) {
    if (!(confidence > 0.0 && confidence < 1.0) || !(maxError > 0.0 && maxError < 1.0)) {
        throw EngineError("confidence and max error must be in (0,1)");
    }
    double n = std::log(2.0 / (1.0 - confidence)) / (2.0 * maxError * maxError);
    auto samples = static_cast<std::int64_t>(std::ceil(n));
    return samples < 1 ? 1 : samples;
}

enum class PropertyStatus { Sat, Unsat, Undecided };

struct TraceStep {
    std::string action;  // empty on the initial entry
    engine::StateVec state;
};

struct Trace {
    std::vector<TraceStep> steps;
    bool modelError = false;
    std::string errorMessage;
};

/// Samples one full trace: step 0 is the initial configuration, then moves
/// fire until max_steps entries follow it or no move is enabled. A model
/// fault ends the trace early with modelError set.
inline Trace sampleTrace(const engine::CompiledNetwork& net, engine::SplitMix64 rng,
                         std::int64_t maxSteps) {
    Trace trace;
    engine::StateVec st = net.initialState();
    trace.steps.push_back(TraceStep{"", st});
    engine::MoveBuffer buf;
    try {
        for (std::int64_t step = 0; step < maxSteps; ++step) {
            net.enumerateMoves(st, buf);
            if (buf.eligibleCount == 0) {
                break;
            }
            std::size_t pick = static_cast<std::size_t>(rng.below(buf.eligibleCount));
            const engine::Move& m = buf.moves[pick];
            std::string label = net.moveLabel(buf, m);
            net.fireMove(st, buf, m, rng);
            trace.steps.push_back(TraceStep{std::move(label), st});
        }
    } catch (const engine::ModelRuntimeError& e) {
        trace.modelError = true;
        trace.errorMessage = e.what();
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Property evaluation

struct CompiledProperty {
    engine::CExpr lhs;
    engine::CExpr rhs;
    bool lhsAlwaysTrue = false;
};

inline CompiledProperty compileProperty(const engine::CompiledNetwork& net,
                                        const jani::Property& prop) {
    CompiledProperty cp;
    cp.lhs = net.compileGlobalExpr(prop.lhs);
    cp.rhs = net.compileGlobalExpr(prop.rhs);
    cp.lhsAlwaysTrue = prop.lhs->isTrueLiteral();
    return cp;
}

/// Decides lhs U rhs incrementally. Feed every state in order, starting with
/// the initial one; the first decisive state fixes the outcome.
class UntilMonitor {
  public:
    explicit UntilMonitor(const CompiledProperty& prop) : prop_(&prop) {}

    PropertyStatus step(const engine::StateVec& st) {
        if (status_ != PropertyStatus::Undecided) {
            return status_;
        }
        if (engine::evalC(prop_->rhs, st).asBool()) {
            status_ = PropertyStatus::Sat;
        } else if (!prop_->lhsAlwaysTrue && !engine::evalC(prop_->lhs, st).asBool()) {
            status_ = PropertyStatus::Unsat;
        }
        return status_;
    }

    PropertyStatus status() const { return status_; }

  private:
    const CompiledProperty* prop_;
    PropertyStatus status_ = PropertyStatus::Undecided;
};

/// Post-hoc evaluation over a recorded trace: SAT at the first step where the
/// right side holds given the left held before; UNSAT at the first step where
/// the left side fails earlier; UNDECIDED when the trace ends without either.
inline PropertyStatus evaluateProperty(const Trace& trace, const CompiledProperty& prop) {
    UntilMonitor monitor(prop);
    for (const auto& s : trace.steps) {
        if (monitor.step(s.state) != PropertyStatus::Undecided) {
            return monitor.status();
        }
    }
    return PropertyStatus::Undecided;
}

// ---------------------------------------------------------------------------
// Estimation

struct Verdict {
    std::int64_t satisfied = 0;
    std::int64_t violated = 0;
    std::int64_t undecided = 0;
    std::int64_t samples = 0;
    double estimate = 0.0;
    double elapsedSeconds = 0.0;
    std::string warning;
};

struct EstimateOptions {
    bool collectViolating = false;
    std::size_t maxCollected = 100;
};

struct EstimateResult {
    Verdict verdict;
    std::vector<std::uint64_t> violatingIndices;  // ordered, capped at maxCollected
};

/// Runs exactly requiredSamples(confidence, maxError) traces and counts
/// outcomes. Undecided (cutoff) traces stay out of the estimate denominator:
/// estimate = SAT / (SAT + UNSAT), with a warning attached when any trace was
/// undecided and an error when the undecided fraction exceeds half.
inline EstimateResult estimateProbabilityFull(const engine::CompiledNetwork& net,
                                              const jani::Property& prop, const SmcConfig& cfg,
                                              const EstimateOptions& opts = {}) {
    cfg.validate();
    const std::int64_t samples = requiredSamples(cfg.confidence, cfg.maxError);
    const CompiledProperty cp = compileProperty(net, prop);

    std::atomic<std::int64_t> nextIndex{0};
    std::atomic<std::int64_t> sat{0};
    std::atomic<std::int64_t> unsat{0};
    std::atomic<std::int64_t> undecided{0};
    std::atomic<bool> failed{false};
    std::string failMessage;
    std::mutex failMutex;
    std::vector<std::uint64_t> violating;
    std::mutex violatingMutex;

    auto worker = [&]() {
        engine::MoveBuffer buf;
        std::int64_t localSat = 0;
        std::int64_t localUnsat = 0;
        std::int64_t localUndecided = 0;
        std::vector<std::uint64_t> localViolating;
        for (;;) {
            std::int64_t begin =
                nextIndex.fetch_add(static_cast<std::int64_t>(cfg.batchSize));
            if (begin >= samples || failed.load()) {
                break;
            }
            std::int64_t end = std::min<std::int64_t>(begin + cfg.batchSize, samples);
            for (std::int64_t i = begin; i < end; ++i) {
                engine::SplitMix64 rng =
                    engine::SplitMix64::forTrace(cfg.seed, static_cast<std::uint64_t>(i));
                engine::StateVec st = net.initialState();
                UntilMonitor monitor(cp);
                PropertyStatus status = monitor.step(st);
                try {
                    for (std::int64_t step = 0;
                         step < cfg.maxSteps && status == PropertyStatus::Undecided; ++step) {
                        net.enumerateMoves(st, buf);
                        if (buf.eligibleCount == 0) {
                            break;
                        }
                        std::size_t pick =
                            static_cast<std::size_t>(rng.below(buf.eligibleCount));
                        net.fireMove(st, buf, buf.moves[pick], rng);
                        status = monitor.step(st);
                    }
                } catch (const engine::ModelRuntimeError& e) {
                    std::lock_guard<std::mutex> lock(failMutex);
                    failed.store(true);
                    failMessage = "model error in trace " + std::to_string(i) + ": " + e.what();
                    break;
                }
                switch (status) {
                    case PropertyStatus::Sat: ++localSat; break;
                    case PropertyStatus::Unsat:
                        ++localUnsat;
                        if (opts.collectViolating) {
                            localViolating.push_back(static_cast<std::uint64_t>(i));
                        }
                        break;
                    case PropertyStatus::Undecided: ++localUndecided; break;
                }
            }
        }
        sat += localSat;
        unsat += localUnsat;
        undecided += localUndecided;
        if (!localViolating.empty()) {
            std::lock_guard<std::mutex> lock(violatingMutex);
            violating.insert(violating.end(), localViolating.begin(), localViolating.end());
        }
    };

    auto start = std::chrono::steady_clock::now();
    unsigned jobs = cfg.jobs == 0 ? 1 : cfg.jobs;
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(jobs);
        for (unsigned t = 0; t < jobs; ++t) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    auto stop = std::chrono::steady_clock::now();

    if (failed.load()) {
        throw EngineError(failMessage);
    }

    EstimateResult result;
    Verdict& v = result.verdict;
    v.satisfied = sat.load();
    v.violated = unsat.load();
    v.undecided = undecided.load();
    v.samples = samples;
    v.elapsedSeconds = std::chrono::duration<double>(stop - start).count();

    if (v.undecided * 2 > v.samples) {
        throw EngineError("more than half of the sampled traces were undecided at " +
                          std::to_string(cfg.maxSteps) +
                          " steps; increase --max-steps to let the property resolve");
    }
    if (v.satisfied + v.violated == 0) {
        throw EngineError("no decided traces; increase --max-steps");
    }
    v.estimate = static_cast<double>(v.satisfied) / static_cast<double>(v.satisfied + v.violated);
    if (v.undecided > 0) {
        v.warning = std::to_string(v.undecided) +
                    " undecided trace(s) excluded from the estimate denominator";
    }

    std::sort(violating.begin(), violating.end());
    if (violating.size() > opts.maxCollected) {
        violating.resize(opts.maxCollected);
    }
    result.violatingIndices = std::move(violating);
    return result;
}

inline Verdict estimateProbability(const engine::CompiledNetwork& net, const jani::Property& prop,
                                   const SmcConfig& cfg) {
    return estimateProbabilityFull(net, prop, cfg).verdict;
}

// ---------------------------------------------------------------------------
// CSV export

namespace detail {

inline std::string csvQuote(const std::string& s) {
    bool needsQuote = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needsQuote) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += "\"";
    return out;
}

}  // namespace detail

/// Writes traces as CSV: header `trace_id,step,action,<automaton>_location...`
/// followed by one column per variable; one row per step; RFC-4180 quoting.
inline void exportTracesCsv(const engine::CompiledNetwork& net,
                            const std::vector<std::pair<std::uint64_t, Trace>>& traces,
                            std::ostream& out) {
    if (traces.empty()) {
        throw EngineError("no traces to export");
    }
    out << "trace_id,step,action";
    for (std::size_t a = 0; a < net.automatonCount(); ++a) {
        out << ',' << detail::csvQuote(net.automatonName(a) + "_location");
    }
    for (const auto& v : net.variables()) {
        out << ',' << detail::csvQuote(v.display);
    }
    out << '\n';
    for (const auto& [id, trace] : traces) {
        for (std::size_t k = 0; k < trace.steps.size(); ++k) {
            const TraceStep& s = trace.steps[k];
            out << id << ',' << k << ',' << detail::csvQuote(s.action);
            for (std::size_t a = 0; a < net.automatonCount(); ++a) {
                out << ',' << detail::csvQuote(net.locationName(a, s.state.locs[a]));
            }
            for (const auto& v : net.variables()) {
                out << ',' << detail::csvQuote(net.formatVar(v, s.state));
            }
            out << '\n';
        }
    }
}

}  // namespace netsmc::smc
