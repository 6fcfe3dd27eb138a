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

// Command line front end.
//
//   netsmc convert  --manifest sys.json [-o out.jani]
//   netsmc verify   (--manifest sys.json | --jani model.jani) --property NAME
//                   [--confidence F] [--error F] [--seed N] [--max-steps N]
//                   [--jobs N] [--traces-csv PATH] [--report PATH]
//   netsmc simulate --jani model.jani -n N [--seed N] [--max-steps N]
//                   --csv PATH
//
// Exit codes: 0 success, 1 verification infrastructure failure, 2 input
// error. All randomness is seeded; the seed in effect is printed so runs can
// be reproduced. Repeated runs with the same inputs and seed produce
// byte-identical files regardless of --jobs.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "netsmc/exact.hpp"
#include "netsmc/manifest.hpp"
#include "netsmc/smc.hpp"

namespace {

using namespace netsmc;

struct VerifyArgs {
    std::string manifestPath;
    std::string janiPath;
    std::string property;
    double confidence = 0.95;
    double error = 0.01;
    std::uint64_t seed = 1;
    std::int64_t maxSteps = 0;  // 0: manifest/property default
    unsigned jobs = 1;
    std::string tracesCsv;
    std::string reportPath;
};

struct LoadedModel {
    jani::Network net;
    std::string source;
};

LoadedModel loadFromManifestOrJani(const std::string& manifestPath, const std::string& janiPath) {
    if (!manifestPath.empty()) {
        BuildResult built = buildNetwork(loadManifest(manifestPath));
        for (const auto& w : built.warnings.all()) {
            std::cerr << w.str() << "\n";
        }
        return LoadedModel{std::move(built.net), manifestPath};
    }
    return LoadedModel{jani::loadJani(readTextFile(janiPath), janiPath), janiPath};
}

void writeFileOrThrow(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write file: " + path);
    }
    out << content;
}

int cmdConvert(const std::string& manifestPath, std::string outPath) {
    SystemManifest manifest = loadManifest(manifestPath);
    BuildResult built = buildNetwork(manifest);
    for (const auto& w : built.warnings.all()) {
        std::cerr << w.str() << "\n";
    }
    if (outPath.empty()) {
        outPath = manifest.outputPath.empty()
                      ? (manifest.resolve(manifest.name + ".jani")).string()
                      : manifest.resolve(manifest.outputPath).string();
    }
    writeFileOrThrow(outPath, jani::emitJani(built.net));

    std::size_t globals = built.net.globals.size();
    std::printf("wrote %s\n", outPath.c_str());
    std::printf("automata: %zu (%zu machines + %zu event automata)\n", built.net.automata.size(),
                built.machineCount, built.eventAutomata);
    std::printf("sync vectors: %zu\n", built.net.syncs.size());
    std::printf("global variables: %zu\n", globals);
    std::printf("properties: %zu\n", built.net.properties.size());
    return 0;
}

std::string renderReport(const jani::Network& net, const jani::Property& prop,
                         const smc::SmcConfig& cfg, const smc::Verdict& v) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "model: %s\n"
                  "property: %s\n"
                  "confidence: %.6f\n"
                  "max_error: %.6f\n"
                  "max_steps: %" PRId64 "\n"
                  "seed: %" PRIu64 "\n"
                  "samples: %" PRId64 "\n"
                  "satisfied: %" PRId64 "\n"
                  "violated: %" PRId64 "\n"
                  "undecided: %" PRId64 "\n"
                  "estimate: %.6f\n",
                  net.name.c_str(), prop.name.c_str(), cfg.confidence, cfg.maxError, cfg.maxSteps,
                  cfg.seed, v.samples, v.satisfied, v.violated, v.undecided, v.estimate);
    return buf;
}

int cmdVerify(const VerifyArgs& args) {
    LoadedModel model = loadFromManifestOrJani(args.manifestPath, args.janiPath);

    if (model.net.properties.empty()) {
        throw InputError(model.source + ": no properties defined");
    }
    const jani::Property* prop = nullptr;
    if (args.property.empty() && model.net.properties.size() == 1) {
        prop = &model.net.properties.front();
    } else {
        prop = model.net.findProperty(args.property);
    }
    if (prop == nullptr) {
        std::string known;
        for (const auto& p : model.net.properties) {
            known += known.empty() ? p.name : ", " + p.name;
        }
        throw InputError("unknown property '" + args.property + "' (known: " + known + ")");
    }

    smc::SmcConfig cfg;
    cfg.confidence = args.confidence;
    cfg.maxError = args.error;
    cfg.seed = args.seed;
    cfg.jobs = args.jobs;
    cfg.maxSteps = args.maxSteps > 0 ? args.maxSteps : prop->stepBound;

    engine::CompiledNetwork compiled(model.net);
    smc::EstimateOptions opts;
    opts.collectViolating = !args.tracesCsv.empty();
    smc::EstimateResult result = smc::estimateProbabilityFull(compiled, *prop, cfg, opts);
    const smc::Verdict& v = result.verdict;

    std::printf("property: %s\n", prop->name.c_str());
    std::printf("samples: %" PRId64 " (confidence %.4g, max error %.4g)\n", v.samples,
                cfg.confidence, cfg.maxError);
    std::printf("satisfied: %" PRId64 "  violated: %" PRId64 "  undecided: %" PRId64 "\n",
                v.satisfied, v.violated, v.undecided);
    std::printf("estimate: %.6f\n", v.estimate);
    std::printf("seed: %" PRIu64 "\n", cfg.seed);
    std::printf("wall time: %.3f s\n", v.elapsedSeconds);
    if (!v.warning.empty()) {
        std::fprintf(stderr, "warning: %s\n", v.warning.c_str());
    }

    if (!args.reportPath.empty()) {
        writeFileOrThrow(args.reportPath, renderReport(model.net, *prop, cfg, v));
    }

    if (!args.tracesCsv.empty()) {
        std::vector<std::pair<std::uint64_t, smc::Trace>> traces;
        for (std::uint64_t idx : result.violatingIndices) {
            traces.emplace_back(idx, smc::sampleTrace(compiled,
                                                      engine::SplitMix64::forTrace(cfg.seed, idx),
                                                      cfg.maxSteps));
        }
        if (traces.empty()) {
            std::fprintf(stderr, "note: no violating traces to export\n");
        } else {
            std::ofstream out(args.tracesCsv, std::ios::binary);
            if (!out) {
                throw InputError("cannot write file: " + args.tracesCsv);
            }
            smc::exportTracesCsv(compiled, traces, out);
            std::printf("violating traces: %zu written to %s\n", traces.size(),
                        args.tracesCsv.c_str());
        }
    }
    return 0;
}

int cmdSimulate(const std::string& janiPath, std::int64_t count, std::uint64_t seed,
                std::int64_t maxSteps, const std::string& csvPath) {
    jani::Network net = jani::loadJani(readTextFile(janiPath), janiPath);
    engine::CompiledNetwork compiled(net);
    std::vector<std::pair<std::uint64_t, smc::Trace>> traces;
    traces.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        smc::Trace t = smc::sampleTrace(
            compiled, engine::SplitMix64::forTrace(seed, static_cast<std::uint64_t>(i)), maxSteps);
        if (t.modelError) {
            throw EngineError("model error in trace " + std::to_string(i) + ": " + t.errorMessage);
        }
        traces.emplace_back(static_cast<std::uint64_t>(i), std::move(t));
    }
    std::ofstream out(csvPath, std::ios::binary);
    if (!out) {
        throw InputError("cannot write file: " + csvPath);
    }
    smc::exportTracesCsv(compiled, traces, out);
    std::printf("wrote %" PRId64 " traces to %s (seed %" PRIu64 ")\n", count, csvPath.c_str(),
                seed);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"state-machine systems to MDP networks, verified by trace sampling"};
    app.require_subcommand(1);

    // convert
    std::string convManifest;
    std::string convOut;
    CLI::App* conv = app.add_subcommand("convert", "compile a system manifest to a .jani model");
    conv->add_option("--manifest,-m", convManifest, "system manifest (JSON)")->required();
    conv->add_option("--output,-o", convOut, "output .jani path");

    // verify
    VerifyArgs vargs;
    CLI::App* verify = app.add_subcommand("verify", "estimate a property's probability");
    verify->add_option("--manifest,-m", vargs.manifestPath, "system manifest (JSON)");
    verify->add_option("--jani,-j", vargs.janiPath, "model file produced by convert");
    verify->add_option("--property,-p", vargs.property, "property name");
    verify->add_option("--confidence", vargs.confidence, "confidence level in (0,1)");
    verify->add_option("--error", vargs.error, "maximum absolute error in (0,1)");
    verify->add_option("--seed", vargs.seed, "random seed (default 1)");
    verify->add_option("--max-steps", vargs.maxSteps, "trace cutoff in moves");
    verify->add_option("--jobs", vargs.jobs, "worker threads (results independent of this)");
    verify->add_option("--traces-csv", vargs.tracesCsv, "write violating traces as CSV");
    verify->add_option("--report", vargs.reportPath, "write a timing-free report file");

    // simulate
    std::string simJani;
    std::int64_t simCount = 1;
    std::uint64_t simSeed = 1;
    std::int64_t simMaxSteps = 10000;
    std::string simCsv;
    CLI::App* sim = app.add_subcommand("simulate", "sample traces and export them as CSV");
    sim->add_option("--jani,-j", simJani, "model file")->required();
    sim->add_option("-n", simCount, "number of traces")->required();
    sim->add_option("--seed", simSeed, "random seed (default 1)");
    sim->add_option("--max-steps", simMaxSteps, "trace cutoff in moves");
    sim->add_option("--csv", simCsv, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (conv->parsed()) {
            return cmdConvert(convManifest, convOut);
        }
        if (verify->parsed()) {
            if (vargs.manifestPath.empty() == vargs.janiPath.empty()) {
                std::fprintf(stderr, "error: verify needs exactly one of --manifest or --jani\n");
                return 2;
            }
            return cmdVerify(vargs);
        }
        if (sim->parsed()) {
            return cmdSimulate(simJani, simCount, simSeed, simMaxSteps, simCsv);
        }
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const EngineError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
