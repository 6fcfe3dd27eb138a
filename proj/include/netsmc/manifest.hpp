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

// System manifest: one JSON file listing the machine files, the optional
// behavior tree (XML, tick configuration, plugin bindings, blackboard),
// named constants and the properties to verify. Paths are relative to the
// manifest's directory.
//
// buildNetwork runs the whole pipeline: parse -> behavior-tree assembly ->
// interface lowering (+ global clock) -> validation -> translation (+ dismiss
// edges) -> property compilation -> network validation.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "netsmc/bt.hpp"
#include "netsmc/lowering.hpp"
#include "netsmc/scxml.hpp"
#include "netsmc/translate.hpp"

namespace netsmc {

struct BtManifest {
    std::string xmlPath;
    TickConfig tick;
    std::map<std::string, std::string> pluginPaths;  // plugin name -> file
    std::vector<DataDecl> blackboard;
};

struct SystemManifest {
    std::string name = "model";
    std::filesystem::path dir;
    std::vector<std::string> machinePaths;
    bool hasBt = false;
    BtManifest bt;
    ConstTable consts;
    std::vector<PropertySpec> properties;
    std::int64_t maxSteps = 10000;
    std::string outputPath;  // default target of `convert`

    std::filesystem::path resolve(const std::string& rel) const { return dir / rel; }
};

inline std::string readTextFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline SystemManifest loadManifest(const std::string& path) {
    using Json = nlohmann::json;
    std::filesystem::path p(path);
    std::string text = readTextFile(p);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw InputError(path + ": not valid JSON: " + e.what());
    }

    SystemManifest m;
    m.dir = p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
    try {
        m.name = j.value("name", "model");
        for (const auto& f : j.value("machines", Json::array())) {
            m.machinePaths.push_back(f.get<std::string>());
        }
        // Constants first: type bounds elsewhere in the manifest may use them.
        // (items() iterates a proxy; keep the object alive in a named local.)
        const Json constantsObj = j.value("constants", Json::object());
        for (const auto& [cname, cval] : constantsObj.items()) {
            if (cval.is_boolean()) {
                m.consts.emplace(cname, Value::boolean(cval.get<bool>()));
            } else if (cval.is_number_float()) {
                m.consts.emplace(cname, Value::real(cval.get<double>()));
            } else {
                m.consts.emplace(cname, Value::integer(cval.get<std::int64_t>()));
            }
        }
        if (j.contains("bt")) {
            m.hasBt = true;
            const Json& bt = j.at("bt");
            m.bt.xmlPath = bt.at("xml").get<std::string>();
            if (bt.contains("tick_rate_hz")) {
                const Json& r = bt.at("tick_rate_hz");
                m.bt.tick.rateHz = r.is_string() ? Rational::parse(r.get<std::string>())
                                                 : Rational(r.get<std::int64_t>());
            }
            m.bt.tick.policy =
                TickConfig::parsePolicy(bt.value("policy", std::string("tick-while-running")));
            const Json pluginsObj = bt.value("plugins", Json::object());
            for (const auto& [pname, pfile] : pluginsObj.items()) {
                m.bt.pluginPaths[pname] = pfile.get<std::string>();
            }
            for (const auto& key : bt.value("blackboard", Json::array())) {
                DataDecl d;
                d.id = key.at("name").get<std::string>();
                d.type = parseTypeString(key.at("type").get<std::string>(), {},
                                         [&](const std::string& n) -> std::optional<Value> {
                                             auto it = m.consts.find(n);
                                             if (it == m.consts.end()) {
                                                 return std::nullopt;
                                             }
                                             return it->second;
                                         });
                if (key.contains("init")) {
                    d.init = parseExpr(key.at("init").get<std::string>(), {},
                                       d.type.kind == TypeKind::IntArray);
                }
                m.bt.blackboard.push_back(std::move(d));
            }
        }
        m.maxSteps = j.value("max_steps", std::int64_t{10000});
        std::set<std::string> propNames;
        for (const auto& pj : j.value("properties", Json::array())) {
            PropertySpec spec;
            spec.name = pj.at("name").get<std::string>();
            spec.kind = pj.value("kind", std::string("until"));
            spec.lhs = pj.value("lhs", std::string());
            spec.rhs = pj.at("rhs").get<std::string>();
            spec.stepBound = pj.value("step_bound", m.maxSteps);
            if (!propNames.insert(spec.name).second) {
                throw InputError(path + ": duplicate property name '" + spec.name + "'");
            }
            m.properties.push_back(std::move(spec));
        }
        m.outputPath = j.value("output", std::string());
    } catch (const Json::exception& e) {
        throw InputError(path + ": malformed manifest: " + std::string(e.what()));
    }
    return m;
}

struct BuildResult {
    jani::Network net;
    EventRegistry registry;
    std::size_t machineCount = 0;    // machines entering translation
    std::size_t eventAutomata = 0;   // generated event automata
    DiagnosticList warnings;
};

/// Runs the full compilation pipeline on a manifest.
inline BuildResult buildNetwork(const SystemManifest& manifest) {
    BuildResult out;

    ConstTable consts = manifest.consts;
    addBuiltinConstants(consts);

    ParseOptions userOpts;
    userOpts.allowExtensions = true;
    userOpts.consts = consts;
    userOpts.externalNames = std::nullopt;  // cross-machine names resolve later

    std::vector<StateMachine> machines;
    for (const auto& rel : manifest.machinePaths) {
        auto path = manifest.resolve(rel);
        machines.push_back(parseScxml(readTextFile(path), path.string(), userOpts));
    }

    std::vector<EventSchema> schemas;
    DiagnosticList diags;

    if (manifest.hasBt) {
        std::map<std::string, StateMachine> plugins;
        std::set<std::string> pluginNames;
        for (const auto& [pname, pfile] : manifest.bt.pluginPaths) {
            auto path = manifest.resolve(pfile);
            ParseOptions pluginOpts = userOpts;
            pluginOpts.reservedPrefixCheck = false;  // placeholders bind to bt_ names
            plugins.emplace(pname, parseScxml(readTextFile(path), path.string(), pluginOpts));
            pluginNames.insert(pname);
        }
        auto btPath = manifest.resolve(manifest.bt.xmlPath);
        BTree tree = parseBtXml(readTextFile(btPath), btPath.string(), pluginNames);
        BtBuild bt = buildBtSystem(tree, manifest.bt.tick, plugins, manifest.bt.blackboard, diags);
        if (diags.hasErrors()) {
            throw InputError("behavior tree assembly failed:\n" + diags.str());
        }
        for (auto& m : bt.machines) {
            machines.push_back(std::move(m));
        }
        for (auto& s : bt.schemas) {
            schemas.push_back(std::move(s));
        }
    }

    LoweringResult lowered = lowerSystem(machines);
    if (lowered.diags.hasErrors()) {
        throw InputError("interface lowering failed:\n" + lowered.diags.str());
    }
    for (auto& s : lowered.schemas) {
        schemas.push_back(std::move(s));
    }

    DiagnosticList validation = validateSystem(machines, consts, schemas);
    if (validation.hasErrors()) {
        throw InputError("system validation failed:\n" + validation.str());
    }
    for (const auto& d : validation.all()) {
        out.warnings.warning(d.pos, d.message);
    }

    out.registry = buildEventRegistry(machines, schemas, consts);
    TranslationOptions topts;
    topts.modelName = manifest.name;
    topts.consts = consts;
    out.net = translateMachines(machines, out.registry, topts);
    addDismissEdges(out.net, out.registry);

    for (const auto& spec : manifest.properties) {
        PropertySpec bounded = spec;
        if (bounded.stepBound <= 0) {
            bounded.stepBound = manifest.maxSteps;
        }
        out.net.properties.push_back(compileProperty(bounded, out.net));
    }

    DiagnosticList netDiags = jani::validateNetwork(out.net);
    if (netDiags.hasErrors()) {
        throw EngineError("translated network failed validation:\n" + netDiags.str());
    }

    out.machineCount = machines.size();
    out.eventAutomata = out.net.automata.size() - machines.size();
    return out;
}

}  // namespace netsmc
