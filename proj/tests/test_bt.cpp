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

#include <gtest/gtest.h>

#include "netsmc/bt.hpp"
#include "netsmc/exact.hpp"
#include "netsmc/smc.hpp"
#include "netsmc/translate.hpp"

using namespace netsmc;

namespace {

StateMachine parsePlugin(const std::string& text, const char* file) {
    ParseOptions opts;
    opts.allowExtensions = true;
    opts.externalNames = std::nullopt;
    opts.reservedPrefixCheck = false;
    addBuiltinConstants(opts.consts);
    return parseScxml(text, file, opts);
}

/// A leaf replying RUNNING for `runs` ticks, then `final` forever.
StateMachine scriptedLeaf(const std::string& finalStatus, int runs) {
    std::string doc = R"(<scxml name="scripted" initial="s" xmlns:bt="urn:netsmc:bt">
  <datamodel><data id="n" type="int[0,100]" expr="0"/></datamodel>
  <state id="s">
    <transition bt:trigger="tick" cond="n &lt; RUNS" target="s">
      <assign location="n" expr="n + 1"/>
      <bt:respond status="RUNNING"/>
    </transition>
    <transition bt:trigger="tick" cond="n &gt;= RUNS" target="s">
      <bt:respond status="FINAL"/>
    </transition>
  </state>
</scxml>)";
    doc.replace(doc.find("RUNS"), 4, std::to_string(runs));
    doc.replace(doc.find("RUNS"), 4, std::to_string(runs));
    doc.replace(doc.find("FINAL"), 5, finalStatus);
    return parsePlugin(doc, "scripted.scxml");
}

struct BuiltSystem {
    std::vector<StateMachine> machines;
    EventRegistry registry;
    jani::Network net;
};

BuiltSystem assemble(const std::string& treeXml,
                     const std::map<std::string, StateMachine>& plugins,
                     const TickConfig& cfg, const std::vector<DataDecl>& blackboard = {}) {
    std::set<std::string> names;
    for (const auto& [n, _] : plugins) {
        names.insert(n);
    }
    BTree tree = parseBtXml(treeXml, "tree.xml", names);
    DiagnosticList diags;
    BtBuild bt = buildBtSystem(tree, cfg, plugins, blackboard, diags);
    EXPECT_FALSE(diags.hasErrors()) << diags.str();

    BuiltSystem out;
    out.machines = std::move(bt.machines);
    LoweringResult lowered = lowerSystem(out.machines);
    EXPECT_FALSE(lowered.diags.hasErrors()) << lowered.diags.str();
    std::vector<EventSchema> schemas = std::move(bt.schemas);
    for (auto& s : lowered.schemas) {
        schemas.push_back(std::move(s));
    }
    ConstTable consts;
    addBuiltinConstants(consts);
    DiagnosticList v = validateSystem(out.machines, consts, schemas);
    EXPECT_FALSE(v.hasErrors()) << v.str();
    out.registry = buildEventRegistry(out.machines, schemas, consts);
    TranslationOptions topts;
    topts.consts = consts;
    out.net = translateMachines(out.machines, out.registry, topts);
    addDismissEdges(out.net, out.registry);
    DiagnosticList nv = jani::validateNetwork(out.net);
    EXPECT_FALSE(nv.hasErrors()) << nv.str();
    return out;
}

double exactEventually(const jani::Network& net, const std::string& rhs,
                       std::int64_t steps = 4000) {
    jani::Property prop = compileProperty(PropertySpec{"q", "eventually", "", rhs, steps}, net);
    engine::CompiledNetwork compiled(net);
    return exact::exactProbability(compiled, prop, steps);
}

std::size_t countTicksTo(const BuiltSystem& sys, const std::string& nodeId,
                         std::uint64_t seed = 1, std::int64_t steps = 2000) {
    engine::CompiledNetwork compiled(sys.net);
    smc::Trace t = smc::sampleTrace(compiled, engine::SplitMix64::forTrace(seed, 0), steps);
    std::string prefix = translate_detail::sanitizeSymbol(btTickEvent(nodeId)) + "_send";
    std::size_t n = 0;
    for (const auto& s : t.steps) {
        n += s.action.rfind(prefix, 0) == 0 ? 1 : 0;
    }
    return n;
}

const char* kCaseStudyShapeTree = R"(<root BTCPP_format="4">
  <BehaviorTree ID="MainTree">
    <Fallback name="mission">
      <Sequence name="move_seq">
        <Inverter><Condition ID="IsBlockFell"/></Inverter>
        <Action ID="MoveBlock"/>
      </Sequence>
      <Action ID="RecoverBlock"/>
    </Fallback>
  </BehaviorTree>
</root>)";

}  // namespace

TEST(BtParse, CaseStudyShapedTree) {
    std::set<std::string> plugins{"IsBlockFell", "MoveBlock", "RecoverBlock"};
    BTree tree = parseBtXml(kCaseStudyShapeTree, "tree.xml", plugins);
    std::size_t leaves = 0;
    std::set<std::string> leafPlugins;
    for (const auto& n : tree.nodes) {
        if (n.isLeaf()) {
            ++leaves;
            leafPlugins.insert(n.pluginName);
        }
    }
    EXPECT_EQ(leaves, 3u);
    EXPECT_EQ(leafPlugins, plugins);
    EXPECT_EQ(tree.nodes[tree.root].kind, BTNode::Kind::Fallback);
    EXPECT_EQ(tree.nodes[tree.root].id, "mission");
}

TEST(BtParse, SingleLeafTree) {
    BTree tree = parseBtXml(
        "<root><BehaviorTree ID=\"T\"><Action ID=\"Solo\"/></BehaviorTree></root>", "t.xml",
        {"Solo"});
    EXPECT_EQ(tree.nodes.size(), 1u);
    EXPECT_TRUE(tree.nodes[tree.root].isLeaf());
}

TEST(BtParse, MissingPluginIsAnError) {
    try {
        parseBtXml("<root><BehaviorTree><Action ID=\"Nobody\"/></BehaviorTree></root>", "t.xml",
                   {"Somebody"});
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("Nobody"), std::string::npos);
    }
}

TEST(BtParse, UnknownControlTagIsAnError) {
    EXPECT_THROW(parseBtXml("<root><BehaviorTree><Parallel><Action ID=\"A\"/></Parallel>"
                            "</BehaviorTree></root>",
                            "t.xml", {"A"}),
                 InputError);
}

TEST(BtParse, DuplicateLeafUsesGetDistinctIds) {
    BTree tree = parseBtXml(R"(<root><BehaviorTree><Sequence>
        <Action ID="Step"/><Action ID="Step"/>
      </Sequence></BehaviorTree></root>)",
                            "t.xml", {"Step"});
    std::set<std::string> ids;
    for (const auto& n : tree.nodes) {
        EXPECT_TRUE(ids.insert(n.id).second) << n.id;
    }
}

TEST(BtDriver, TickWhileRunningStopsAfterFirstDecision) {
    // Scripted root: RUNNING, RUNNING, SUCCESS -> exactly 3 ticks sent and
    // the final status recorded.
    std::map<std::string, StateMachine> plugins{{"Root", scriptedLeaf("SUCCESS", 2)}};
    TickConfig cfg;
    cfg.policy = TickConfig::Policy::TickWhileRunning;
    BuiltSystem sys = assemble(
        "<root><BehaviorTree><Action ID=\"Root\"/></BehaviorTree></root>", plugins, cfg);
    EXPECT_EQ(countTicksTo(sys, "Root"), 3u);
    EXPECT_NEAR(exactEventually(sys.net, "bt_status == BT_SUCCESS"), 1.0, 1e-9);
}

TEST(BtDriver, TickOnceTicksExactlyOnce) {
    std::map<std::string, StateMachine> plugins{{"Root", scriptedLeaf("SUCCESS", 2)}};
    TickConfig cfg;
    cfg.policy = TickConfig::Policy::TickOnce;
    BuiltSystem sys = assemble(
        "<root><BehaviorTree><Action ID=\"Root\"/></BehaviorTree></root>", plugins, cfg);
    EXPECT_EQ(countTicksTo(sys, "Root"), 1u);
    EXPECT_NEAR(exactEventually(sys.net, "bt_status == BT_RUNNING"), 1.0, 1e-9);
}

TEST(BtDriver, TickForeverKeepsTicking) {
    std::map<std::string, StateMachine> plugins{{"Root", scriptedLeaf("SUCCESS", 2)}};
    TickConfig cfg;
    cfg.policy = TickConfig::Policy::TickForever;
    BuiltSystem sys = assemble(
        "<root><BehaviorTree><Action ID=\"Root\"/></BehaviorTree></root>", plugins, cfg);
    EXPECT_GT(countTicksTo(sys, "Root"), 10u);
}

TEST(BtNodes, InverterSwapsOutcomes) {
    std::map<std::string, StateMachine> plugins{{"Yes", scriptedLeaf("SUCCESS", 0)}};
    TickConfig cfg;
    BuiltSystem sys = assemble(
        "<root><BehaviorTree><Inverter><Action ID=\"Yes\"/></Inverter></BehaviorTree></root>",
        plugins, cfg);
    EXPECT_NEAR(exactEventually(sys.net, "bt_status == BT_FAILURE"), 1.0, 1e-9);

    std::map<std::string, StateMachine> plugins2{{"No", scriptedLeaf("FAILURE", 0)}};
    BuiltSystem sys2 = assemble(
        "<root><BehaviorTree><Inverter><Action ID=\"No\"/></Inverter></BehaviorTree></root>",
        plugins2, cfg);
    EXPECT_NEAR(exactEventually(sys2.net, "bt_status == BT_SUCCESS"), 1.0, 1e-9);
}

TEST(BtNodes, SequenceDoesNotRetickEarlierChildren) {
    // Child A always succeeds instantly; child B runs twice then succeeds.
    // With a memory Sequence, A is ticked exactly once.
    std::map<std::string, StateMachine> plugins{{"A", scriptedLeaf("SUCCESS", 0)},
                                                {"B", scriptedLeaf("SUCCESS", 2)}};
    TickConfig cfg;
    BuiltSystem sys = assemble(R"(<root><BehaviorTree><Sequence>
        <Action ID="A"/><Action ID="B"/>
      </Sequence></BehaviorTree></root>)",
                               plugins, cfg);
    EXPECT_EQ(countTicksTo(sys, "A"), 1u);
    EXPECT_EQ(countTicksTo(sys, "B"), 3u);
    EXPECT_NEAR(exactEventually(sys.net, "bt_status == BT_SUCCESS"), 1.0, 1e-9);
}

TEST(BtNodes, ReactiveSequenceReticksEarlierChildrenEveryTick) {
    std::map<std::string, StateMachine> plugins{{"A", scriptedLeaf("SUCCESS", 0)},
                                                {"B", scriptedLeaf("SUCCESS", 2)}};
    TickConfig cfg;
    BuiltSystem sys = assemble(R"(<root><BehaviorTree><ReactiveSequence>
        <Action ID="A"/><Action ID="B"/>
      </ReactiveSequence></BehaviorTree></root>)",
                               plugins, cfg);
    EXPECT_EQ(countTicksTo(sys, "A"), 3u);
    EXPECT_EQ(countTicksTo(sys, "B"), 3u);
    EXPECT_NEAR(exactEventually(sys.net, "bt_status == BT_SUCCESS"), 1.0, 1e-9);
}

TEST(BtNodes, SequenceAndReactiveSequenceAgreeOnStaticChildren) {
    // When no child's answer ever changes, both sequence flavors drive the
    // root to the same final status.
    for (const char* status : {"SUCCESS", "FAILURE"}) {
        std::map<std::string, StateMachine> plugins{{"A", scriptedLeaf("SUCCESS", 0)},
                                                    {"B", scriptedLeaf(status, 0)}};
        TickConfig cfg;
        BuiltSystem plain = assemble(R"(<root><BehaviorTree><Sequence>
            <Action ID="A"/><Action ID="B"/>
          </Sequence></BehaviorTree></root>)",
                                     plugins, cfg);
        BuiltSystem reactive = assemble(R"(<root><BehaviorTree><ReactiveSequence>
            <Action ID="A"/><Action ID="B"/>
          </ReactiveSequence></BehaviorTree></root>)",
                                        plugins, cfg);
        std::string expect = std::string("bt_status == BT_") + status;
        EXPECT_NEAR(exactEventually(plain.net, expect), 1.0, 1e-9);
        EXPECT_NEAR(exactEventually(reactive.net, expect), 1.0, 1e-9);
    }
}

TEST(BtNodes, FallbackTriesChildrenUntilOneSucceeds) {
    std::map<std::string, StateMachine> plugins{{"Bad", scriptedLeaf("FAILURE", 0)},
                                                {"Good", scriptedLeaf("SUCCESS", 0)}};
    TickConfig cfg;
    BuiltSystem sys = assemble(R"(<root><BehaviorTree><Fallback>
        <Action ID="Bad"/><Action ID="Good"/>
      </Fallback></BehaviorTree></root>)",
                               plugins, cfg);
    EXPECT_EQ(countTicksTo(sys, "Bad"), 1u);
    EXPECT_EQ(countTicksTo(sys, "Good"), 1u);
    EXPECT_NEAR(exactEventually(sys.net, "bt_status == BT_SUCCESS"), 1.0, 1e-9);
}

TEST(BtNodes, DepthFirstTickDiscipline) {
    // Between a node's tick and its response, at most one child tick is in
    // flight: scanned over a sampled trace of the nested tree.
    std::map<std::string, StateMachine> plugins{{"A", scriptedLeaf("SUCCESS", 1)},
                                                {"B", scriptedLeaf("SUCCESS", 2)}};
    TickConfig cfg;
    BuiltSystem sys = assemble(R"(<root><BehaviorTree><Sequence name="seq">
        <Action ID="A"/><Action ID="B"/>
      </Sequence></BehaviorTree></root>)",
                               plugins, cfg);
    engine::CompiledNetwork compiled(sys.net);
    smc::Trace t = smc::sampleTrace(compiled, engine::SplitMix64::forTrace(4, 0), 2000);
    int inFlight = 0;
    for (const auto& s : t.steps) {
        for (const char* node : {"A", "B"}) {
            std::string tick = translate_detail::sanitizeSymbol(btTickEvent(node)) + "_send";
            std::string resp = translate_detail::sanitizeSymbol(btResponseEvent(node)) + "_send";
            if (s.action.rfind(tick, 0) == 0) {
                ++inFlight;
            }
            if (s.action.rfind(resp, 0) == 0) {
                --inFlight;
            }
        }
        EXPECT_LE(inFlight, 1);
        EXPECT_GE(inFlight, 0);
    }
}

TEST(Blackboard, WriterAndReaderRoundTrip) {
    // Writer stores 7 into `target`, then succeeds; reader fetches it into a
    // global through its own port. Four events per (key, node) pair.
    const char* writer = R"(<scxml name="w" initial="s" xmlns:bt="urn:netsmc:bt">
  <state id="s">
    <transition bt:trigger="tick" target="s">
      <bt:bb-set port="out" expr="7"/>
      <bt:respond status="SUCCESS"/>
    </transition>
  </state>
</scxml>)";
    const char* reader = R"(<scxml name="r" initial="s" xmlns:bt="urn:netsmc:bt">
  <datamodel><data id="seen" type="int[0,9]" expr="0" global="true"/></datamodel>
  <state id="s">
    <transition bt:trigger="tick" target="s">
      <bt:bb-get port="in"/>
      <assign location="seen" expr="_event.value"/>
      <bt:respond status="SUCCESS"/>
    </transition>
  </state>
</scxml>)";
    std::map<std::string, StateMachine> plugins{{"Writer", parsePlugin(writer, "w.scxml")},
                                                {"Reader", parsePlugin(reader, "r.scxml")}};
    DataDecl key;
    key.id = "target";
    key.type = Type::integer(0, 9);
    key.init = Expr::integer(0);
    TickConfig cfg;
    BuiltSystem sys = assemble(R"(<root><BehaviorTree><Sequence>
        <Action ID="Writer" out="{target}"/>
        <Action ID="Reader" in="{target}"/>
      </Sequence></BehaviorTree></root>)",
                               plugins, cfg, {key});

    // set, set-ack, get, get-reply for the two accesses.
    EXPECT_NE(sys.registry.find("bt_bb.set.target.bt_Writer"), nullptr);
    EXPECT_NE(sys.registry.find("bt_bb.set_ack.target.bt_Writer"), nullptr);
    EXPECT_NE(sys.registry.find("bt_bb.get.target.bt_Reader"), nullptr);
    EXPECT_NE(sys.registry.find("bt_bb.get_reply.target.bt_Reader"), nullptr);

    EXPECT_NEAR(exactEventually(sys.net, "seen == 7"), 1.0, 1e-9);
    // The manager's store is observable as a hoisted global.
    EXPECT_NEAR(exactEventually(sys.net, "bb_target == 7"), 1.0, 1e-9);
}

TEST(Blackboard, EmptyDeclarationEmitsNoManager) {
    std::map<std::string, StateMachine> plugins{{"Root", scriptedLeaf("SUCCESS", 0)}};
    TickConfig cfg;
    BuiltSystem sys = assemble(
        "<root><BehaviorTree><Action ID=\"Root\"/></BehaviorTree></root>", plugins, cfg);
    for (const auto& m : sys.machines) {
        EXPECT_NE(m.name, "bt_bb");
    }
}

TEST(Blackboard, LastWriteWins) {
    const char* writerTmpl = R"(<scxml name="w" initial="s" xmlns:bt="urn:netsmc:bt">
  <state id="s">
    <transition bt:trigger="tick" target="s">
      <bt:bb-set port="out" expr="VAL"/>
      <bt:respond status="SUCCESS"/>
    </transition>
  </state>
</scxml>)";
    auto writer = [&](const char* val) {
        std::string doc = writerTmpl;
        doc.replace(doc.find("VAL"), 3, val);
        return parsePlugin(doc, "w.scxml");
    };
    std::map<std::string, StateMachine> plugins{{"First", writer("3")}, {"Second", writer("5")}};
    DataDecl key;
    key.id = "slot";
    key.type = Type::integer(0, 9);
    key.init = Expr::integer(0);
    TickConfig cfg;
    cfg.policy = TickConfig::Policy::TickOnce;
    BuiltSystem sys = assemble(R"(<root><BehaviorTree><Sequence>
        <Action ID="First" out="{slot}"/>
        <Action ID="Second" out="{slot}"/>
      </Sequence></BehaviorTree></root>)",
                               plugins, cfg, {key});
    // Sequence order fixes the write order: 3 then 5, and 5 survives.
    EXPECT_NEAR(exactEventually(sys.net, "bb_slot == 5"), 1.0, 1e-9);
}

TEST(Blackboard, UndeclaredKeyRejected) {
    const char* writer = R"(<scxml name="w" initial="s" xmlns:bt="urn:netsmc:bt">
  <state id="s">
    <transition bt:trigger="tick" target="s">
      <bt:bb-set port="out" expr="1"/>
      <bt:respond status="SUCCESS"/>
    </transition>
  </state>
</scxml>)";
    std::map<std::string, StateMachine> plugins{{"W", parsePlugin(writer, "w.scxml")}};
    BTree tree = parseBtXml(
        "<root><BehaviorTree><Action ID=\"W\" out=\"{nowhere}\"/></BehaviorTree></root>", "t.xml",
        {"W"});
    DiagnosticList diags;
    TickConfig cfg;
    buildBtSystem(tree, cfg, plugins, {}, diags);
    ASSERT_TRUE(diags.hasErrors());
    EXPECT_NE(diags.str().find("undeclared key"), std::string::npos);
}

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    return RUN_ALL_TESTS();
}
