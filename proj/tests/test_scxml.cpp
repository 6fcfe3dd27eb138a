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

#include "netsmc/scxml.hpp"

using namespace netsmc;

namespace {

// Two machines exchanging events: m1 emits e1 (no receiver) on its way to s1
// and e2 on the way back; m2 consumes e2 in a self-loop.
const char* kM1 = R"(<scxml xmlns="http://www.w3.org/2005/07/scxml" version="1.0" name="m1" initial="s0">
  <state id="s0">
    <transition target="s1">
      <send event="e1"/>
    </transition>
  </state>
  <state id="s1">
    <transition target="s0">
      <send event="e2"/>
    </transition>
  </state>
</scxml>)";

const char* kM2 = R"(<scxml xmlns="http://www.w3.org/2005/07/scxml" version="1.0" name="m2" initial="s0">
  <state id="s0">
    <transition event="e2" target="s0"/>
  </state>
</scxml>)";

}  // namespace

TEST(ScxmlParse, TwoStateMachine) {
    StateMachine m = parseScxml(kM1, "m1.scxml");
    EXPECT_EQ(m.name, "m1");
    EXPECT_EQ(m.states.size(), 2u);
    EXPECT_EQ(m.transitionCount(), 2u);
    EXPECT_EQ(m.initial, "s0");
    ASSERT_EQ(m.states[0].transitions.size(), 1u);
    const auto& t = m.states[0].transitions[0];
    EXPECT_TRUE(t.trigger.none());
    ASSERT_EQ(t.body.size(), 1u);
    EXPECT_EQ(t.body[0].kind, OpKind::Send);
    EXPECT_EQ(t.body[0].target, "e1");
}

TEST(ScxmlParse, MinimalMachine) {
    StateMachine m = parseScxml(
        "<scxml name=\"solo\" initial=\"only\"><state id=\"only\"/></scxml>", "solo.scxml");
    EXPECT_EQ(m.states.size(), 1u);
    EXPECT_EQ(m.transitionCount(), 0u);
    EXPECT_TRUE(m.data.empty());
}

TEST(ScxmlParse, UndeclaredVariableInCondition) {
    const char* doc = R"(<scxml name="bad" initial="s0">
  <state id="s0">
    <transition cond="x > 1" target="s0"/>
  </state>
</scxml>)";
    try {
        parseScxml(doc, "bad.scxml");
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("'x'"), std::string::npos) << msg;
        EXPECT_NE(msg.find("bad.scxml:3"), std::string::npos) << msg;
    }
}

TEST(ScxmlParse, DuplicateStateId) {
    const char* doc = R"(<scxml name="dup" initial="s0">
  <state id="s0"/>
  <state id="s0"/>
</scxml>)";
    EXPECT_THROW(parseScxml(doc, "dup.scxml"), InputError);
}

TEST(ScxmlParse, RejectsUnsupportedElements) {
    EXPECT_THROW(parseScxml("<scxml name=\"p\" initial=\"a\"><parallel id=\"a\"/></scxml>", "p.scxml"),
                 InputError);
    EXPECT_THROW(parseScxml(R"(<scxml name="p" initial="a">
  <state id="a"><invoke/></state></scxml>)",
                            "p.scxml"),
                 InputError);
    // Extended constructs are unknown elements in plain mode.
    EXPECT_THROW(parseScxml(R"(<scxml name="p" initial="a" xmlns:ros="urn:netsmc:ros">
  <ros:timer name="t" rate_hz="1"/><state id="a"/></scxml>)",
                            "p.scxml"),
                 InputError);
}

TEST(ScxmlParse, ReservedPrefixesRejected) {
    EXPECT_THROW(parseScxml(R"(<scxml name="p" initial="a">
  <state id="a"><transition target="a"><send event="ros_fake"/></transition></state></scxml>)",
                            "p.scxml"),
                 InputError);
    EXPECT_THROW(parseScxml(R"(<scxml name="p" initial="a">
  <state id="a"><transition event="bt_x" target="a"/></state></scxml>)",
                            "p.scxml"),
                 InputError);
}

TEST(ScxmlParse, ProbabilisticBranches) {
    const char* doc = R"(<scxml name="coin" initial="s0">
  <datamodel><data id="heads" type="bool" expr="false"/></datamodel>
  <state id="s0">
    <transition>
      <branch prob="1/2" target="s1"><assign location="heads" expr="true"/></branch>
      <branch prob="1/2" target="s2"/>
    </transition>
  </state>
  <state id="s1"/>
  <state id="s2"/>
</scxml>)";
    StateMachine m = parseScxml(doc, "coin.scxml");
    const auto& t = m.states[0].transitions[0];
    ASSERT_EQ(t.branches.size(), 2u);
    EXPECT_EQ(t.branches[0].weight, Rational(1, 2));
    EXPECT_EQ(t.branches[0].body.size(), 1u);
    EXPECT_TRUE(t.target.empty());
}

TEST(ScxmlParse, DocumentOrderPreserved) {
    const char* doc = R"(<scxml name="ord" initial="s0">
  <datamodel><data id="k" type="int[0,9]" expr="0"/></datamodel>
  <state id="s0">
    <transition cond="k == 3" target="s1"/>
    <transition cond="k == 1" target="s2"/>
    <transition target="s0"/>
  </state>
  <state id="s1"/>
  <state id="s2"/>
</scxml>)";
    StateMachine m = parseScxml(doc, "ord.scxml");
    ASSERT_EQ(m.states[0].transitions.size(), 3u);
    EXPECT_EQ(m.states[0].transitions[0].target, "s1");
    EXPECT_EQ(m.states[0].transitions[1].target, "s2");
    EXPECT_EQ(m.states[0].transitions[2].target, "s0");
}

TEST(ScxmlRoundTrip, ParseSerializeParse) {
    const char* docs[] = {kM1, kM2, R"(<scxml name="rt" initial="a">
  <datamodel>
    <data id="n" type="int[0,100]" expr="5"/>
    <data id="flag" type="bool" expr="false" global="true"/>
    <data id="buf" type="array[2] of int[0,9]" expr="[1, 2]"/>
  </datamodel>
  <state id="a">
    <onentry><assign location="n" expr="n + 1"/></onentry>
    <onexit><assign location="buf[0]" expr="n % 10"/></onexit>
    <transition event="go" cond="_event.v > 0 &amp;&amp; n &lt; 100" target="b">
      <assign location="n" expr="_event.v"/>
      <send event="done"><param name="v" expr="n * 2"/></send>
    </transition>
  </state>
  <state id="b">
    <transition>
      <branch prob="1/3" target="a"/>
      <branch prob="2/3" target="b"><assign location="flag" expr="true"/></branch>
    </transition>
  </state>
</scxml>)"};
    ParseOptions opts;
    opts.externalNames = std::nullopt;  // round-trip shape check only
    for (const char* doc : docs) {
        StateMachine m1 = parseScxml(doc, "rt.scxml", opts);
        std::string text = serializeScxml(m1);
        StateMachine m2 = parseScxml(text, "rt2.scxml", opts);
        EXPECT_TRUE(m1 == m2) << text;
        // Serialization itself is stable.
        EXPECT_EQ(text, serializeScxml(m2));
    }
}

TEST(ValidateSystem, CleanPair) {
    std::vector<StateMachine> ms{parseScxml(kM1, "m1.scxml"), parseScxml(kM2, "m2.scxml")};
    DiagnosticList d = validateSystem(ms);
    EXPECT_TRUE(d.empty()) << d.str();
}

TEST(ValidateSystem, ConflictingPayloadSchemas) {
    const char* a = R"(<scxml name="a" initial="s">
  <state id="s"><transition target="s"><send event="e"><param name="v" expr="1"/></send></transition></state>
</scxml>)";
    const char* b = R"(<scxml name="b" initial="s">
  <state id="s"><transition target="s"><send event="e"><param name="v" expr="true"/></send></transition></state>
</scxml>)";
    std::vector<StateMachine> ms{parseScxml(a, "a.scxml"), parseScxml(b, "b.scxml")};
    DiagnosticList d = validateSystem(ms);
    ASSERT_FALSE(d.empty());
    EXPECT_EQ(d.size(), 1u);
    EXPECT_NE(d.all()[0].message.find("conflicting"), std::string::npos);
}

TEST(ValidateSystem, MissingInitialState) {
    StateMachine m = parseScxml(kM2, "m2.scxml");
    m.initial = "nowhere";
    DiagnosticList d = validateSystem({m});
    ASSERT_FALSE(d.empty());
    EXPECT_EQ(d.size(), 1u);
}

TEST(ValidateSystem, GlobalOwnership) {
    const char* owner = R"(<scxml name="owner" initial="s">
  <datamodel><data id="g" type="int[0,9]" expr="0" global="true"/></datamodel>
  <state id="s"><transition target="s"><assign location="g" expr="g + 1"/></transition></state>
</scxml>)";
    const char* writerDoc = R"(<scxml name="writer" initial="s">
  <state id="s"><transition target="s"><assign location="g" expr="0"/></transition></state>
</scxml>)";
    const char* readerDoc = R"(<scxml name="reader" initial="s">
  <datamodel><data id="seen" type="int[0,9]" expr="0"/></datamodel>
  <state id="s"><transition cond="g > 2" target="s"><assign location="seen" expr="g"/></transition></state>
</scxml>)";
    ParseOptions opts;
    opts.externalNames = std::set<std::string>{"g"};
    auto mOwner = parseScxml(owner, "o.scxml");
    auto mWriter = parseScxml(writerDoc, "w.scxml", opts);
    auto mReader = parseScxml(readerDoc, "r.scxml", opts);

    DiagnosticList ok = validateSystem({mOwner, mReader});
    EXPECT_TRUE(ok.empty()) << ok.str();

    DiagnosticList bad = validateSystem({mOwner, mWriter});
    ASSERT_FALSE(bad.empty());
    EXPECT_NE(bad.all()[0].message.find("owned by"), std::string::npos);
}

TEST(ValidateSystem, PayloadRefsRequireTrigger) {
    const char* doc = R"(<scxml name="p" initial="s">
  <datamodel><data id="x" type="int[0,9]" expr="0"/></datamodel>
  <state id="s">
    <transition cond="_event.v > 0" target="s"/>
  </state>
</scxml>)";
    StateMachine m = parseScxml(doc, "p.scxml");
    DiagnosticList d = validateSystem({m});
    ASSERT_FALSE(d.empty());
    EXPECT_NE(d.all()[0].message.find("_event"), std::string::npos);
}

TEST(ValidateSystem, OnentryPayloadRefsRejected) {
    const char* doc = R"(<scxml name="p" initial="s">
  <datamodel><data id="x" type="int[0,9]" expr="0"/></datamodel>
  <state id="s">
    <onentry><assign location="x" expr="_event.v"/></onentry>
    <transition event="e" target="s"/>
  </state>
</scxml>)";
    StateMachine m = parseScxml(doc, "p.scxml");
    DiagnosticList d = validateSystem({m});
    EXPECT_FALSE(d.empty());
}

TEST(ValidateSystem, BranchWeightsMustSumToOne) {
    const char* doc = R"(<scxml name="w" initial="s0">
  <state id="s0">
    <transition>
      <branch prob="1/2" target="s0"/>
      <branch prob="1/3" target="s0"/>
    </transition>
  </state>
</scxml>)";
    StateMachine m = parseScxml(doc, "w.scxml");
    DiagnosticList d = validateSystem({m});
    ASSERT_FALSE(d.empty());
    EXPECT_NE(d.all()[0].message.find("sum"), std::string::npos);
}

TEST(ValidateSystem, InitializerBounds) {
    const char* doc = R"(<scxml name="ib" initial="s">
  <datamodel><data id="x" type="int[0,5]" expr="9"/></datamodel>
  <state id="s"/>
</scxml>)";
    StateMachine m = parseScxml(doc, "ib.scxml");
    DiagnosticList d = validateSystem({m});
    ASSERT_FALSE(d.empty());
    EXPECT_NE(d.all()[0].message.find("bounds"), std::string::npos);
}

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    return RUN_ALL_TESTS();
}
