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

#include "netsmc/xml.hpp"

using namespace netsmc;

TEST(Xml, ParsesElementsAttributesAndText) {
    auto doc = xml::parse(R"(<?xml version="1.0"?>
<a x="1">
  <b y="two words"/>
  text
  <c>inner</c>
</a>)",
                          "t.xml");
    EXPECT_EQ(doc->name, "a");
    EXPECT_EQ(doc->attr("x"), "1");
    ASSERT_EQ(doc->children.size(), 2u);
    EXPECT_EQ(doc->children[0]->name, "b");
    EXPECT_EQ(doc->children[0]->attr("y"), "two words");
    EXPECT_EQ(doc->children[1]->text, "inner");
}

TEST(Xml, TracksPositions) {
    auto doc = xml::parse("<a>\n  <b attr=\"v\"/>\n</a>", "pos.xml");
    ASSERT_EQ(doc->children.size(), 1u);
    EXPECT_EQ(doc->children[0]->pos.line, 2u);
    EXPECT_EQ(doc->children[0]->pos.col, 3u);
    EXPECT_EQ(doc->children[0]->attrs[0].pos.line, 2u);
}

TEST(Xml, DecodesEntities) {
    auto doc = xml::parse("<a v=\"1 &lt; 2 &amp;&amp; x&#33;\">&quot;q&quot;</a>", "e.xml");
    EXPECT_EQ(doc->attr("v"), "1 < 2 && x!");
    EXPECT_EQ(doc->text, "\"q\"");
}

TEST(Xml, ResolvesNamespacePrefixes) {
    auto doc = xml::parse(
        "<root xmlns=\"urn:a\" xmlns:r=\"urn:b\"><r:item r:k=\"v\" plain=\"w\"/></root>", "ns.xml");
    EXPECT_EQ(doc->ns, "urn:a");
    ASSERT_EQ(doc->children.size(), 1u);
    const auto& item = *doc->children[0];
    EXPECT_EQ(item.ns, "urn:b");
    EXPECT_EQ(item.name, "item");
    EXPECT_TRUE(item.hasAttr("k", "urn:b"));
    EXPECT_TRUE(item.hasAttr("plain"));
}

TEST(Xml, RejectsMalformedInput) {
    EXPECT_THROW(xml::parse("<a><b></a>", "bad.xml"), InputError);
    EXPECT_THROW(xml::parse("<a", "bad.xml"), InputError);
    EXPECT_THROW(xml::parse("<a>&unknown;</a>", "bad.xml"), InputError);
    EXPECT_THROW(xml::parse("<p:a xmlns=\"u\"/>", "bad.xml"), InputError);
}

TEST(Xml, SkipsCommentsAndCdata) {
    auto doc = xml::parse("<a><!-- note --><![CDATA[x < y]]></a>", "c.xml");
    EXPECT_EQ(doc->text, "x < y");
}

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    return RUN_ALL_TESTS();
}
