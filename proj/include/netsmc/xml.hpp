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

// Small DOM-style XML reader. It covers the subset needed by the modeling
// formats handled here (elements, attributes, character data, comments,
// processing instructions, the five predefined entities, numeric character
// references, and namespace prefix resolution) and tracks line/column
// positions for every element and attribute so diagnostics can point at the
// offending input.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "netsmc/diag.hpp"

namespace netsmc::xml {

struct Attr {
    std::string ns;     // resolved namespace URI, empty for no namespace
    std::string name;   // local name
    std::string value;
    SourcePos pos;      // position of the attribute value
};

struct Element {
    std::string ns;    // resolved namespace URI
    std::string name;  // local name
    std::vector<Attr> attrs;
    std::vector<std::unique_ptr<Element>> children;
    std::string text;  // concatenated character data of this element
    SourcePos pos;

    const Attr* findAttr(const std::string& localName, const std::string& nsUri = "") const {
        for (const auto& a : attrs) {
            if (a.name == localName && a.ns == nsUri) {
                return &a;
            }
        }
        return nullptr;
    }

    std::string attr(const std::string& localName, const std::string& fallback = "") const {
        const Attr* a = findAttr(localName);
        return a != nullptr ? a->value : fallback;
    }

    bool hasAttr(const std::string& localName, const std::string& nsUri = "") const {
        return findAttr(localName, nsUri) != nullptr;
    }
};

class Parser {
  public:
    Parser(std::string_view text, std::string filename)
        : text_(text), file_(std::move(filename)) {}

    std::unique_ptr<Element> parse() {
        skipProlog();
        auto root = parseElement({});
        skipMisc();
        if (pos_ < text_.size()) {
            fail("trailing content after document element");
        }
        return root;
    }

  private:
    using NsScope = std::map<std::string, std::string>;  // prefix -> URI

    std::string_view text_;
    std::string file_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError(SourcePos{file_, line_, col_}, "XML: " + msg);
    }

    SourcePos here() const { return SourcePos{file_, line_, col_}; }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return eof() ? '\0' : text_[pos_]; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    bool consume(std::string_view s) {
        if (text_.compare(pos_, s.size(), s) != 0) {
            return false;
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            advance();
        }
        return true;
    }

    void skipWs() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n')) {
            advance();
        }
    }

    void skipUntil(std::string_view terminator) {
        while (!eof()) {
            if (consume(terminator)) {
                return;
            }
            advance();
        }
        fail("unterminated construct, expected '" + std::string(terminator) + "'");
    }

    void skipMisc() {
        for (;;) {
            skipWs();
            if (consume("<!--")) {
                skipUntil("-->");
            } else if (consume("<?")) {
                skipUntil("?>");
            } else {
                return;
            }
        }
    }

    void skipProlog() {
        for (;;) {
            skipWs();
            if (consume("<?")) {
                skipUntil("?>");
            } else if (consume("<!--")) {
                skipUntil("-->");
            } else if (consume("<!DOCTYPE")) {
                skipUntil(">");
            } else {
                return;
            }
        }
    }

    static bool isNameStart(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':';
    }
    static bool isNameChar(char c) {
        return isNameStart(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
    }

    std::string parseName() {
        if (eof() || !isNameStart(peek())) {
            fail("expected a name");
        }
        std::string name;
        while (!eof() && isNameChar(peek())) {
            name += advance();
        }
        return name;
    }

    std::string decodeEntity() {
        // caller consumed '&'
        std::string ent;
        while (!eof() && peek() != ';') {
            ent += advance();
        }
        if (eof()) {
            fail("unterminated entity reference");
        }
        advance();  // ';'
        if (ent == "lt") return "<";
        if (ent == "gt") return ">";
        if (ent == "amp") return "&";
        if (ent == "quot") return "\"";
        if (ent == "apos") return "'";
        if (!ent.empty() && ent[0] == '#') {
            long code = 0;
            try {
                code = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                           ? std::stol(ent.substr(2), nullptr, 16)
                           : std::stol(ent.substr(1), nullptr, 10);
            } catch (const std::exception&) {
                fail("bad character reference '&" + ent + ";'");
            }
            if (code <= 0 || code > 0x10FFFF) {
                fail("character reference out of range");
            }
            // UTF-8 encode
            std::string out;
            auto cp = static_cast<std::uint32_t>(code);
            if (cp < 0x80) {
                out += static_cast<char>(cp);
            } else if (cp < 0x800) {
                out += static_cast<char>(0xC0 | (cp >> 6));
                out += static_cast<char>(0x80 | (cp & 0x3F));
            } else if (cp < 0x10000) {
                out += static_cast<char>(0xE0 | (cp >> 12));
                out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                out += static_cast<char>(0x80 | (cp & 0x3F));
            } else {
                out += static_cast<char>(0xF0 | (cp >> 18));
                out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
                out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                out += static_cast<char>(0x80 | (cp & 0x3F));
            }
            return out;
        }
        fail("unknown entity '&" + ent + ";'");
    }

    std::string parseAttrValue() {
        char quote = peek();
        if (quote != '"' && quote != '\'') {
            fail("expected quoted attribute value");
        }
        advance();
        std::string value;
        while (!eof() && peek() != quote) {
            if (peek() == '&') {
                advance();
                value += decodeEntity();
            } else if (peek() == '<') {
                fail("'<' not allowed in attribute value");
            } else {
                value += advance();
            }
        }
        if (eof()) {
            fail("unterminated attribute value");
        }
        advance();
        return value;
    }

    static void splitQName(const std::string& qname, std::string& prefix, std::string& local) {
        auto colon = qname.find(':');
        if (colon == std::string::npos) {
            prefix.clear();
            local = qname;
        } else {
            prefix = qname.substr(0, colon);
            local = qname.substr(colon + 1);
        }
    }

    std::string resolveNs(const NsScope& scope, const std::string& prefix, const SourcePos& at,
                          bool isAttr) const {
        if (prefix.empty()) {
            if (isAttr) {
                return "";  // unprefixed attributes have no namespace
            }
            auto it = scope.find("");
            return it == scope.end() ? "" : it->second;
        }
        if (prefix == "xml") {
            return "http://www.w3.org/XML/1998/namespace";
        }
        auto it = scope.find(prefix);
        if (it == scope.end()) {
            throw InputError(at, "XML: undeclared namespace prefix '" + prefix + "'");
        }
        return it->second;
    }

    std::unique_ptr<Element> parseElement(NsScope scope) {
        skipWs();
        SourcePos start = here();
        if (!consume("<")) {
            fail("expected element");
        }
        std::string qname = parseName();

        struct RawAttr {
            std::string qname;
            std::string value;
            SourcePos pos;
        };
        std::vector<RawAttr> raw;
        bool selfClosing = false;
        for (;;) {
            skipWs();
            if (consume("/>")) {
                selfClosing = true;
                break;
            }
            if (consume(">")) {
                break;
            }
            SourcePos apos = here();
            std::string aname = parseName();
            skipWs();
            if (!consume("=")) {
                fail("expected '=' after attribute name");
            }
            skipWs();
            SourcePos vpos = here();
            std::string avalue = parseAttrValue();
            (void)apos;
            raw.push_back(RawAttr{std::move(aname), std::move(avalue), vpos});
        }

        // First pass: namespace declarations extend the scope for this subtree.
        for (const auto& a : raw) {
            if (a.qname == "xmlns") {
                scope[""] = a.value;
            } else if (a.qname.rfind("xmlns:", 0) == 0) {
                scope[a.qname.substr(6)] = a.value;
            }
        }

        auto elem = std::make_unique<Element>();
        elem->pos = start;
        std::string prefix;
        std::string local;
        splitQName(qname, prefix, local);
        elem->ns = resolveNs(scope, prefix, start, false);
        elem->name = local;

        for (const auto& a : raw) {
            if (a.qname == "xmlns" || a.qname.rfind("xmlns:", 0) == 0) {
                continue;
            }
            splitQName(a.qname, prefix, local);
            Attr attr;
            attr.ns = resolveNs(scope, prefix, a.pos, true);
            attr.name = local;
            attr.value = a.value;
            attr.pos = a.pos;
            elem->attrs.push_back(std::move(attr));
        }

        if (selfClosing) {
            return elem;
        }

        // Content
        for (;;) {
            if (eof()) {
                fail("unexpected end of input inside <" + qname + ">");
            }
            if (consume("<!--")) {
                skipUntil("-->");
                continue;
            }
            if (consume("<![CDATA[")) {
                while (!eof() && !consume("]]>")) {
                    elem->text += advance();
                }
                continue;
            }
            if (consume("<?")) {
                skipUntil("?>");
                continue;
            }
            if (text_.compare(pos_, 2, "</") == 0) {
                consume("</");
                std::string closing = parseName();
                if (closing != qname) {
                    fail("mismatched closing tag '</" + closing + ">' for <" + qname + ">");
                }
                skipWs();
                if (!consume(">")) {
                    fail("expected '>' in closing tag");
                }
                return elem;
            }
            if (peek() == '<') {
                elem->children.push_back(parseElement(scope));
                continue;
            }
            if (peek() == '&') {
                advance();
                elem->text += decodeEntity();
                continue;
            }
            elem->text += advance();
        }
    }
};

inline std::unique_ptr<Element> parse(std::string_view text, const std::string& filename) {
    return Parser(text, filename).parse();
}

/// Escapes the five predefined entities for use in attribute values or text.
inline std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace netsmc::xml
